"""The Stack semiring: unary flows as pairs of symbol sequences.

A stack operation ``StackOp(push, pop)`` stands for the flow
``push(x) <- pop(x)``: read as a rewrite it pops the symbols of ``pop`` off
the top of a stack and pushes those of ``push``.  A stack wiring is a
``frozenset`` of operations.

Products are computed on the sequences directly (prefix comparison); the
results agree with :func:`unilog.semiring.flow_product` on the term
embedding given by :func:`to_flow`.
"""
from __future__ import annotations

import graphlib
import itertools
import logging
from typing import Iterable, Iterator, NamedTuple, Optional

from . import term as T
from .semiring import Flow, Wiring

log = logging.getLogger(__name__)

Seq = tuple[str, ...]


class StackOp(NamedTuple):
    push: Seq
    pop: Seq

    @property
    def height(self) -> int:
        return max(len(self.push), len(self.pop))

    @property
    def size(self) -> int:
        return len(self.push) + len(self.pop)

    @property
    def increasing(self) -> bool:
        return len(self.push) >= len(self.pop)

    @property
    def decreasing(self) -> bool:
        return len(self.push) <= len(self.pop)

    def is_cycle(self) -> bool:
        n = min(len(self.push), len(self.pop))
        return self.push[:n] == self.pop[:n]

    def dagger(self) -> "StackOp":
        return StackOp(self.pop, self.push)

    def __mul__(self, other: "StackOp") -> Optional["StackOp"]:
        return compose(self, other)

    def __str__(self):
        return f"{_seq_text(self.push)} <- {_seq_text(self.pop)}"


StackWiring = frozenset  # of StackOp


def op(push: Iterable[str] | str = (), pop: Iterable[str] | str = ()) -> StackOp:
    """``op("f g", "h")`` is f(g(x)) <- h(x); strings are split on spaces."""
    if isinstance(push, str):
        push = push.split()
    if isinstance(pop, str):
        pop = pop.split()
    return StackOp(tuple(push), tuple(pop))


def _seq_text(seq: Seq, var: str = "X") -> str:
    return T.to_text(T.unary_chain(seq, T.Var(var)))


def compose(f: StackOp, g: StackOp) -> Optional[StackOp]:
    """Product ``f g``: g's push side must be prefix-compatible with f's pop."""
    sigma, rho = f.pop, g.push
    if len(sigma) >= len(rho):
        if sigma[: len(rho)] != rho:
            return None
        return StackOp(f.push, g.pop + sigma[len(rho):])
    if rho[: len(sigma)] != sigma:
        return None
    return StackOp(f.push + rho[len(sigma):], g.pop)


def product(F: Iterable[StackOp], G: Iterable[StackOp]) -> frozenset:
    G = tuple(G)
    out = set()
    for f in F:
        for g in G:
            fg = compose(f, g)
            if fg is not None:
                out.add(fg)
    return frozenset(out)


def power(F: frozenset, n: int) -> frozenset:
    out = F
    for _ in range(n - 1):
        out = product(out, F)
    return out


def seq_product(ops: Iterable[StackOp]) -> Optional[StackOp]:
    it = iter(ops)
    acc = next(it)
    for g in it:
        acc = compose(acc, g)
        if acc is None:
            return None
    return acc


def height(F: Iterable[StackOp]) -> int:
    return max((f.height for f in F), default=0)


def size(F: Iterable[StackOp]) -> int:
    return sum(f.size for f in F)


def symbols(F: Iterable[StackOp]) -> set[str]:
    out: set[str] = set()
    for f in F:
        out.update(f.push)
        out.update(f.pop)
    return out


def dagger(F: Iterable[StackOp]) -> frozenset:
    return frozenset(f.dagger() for f in F)


# -- term embedding --------------------------------------------------------

def to_flow(f: StackOp) -> Flow:
    x = T.Var("X0")
    return Flow(T.unary_chain(f.push, x), T.unary_chain(f.pop, x), check=False)


def to_wiring(F: Iterable[StackOp]) -> Wiring:
    return Wiring(to_flow(f) for f in F)


class NotUnary(ValueError):
    pass


def from_flow(f: Flow) -> StackOp:
    push, hb = T.unary_spine(f.head)
    pop, bb = T.unary_spine(f.body)
    if not isinstance(bb, T.Var) or not isinstance(hb, T.Var):
        raise NotUnary(f"not a unary flow: {f}")
    if hb != bb:
        raise NotUnary(f"unary flow must use a single variable: {f}")
    return StackOp(push, pop)


def from_wiring(F: Wiring) -> frozenset:
    return frozenset(from_flow(f) for f in F)


# -- saturation ------------------------------------------------------------

def split(F: Iterable[StackOp]) -> tuple[frozenset, frozenset]:
    """Increasing and decreasing parts; height-neutral ops land in both."""
    F = tuple(F)
    return (frozenset(f for f in F if f.increasing),
            frozenset(f for f in F if f.decreasing))


def shortcut(F: frozenset) -> frozenset:
    up, down = split(F)
    return F | product(down, up)


def shortcut_iterates(F: frozenset) -> Iterator[frozenset]:
    """Yield F, short(F), short^2(F), ... up to and including the fixpoint."""
    F = frozenset(F)
    while True:
        yield F
        G = shortcut(F)
        if G == F:
            return
        F = G


def saturation_bound(F: Iterable[StackOp]) -> int:
    """(S^h + S^(h-1) + ... + 1)^2 for S symbols and height h."""
    F = tuple(F)
    s, h = len(symbols(F)), height(F)
    return sum(s ** i for i in range(h + 1)) ** 2


class _Index:
    """Ops bucketed by the first symbol of one of their sides."""

    def __init__(self, side: str):
        self.side = side
        self.by_head: dict[str, list[StackOp]] = {}
        self.empty: list[StackOp] = []
        self.all: list[StackOp] = []

    def add(self, f: StackOp):
        self.all.append(f)
        seq = getattr(f, self.side)
        if seq:
            self.by_head.setdefault(seq[0], []).append(f)
        else:
            self.empty.append(f)

    def candidates(self, seq: Seq) -> Iterable[StackOp]:
        if not seq:
            return self.all
        return itertools.chain(self.by_head.get(seq[0], ()), self.empty)


def saturate(F: Iterable[StackOp]) -> frozenset:
    """Least fixpoint of ``G -> G + G_dec G_inc`` containing F.

    Semi-naive: each operation is combined with the others once, when it
    first appears, so the work is proportional to the number of pairs in
    the result rather than to iterations times pairs.
    """
    seen: set[StackOp] = set()
    inc = _Index("push")   # right factor: its push meets the left pop
    dec = _Index("pop")    # left factor: its pop meets the right push
    todo = list(F)
    while todo:
        f = todo.pop()
        if f in seen:
            continue
        seen.add(f)
        fresh = []
        if f.decreasing:
            inc_snapshot = list(inc.candidates(f.pop))
            for g in inc_snapshot:
                fg = compose(f, g)
                if fg is not None and fg not in seen:
                    fresh.append(fg)
        if f.increasing:
            for g in list(dec.candidates(f.push)):
                gf = compose(g, f)
                if gf is not None and gf not in seen:
                    fresh.append(gf)
        if f.decreasing:
            dec.add(f)
        if f.increasing:
            inc.add(f)
        if f.decreasing and f.increasing:
            ff = compose(f, f)
            if ff is not None and ff not in seen:
                fresh.append(ff)
        todo.extend(fresh)
    return frozenset(seen)


# -- nilpotency of increasing / decreasing wirings -------------------------

TRUNCATION_BUDGET = 200_000


def truncation(h: int, syms: Iterable[str], budget: int = TRUNCATION_BUDGET) -> Wiring:
    """Sum over sequences tau of length h of ``tau(star) <- tau(x)``."""
    syms = sorted(set(syms))
    count = len(syms) ** h
    if count > budget:
        raise ValueError(f"truncation wiring would have {count} flows (budget {budget})")
    x = T.Var("X0")
    return Wiring(
        Flow(T.unary_chain(tau, T.STAR_T), T.unary_chain(tau, x), check=False)
        for tau in itertools.product(syms, repeat=h)
    )


def _truncated_ops(F: frozenset, h: int, syms: list[str]) -> list[tuple[Seq, Seq]]:
    """Elements of T F as (closed head sequence of length h, body sequence)."""
    out = set()
    for f in F:
        pad = h - len(f.push)
        for mu in itertools.product(syms, repeat=pad):
            out.add((f.push + mu, f.pop + mu))
    return sorted(out)


def _acyclic(graph: dict) -> bool:
    try:
        graphlib.TopologicalSorter(graph).prepare()
    except graphlib.CycleError:
        return False
    return True


def _incr_truncation(F: frozenset) -> bool:
    h = height(F)
    syms = sorted(symbols(F))
    if len(syms) ** h > TRUNCATION_BUDGET:
        raise ValueError("truncation graph over budget")
    nodes = _truncated_ops(F, h, syms)
    by_prefix: dict[Seq, list[int]] = {}
    for i, (head, _) in enumerate(nodes):
        for k in range(h + 1):
            by_prefix.setdefault(head[:k], []).append(i)
    graph = {i: set(by_prefix.get(body, ())) for i, (_, body) in enumerate(nodes)}
    return _acyclic(graph)


def _incr_window(F: frozenset) -> bool:
    # Nodes are the known top of the stack, at most h symbols; anything
    # deeper is either unread original stack or can never be read again,
    # since increasing ops never shrink the stack.
    h = height(F)
    # Only (push, len(pop)) matters for the successor, so bucket those by
    # the exact pop (pop fits inside the known top) and by every proper
    # prefix of the pop (known top is shorter than the pop).
    exact: dict[Seq, set] = {}
    longer: dict[Seq, set] = {}
    for f in F:
        eff = (f.push, len(f.pop))
        exact.setdefault(f.pop, set()).add(eff)
        for k in range(len(f.pop)):
            longer.setdefault(f.pop[:k], set()).add(eff)
    graph: dict[Seq, set[Seq]] = {}
    todo = [()]
    while todo:
        top = todo.pop()
        if top in graph:
            continue
        succ = set()
        effs = [exact.get(top[:k], ()) for k in range(len(top) + 1)]
        effs.append(longer.get(top, ()))
        for bucket in effs:
            for push, npop in bucket:
                succ.add((push + top[npop:])[:h])
        graph[top] = succ
        todo.extend(s for s in succ if s not in graph)
    return _acyclic(graph)


def incr_nilpotent(F: Iterable[StackOp], method: str = "window") -> bool:
    """Nilpotency of a wiring that is entirely increasing or entirely decreasing.

    Decreasing wirings are handled through their dagger.  ``method`` picks
    the graph: ``"truncation"`` builds T F explicitly over closed heads of
    length h(F); ``"window"`` explores only the stack tops reachable from an
    unknown stack, which avoids the |S|^h blow-up.
    """
    F = frozenset(F)
    if not F:
        return True
    if all(f.increasing for f in F):
        G = F
    elif all(f.decreasing for f in F):
        G = dagger(F)
    else:
        raise ValueError("incr_nilpotent needs an increasing or a decreasing wiring")
    if method == "window":
        return _incr_window(G)
    if method == "truncation":
        return _incr_truncation(G)
    raise ValueError(f"unknown method {method!r}")


FLATTEN_THRESHOLD = 8


def _sccs(graph: dict) -> list[set]:
    """Strongly connected components (iterative Tarjan)."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out = []
    counter = 0
    for root in graph:
        if root in index:
            continue
        work = [(root, iter(graph[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(graph.get(w, ()))))
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    low[work[-1][0]] = min(low[work[-1][0]], low[v])
                if low[v] == index[v]:
                    comp = set()
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.add(w)
                        if w == v:
                            break
                    out.append(comp)
    return out


def components(F: Iterable[StackOp]) -> list[frozenset]:
    """Split F into parts that are nilpotent together exactly when F is.

    When every op reads and writes at least one symbol, ``f`` can follow
    ``g`` only if the top symbol pushed by ``g`` is the one popped by
    ``f``, so long products walk the graph ``pop[0] -> push[0]``.  Ops on
    edges between different strongly connected components occur a bounded
    number of times in any product and can be dropped; what is left splits
    by component.  Otherwise F is returned whole.
    """
    F = frozenset(F)
    if not F or any(not f.push or not f.pop for f in F):
        return [F] if F else []
    graph: dict[str, set[str]] = {}
    for f in F:
        graph.setdefault(f.pop[0], set()).add(f.push[0])
        graph.setdefault(f.push[0], set())
    comp_of = {}
    for i, comp in enumerate(_sccs(graph)):
        for v in comp:
            comp_of[v] = i
    parts: dict[int, set] = {}
    for f in F:
        c = comp_of[f.pop[0]]
        if c == comp_of[f.push[0]]:
            parts.setdefault(c, set()).add(f)
    return [frozenset(p) for p in parts.values()]


def stack_nilpotent(F: Iterable[StackOp], flatten_threshold: Optional[int] = FLATTEN_THRESHOLD,
                    method: str = "window") -> bool:
    for part in components(F):
        if flatten_threshold is not None and height(part) > flatten_threshold:
            log.debug("flattening wiring of height %d", height(part))
            part = flatten(part)
        up, down = split(saturate(part))
        if not (incr_nilpotent(up, method) and incr_nilpotent(down, method)):
            return False
    return True


# -- flattening ------------------------------------------------------------

def flatten_op(f: StackOp, tag: str) -> list[StackOp]:
    """Chain of height <= 2 ops whose product is f, one symbol at a time.

    Marker symbols ``_<tag>_a<i>`` remember pushes still to do and
    ``_<tag>_b<j>`` pops still to do.  Size is exactly 3 * size(f).
    """
    t, s = f.push, f.pop
    n, m = len(t), len(s)
    if n == 0 and m == 0:
        return [f]
    A = [f"_{tag}_a{i}" for i in range(1, n + 1)]
    B = [f"_{tag}_b{j}" for j in range(1, m + 1)]
    out = []
    if n:
        out.append(StackOp((t[0],), (A[0],)))
        for i in range(1, n):
            out.append(StackOp((A[i - 1], t[i]), (A[i],)))
    left = (A[-1],) if n else ()
    right = (B[0],) if m else ()
    out.append(StackOp(left, right))
    if m:
        for j in range(1, m):
            out.append(StackOp((B[j - 1],), (B[j], s[m - j])))
        out.append(StackOp((B[-1],), (s[0],)))
    return out


def flatten(F: Iterable[StackOp]) -> frozenset:
    F = sorted(F)
    used = symbols(F)
    prefix = "fl"
    while any(s.startswith(f"_{prefix}") for s in used):
        prefix += "x"
    out = set()
    for i, f in enumerate(F):
        out.update(flatten_op(f, f"{prefix}{i}"))
    return frozenset(out)
