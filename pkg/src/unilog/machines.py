"""Words, observations and the reduction of their interaction to stack wirings.

Configurations handled by observations are closed terms laid out as the
right-associated chain

    c . d . S . Q . A . ptr(p)

where ``c`` is the symbol under the main pointer (``star`` for the end
marker), ``d`` is ``l`` or ``r``, ``S`` is the stack (a unary term), ``Q`` and
``A`` are free-form registers (the automaton encoder stores a state and the
auxiliary pointers there) and ``p`` is the position of the main pointer.

A word representation only talks about ``c . d . p``; :func:`lift` embeds it
in that layout so it can be multiplied with an observation.
"""
from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import stack as St
from . import term as T
from .semiring import Flow, Wiring, is_balanced_flow, wiring_product
from .term import App, Term, Var

LEFT, RIGHT = "l", "r"
POINTER = "ptr"
POSITION_PREFIX = "_pos"
LETTER_ESCAPE = "_x"

T.SYMBOLS.intern(LEFT, 0)
T.SYMBOLS.intern(RIGHT, 0)
T.SYMBOLS.intern(POINTER, 1)

L_T, R_T = App(LEFT), App(RIGHT)


class WordError(ValueError):
    pass


class ObservationError(ValueError):
    def __init__(self, reason: str, flow: Optional[Flow] = None):
        self.reason = reason
        self.flow = flow
        super().__init__(f"{reason}: {flow}" if flow is not None else reason)


# -- letters and positions -------------------------------------------------

def letter_constant(ch: str) -> str:
    """Constant naming the input letter ``ch``."""
    if len(ch) != 1:
        raise WordError(f"letters are single characters, got {ch!r}")
    if ch in string.ascii_lowercase:
        return ch
    return f"{LETTER_ESCAPE}{ord(ch):x}"


def letter_term(ch: str) -> App:
    return T.const(letter_constant(ch))


def is_position(name: str) -> bool:
    return name.startswith(POSITION_PREFIX)


def positions(n: int, prefix: str = POSITION_PREFIX) -> tuple[str, ...]:
    """``n + 1`` fresh position constants; ``prefix`` must start with ``_pos``."""
    if not prefix.startswith(POSITION_PREFIX):
        raise WordError(f"position constants must start with {POSITION_PREFIX!r}")
    return tuple(f"{prefix}{i}" for i in range(n + 1))


@dataclass(frozen=True)
class WordContext:
    word: str
    alphabet: frozenset = frozenset()
    positions: tuple = ()

    def __post_init__(self):
        alpha = frozenset(self.alphabet) or frozenset(self.word)
        object.__setattr__(self, "alphabet", alpha)
        bad = [c for c in self.word if c not in alpha]
        if bad:
            raise WordError(f"letter {bad[0]!r} is not in the alphabet")
        pos = tuple(self.positions) or positions(len(self.word))
        if len(pos) != len(self.word) + 1:
            raise WordError(f"a word of length {len(self.word)} needs {len(self.word) + 1} positions, got {len(pos)}")
        if len(set(pos)) != len(pos):
            raise WordError("position constants must be pairwise distinct")
        if not all(is_position(p) for p in pos):
            raise WordError(f"position constants must start with {POSITION_PREFIX!r}")
        object.__setattr__(self, "positions", pos)


# -- word representation ---------------------------------------------------

def _cells(ctx: WordContext) -> list[tuple[Term, Term]]:
    cs = [T.STAR_T] + [letter_term(ch) for ch in ctx.word]
    ps = [T.const(p) for p in ctx.positions]
    return list(zip(cs, ps))


def word_rep(word: str | WordContext, alphabet: Iterable[str] = (), pos: Sequence[str] = ()) -> Wiring:
    """Circular representation: ``c_i . r . p_i`` linked both ways with
    ``c_{i+1} . l . p_{i+1}``, indices taken modulo ``n + 1``."""
    ctx = word if isinstance(word, WordContext) else WordContext(word, frozenset(alphabet), tuple(pos))
    cells = _cells(ctx)
    out = []
    for i, (c, p) in enumerate(cells):
        c2, p2 = cells[(i + 1) % len(cells)]
        a, b = T.dot(c, R_T, p), T.dot(c2, L_T, p2)
        out.append(Flow(a, b))
        out.append(Flow(b, a))
    return Wiring(out)


def config(c: Term, d: Term, stack: Term, q: Term, aux: Term, pointer: Term) -> Term:
    return T.dot(c, d, stack, q, aux, App(POINTER, (pointer,)))


def split_config(t: Term) -> Optional[tuple[Term, Term, Term, Term, Term, Term]]:
    """Inverse of :func:`config` (the last item is the pointer's argument)."""
    parts = []
    for _ in range(5):
        if not (isinstance(t, App) and t.fn == T.DOT):
            return None
        parts.append(t.args[0])
        t = t.args[1]
    if not (isinstance(t, App) and t.fn == POINTER):
        return None
    parts.append(t.args[0])
    return tuple(parts)


def lift(rep: Wiring) -> Wiring:
    """Embed a word representation in the configuration layout: the stack
    and both registers are passed through untouched."""
    X, Y, Z = Var("X"), Var("Y"), Var("Z")
    out = []
    for f in rep:
        (c, d, p), (c2, d2, p2) = _cdp(f.head), _cdp(f.body)
        out.append(Flow(config(c, d, X, Y, Z, p), config(c2, d2, X, Y, Z, p2)))
    return Wiring(out)


def _cdp(t: Term):
    c, rest = t.args
    d, p = rest.args
    return c, d, p


# -- observations ----------------------------------------------------------

@dataclass(frozen=True)
class Observation:
    """A validated wiring of the balanced-with-stack shape."""

    wiring: Wiring
    stack_height: int = 0
    info: dict = field(default_factory=dict, compare=False, hash=False)

    def __iter__(self):
        return iter(self.wiring)

    def __len__(self):
        return len(self.wiring)


def _unary_over_var(t: Term) -> Optional[tuple[tuple[str, ...], Var]]:
    syms, base = T.unary_spine(t)
    return (syms, base) if isinstance(base, Var) else None


def _check_side(f: Flow, side: Term, which: str):
    parts = split_config(side)
    if parts is None:
        raise ObservationError(f"{which} is not of the form c . d . S . Q . A . ptr(p)", f)
    c, d, s, q, a, p = parts
    if not (isinstance(c, App) and not c.args):
        raise ObservationError(f"{which}: the letter slot must be a constant", f)
    if not (isinstance(d, App) and d.fn in (LEFT, RIGHT) and not d.args):
        raise ObservationError(f"{which}: the direction slot must be l or r", f)
    st = _unary_over_var(s)
    if st is None:
        raise ObservationError(f"{which}: the stack slot must be unary over a variable", f)
    if not isinstance(p, Var):
        raise ObservationError(f"{which}: the pointer must hold a variable", f)
    x = st[1]
    if x in T.variables(q) | T.variables(a) or x == p:
        raise ObservationError(f"{which}: the stack variable also occurs outside the stack", f)
    return parts, st


def validate_observation(F: Wiring | Iterable[Flow]) -> Observation:
    """Accept ``F`` iff every flow has the layout described in the module
    docstring, a stack part that is a stack operation, a balanced remainder
    and no position constant."""
    F = F if isinstance(F, Wiring) else Wiring(F)
    h = 0
    for f in F.sorted():
        for sym in T.symbols_of(f.head) | T.symbols_of(f.body):
            if is_position(sym):
                raise ObservationError(f"position constant {sym} occurs in an observation", f)
        (hc, hd, hs, hq, ha, hp), (hsyms, hx) = _check_side(f, f.head, "head")
        (bc, bd, bs, bq, ba, bp), (bsyms, bx) = _check_side(f, f.body, "body")
        if hx != bx:
            raise ObservationError("head and body stacks must share their variable", f)
        rest = Flow(T.dot(hc, hd, hq, ha, App(POINTER, (hp,))), T.dot(bc, bd, bq, ba, App(POINTER, (bp,))),
                    check=False)
        rep = is_balanced_flow(rest)
        if not rep:
            raise ObservationError(f"register part is not balanced (variable {rep.variable} at heights {rep.heights})", f)
        h = max(h, len(hsyms), len(bsyms))
    return Observation(F, h)


def _as_observation(O) -> Observation:
    return O if isinstance(O, Observation) else validate_observation(O)


def interaction(O, word: str | WordContext, pos: Sequence[str] = ()) -> Wiring:
    """The wiring ``O . lift(W_p)`` whose nilpotency decides acceptance."""
    O = _as_observation(O)
    ctx = word if isinstance(word, WordContext) else WordContext(word, positions=tuple(pos))
    return wiring_product(O.wiring, lift(word_rep(ctx)))


# -- reduction to the stack semiring ---------------------------------------

GROUND_BUDGET = 200_000
FRESH = "_any"


def _subterms(t: Term, path=()):
    yield path, t
    if isinstance(t, App):
        for i, a in enumerate(t.args):
            yield from _subterms(a, path + (i,))


class _UF:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _ground_values(pairs: list[tuple[Term, Term]]) -> tuple[_UF, dict]:
    """Closed terms each path can hold along a chain of the balanced flows.

    Unification aligns equal paths of neighbouring flows, and a variable
    links all of its occurrence paths inside one flow, so values propagate
    along the classes of the union-find.  Bounded because heights are.
    """
    uf = _UF()
    for h, b in pairs:
        occ: dict[Var, list] = {}
        for side in (h, b):
            for path, s in _subterms(side):
                uf.find(path)
                if isinstance(s, Var):
                    occ.setdefault(s, []).append(path)
        for paths in occ.values():
            for p in paths[1:]:
                uf.union(paths[0], p)
    vals: dict = {}

    def add(path, g):
        bucket = vals.setdefault(uf.find(path), set())
        if g in bucket:
            return False
        bucket.add(g)
        if isinstance(g, App):
            for i, a in enumerate(g.args):
                add(path + (i,), a)
        return True

    open_terms = []
    for h, b in pairs:
        for side in (h, b):
            for path, s in _subterms(side):
                if T.is_closed(s):
                    add(path, s)
                elif isinstance(s, App):
                    open_terms.append((path, s))
    var_paths = set()
    for h, b in pairs:
        for side in (h, b):
            for path, s in _subterms(side):
                if isinstance(s, Var):
                    var_paths.add(uf.find(path))
    # Slots of each open term, so a term is re-instantiated only when one
    # of its classes has gained values since the last time.
    slotted = []
    for path, s in open_terms:
        slots = {}
        for sub_path, sub in _subterms(s, path):
            if isinstance(sub, Var) and sub not in slots:
                slots[sub] = uf.find(sub_path)
        slotted.append((path, s, list(slots.items())))
    seen_sizes = [None] * len(slotted)
    while True:
        changed = True
        while changed:
            changed = False
            for i, (path, s, slots) in enumerate(slotted):
                sizes = tuple(len(vals.get(r, ())) for _, r in slots)
                if sizes == seen_sizes[i]:
                    continue
                seen_sizes[i] = sizes
                names = [v for v, _ in slots]
                for combo in itertools.product(*(list(vals.get(r, ())) for _, r in slots)):
                    changed |= add(path, T.apply_subst(dict(zip(names, combo)), s))
        empty = [r for r in var_paths if not vals.get(r)]
        if not empty:
            return uf, vals
        for r in empty:
            vals.setdefault(r, set()).add(T.const(FRESH))


def _split_flow(f: Flow):
    hc, hd, hs, hq, ha, hp = split_config(f.head)
    bc, bd, bs, bq, ba, bp = split_config(f.body)
    (hsyms, _), (bsyms, _) = _unary_over_var(hs), _unary_over_var(bs)
    head_b = T.dot(hc, hd, hq, ha, App(POINTER, (hp,)))
    body_b = T.dot(bc, bd, bq, ba, App(POINTER, (bp,)))
    return head_b, hsyms, body_b, bsyms


@dataclass
class Reduction:
    wiring: frozenset
    symbols: dict  # interned unary symbol -> closed register term

    def __iter__(self):
        return iter(self.wiring)


def reduce_interaction(P: Wiring, budget: int = GROUND_BUDGET) -> Reduction:
    """Turn a wiring of layout ``c . d . S . Q . A . ptr(p)`` flows into a
    stack wiring with the same nilpotency.

    The register part of each flow is replaced by all of its closed
    instances over the values computed by :func:`_ground_values`, and each
    closed register term becomes one fresh unary symbol sitting on top of
    the stack: ``t(sigma(x)) <- u(tau(x))``.
    """
    parts = [_split_flow(f) for f in P.sorted()]
    uf, vals = _ground_values([(h, b) for h, _, b, _ in parts])
    ground: list[tuple[Term, tuple, Term, tuple]] = []
    for hb, hs, bb, bs in parts:
        slots = {}
        for path, sub in _subterms(bb):
            if isinstance(sub, Var) and sub not in slots:
                slots[sub] = sorted(vals[uf.find(path)], key=T.to_text)
        names = list(slots)
        count = 1
        for v in names:
            count *= len(slots[v])
        if len(ground) + count > budget:
            raise ValueError(f"grounding the register parts exceeds the budget of {budget} instances")
        for combo in itertools.product(*(slots[v] for v in names)):
            theta = dict(zip(names, combo))
            ground.append((T.apply_subst(theta, hb), hs, T.apply_subst(theta, bb), bs))
    closed = sorted({t for g in ground for t in (g[0], g[2])}, key=T.to_text)
    name = {t: f"_g{i}" for i, t in enumerate(closed)}
    for n in name.values():
        T.SYMBOLS.intern(n, 1)
    ops = frozenset(St.StackOp((name[h],) + hs, (name[b],) + bs) for h, hs, b, bs in ground)
    return Reduction(ops, {v: k for k, v in name.items()})


def reduce(O, word: str | WordContext, pos: Sequence[str] = ()) -> frozenset:
    """Stack wiring nilpotent iff ``O . W_p`` is."""
    return reduce_interaction(interaction(O, word, pos)).wiring


def accepts(O, word: str | WordContext, pos: Sequence[str] = (), *, flatten_threshold=St.FLATTEN_THRESHOLD) -> bool:
    """``word`` is accepted iff the interaction with ``O`` is nilpotent;
    the choice of positions does not matter (``pos`` defaults to _pos0..)."""
    O = _as_observation(O)
    if not O.wiring:
        return True
    return St.stack_nilpotent(reduce(O, word, pos), flatten_threshold=flatten_threshold)


def naive_accepts(O, word: str | WordContext, pos: Sequence[str] = (), max_iter: int = 200):
    """Verdict of iterating the interaction wiring directly (an oracle)."""
    from .semiring import naive_nilpotency
    return naive_nilpotency(interaction(O, word, pos), max_iter)
