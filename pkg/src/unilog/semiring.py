"""Flows, wirings and the resolution product."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Optional

from . import term as T
from .term import App, Term, Var


class FlowError(ValueError):
    pass


class Flow:
    """A rewriting rule ``head <- body`` up to renaming.

    Instances are always stored in canonical form (variables X0, X1, ... in
    order of first occurrence), so ``==`` is equality of renaming classes.
    """

    __slots__ = ("head", "body", "_hash")

    def __init__(self, head: Term, body: Term, *, check: bool = True):
        if check and not T.variables(head) <= T.variables(body):
            raise FlowError(f"head variables must occur in the body: {T.to_text(head)} <- {T.to_text(body)}")
        self.head, self.body = T.canonical(head, body)
        self._hash = hash((self.head, self.body))

    def __eq__(self, other):
        return self is other or (
            isinstance(other, Flow) and self._hash == other._hash
            and self.head == other.head and self.body == other.body
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Flow({self})"

    def __str__(self):
        return f"{T.to_text(self.head)} <- {T.to_text(self.body)}"

    def __mul__(self, other: "Flow") -> Optional["Flow"]:
        return flow_product(self, other)

    @property
    def height(self) -> int:
        return max(self.head.height, self.body.height)

    @property
    def size(self) -> int:
        return T.size(self.head) + T.size(self.body)

    def variables(self) -> set[Var]:
        return T.variables(self.body)

    def dagger(self) -> "Flow":
        return Flow(self.body, self.head)


def flow(head: str | Term, body: str | Term) -> Flow:
    if isinstance(head, str):
        head = T.parse_term(head)
    if isinstance(body, str):
        body = T.parse_term(body)
    return Flow(head, body)


IDENTITY = Flow(Var("X0"), Var("X0"))


def _primed(t: Term) -> Term:
    # canonical flows use X<i>; Y<i> never clashes with them
    return T.apply_subst({v: Var("Y" + v.name[1:]) for v in T.variables(t)}, t)


@lru_cache(maxsize=1 << 18)
def flow_product(f: Flow, g: Flow) -> Optional[Flow]:
    """``(t <- u)(v <- w) = theta t <- theta w`` with theta = mgu(u, v)."""
    gh, gb = _primed(g.head), _primed(g.body)
    theta = T.unify(f.body, gh)
    if theta is None:
        return None
    return Flow(T.apply_subst(theta, f.head), T.apply_subst(theta, gb), check=False)


def flow_tensor(f: Flow, g: Flow) -> Flow:
    return Flow(T.App(T.DOT, (f.head, _primed(g.head))), T.App(T.DOT, (f.body, _primed(g.body))), check=False)


def is_cycle(f: Flow) -> bool:
    return T.matchable(f.head, f.body)


def is_iterable_cycle(f: Flow) -> bool:
    """Sufficient condition for ``f**n != 0`` for every n.

    Holds when one side is an instance of the other: then f*f has the same
    shape (t <- s(t) squares to t <- s(s(t))) and never vanishes.  For unary
    flows this coincides with being a cycle.
    """
    return T.match(f.body, f.head) is not None or T.match(f.head, f.body) is not None


class Wiring:
    """A finite set of flows; ``+`` is union and ``*`` the resolution product."""

    __slots__ = ("flows", "_hash")

    def __init__(self, flows: Iterable[Flow] = ()):
        self.flows = frozenset(flows)
        self._hash = hash(self.flows)

    @classmethod
    def parse(cls, lines: Iterable[str]) -> "Wiring":
        from .formats import parse_wiring
        return parse_wiring("\n".join(lines))

    def __iter__(self) -> Iterator[Flow]:
        return iter(self.flows)

    def __len__(self):
        return len(self.flows)

    def __bool__(self):
        return bool(self.flows)

    def __contains__(self, f):
        return f in self.flows

    def __eq__(self, other):
        return isinstance(other, Wiring) and self.flows == other.flows

    def __hash__(self):
        return self._hash

    def __add__(self, other: "Wiring") -> "Wiring":
        return Wiring(self.flows | other.flows)

    def __mul__(self, other: "Wiring") -> "Wiring":
        return wiring_product(self, other)

    def __pow__(self, n: int) -> "Wiring":
        if n < 1:
            raise ValueError("wirings have no neutral power 0 in general; use n >= 1")
        out = self
        for _ in range(n - 1):
            out = out * self
        return out

    def __repr__(self):
        return "Wiring({" + ", ".join(sorted(map(str, self.flows))) + "})"

    def sorted(self) -> list[Flow]:
        return sorted(self.flows, key=str)

    @property
    def height(self) -> int:
        return max((f.height for f in self.flows), default=0)

    @property
    def size(self) -> int:
        return sum(f.size for f in self.flows)

    def symbols(self) -> set[str]:
        out = set()
        for f in self.flows:
            out |= T.symbols_of(f.head) | T.symbols_of(f.body)
        return out

    def is_unary(self) -> bool:
        return all(_is_unary_flow(f) for f in self.flows)


ZERO = Wiring()
UNIT = Wiring([IDENTITY])


def _is_unary_flow(f: Flow) -> bool:
    for side in (f.head, f.body):
        _, base = T.unary_spine(side)
        if not isinstance(base, Var):
            return False
    return True


def wiring_product(F: Wiring, G: Wiring) -> Wiring:
    out = set()
    for f in F.flows:
        for g in G.flows:
            fg = flow_product(f, g)
            if fg is not None:
                out.add(fg)
    return Wiring(out)


def tensor(F: Wiring, G: Wiring) -> Wiring:
    return Wiring(flow_tensor(f, g) for f in F.flows for g in G.flows)


# -- balance ---------------------------------------------------------------

@dataclass(frozen=True)
class BalanceReport:
    balanced: bool
    variable: Optional[str] = None
    heights: tuple[int, int] = ()
    flow: Optional[Flow] = None

    def __bool__(self):
        return self.balanced


def _var_heights(t: Term, depth: int, out: dict):
    if isinstance(t, Var):
        out.setdefault(t, set()).add(depth)
    else:
        for a in t.args:
            _var_heights(a, depth + 1, out)


def is_balanced_flow(f: Flow) -> BalanceReport:
    heights: dict[Var, set[int]] = {}
    _var_heights(f.head, 0, heights)
    _var_heights(f.body, 0, heights)
    for v, hs in heights.items():
        if len(hs) > 1:
            lo, hi = sorted(hs)[:2]
            return BalanceReport(False, v.name, (lo, hi), f)
    return BalanceReport(True)


def is_balanced(F: Wiring) -> BalanceReport:
    for f in F.sorted():
        rep = is_balanced_flow(f)
        if not rep:
            return rep
    return BalanceReport(True)


# -- naive nilpotency ------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    """Outcome of iterating powers.

    kind is one of ``nilpotent`` (F**index == 0), ``cycle_found`` (F**index
    holds a flow whose powers never vanish), ``periodic`` (F**index repeats
    an earlier nonzero power) or ``inconclusive``.
    """

    kind: str
    index: int
    witness: Optional[Flow] = None

    @property
    def nilpotent(self) -> Optional[bool]:
        if self.kind == "nilpotent":
            return True
        if self.kind in ("cycle_found", "periodic"):
            return False
        return None


def naive_nilpotency(F: Wiring, max_iter: int = 1000, *, cycle_shortcut: bool = True) -> Verdict:
    """Compute F, F^2, ... until one vanishes or non-nilpotency is certain.

    ``cycle_shortcut`` stops on a flow of the power that is an instance of
    itself in the sense of :func:`is_iterable_cycle`; plain matchability is
    not used since it does not survive iteration for general flows.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    seen: dict[Wiring, int] = {}
    P = F
    for n in range(1, max_iter + 1):
        if not P:
            return Verdict("nilpotent", n)
        if cycle_shortcut:
            for f in P.sorted():
                if is_iterable_cycle(f):
                    return Verdict("cycle_found", n, f)
        if P in seen:
            return Verdict("periodic", n)
        seen[P] = n
        P = P * F
    if not P:
        return Verdict("nilpotent", max_iter + 1)
    return Verdict("inconclusive", max_iter)
