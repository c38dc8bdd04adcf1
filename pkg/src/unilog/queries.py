"""Unary queries, their stack encoding, and the circuit value frontend.

A unary query has closed unary data terms such as ``f(g(c))``, a program
of unary flows ``t(x) <- u(x)`` and a closed goal.  It succeeds when the
goal can be derived from the data by rewriting with the program.

The encoding turns the base constant ``c`` of every data/goal term into a
unary twin ``_hat_c`` and wraps everything between two reserved symbols:
data ``d`` becomes ``d^(x) <- START(x)`` and the goal ``g`` becomes
``ACCEPT(x) <- g^(x)``.  The query succeeds iff ``ACCEPT(x) <- START(x)``
shows up in the saturation of the sum.

Internally a closed unary term is a tuple of symbol names, outermost first,
whose last entry is the base constant: ``f(g(c))`` is ``("f", "g", "c")``.
"""
from __future__ import annotations

import graphlib
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import stack as St
from . import term as T
from .semiring import Wiring
from .stack import StackOp

START, ACCEPT = "START", "ACCEPT"
RESERVED = (START, ACCEPT)
HAT_PREFIX = "_hat_"

Fact = tuple[str, ...]


class QueryError(ValueError):
    pass


def hat(name: str) -> str:
    return HAT_PREFIX + name


def _fact_of(t: T.Term, what: str) -> Fact:
    if not T.is_closed(t):
        raise QueryError(f"{what} {T.to_text(t)} is not closed")
    spine, base = T.unary_spine(t)
    if not isinstance(base, T.App) or base.args:
        raise QueryError(f"{what} {T.to_text(t)} is not a unary term over a constant")
    return spine + (base.fn,)


def _term_of(fact: Fact) -> T.Term:
    return T.unary_chain(fact[:-1], T.const(fact[-1]))


def fact_text(fact: Fact) -> str:
    return T.to_text(_term_of(fact))


@dataclass(frozen=True)
class UnaryQuery:
    data: frozenset      # of Fact
    program: frozenset   # of StackOp
    goal: Fact

    def __post_init__(self):
        if not self.goal:
            raise QueryError("empty goal")
        for d in self.data:
            if not d:
                raise QueryError("empty data term")
        for s in self.symbols():
            if s in RESERVED:
                raise QueryError(f"reserved symbol {s} used in the query")
            if s.startswith(HAT_PREFIX):
                raise QueryError(f"symbol {s} clashes with the constant twins ({HAT_PREFIX}...)")

    @classmethod
    def from_terms(cls, data: Iterable[T.Term], program: Wiring | Iterable, goal: T.Term) -> "UnaryQuery":
        ops = set()
        for f in program:
            if isinstance(f, StackOp):
                ops.add(f)
                continue
            try:
                ops.add(St.from_flow(f))
            except St.NotUnary:
                raise QueryError(f"program flow {f} is not of the form t(X) <- u(X)") from None
        return cls(frozenset(_fact_of(t, "data term") for t in data), frozenset(ops),
                   _fact_of(goal, "goal"))

    def symbols(self) -> set[str]:
        out = set(St.symbols(self.program)) | set(self.goal)
        for d in self.data:
            out.update(d)
        return out

    @property
    def size(self) -> int:
        """Total number of symbol occurrences."""
        return sum(map(len, self.data)) + St.size(self.program) + len(self.goal)

    def data_terms(self) -> list[T.Term]:
        return [_term_of(d) for d in sorted(self.data)]

    def program_flows(self):
        return [St.to_flow(f) for f in sorted(self.program)]

    def goal_term(self) -> T.Term:
        return _term_of(self.goal)


def _hatted(fact: Fact) -> tuple[str, ...]:
    return fact[:-1] + (hat(fact[-1]),)


def encode_data(data: Iterable[Fact]) -> frozenset:
    return frozenset(StackOp(_hatted(d), (START,)) for d in data)


def encode_goal(goal: Fact) -> StackOp:
    return StackOp((ACCEPT,), _hatted(goal))


SUCCESS = StackOp((ACCEPT,), (START,))


def encode(Q: UnaryQuery) -> frozenset:
    return encode_data(Q.data) | Q.program | {encode_goal(Q.goal)}


def query_succeeds(Q: UnaryQuery, flatten_threshold: Optional[int] = St.FLATTEN_THRESHOLD) -> bool:
    """Saturate the encoded query and look for ``ACCEPT(x) <- START(x)``.

    Above the height threshold the wiring is flattened first.  Flattening
    leaves the height-one op ``ACCEPT <- START`` and the roles of the two
    reserved symbols intact, so the same membership test applies.
    """
    F = encode(Q)
    if flatten_threshold is not None and St.height(F) > flatten_threshold:
        F = St.flatten(F)
    return SUCCESS in St.saturate(F)


def naive_success(Q: UnaryQuery, max_n: int) -> Optional[int]:
    """Least n <= max_n with ``ACCEPT <- START`` in goal . P^n . data, if any."""
    goal = frozenset({encode_goal(Q.goal)})
    X = encode_data(Q.data)
    for n in range(max_n + 1):
        if SUCCESS in St.product(goal, X):
            return n
        X = St.product(Q.program, X)
        if not X:
            return None
    return None


# -- brute-force derivations -------------------------------------------------------

def apply_op(f: StackOp, fact: Fact) -> Optional[Fact]:
    """Rewrite ``fact`` with ``push(x) <- pop(x)``; x must be a real term."""
    k = len(f.pop)
    if len(fact) > k and fact[:k] == f.pop:
        return f.push + fact[k:]
    return None


@dataclass
class Derivation:
    success: bool
    steps: list = field(default_factory=list)   # (premise, op, conclusion)
    depth: int = 0          # rule applications used (or explored)
    exhausted: bool = False  # no new fact at the last level: failure is final

    def __bool__(self):
        return self.success


def derivation_oracle(Q: UnaryQuery, depth: int = 8, max_facts: int = 1_000_000) -> Derivation:
    """Breadth-first search over derivable facts, up to ``depth`` rule applications.

    Returns the derivation of the goal (data fact, then one step per rule
    application) when one is found.
    """
    parent: dict[Fact, Optional[tuple[Fact, StackOp]]] = {d: None for d in Q.data}
    ops = sorted(Q.program)

    def witness(fact):
        steps = []
        while parent[fact] is not None:
            prev, f = parent[fact]
            steps.append((prev, f, fact))
            fact = prev
        return steps[::-1]

    if Q.goal in parent:
        return Derivation(True, [], 0)
    frontier = sorted(Q.data)
    for level in range(1, depth + 1):
        nxt = []
        for fact in frontier:
            for f in ops:
                new = apply_op(f, fact)
                if new is None or new in parent:
                    continue
                parent[new] = (fact, f)
                if new == Q.goal:
                    return Derivation(True, witness(new), level)
                nxt.append(new)
        if not nxt:
            return Derivation(False, [], level, exhausted=True)
        if len(parent) > max_facts:
            return Derivation(False, [], level)
        frontier = nxt
    return Derivation(False, [], depth, exhausted=not frontier)


# -- circuits ----------------------------------------------------------------------

class CircuitError(ValueError):
    pass


ARITY = {"and": 2, "or": 2, "not": 1, "zero": 0, "one": 0}


@dataclass(frozen=True)
class Circuit:
    """``gates[v] = (kind, *inputs)``: v is the target of exactly one gate."""
    gates: dict
    output: str

    def __post_init__(self):
        for v, (kind, *args) in self.gates.items():
            if kind not in ARITY:
                raise CircuitError(f"unknown gate kind {kind!r} at {v}")
            if len(args) != ARITY[kind]:
                raise CircuitError(f"gate {v}: {kind} takes {ARITY[kind]} inputs")
            for a in args:
                if a not in self.gates:
                    raise CircuitError(f"vertex {a} (input of {v}) is not the target of any gate")
        if self.output not in self.gates:
            raise CircuitError(f"output vertex {self.output} is not the target of any gate")
        try:
            self.order()
        except graphlib.CycleError as e:
            raise CircuitError(f"circuit has a cycle through {' '.join(e.args[1])}") from None

    def order(self) -> list[str]:
        """Vertices, inputs before the gates that read them."""
        ts = graphlib.TopologicalSorter({v: args for v, (_, *args) in sorted(self.gates.items())})
        return list(ts.static_order())


def eval_circuit(C: Circuit) -> int:
    val: dict[str, int] = {}
    for v in C.order():
        kind, *args = C.gates[v]
        x = [val[a] for a in args]
        val[v] = {
            "and": lambda: x[0] & x[1],
            "or": lambda: x[0] | x[1],
            "not": lambda: 1 - x[0],
            "zero": lambda: 0,
            "one": lambda: 1,
        }[kind]()
    return val[C.output]


def need1(v: str) -> str:
    return f"n1_{v}"


def need0(v: str) -> str:
    return f"n0_{v}"


def gate_ops(v: str, kind: str, *args: str) -> list[StackOp]:
    """Rewrites on a stack of pending requirements ``n1_v`` (v must be 1)
    and ``n0_v`` (v must be 0); the stack empties iff all hold."""
    y, n = need1, need0
    if kind == "and":
        a, b = args
        return [StackOp((y(a), y(b)), (y(v),)), StackOp((n(a),), (n(v),)), StackOp((n(b),), (n(v),))]
    if kind == "or":
        a, b = args
        return [StackOp((y(a),), (y(v),)), StackOp((y(b),), (y(v),)), StackOp((n(a), n(b)), (n(v),))]
    if kind == "not":
        (a,) = args
        return [StackOp((n(a),), (y(v),)), StackOp((y(a),), (n(v),))]
    if kind == "one":
        return [StackOp((), (y(v),))]
    if kind == "zero":
        return [StackOp((), (n(v),))]
    raise CircuitError(f"unknown gate kind {kind!r}")


def encode_cvp(C: Circuit) -> UnaryQuery:
    ops = set()
    for v, (kind, *args) in C.gates.items():
        ops.update(gate_ops(v, kind, *args))
    return UnaryQuery(frozenset({(need1(C.output), T.STAR)}), frozenset(ops), (T.STAR,))
