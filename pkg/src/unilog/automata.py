"""Two-way multi-head automata with a pushdown stack.

An automaton rejects its input iff some run loops forever (a run that
enters one of the declared ``reject`` states counts as looping); otherwise
it accepts.  :func:`simulate` decides this with surface-configuration
summaries, and :func:`encode_automaton` compiles the automaton into an
observation whose interaction with a word is nilpotent iff it accepts.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from . import term as T
from .machines import LEFT, RIGHT, Observation, config, letter_constant, validate_observation
from .semiring import Flow, Wiring
from .term import App, Var

LEFT_END, RIGHT_END, BOTTOM, ANY = "^", "$", "_", "*"
STAY_MARK = "%"
RESERVED = {LEFT_END, RIGHT_END, BOTTOM, ANY}


class AutomatonError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(msg)
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Transition:
    state: str
    reads: tuple
    top: str
    target: str
    moves: tuple
    op: tuple  # ("pop",) or ("push", b)

    def moving_head(self) -> Optional[int]:
        for j, m in enumerate(self.moves):
            if m:
                return j
        return None


@dataclass(frozen=True)
class Automaton:
    states: tuple
    init: str
    alphabet: tuple
    stack: tuple
    heads: int
    transitions: tuple
    reject: frozenset = frozenset()

    @property
    def tape(self) -> tuple:
        return (LEFT_END,) + self.alphabet + (RIGHT_END,)

    @classmethod
    def build(cls, states, init, alphabet, stack, heads, transitions, reject=()) -> "Automaton":
        """Validate and normalise.

        ``transitions`` holds ``((q, reads, top), (q2, moves, op))`` pairs,
        optionally followed by a line and column for error messages.  Reads
        may use ``*`` for any tape symbol; the ``("stay",)`` stack action is
        rewritten as a push of a reserved marker followed by its pop.
        """
        states = list(dict.fromkeys(states))
        alphabet = tuple(dict.fromkeys(alphabet))
        stack = list(dict.fromkeys(stack))
        if heads < 1:
            raise AutomatonError("an automaton needs at least one head")
        if init not in states:
            raise AutomatonError(f"initial state {init!r} is not declared")
        for a in alphabet:
            if len(a) != 1 or a in RESERVED or a.isspace():
                raise AutomatonError(f"input letters are single non-reserved characters, got {a!r}")
        for b in stack:
            if b in RESERVED or b == STAY_MARK:
                raise AutomatonError(f"stack symbol {b!r} is reserved")
        reject = frozenset(reject)
        for r in reject:
            if r not in states:
                raise AutomatonError(f"reject state {r!r} is not declared")
        tape = (LEFT_END,) + alphabet + (RIGHT_END,)
        out: list[Transition] = []
        needs_mark = False
        for item in transitions:
            (q, reads, top), (q2, moves, op), *where = item
            line, col = (where + [0, 0])[:2]

            def fail(msg):
                raise AutomatonError(msg, line, col)

            for s in (q, q2):
                if s not in states:
                    fail(f"state {s!r} is not declared")
            if q in reject:
                fail(f"reject state {q!r} cannot have outgoing transitions")
            if len(reads) != heads or len(moves) != heads:
                fail(f"transitions read and move exactly {heads} head(s)")
            for c in reads:
                if c != ANY and c not in tape:
                    fail(f"{c!r} is not a tape symbol")
            if top != BOTTOM and top not in stack:
                fail(f"{top!r} is not a stack symbol")
            if any(m not in (-1, 0, 1) for m in moves):
                fail("moves must be -1, 0 or +1")
            if sum(1 for m in moves if m) > 1:
                fail("at most one head moves per transition")
            if op[0] == "push" and op[1] not in stack:
                fail(f"cannot push {op[1]!r}: not a stack symbol")
            if op[0] == "pop" and top == BOTTOM:
                fail("the stack bottom is never popped")
            choices = [tape if c == ANY else (c,) for c in reads]
            for rd in itertools.product(*choices):
                if op[0] == "stay":
                    needs_mark = True
                    mid = f"{q2}{STAY_MARK}"
                    if mid not in states:
                        states.append(mid)
                    out.append(Transition(q, rd, top, mid, tuple(moves), ("push", STAY_MARK)))
                    for rd2 in itertools.product(tape, repeat=heads):
                        out.append(Transition(mid, rd2, STAY_MARK, q2, (0,) * heads, ("pop",)))
                else:
                    out.append(Transition(q, rd, top, q2, tuple(moves), tuple(op)))
        if needs_mark:
            stack.append(STAY_MARK)
        return cls(tuple(states), init, alphabet, tuple(stack), heads, tuple(dict.fromkeys(out)), reject)

    def check_word(self, word: str):
        bad = [c for c in word if c not in self.alphabet]
        if bad:
            raise AutomatonError(f"letter {bad[0]!r} is not in the input alphabet")


# -- memoized simulation ---------------------------------------------------

@dataclass
class SimResult:
    accepted: bool
    reason: str            # "halts", "loop" or "reject-state"
    surface_configs: int = 0

    def __bool__(self):
        return self.accepted


def simulate(M: Automaton, word: str) -> SimResult:
    """Decide acceptance with memoized surface configurations.

    A surface configuration is (state, head positions, top symbol).  For
    every configuration ``D`` entered by a push we compute ``reach[D]``:
    the configurations at the same stack height reachable from ``D``
    without popping ``D``'s top.  A push from ``C`` to ``D`` followed by a
    pop from some ``E`` in ``reach[D]`` yields a same-height shortcut from
    ``C``.  The machine loops iff the graph of shortcuts and push edges has
    a cycle reachable from the initial configuration.
    """
    M.check_word(word)
    tape = (LEFT_END,) + tuple(word) + (RIGHT_END,)
    last = len(tape) - 1
    by_key: dict[tuple, list[Transition]] = {}
    for t in M.transitions:
        by_key.setdefault((t.state, t.top), []).append(t)

    def fire(conf):
        q, pos, top = conf
        for t in by_key.get((q, top), ()):
            if all(tape[p] == c for p, c in zip(pos, t.reads)):
                new = tuple(p + m for p, m in zip(pos, t.moves))
                if all(0 <= p <= last for p in new):
                    yield t, new

    pushes: dict = {}
    pops: dict = {}

    def moves_of(conf):
        if conf not in pushes:
            pu, po = [], []
            for t, new in fire(conf):
                if t.op[0] == "push":
                    pu.append((t.target, new, t.op[1]))
                else:
                    po.append((t.target, new))
            pushes[conf], pops[conf] = pu, po
        return pushes[conf], pops[conf]

    reach: dict = {}

    def shortcuts(conf):
        q, pos, top = conf
        out = set()
        for d in moves_of(conf)[0]:
            for e in reach.get(d, ()):
                for q2, pos2 in moves_of(e)[1]:
                    out.add((q2, pos2, top))
        return out

    init = (M.init, (0,) * M.heads, BOTTOM)
    reach[init] = {init}
    changed = True
    while changed:
        changed = False
        for d in list(reach):
            seen = reach[d]
            todo = list(seen)
            while todo:
                c = todo.pop()
                for e in moves_of(c)[0]:
                    if e not in reach:
                        reach[e] = {e}
                        changed = True
                for nxt in shortcuts(c):
                    if nxt not in seen:
                        seen.add(nxt)
                        todo.append(nxt)
                        changed = True

    def succ(c):
        yield from moves_of(c)[0]
        yield from shortcuts(c)

    # iterative DFS for a reachable cycle or reject state
    WHITE, GREY, BLACK = 0, 1, 2
    color = {init: GREY}
    stack = [(init, iter(list(succ(init))))]
    if init[0] in M.reject:
        return SimResult(False, "reject-state", 1)
    while stack:
        c, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            color[c] = BLACK
            stack.pop()
            continue
        if nxt[0] in M.reject:
            return SimResult(False, "reject-state", len(color))
        col = color.get(nxt, WHITE)
        if col == GREY:
            return SimResult(False, "loop", len(color))
        if col == WHITE:
            color[nxt] = GREY
            stack.append((nxt, iter(list(succ(nxt)))))
    return SimResult(True, "halts", len(color))


# -- encoding as an observation --------------------------------------------

RESET = "%reset"


@dataclass(frozen=True)
class _T:
    """Internal transition: op may also be ("nop",) or ("pushbot",)."""

    state: str
    reads: tuple
    top: str
    target: str
    moves: tuple
    op: tuple


def _internal(M: Automaton) -> list[_T]:
    out = [_T(t.state, t.reads, t.top, t.target, t.moves, t.op) for t in M.transitions]
    if not M.reject:
        return out
    tape, K = M.tape, M.heads
    tops = (BOTTOM,) + M.stack
    rst = [f"{RESET}{j}" for j in range(K)]
    for r in sorted(M.reject):
        for rd in itertools.product(tape, repeat=K):
            for b in tops:
                out.append(_T(r, rd, b, rst[0], (0,) * K, ("pushbot",)))
    for j in range(K):
        after = rst[j + 1] if j + 1 < K else M.init
        for rd in itertools.product(tape, repeat=K):
            for b in tops:
                if rd[j] == LEFT_END:
                    out.append(_T(rst[j], rd, b, after, (0,) * K, ("nop",)))
                else:
                    mv = tuple(-1 if i == j else 0 for i in range(K))
                    out.append(_T(rst[j], rd, b, rst[j], mv, ("nop",)))
    return out


class _Encoder:
    def __init__(self, M: Automaton):
        self.M = M
        self.K = M.heads
        self.X = Var("X")
        self.Z = Var("Z")
        self.Ys = [Var(f"Y{i}") for i in range(1, self.K)]
        self.stack_names = {BOTTOM: "_sbot"}
        for i, b in enumerate(M.stack):
            self.stack_names[b] = f"_s{i}"
        for n in self.stack_names.values():
            T.SYMBOLS.intern(n, 1)
        self.aux_fn = f"aux{self.K - 1}"
        self.state_ids: dict[tuple, str] = {}
        self.flows: list[Flow] = []
        self.done: set = set()

    # naming ----------------------------------------------------------------
    def qconst(self, key: tuple) -> App:
        name = self.state_ids.get(key)
        if name is None:
            name = f"_q{len(self.state_ids)}"
            self.state_ids[key] = name
        return T.const(name)

    def aux(self, ys) -> App:
        return T.make(self.aux_fn, *ys)

    def sym_term(self, s: str) -> App:
        return T.STAR_T if s in (LEFT_END, RIGHT_END) else T.const(letter_constant(s))

    def arrivals(self, s: str):
        """(letter constant, direction tag) pairs that denote tape symbol s
        right after the main pointer has moved onto it."""
        if s == LEFT_END:
            return [(T.STAR_T, RIGHT)]
        if s == RIGHT_END:
            return [(T.STAR_T, LEFT)]
        return [(self.sym_term(s), LEFT), (self.sym_term(s), RIGHT)]

    def all_arrivals(self):
        for s in self.M.tape:
            for c, tag in self.arrivals(s):
                yield s, c, tag

    @staticmethod
    def bounce_dir(s: str) -> str:
        return LEFT if s == RIGHT_END else RIGHT

    def stack_body(self, top: str):
        return App(self.stack_names[top], (self.X,))

    def stack_head(self, top: str, op: tuple):
        below = self.stack_body(top)
        if op[0] == "pop":
            return self.X
        if op[0] == "push":
            return App(self.stack_names[op[1]], (below,))
        if op[0] == "pushbot":
            return App(self.stack_names[BOTTOM], (below,))
        return below

    def conf(self, c, d: str, s, q, ys, z):
        return config(c, T.const(d), s, q, self.aux(ys), z)

    # flows -----------------------------------------------------------------
    def emit(self, head, body):
        self.flows.append(Flow(head, body))

    def bounce_back(self, q2: str, aux: tuple):
        key = ("bounce", q2, aux)
        if key in self.done:
            return
        self.done.add(key)
        qb, qr = self.qconst(key), self.qconst(("rest", q2, aux))
        for _, c, tag in self.all_arrivals():
            self.emit(self.conf(c, tag, self.X, qr, self.Ys, self.Z),
                      self.conf(c, tag, self.X, qb, self.Ys, self.Z))

    def swap_back(self, q2: str, aux: tuple, j: int, s0: str):
        key = ("swap", q2, aux, j, s0)
        if key in self.done:
            return
        self.done.add(key)
        qs = self.qconst(key)
        swapped = list(self.Ys)
        swapped[j - 1] = self.Z
        yj = self.Ys[j - 1]
        for s, c, tag in self.all_arrivals():
            aux2 = aux[: j - 1] + (s,) + aux[j:]
            qb = self.qconst(("bounce", q2, aux2))
            self.emit(self.conf(self.sym_term(s0), self.bounce_dir(s0), self.X, qb, self.Ys, self.Z),
                      self.conf(c, tag, self.X, qs, swapped, yj))
            self.bounce_back(q2, aux2)

    def transition(self, t: _T):
        for s, m in zip(t.reads, t.moves):
            if (s == LEFT_END and m < 0) or (s == RIGHT_END and m > 0):
                return  # would leave the tape: never fires
        s0, aux = t.reads[0], tuple(t.reads[1:])
        j = next((i for i, m in enumerate(t.moves) if m), None)
        body_q = self.qconst(("rest", t.state, aux))
        sb, sh = self.stack_body(t.top), self.stack_head(t.top, t.op)
        for c, tag in self.arrivals(s0):
            body = self.conf(c, tag, sb, body_q, self.Ys, self.Z)
            if j is None:
                qb = self.qconst(("bounce", t.target, aux))
                self.emit(self.conf(c, self.bounce_dir(s0), sh, qb, self.Ys, self.Z), body)
                self.bounce_back(t.target, aux)
            elif j == 0:
                d = RIGHT if t.moves[0] > 0 else LEFT
                self.emit(self.conf(c, d, sh, self.qconst(("rest", t.target, aux)), self.Ys, self.Z), body)
            else:
                d = RIGHT if t.moves[j] > 0 else LEFT
                swapped = list(self.Ys)
                swapped[j - 1] = self.Z
                qs = self.qconst(("swap", t.target, aux, j, s0))
                self.emit(self.conf(self.sym_term(t.reads[j]), d, sh, qs, swapped, self.Ys[j - 1]), body)
                self.swap_back(t.target, aux, j, s0)


def encode_automaton(M: Automaton) -> Observation:
    """Observation whose interaction with any representation of ``w`` is
    nilpotent iff ``M`` accepts ``w``.

    Every flow performs one step of the main pointer, so a transition that
    keeps the main head still is split into a move and a move back, and a
    move of auxiliary head ``j`` swaps it into the main slot, moves it and
    swaps back.  The symbols under auxiliary heads are remembered in the
    state constants.  Entering a reject state starts a reset: a fresh
    bottom marker is pushed, every head is rewound to the left end marker
    and the run restarts from the initial state, so rejection shows up as
    a cycle while configurations that cannot occur stay harmless.
    """
    enc = _Encoder(M)
    for t in _internal(M):
        enc.transition(t)
    O = validate_observation(Wiring(enc.flows))
    O.info["states"] = {v: k for k, v in enc.state_ids.items()}
    O.info["stack"] = dict(enc.stack_names)
    return O
