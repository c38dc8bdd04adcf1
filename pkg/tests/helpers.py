"""Random generators and shared fixtures for the test-suite."""
from __future__ import annotations

import os
import random

from unilog import term as T
from unilog.automata import Automaton
from unilog.formats import read_automaton
from unilog.machines import config
from unilog.semiring import Flow, Wiring
from unilog.stack import StackOp

DATA = os.path.join(os.path.dirname(__file__), os.pardir, "data")


def data_path(name: str) -> str:
    return os.path.normpath(os.path.join(DATA, name))


def machine(name: str) -> Automaton:
    return read_automaton(data_path(name))


def rand_seq(rng: random.Random, syms, max_len: int) -> tuple:
    return tuple(rng.choice(syms) for _ in range(rng.randint(0, max_len)))


def rand_op(rng: random.Random, syms=("u", "v", "w"), h: int = 3) -> StackOp:
    return StackOp(rand_seq(rng, syms, h), rand_seq(rng, syms, h))


def rand_stack_wiring(rng: random.Random, max_ops: int = 6, h: int = 3, n_syms: int = 3) -> frozenset:
    syms = ["u", "v", "w"][:n_syms]
    return frozenset(rand_op(rng, syms, h) for _ in range(rng.randint(1, max_ops)))


# -- random observations ----------------------------------------------------------

_STATES = ("q0",)
_STACK = ("s0", "s1")


def _c(name):
    return T.const(name)


def rand_observation_flow(rng: random.Random, letters=("star", "a")) -> Flow:
    X, Y, P, P2 = (T.Var(n) for n in ("X", "Y", "P", "P2"))
    hs = T.unary_chain(rand_seq(rng, _STACK, 1), X)
    bs = T.unary_chain(rand_seq(rng, _STACK, 1), X)
    hq, bq = _c(rng.choice(_STATES)), _c(rng.choice(_STATES))
    # half of the flows keep walking right (leave with r, arrive with l)
    hd, bd = (_c("l"), _c("r")) if rng.random() < 0.5 else (_c(rng.choice("lr")), _c(rng.choice("lr")))
    hc, bc = _c(rng.choice(letters)), _c(rng.choice(letters))
    kind = rng.random()
    if kind < 0.4:
        ha = ba = _c("k")
        hp = bp = P
    elif kind < 0.7:
        ha = ba = T.make("aux", Y)
        hp = bp = P
    else:
        # exchange the main pointer with a stored one
        ha, hp = T.make("aux", P2), P
        ba, bp = T.make("aux", P), P2
    return Flow(config(hc, hd, hs, hq, ha, hp), config(bc, bd, bs, bq, ba, bp))


def rand_observation(rng: random.Random, max_flows: int = 6, letters=("star", "a")) -> Wiring:
    return Wiring(rand_observation_flow(rng, letters) for _ in range(rng.randint(1, max_flows)))


def rand_word(rng: random.Random, max_len: int = 3, alphabet: str = "a") -> str:
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, max_len)))
