import random

import pytest

from unilog import machines as Ma
from unilog import stack as St
from unilog import term as T
from unilog.automata import Automaton, encode_automaton, simulate
from unilog.semiring import Wiring, flow

from helpers import rand_observation, rand_word


def test_letters_and_positions():
    assert Ma.letter_constant("a") == "a"
    assert Ma.letter_constant("(") == "_x28"
    with pytest.raises(Ma.WordError):
        Ma.letter_constant("ab")
    assert Ma.positions(2) == ("_pos0", "_pos1", "_pos2")
    with pytest.raises(Ma.WordError):
        Ma.positions(2, "p")


def test_word_rep_is_circular():
    W = Ma.word_rep("ab")
    # three cells (star, a, b), two flows per link
    assert len(W) == 6
    assert flow("star . r . _pos0", "a . l . _pos1") in W
    assert flow("b . r . _pos2", "star . l . _pos0") in W
    assert flow("a . l . _pos1", "star . r . _pos0") in W
    assert set(Ma.word_rep("")) == {flow("star . r . _pos0", "star . l . _pos0"),
                                    flow("star . l . _pos0", "star . r . _pos0")}


def test_word_context_checks():
    with pytest.raises(Ma.WordError, match="alphabet"):
        Ma.word_rep("abc", "ab")
    with pytest.raises(Ma.WordError, match="needs 3 positions"):
        Ma.WordContext("ab", positions=("_pos0", "_pos1"))
    with pytest.raises(Ma.WordError, match="distinct"):
        Ma.WordContext("a", positions=("_pos0", "_pos0"))


def test_lift_passes_registers_through():
    L = Ma.lift(Ma.word_rep("a"))
    assert len(L) == 4
    for f in L:
        assert Ma.split_config(f.head)[2:5] == Ma.split_config(f.body)[2:5]


OBS_FLOW = "a . l . s0(X) . q0 . k . ptr(P) <- star . r . X . q0 . k . ptr(P)"


def test_validate_observation():
    O = Ma.validate_observation(Wiring([flow(*OBS_FLOW.split(" <- "))]))
    assert O.stack_height == 1


@pytest.mark.parametrize("text, reason", [
    ("a . l . X . q0 . k . ptr(_pos1) <- a . r . X . q0 . k . ptr(_pos1)", "position constant"),
    ("a . l . X . q0 . k <- a . r . X . q0 . k", "not of the form"),
    ("a . u . X . q0 . k . ptr(P) <- a . r . X . q0 . k . ptr(P)", "direction slot"),
    ("a . l . X . q0 . k . ptr(P) <- a . r . X . q0 . k . ptr(f(P))", "pointer"),
    ("a . l . X . q0 . f(Y) . ptr(P) <- a . r . X . q0 . Y . ptr(P)", "not balanced"),
    ("a . l . X . q0 . X . ptr(P) <- a . r . X . q0 . X . ptr(P)", "outside the stack"),
])
def test_observation_errors(text, reason):
    with pytest.raises(Ma.ObservationError, match=reason):
        Ma.validate_observation(Wiring([flow(*text.split(" <- "))]))


def test_empty_observation_accepts_everything():
    assert Ma.accepts(Wiring(), "abba")


def test_walking_round_the_circle_rejects():
    # a step between every pair of cells: the pointer can circle forever
    flows = [flow(f"{c} . l . X . q0 . k . ptr(P)", f"{d} . r . X . q0 . k . ptr(P)")
             for d in ("star", "a") for c in ("star", "a")]
    O = Ma.validate_observation(Wiring(flows))
    for w in ["", "a", "aa"]:
        assert not Ma.accepts(O, w)
    for drop in flows:
        O2 = Ma.validate_observation(Wiring(f for f in flows if f != drop))
        for w in ["", "a", "aa"]:
            assert Ma.accepts(O2, w) == Ma.naive_accepts(O2, w).nilpotent


def test_reject_all_automaton():
    M = Automaton.build(["s"], "s", ["a"], [], 1, [(("s", ("^",), "_"), ("s", (0,), ("stay",)))])
    O = encode_automaton(M)
    for w in ["", "a", "aa"]:
        assert not simulate(M, w)
        assert not Ma.accepts(O, w)


def test_reduce_is_a_stack_wiring_of_bounded_height():
    rng = random.Random(0)
    O = rand_observation(rng, 6)
    R = Ma.reduce(O, "aa")
    assert all(isinstance(f, St.StackOp) for f in R)
    assert St.height(R) <= 1 + Ma.validate_observation(O).stack_height


def test_reduce_agrees_with_naive_on_random_observations():
    rng = random.Random(1)
    for _ in range(40):
        O, w = rand_observation(rng), rand_word(rng)
        v = Ma.naive_accepts(O, w, max_iter=60)
        assert v.nilpotent is not None
        assert Ma.accepts(O, w) == v.nilpotent


def test_position_names_do_not_matter():
    rng = random.Random(2)
    for _ in range(20):
        O, w = rand_observation(rng), rand_word(rng)
        other = Ma.positions(len(w), "_posz")
        assert Ma.accepts(O, w) == Ma.accepts(O, w, other)


def test_grounding_budget():
    rng = random.Random(3)
    P = Ma.interaction(rand_observation(rng, 6), "aaa")
    with pytest.raises(ValueError, match="budget"):
        Ma.reduce_interaction(P, budget=1)
