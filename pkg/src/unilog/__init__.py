"""Logic programs as wirings: unification, the resolution semiring, the
stack semiring, word-reading observations and unary queries."""
from .term import parse_term, unify
from .semiring import Flow, Wiring, flow, naive_nilpotency
from .stack import StackOp, op, saturate, flatten, stack_nilpotent
from .machines import accepts, reduce, validate_observation, word_rep
from .automata import Automaton, encode_automaton, simulate
from .queries import Circuit, UnaryQuery, derivation_oracle, encode_cvp, eval_circuit, query_succeeds

__version__ = "0.1.0"

__all__ = [
    "parse_term", "unify",
    "Flow", "Wiring", "flow", "naive_nilpotency",
    "StackOp", "op", "saturate", "flatten", "stack_nilpotent",
    "accepts", "reduce", "validate_observation", "word_rep",
    "Automaton", "encode_automaton", "simulate",
    "Circuit", "UnaryQuery", "derivation_oracle", "encode_cvp", "eval_circuit", "query_succeeds",
]
