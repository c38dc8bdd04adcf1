"""Command-line front end.

Every subcommand prints its result, then one ``VERDICT: ...`` line (or a
JSON object with ``--json``).  Exit status: 0 yes/accept/success,
1 no/reject/fail, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys

from . import formats as Fm
from . import machines as Ma
from . import queries as Qu
from . import stack as St
from . import term as T
from .automata import AutomatonError, encode_automaton, simulate
from .semiring import Wiring, naive_nilpotency, wiring_product

YES, NO, ERROR = 0, 1, 2


class UsageError(Exception):
    pass


class _Out:
    def __init__(self, as_json: bool):
        self.as_json = as_json
        self.lines: list[str] = []
        self.data: dict = {}

    def text(self, s: str = ""):
        self.lines.append(s)

    def artifact(self, txt: str, key: str, path=None):
        """Show ``txt``, or write it to ``path`` and only report the verdict."""
        if path:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(txt)
            self.data["output"] = path
            return
        self.lines.append(txt.rstrip("\n"))
        self.data[key] = txt.splitlines()

    def wiring(self, F, path=None):
        self.artifact(Fm.format_wiring(F), "wiring", path)

    def verdict(self, word: str, code: int, **extra) -> int:
        self.data.update(extra)
        self.data["verdict"] = word
        if self.as_json:
            print(json.dumps(self.data, sort_keys=True))
        else:
            for ln in self.lines:
                if ln:
                    print(ln)
            print(f"VERDICT: {word}")
        return code


def _threshold(s: str):
    if s.lower() == "none":
        return None
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer or 'none'") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _positive(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a positive integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _unary(F: Wiring, what: str) -> frozenset:
    try:
        return St.from_wiring(F)
    except St.NotUnary as e:
        raise UsageError(f"{what} must be unary (flows t(X) <- u(X)): {e}") from None


def _check_file(path: str):
    if path != "-" and not os.path.isfile(path):
        raise UsageError(f"{path}: no such file")


# -- subcommands -----------------------------------------------------------------

def cmd_unify(a, out):
    t, u = Fm._term_at(a.t, "<arg 1>", 1, 0), Fm._term_at(a.u, "<arg 2>", 1, 0)
    theta = T.unify(t, u)
    if theta is None:
        return out.verdict("not unifiable", NO)
    items = {T.to_text(v): T.to_text(s) for v, s in sorted(theta.items(), key=lambda kv: kv[0].name)}
    out.text("{" + ", ".join(f"{k} ↦ {v}" for k, v in items.items()) + "}")
    return out.verdict("unifiable", YES, mgu=items)


def cmd_product(a, out):
    F, G = Fm.read_wiring(a.f), Fm.read_wiring(a.g)
    P = wiring_product(F, G)
    out.wiring(P, a.output)
    return out.verdict("zero" if not P else "nonzero", YES, flows=len(P))


def cmd_nilpotent(a, out):
    F = Fm.read_wiring(a.f)
    if not a.naive and F.is_unary():
        ok = St.stack_nilpotent(St.from_wiring(F), flatten_threshold=a.flatten_threshold)
        return out.verdict("nilpotent" if ok else "cyclic", YES if ok else NO, method="saturation")
    if not a.naive:
        out.text("wiring is not unary: iterating powers")
    v = naive_nilpotency(F, a.max_iter)
    extra = {"method": "naive", "index": v.index}
    if v.witness is not None:
        extra["witness"] = str(v.witness)
        out.text(f"F^{v.index} contains the cycle {v.witness}")
    if v.kind == "nilpotent":
        out.text(f"F^{v.index} = 0")
        return out.verdict("nilpotent", YES, **extra)
    if v.kind == "periodic":
        out.text(f"F^{v.index} repeats an earlier nonzero power")
    if v.kind == "inconclusive":
        out.text(f"no decision within {a.max_iter} iterations")
        return out.verdict("inconclusive", NO, **extra)
    return out.verdict("cyclic", NO, **extra)


def cmd_saturate(a, out):
    F = _unary(Fm.read_wiring(a.f), "the wiring")
    S = St.saturate(F)
    out.wiring(St.to_wiring(S), a.output)
    return out.verdict("saturated", YES, flows=len(S))


def cmd_flatten(a, out):
    F = _unary(Fm.read_wiring(a.f), "the wiring")
    G = St.flatten(F)
    out.wiring(St.to_wiring(G), a.output)
    return out.verdict("flattened", YES, flows=len(G), height=St.height(G), size=St.size(G))


def cmd_word_rep(a, out):
    out.wiring(Ma.word_rep(a.word, a.alphabet), a.output)
    return out.verdict("ok", YES)


def _observation(path):
    try:
        return Ma.validate_observation(Fm.read_wiring(path))
    except Ma.ObservationError as e:
        raise UsageError(f"{path}: not an observation: {e}") from None


def cmd_check_obs(a, out):
    F = Fm.read_wiring(a.o)
    try:
        O = Ma.validate_observation(F)
    except Ma.ObservationError as e:
        out.text(str(e))
        return out.verdict("not an observation", NO, reason=e.reason)
    return out.verdict("observation", YES, flows=len(O.wiring), stack_height=O.stack_height)


def cmd_accept(a, out):
    O = _observation(a.o)
    ok = Ma.accepts(O, a.word, flatten_threshold=a.flatten_threshold)
    return out.verdict("accept" if ok else "reject", YES if ok else NO)


def cmd_reduce(a, out):
    O = _observation(a.o)
    R = Ma.reduce(O, a.word)
    out.wiring(St.to_wiring(R), a.output)
    return out.verdict("reduced", YES, flows=len(R), height=St.height(R))


def cmd_encode_automaton(a, out):
    M = Fm.read_automaton(a.m)
    O = encode_automaton(M)
    out.wiring(O.wiring, a.output)
    return out.verdict("encoded", YES, flows=len(O.wiring))


def cmd_simulate(a, out):
    M = Fm.read_automaton(a.m)
    M.check_word(a.word)
    r = simulate(M, a.word)
    out.text(f"{r.surface_configs} surface configurations ({r.reason})")
    return out.verdict("accept" if r else "reject", YES if r else NO, reason=r.reason)


_SECTION_WORD = re.compile(r"\s+(?=(?:data|program|goal):)")


def _load_query(args: list[str]) -> Qu.UnaryQuery:
    if len(args) == 1 and (args[0] == "-" or os.path.isfile(args[0])):
        return Fm.read_query(args[0])
    text = " ".join(args)
    if not re.match(r"\s*(data|program|goal):", text):
        raise UsageError(f"{args[0]}: no such file")
    # query text passed inline (e.g. through command substitution)
    return Fm.parse_query(_SECTION_WORD.sub("\n", text), "<args>")


def cmd_query(a, out):
    Q = _load_query(a.q)
    if a.oracle:
        r = Qu.derivation_oracle(Q, a.depth)
        steps = [f"{Qu.fact_text(p)}  --[{f}]-->  {Qu.fact_text(c)}" for p, f, c in r.steps]
        for s in steps:
            out.text(s)
        if r:
            return out.verdict("success", YES, method="oracle", depth=r.depth, witness=steps)
        out.text("search space exhausted" if r.exhausted else f"nothing found up to depth {a.depth}")
        return out.verdict("fail", NO, method="oracle", exhausted=r.exhausted)
    ok = Qu.query_succeeds(Q, flatten_threshold=a.flatten_threshold)
    return out.verdict("success" if ok else "fail", YES if ok else NO, method="saturation")


def cmd_cvp_encode(a, out):
    C = Fm.read_circuit(a.c)
    Q = Qu.encode_cvp(C)
    txt = Fm.format_query(Q)
    if out.as_json or a.output:
        out.artifact(txt, "query", a.output)
        return out.verdict("encoded", YES, flows=len(Q.program))
    # bare query text so that it can be fed back to ``query``
    sys.stdout.write(txt)
    return YES


def cmd_cvp_eval(a, out):
    C = Fm.read_circuit(a.c)
    v = Qu.eval_circuit(C)
    out.text(str(v))
    return out.verdict(str(v), YES if v else NO, value=v)


# -- argument parsing --------------------------------------------------------------

def _common(top: bool) -> argparse.ArgumentParser:
    # Flags are accepted before and after the subcommand; the subcommand copy
    # must not reset what was given before it, hence SUPPRESS there.
    def default(v):
        return v if top else argparse.SUPPRESS
    c = argparse.ArgumentParser(add_help=False)
    c.add_argument("--json", action="store_true", default=default(False), help="structured output")
    c.add_argument("--flatten-threshold", type=_threshold, default=default(St.FLATTEN_THRESHOLD),
                   metavar="H", help="flatten stack wirings higher than H ('none' never)")
    c.add_argument("-v", "--verbose", action="store_true", default=default(False), help="debug logging")
    return c


def build_parser() -> argparse.ArgumentParser:
    common = _common(False)
    p = argparse.ArgumentParser(prog="unilog", description="Unification-based logic programs, "
                                "nilpotency and automata.", parents=[_common(True)])
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help_, *args, output=False):
        s = sub.add_parser(name, help=help_, parents=[common])
        for arg in args:
            s.add_argument(arg)
        if output:
            s.add_argument("-o", "--output", metavar="FILE", help="write the result to FILE")
        s.set_defaults(fn=fn)
        return s

    add("unify", cmd_unify, "most general unifier of two terms", "t", "u")
    add("product", cmd_product, "product of two wirings", "f", "g", output=True)
    s = add("nilpotent", cmd_nilpotent, "decide nilpotency of a wiring", "f")
    s.add_argument("--naive", action="store_true", help="iterate powers instead of saturating")
    s.add_argument("--max-iter", type=_positive, default=1000, metavar="N")
    add("saturate", cmd_saturate, "saturation of a unary wiring", "f", output=True)
    add("flatten", cmd_flatten, "equi-nilpotent wiring of height at most 2", "f", output=True)
    add("word-rep", cmd_word_rep, "representation of a word", "alphabet", "word", output=True)
    add("check-obs", cmd_check_obs, "check the observation shape", "o")
    add("accept", cmd_accept, "does the observation accept the word", "o", "word")
    add("reduce", cmd_reduce, "stack wiring deciding acceptance of the word", "o", "word", output=True)
    add("encode-automaton", cmd_encode_automaton, "observation recognising the automaton's language", "m", output=True)
    add("simulate", cmd_simulate, "run the automaton on a word", "m", "word")
    s = add("query", cmd_query, "does a unary query succeed")
    s.add_argument("q", nargs="+", help="query file, '-' for stdin, or inline query text")
    s.add_argument("--oracle", action="store_true", help="breadth-first derivation search instead")
    s.add_argument("--depth", type=_positive, default=8, metavar="N")
    add("cvp-encode", cmd_cvp_encode, "circuit value instance as a unary query", "c", output=True)
    add("cvp-eval", cmd_cvp_eval, "evaluate a circuit", "c")
    return p


_FILE_ARGS = {"f", "g", "o", "m", "c"}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return ERROR if e.code else YES
    logging.basicConfig(level=logging.DEBUG if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = _Out(a.json)
    try:
        for name in _FILE_ARGS:
            if hasattr(a, name):
                _check_file(getattr(a, name))
        return a.fn(a, out)
    except (UsageError, Fm.FormatError, T.TermSyntaxError, T.ArityError, Ma.WordError,
            AutomatonError, Qu.QueryError, Qu.CircuitError, ValueError) as e:
        print(f"unilog {a.command}: error: {e}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
