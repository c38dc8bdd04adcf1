"""Text formats: wirings (.w), automata (.aut), circuits (.ckt), queries (.q).

All parsers report problems as :class:`FormatError` carrying the source
name, line and column so the CLI can point at the offending spot.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from . import term as T
from .semiring import Flow, FlowError, Wiring


class FormatError(ValueError):
    def __init__(self, msg: str, source: str = "<input>", line: int = 0, col: int = 0):
        self.msg = msg
        self.source = source
        self.line = line
        self.col = col
        where = f"{source}:{line}:{col}" if line else source
        super().__init__(f"{where}: {msg}")


@dataclass
class _Line:
    no: int
    text: str       # comment stripped, not stripped of leading blanks
    indent: int     # column (0-based) of first non-blank character

    @property
    def body(self) -> str:
        return self.text.strip()


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        cut = raw.split("#", 1)[0].rstrip()
        if cut.strip():
            yield _Line(no, cut, len(cut) - len(cut.lstrip()))


def _term_at(text: str, source: str, line: int, col0: int) -> T.Term:
    try:
        return T.parse_term(text)
    except T.TermSyntaxError as e:
        raise FormatError(str(e).split(" at column")[0], source, line, col0 + e.pos + 1) from None


# -- wirings -----------------------------------------------------------------

ARROW = "<-"


def parse_flow_line(text: str, source: str = "<input>", line: int = 1, col0: int = 0) -> Flow:
    if text.count(ARROW) != 1:
        raise FormatError(f"expected exactly one '{ARROW}' in a flow", source, line, col0 + 1)
    cut = text.index(ARROW)
    head_txt, body_txt = text[:cut], text[cut + len(ARROW):]
    head = _term_at(head_txt, source, line, col0)
    body = _term_at(body_txt, source, line, col0 + cut + len(ARROW))
    try:
        return Flow(head, body)
    except FlowError as e:
        raise FormatError(str(e), source, line, col0 + 1) from None


def parse_wiring(text: str, source: str = "<input>") -> Wiring:
    """One ``HEAD <- BODY`` per line, ``#`` comments, blank lines ignored."""
    return Wiring(parse_flow_line(ln.text, source, ln.no) for ln in _lines(text))


def format_wiring(F) -> str:
    flows = F.sorted() if isinstance(F, Wiring) else sorted(F, key=str)
    return "".join(f"{f}\n" for f in flows)


def read_wiring(path: str) -> Wiring:
    with open(path, encoding="utf-8") as fh:
        return parse_wiring(fh.read(), path)


# -- sectioned files -----------------------------------------------------------

_SECTION = re.compile(r"^([a-z]+):\s*(.*)$")


def _sections(text: str, source: str, allowed: set[str]) -> dict[str, list[tuple[int, int, str]]]:
    """Split ``name:`` sections; items may follow the colon or sit on later lines."""
    out: dict[str, list[tuple[int, int, str]]] = {}
    current: Optional[str] = None
    for ln in _lines(text):
        m = _SECTION.match(ln.body)
        if m and m.group(1) in allowed and ln.indent == 0:
            current = m.group(1)
            if current in out:
                raise FormatError(f"duplicate section '{current}:'", source, ln.no, 1)
            out[current] = []
            rest = m.group(2).strip()
            if rest:
                out[current].append((ln.no, ln.text.index(rest), rest))
            continue
        if m and ln.indent == 0 and m.group(1) not in allowed:
            raise FormatError(f"unknown section '{m.group(1)}:'", source, ln.no, 1)
        if current is None:
            raise FormatError("content before the first section header", source, ln.no, ln.indent + 1)
        out[current].append((ln.no, ln.indent, ln.body))
    return out


def _require(secs: dict, name: str, source: str):
    if name not in secs:
        raise FormatError(f"missing section '{name}:'", source)
    return secs[name]


def _words(items) -> list[tuple[int, int, str]]:
    out = []
    for no, col, txt in items:
        pos = 0
        for w in re.split(r"[\s,]+", txt):
            if w:
                pos = txt.index(w, pos)
                out.append((no, col + pos, w))
                pos += len(w)
    return out


# -- automata ------------------------------------------------------------------

LEFT_END, RIGHT_END, BOTTOM, ANY = "^", "$", "_", "*"

_TRANS = re.compile(
    r"^\(\s*(?P<q>[^;()]+?)\s*;(?P<reads>[^;]*);\s*(?P<top>[^;()\s]+)\s*\)"
    r"\s*->\s*"
    r"\(\s*(?P<q2>[^;()]+?)\s*;(?P<moves>[^;]*);\s*(?P<op>[^;()]+?)\s*\)$"
)


def parse_automaton(text: str, source: str = "<input>"):
    """Sections ``states: init: input: stack: heads: trans:`` (and optional
    ``reject:``).  Transitions read ``(q; c1,...,ck; b) -> (q'; m1,...,mk; op)``
    with ``op`` one of ``pop``, ``push B`` or ``stay``.  ``^``/``$`` are the
    end markers, ``_`` the stack bottom and ``*`` matches any tape symbol.
    """
    from .automata import Automaton, AutomatonError

    secs = _sections(text, source, {"states", "init", "input", "stack", "heads", "trans", "reject"})
    states = [w for _, _, w in _words(_require(secs, "states", source))]
    init_items = _words(_require(secs, "init", source))
    if len(init_items) != 1:
        raise FormatError("'init:' takes exactly one state", source, *(init_items[0][:2] if init_items else (0, 0)))
    init = init_items[0][2]
    alphabet = [w for _, _, w in _words(_require(secs, "input", source))]
    stack = [w for _, _, w in _words(secs.get("stack", []))]
    heads_items = _words(_require(secs, "heads", source))
    try:
        heads = int(heads_items[0][2])
    except (IndexError, ValueError):
        no = heads_items[0][0] if heads_items else 0
        raise FormatError("'heads:' takes a positive integer", source, no, 1) from None
    reject = [w for _, _, w in _words(secs.get("reject", []))]
    trans = []
    for no, col, txt in _require(secs, "trans", source):
        m = _TRANS.match(txt)
        if not m:
            raise FormatError("malformed transition, expected (q; c1,..,ck; b) -> (q'; m1,..,mk; op)",
                              source, no, col + 1)
        reads = [s.strip() for s in m.group("reads").split(",")]
        moves_txt = [s.strip() for s in m.group("moves").split(",")]
        try:
            moves = [int(s) for s in moves_txt]
        except ValueError:
            raise FormatError("moves must be -1, 0 or +1", source, no, col + m.start("moves") + 1) from None
        op_txt = m.group("op").split()
        if op_txt == ["pop"]:
            op = ("pop",)
        elif op_txt == ["stay"]:
            op = ("stay",)
        elif len(op_txt) == 2 and op_txt[0] == "push":
            op = ("push", op_txt[1])
        else:
            raise FormatError("stack action must be 'pop', 'push B' or 'stay'", source, no,
                              col + m.start("op") + 1)
        trans.append(((m.group("q"), tuple(reads), m.group("top")), (m.group("q2"), tuple(moves), op), no, col))
    try:
        return Automaton.build(states, init, alphabet, stack, heads, trans, reject)
    except AutomatonError as e:
        raise FormatError(str(e), source, getattr(e, "line", 0), getattr(e, "col", 0) + 1) from None


def read_automaton(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_automaton(fh.read(), path)


# -- circuits ------------------------------------------------------------------

_GATE = re.compile(r"^gate\s+(?P<id>[A-Za-z0-9_]+)\s*=\s*(?P<kind>and|or|not|zero|one)\s*(?:\((?P<args>[^)]*)\))?\s*$")
_OUTPUT = re.compile(r"^output\s+(?P<id>[A-Za-z0-9_]+)\s*$")


def parse_circuit(text: str, source: str = "<input>"):
    from .queries import Circuit, CircuitError

    gates: dict[str, tuple] = {}
    output = None
    for ln in _lines(text):
        body = ln.body
        m = _GATE.match(body)
        if m:
            gid, kind = m.group("id"), m.group("kind")
            args = tuple(a.strip() for a in (m.group("args") or "").split(",") if a.strip())
            want = {"and": 2, "or": 2, "not": 1, "zero": 0, "one": 0}[kind]
            if len(args) != want:
                raise FormatError(f"gate '{kind}' takes {want} input(s), got {len(args)}", source, ln.no, ln.indent + 1)
            if gid in gates:
                raise FormatError(f"vertex {gid} is the target of more than one gate", source, ln.no, ln.indent + 1)
            gates[gid] = (kind, *args)
            continue
        m = _OUTPUT.match(body)
        if m:
            if output is not None:
                raise FormatError("more than one 'output' line", source, ln.no, ln.indent + 1)
            output = m.group("id")
            continue
        raise FormatError("expected 'gate ID = kind(...)' or 'output ID'", source, ln.no, ln.indent + 1)
    if output is None:
        raise FormatError("missing 'output ID' line", source)
    try:
        return Circuit(gates, output)
    except CircuitError as e:
        raise FormatError(str(e), source) from None


def read_circuit(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_circuit(fh.read(), path)


def format_circuit(C) -> str:
    lines = []
    for gid in C.order():
        kind, *args = C.gates[gid]
        lines.append(f"gate {gid} = {kind}" + (f"({', '.join(args)})" if args else ""))
    lines.append(f"output {C.output}")
    return "\n".join(lines) + "\n"


# -- queries -------------------------------------------------------------------

def parse_query(text: str, source: str = "<input>"):
    from .queries import QueryError, UnaryQuery

    secs = _sections(text, source, {"data", "program", "goal"})
    data = []
    for no, col, txt in secs.get("data", []):
        # several space-separated terms may share a line
        for no2, col2, word in _words([(no, col, txt)]) if " " in txt else [(no, col, txt)]:
            data.append(_term_at(word, source, no2, col2))
    program = []
    for no, col, txt in secs.get("program", []):
        if txt.count(ARROW) > 1:
            for m in re.finditer(r"(\S+)\s*" + re.escape(ARROW) + r"\s*(\S+)", txt):
                program.append(parse_flow_line(m.group(0), source, no, col + m.start()))
        else:
            program.append(parse_flow_line(txt, source, no, col))
    goal_items = _require(secs, "goal", source)
    if len(goal_items) != 1:
        raise FormatError("'goal:' takes exactly one term", source, goal_items[0][0] if goal_items else 0, 1)
    no, col, txt = goal_items[0]
    goal = _term_at(txt, source, no, col)
    try:
        return UnaryQuery.from_terms(data, Wiring(program), goal)
    except QueryError as e:
        raise FormatError(str(e), source) from None


def read_query(path: str):
    if path == "-":
        import sys
        return parse_query(sys.stdin.read(), "<stdin>")
    with open(path, encoding="utf-8") as fh:
        return parse_query(fh.read(), path)


def format_query(Q) -> str:
    lines = ["data:"]
    lines += [f"  {T.to_text(t)}" for t in Q.data_terms()]
    lines.append("program:")
    lines += [f"  {f}" for f in Q.program_flows()]
    lines.append("goal:")
    lines.append(f"  {T.to_text(Q.goal_term())}")
    return "\n".join(lines) + "\n"
