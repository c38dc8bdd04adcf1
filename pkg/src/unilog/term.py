"""First-order terms, substitutions and syntactic unification.

Terms are immutable and hash-consed lightly (the hash is computed once at
construction).  Function symbols are plain strings whose arity is recorded
in a :class:`SymbolTable` the first time they are seen.
"""
from __future__ import annotations

import re
import threading
from typing import Iterable, Iterator, Mapping, Optional

DOT = "."
STAR = "star"


class ArityError(ValueError):
    pass


class TermSyntaxError(ValueError):
    def __init__(self, msg: str, text: str, pos: int):
        super().__init__(f"{msg} at column {pos + 1}: {text!r}")
        self.text = text
        self.pos = pos


class SymbolTable:
    """Interned symbol names with their arity; safe under concurrent use."""

    def __init__(self):
        self._arity: dict[str, int] = {}
        self._lock = threading.Lock()
        self.intern(DOT, 2)
        self.intern(STAR, 0)

    def intern(self, name: str, arity: int) -> str:
        with self._lock:
            known = self._arity.setdefault(name, arity)
        if known != arity:
            raise ArityError(f"symbol {name!r} used with arity {arity}, declared with arity {known}")
        return name

    def arity(self, name: str) -> Optional[int]:
        return self._arity.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._arity

    def snapshot(self) -> dict[str, int]:
        with self._lock:
            return dict(self._arity)

    def restore(self, snap: dict[str, int]) -> None:
        """Forget every symbol declared since ``snap`` was taken."""
        with self._lock:
            self._arity = dict(snap)


SYMBOLS = SymbolTable()


class Term:
    __slots__ = ()

    def is_var(self) -> bool:
        return isinstance(self, Var)


class Var(Term):
    __slots__ = ("name", "_hash")

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("var", name))

    height = 0

    def __eq__(self, other):
        return self is other or (isinstance(other, Var) and other.name == self.name)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r})"

    def __str__(self):
        return self.name


class App(Term):
    __slots__ = ("fn", "args", "height", "_hash")

    def __init__(self, fn: str, args: tuple = ()):
        self.fn = fn
        self.args = args
        self.height = 1 + max(a.height for a in args) if args else 0
        self._hash = hash((fn, args))

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, App)
            and self._hash == other._hash
            and self.fn == other.fn
            and self.args == other.args
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"App({self.fn!r}, {self.args!r})"

    def __str__(self):
        return to_text(self)


def make(fn: str, *args: Term, table: SymbolTable = SYMBOLS) -> App:
    """Build an application, checking the symbol's arity against ``table``."""
    table.intern(fn, len(args))
    return App(fn, tuple(args))


def const(name: str) -> App:
    return make(name)


def dot(*parts: Term) -> Term:
    """Right-associated bullet chain ``a . b . c`` = ``.(a, .(b, c))``."""
    if not parts:
        raise ValueError("dot() needs at least one term")
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = App(DOT, (p, out))
    return out


STAR_T = App(STAR)


def unary_chain(symbols: Iterable[str], base: Term) -> Term:
    """``tau(base)`` for a sequence of unary symbols ``tau``."""
    out = base
    for s in reversed(tuple(symbols)):
        out = App(s, (out,))
    return out


def unary_spine(t: Term) -> tuple[tuple[str, ...], Term]:
    """Split ``g1(g2(...gn(b)))`` into ``((g1, ..., gn), b)``; b is not unary."""
    syms = []
    while isinstance(t, App) and len(t.args) == 1:
        syms.append(t.fn)
        t = t.args[0]
    return tuple(syms), t


def height(t: Term) -> int:
    return t.height


def variables(t: Term) -> set[Var]:
    out: set[Var] = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Var):
            out.add(s)
        else:
            stack.extend(s.args)
    return out


def iter_vars(t: Term) -> Iterator[Var]:
    """Variables in left-to-right order of occurrence (with repeats)."""
    if isinstance(t, Var):
        yield t
    else:
        for a in t.args:
            yield from iter_vars(a)


def is_closed(t: Term) -> bool:
    return not variables(t)


def symbols_of(t: Term) -> set[str]:
    out: set[str] = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, App):
            out.add(s.fn)
            stack.extend(s.args)
    return out


def size(t: Term) -> int:
    """Number of function-symbol occurrences."""
    if isinstance(t, Var):
        return 0
    return 1 + sum(size(a) for a in t.args)


# -- substitutions ---------------------------------------------------------

Substitution = Mapping[Var, Term]


def apply_subst(theta: Substitution, t: Term) -> Term:
    if not theta:
        return t
    if isinstance(t, Var):
        return theta.get(t, t)
    if not t.args:
        return t
    args = tuple(apply_subst(theta, a) for a in t.args)
    if args == t.args:
        return t
    return App(t.fn, args)


def rename(t: Term, mapping: Mapping[Var, Var]) -> Term:
    return apply_subst(mapping, t)


def _occurs(v: Var, t: Term, bindings: dict) -> bool:
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Var):
            if s == v:
                return True
            b = bindings.get(s)
            if b is not None:
                stack.append(b)
        else:
            stack.extend(s.args)
    return False


def _walk(t: Term, bindings: dict) -> Term:
    while isinstance(t, Var):
        b = bindings.get(t)
        if b is None:
            return t
        t = b
    return t


def _resolve(t: Term, bindings: dict) -> Term:
    t = _walk(t, bindings)
    if isinstance(t, Var) or not t.args:
        return t
    return App(t.fn, tuple(_resolve(a, bindings) for a in t.args))


def unify(t: Term, u: Term) -> Optional[dict[Var, Term]]:
    """Most general unifier of ``t`` and ``u``, or ``None``.

    Equations are reduced Martelli-Montanari style (decompose, delete,
    orient, eliminate with occurs check).  Variable/variable equations bind
    the left variable to the right one, so the result is deterministic.
    The returned substitution is idempotent.
    """
    bindings: dict[Var, Term] = {}
    todo = [(t, u)]
    while todo:
        a, b = todo.pop()
        a = _walk(a, bindings)
        b = _walk(b, bindings)
        if a == b:
            continue
        if isinstance(a, Var):
            if _occurs(a, b, bindings):
                return None
            bindings[a] = b
        elif isinstance(b, Var):
            if _occurs(b, a, bindings):
                return None
            bindings[b] = a
        else:
            if a.fn != b.fn or len(a.args) != len(b.args):
                return None
            todo.extend(zip(reversed(a.args), reversed(b.args)))
    return {v: _resolve(v, bindings) for v in bindings}


def match(pattern: Term, target: Term) -> Optional[dict[Var, Term]]:
    """One-way matching: theta with theta(pattern) == target, target untouched."""
    theta: dict[Var, Term] = {}
    todo = [(pattern, target)]
    while todo:
        p, q = todo.pop()
        if isinstance(p, Var):
            bound = theta.get(p)
            if bound is None:
                theta[p] = q
            elif bound != q:
                return None
        elif isinstance(q, Var) or p.fn != q.fn or len(p.args) != len(q.args):
            return None
        else:
            todo.extend(zip(p.args, q.args))
    return theta


def rename_apart(t: Term, avoid: set[Var], prefix: str = "_R") -> Term:
    mapping = {}
    i = 0
    for v in variables(t):
        if v in avoid:
            while Var(f"{prefix}{i}") in avoid:
                i += 1
            mapping[v] = Var(f"{prefix}{i}")
            i += 1
    return rename(t, mapping)


def matchable(t: Term, u: Term) -> bool:
    """True iff renamed-apart copies of t and u unify (i.e. not disjoint)."""
    return unify(t, rename_apart(u, variables(t))) is not None


def canonical_renaming(*terms: Term, prefix: str = "X") -> dict[Var, Var]:
    mapping: dict[Var, Var] = {}
    for t in terms:
        for v in iter_vars(t):
            if v not in mapping:
                mapping[v] = Var(f"{prefix}{len(mapping)}")
    return mapping


def canonical(*terms: Term) -> tuple[Term, ...]:
    """Rename variables to X0, X1, ... by first occurrence across ``terms``."""
    mapping = canonical_renaming(*terms)
    return tuple(rename(t, mapping) for t in terms)


# -- text ------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_']*)|(\()|(\))|(,)|(\.))")
RESERVED_UPPER = {"START", "ACCEPT"}


def is_var_name(name: str) -> bool:
    return name[0].isupper() and name not in RESERVED_UPPER


def to_text(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if t.fn == DOT:
        left, right = t.args
        ls = to_text(left)
        if isinstance(left, App) and left.fn == DOT:
            ls = f"({ls})"
        return f"{ls} . {to_text(right)}"
    if not t.args:
        return t.fn
    return f"{t.fn}({', '.join(to_text(a) for a in t.args)})"


class _Parser:
    def __init__(self, text: str, table: SymbolTable):
        self.text = text
        self.table = table
        self.toks = []
        pos = 0
        text_len = len(text.rstrip())
        while pos < text_len:
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise TermSyntaxError("unexpected character", text, pos)
            start = m.start(m.lastindex)
            self.toks.append((m.group(m.lastindex), m.lastindex, start))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def take(self, kind=None):
        tok = self.peek()
        if tok[1] is None or (kind is not None and tok[1] != kind):
            what = {2: "'('", 3: "')'", 4: "','", 1: "identifier"}.get(kind, "token")
            raise TermSyntaxError(f"expected {what}", self.text, tok[2])
        self.i += 1
        return tok

    def term(self) -> Term:
        left = self.atom()
        if self.peek()[1] == 5:
            self.take(5)
            right = self.term()
            return App(self.table.intern(DOT, 2), (left, right))
        return left

    def atom(self) -> Term:
        val, kind, pos = self.peek()
        if kind == 2:
            self.take(2)
            t = self.term()
            self.take(3)
            return t
        if kind != 1:
            raise TermSyntaxError("expected a term", self.text, pos)
        self.take(1)
        if is_var_name(val):
            if self.peek()[1] == 2:
                raise TermSyntaxError(f"variable {val} cannot be applied", self.text, pos)
            return Var(val)
        args = []
        if self.peek()[1] == 2:
            self.take(2)
            args.append(self.term())
            while self.peek()[1] == 4:
                self.take(4)
                args.append(self.term())
            self.take(3)
        try:
            self.table.intern(val, len(args))
        except ArityError as e:
            raise TermSyntaxError(str(e), self.text, pos) from None
        return App(val, tuple(args))


def parse_term(text: str, table: SymbolTable = SYMBOLS) -> Term:
    """Parse ``text``; uppercase-initial names are variables, ``.`` is the
    right-associative bullet, ``star`` is the distinguished constant."""
    p = _Parser(text, table)
    t = p.term()
    val, kind, pos = p.peek()
    if kind is not None:
        raise TermSyntaxError("trailing input", text, pos)
    return t
