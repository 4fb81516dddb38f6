"""Concrete syntax for processes.

    P ::= "0" | ID "?" "(" ID ")" "." P | ID "!" ID "." P | P "|" P
        | "new" ID "." P | "*" P | "sum" "[" P ("," P)* ";" P "]"

Prefixes bind tighter than "|", "|" associates left, parentheses group.
Parsing resolves binder identifiers to bound indices with a scope stack
and interns free identifiers in first-occurrence order; the symbol table
(identifier -> atom, a bijection) travels with the text, never as shared
state.  Printing opens each binder with the least atom that avoids both
the body's free atoms and their display names.
"""

from __future__ import annotations

import re

from .atoms import Atom
from .namesets import NameSet
from .permtypes import IndexedFamily
from .pisyntax import (
    Bound,
    Free,
    Inp,
    Name,
    Nil,
    Out,
    Par,
    Rep,
    Res,
    Sum,
    Term,
    free_names,
)

KEYWORDS = {"new", "sum"}

_TOKEN = re.compile(r"\s*(?:(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<zero>0)|(?P<punct>[?!.|*(),;\[\]]))")


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnboundedSumSyntax(ParseError):
    """A sum without its mandatory default branch."""


def tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r}", pos)
        pos = m.end()
        if m.group("id"):
            word = m.group("id")
            tokens.append(("kw" if word in KEYWORDS else "id", word, m.start()))
        elif m.group("zero"):
            tokens.append(("zero", "0", m.start()))
        else:
            tokens.append(("punct", m.group("punct"), m.start()))
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, symtab: dict[str, Atom]):
        self.tokens = tokenize(text)
        self.pos = 0
        self.symtab = dict(symtab)
        self.bound: list[str] = []  # innermost binder last

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> None:
        kind, got, at = self.next()
        if got != text or kind == "eof":
            raise ParseError(f"expected {text!r}, found {got or 'end of input'!r}", at)

    def expect_id(self) -> str:
        kind, got, at = self.next()
        if kind != "id":
            raise ParseError(f"expected an identifier, found {got or 'end of input'!r}", at)
        return got

    def intern(self, ident: str) -> Atom:
        if ident not in self.symtab:
            taken = {a.index for a in self.symtab.values()}
            n = 0
            while n in taken:
                n += 1
            self.symtab[ident] = Atom(n)
        return self.symtab[ident]

    def resolve(self, ident: str) -> Name:
        for depth, binder in enumerate(reversed(self.bound)):
            if binder == ident:
                return Bound(depth)
        return Free(self.intern(ident))

    def proc(self) -> Term:
        t = self.prefix()
        while self.peek()[1] == "|":
            self.next()
            t = Par(t, self.prefix())
        return t

    def prefix(self) -> Term:
        kind, text, at = self.next()
        if kind == "zero":
            return Nil()
        if text == "(":
            t = self.proc()
            self.expect(")")
            return t
        if text == "*":
            return Rep(self.prefix())
        if text == "new":
            binder = self.expect_id()
            self.expect(".")
            self.bound.append(binder)
            body = self.prefix()
            self.bound.pop()
            return Res(body)
        if text == "sum":
            return self.sum_body(at)
        if kind == "id":
            chan = self.resolve(text)
            kind2, op, at2 = self.next()
            if op == "?":
                self.expect("(")
                binder = self.expect_id()
                self.expect(")")
                self.expect(".")
                self.bound.append(binder)
                body = self.prefix()
                self.bound.pop()
                return Inp(chan, body)
            if op == "!":
                msg = self.resolve(self.expect_id())
                self.expect(".")
                return Out(chan, msg, self.prefix())
            raise ParseError(f"expected '?' or '!', found {op or 'end of input'!r}", at2)
        raise ParseError(f"expected a process, found {text or 'end of input'!r}", at)

    def sum_body(self, at: int) -> Term:
        self.expect("[")
        entries: list[Term] = []
        if self.peek()[1] not in (";", "]"):
            entries.append(self.proc())
            while self.peek()[1] == ",":
                self.next()
                entries.append(self.proc())
        if self.peek()[1] != ";":
            raise UnboundedSumSyntax("sum needs a default branch after ';'", at)
        self.next()
        default = self.proc()
        self.expect("]")
        return Sum(IndexedFamily(tuple(entries), default))


def parse(text: str, symtab: dict[str, Atom] | None = None) -> tuple[Term, dict[str, Atom]]:
    p = _Parser(text, symtab or {})
    t = p.proc()
    kind, text_, at = p.peek()
    if kind != "eof":
        raise ParseError(f"trailing input {text_!r}", at)
    return t, p.symtab


def render_atom(a: Atom, symtab: dict[str, Atom]) -> str:
    for name, atom in symtab.items():
        if atom == a:
            return name
    candidate = f"x{a.index}"
    k = 0
    while candidate in symtab:  # user name wins, the auto name steps aside
        k += 1
        candidate = f"x{a.index}_{k}"
    return candidate


def _render_name(n: Name, symtab: dict[str, Atom]) -> str:
    if isinstance(n, Free):
        return render_atom(n.atom, symtab)
    raise ValueError(f"cannot print a dangling bound index {n.level}")


def _binder_atom(body: Term, symtab: dict[str, Atom]) -> Atom:
    # Least atom whose display name cannot capture anything free in the body.
    fn = free_names(body)
    taken_atoms = set(symtab.values())
    taken_names = {render_atom(a, symtab) for a in fn.atoms()}
    i = 0
    while True:
        w = Atom(i)
        if w not in fn and w not in taken_atoms and render_atom(w, symtab) not in taken_names:
            return w
        i += 1


def print_term(t: Term, symtab: dict[str, Atom] | None = None) -> str:
    symtab = symtab or {}

    def par_level(t: Term) -> str:
        if isinstance(t, Par):
            return f"{par_level(t.left)} | {prefix_level(t.right)}"
        return prefix_level(t)

    def prefix_level(t: Term) -> str:
        match t:
            case Nil():
                return "0"
            case Par():
                return f"({par_level(t)})"
            case Rep(b):
                return f"*({par_level(b)})"
            case Res(b):
                w = _binder_atom(b, symtab)
                return f"new {render_atom(w, symtab)}. {prefix_level(b.open_at(0, w))}"
            case Inp(c, b):
                w = _binder_atom(b, symtab)
                return (
                    f"{_render_name(c, symtab)}?({render_atom(w, symtab)})."
                    f" {prefix_level(b.open_at(0, w))}"
                )
            case Out(c, m, k):
                return f"{_render_name(c, symtab)}!{_render_name(m, symtab)}. {prefix_level(k)}"
            case Sum(f):
                entries = ", ".join(par_level(e) for e in f.entries)
                return f"sum [{entries}; {par_level(f.default)}]"
        raise TypeError(f"not a term: {t!r}")

    return par_level(t)


def render_nameset(s: NameSet, symtab: dict[str, Atom] | None = None) -> str:
    symtab = symtab or {}
    if s.is_finite():
        return "{" + ", ".join(render_atom(a, symtab) for a in s.atoms()) + "}"
    if s.is_cofinite():
        return "all \\ " + render_nameset(s.complement(), symtab)
    base = f"mod {s.modulus} residues {{{', '.join(map(str, sorted(s.residues)))}}}"
    added = [a for a, v in s.exceptions if v]
    removed = [a for a, v in s.exceptions if not v]
    if added:
        base += " + {" + ", ".join(render_atom(Atom(a), symtab) for a in added) + "}"
    if removed:
        base += " - {" + ", ".join(render_atom(Atom(a), symtab) for a in removed) + "}"
    return base
