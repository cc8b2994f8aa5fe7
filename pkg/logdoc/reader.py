"""
Reader for the shared term notation used by knowledge-base files, postulates,
grammar builds, inheritance files and command-line goals.

Variables start with an uppercase letter or underscore, constants with a
lowercase letter or digit; ``sk-N`` reads as a Skolem constant; ``_`` is an
anonymous variable; ``A & B`` is infix conjunction inside builds.
"""
import itertools
import json
import re
from typing import List, Optional, Tuple

from logdoc.errors import TermSyntaxError
from logdoc.terms import Atom, Compound, Constant, HornClause, Skolem, Term, Variable

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<arrow>->|<-)
  | (?P<number>\d+(?:\.\d+)?(?![A-Za-z_]))
  | (?P<name>[a-z][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<punct>[()\[\]{},=&*:./@|])
""", re.VERBOSE)

_SKOLEM = re.compile(r"^sk-(\d+)$")
_anonymous = itertools.count(1)

Token = Tuple[str, str, int]


def tokenize_terms(text: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise TermSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    return tokens


class TermParser:
    """Recursive-descent parser over a token list; loaders drive it directly."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize_terms(text)
        self.pos = 0

    # -- token access -------------------------------------------------------

    def peek(self, offset: int = 0) -> Optional[Token]:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, value: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok[0] in ("punct", "arrow") and tok[1] == value

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise TermSyntaxError("unexpected end of input", self.text, len(self.text))
        self.pos += 1
        return tok

    def expect(self, value: str) -> Token:
        tok = self.peek()
        if tok is None or tok[1] != value or tok[0] not in ("punct", "arrow"):
            found = "end of input" if tok is None else repr(tok[1])
            where = len(self.text) if tok is None else tok[2]
            raise TermSyntaxError(f"expected {value!r}, found {found}", self.text, where)
        self.pos += 1
        return tok

    def expect_kind(self, kind: str) -> Token:
        tok = self.peek()
        if tok is None or tok[0] != kind:
            found = "end of input" if tok is None else repr(tok[1])
            where = len(self.text) if tok is None else tok[2]
            raise TermSyntaxError(f"expected {kind}, found {found}", self.text, where)
        self.pos += 1
        return tok

    def error(self, message: str) -> TermSyntaxError:
        tok = self.peek()
        return TermSyntaxError(message, self.text, len(self.text) if tok is None else tok[2])

    # -- grammar ------------------------------------------------------------

    def parse_term(self) -> Term:
        left = self.parse_primary()
        if self.at("&"):
            self.next()
            return Compound("&", (left, self.parse_term()))
        return left

    def parse_primary(self) -> Term:
        kind, value, pos = self.next()
        if kind == "name":
            if self.at("("):
                return Compound(value, self.parse_args())
            sk = _SKOLEM.match(value)
            if sk:
                return Skolem(int(sk.group(1)))
            return Constant(value)
        if kind == "var":
            if value == "_":
                return Variable(f"_G{next(_anonymous)}")
            return Variable(value)
        if kind == "number":
            return Constant(value)
        if kind == "string":
            return Constant(json.loads(value))
        if kind == "punct" and value == "@" and self.at("("):
            return Compound("@", self.parse_args())
        if kind == "punct" and value == "(":
            inner = self.parse_term()
            self.expect(")")
            return inner
        raise TermSyntaxError(f"unexpected {value!r}", self.text, pos)

    def parse_args(self) -> Tuple[Term, ...]:
        self.expect("(")
        args = [self.parse_term()]
        while self.at(","):
            self.next()
            args.append(self.parse_term())
        self.expect(")")
        return tuple(args)

    def parse_atom(self) -> Atom:
        tok = self.peek()
        term = self.parse_primary()
        if isinstance(term, Compound):
            return Atom(term.functor, term.args)
        if isinstance(term, Constant):
            return Atom(term.name)
        where = len(self.text) if tok is None else tok[2]
        raise TermSyntaxError(f"not an atom: {term}", self.text, where)

    def parse_atoms(self) -> List[Atom]:
        atoms = [self.parse_atom()]
        while self.at(",") or self.at("&"):
            self.next()
            atoms.append(self.parse_atom())
        return atoms

    def parse_clause(self) -> HornClause:
        head = self.parse_atom()
        body: List[Atom] = []
        if self.at("<-"):
            self.next()
            body = self.parse_atoms()
        return HornClause(head, tuple(body))

    def finish(self) -> None:
        if self.at("."):
            self.next()
        if not self.at_end():
            raise self.error(f"unexpected trailing input {self.peek()[1]!r}")


def parse_term(text: str) -> Term:
    p = TermParser(text)
    t = p.parse_term()
    p.finish()
    return t


def parse_atom(text: str) -> Atom:
    p = TermParser(text)
    a = p.parse_atom()
    p.finish()
    return a


def parse_atoms(text: str) -> List[Atom]:
    """Comma- or ``&``-separated conjunction of atoms; empty text gives []."""
    p = TermParser(text)
    if p.at_end():
        return []
    atoms = p.parse_atoms()
    p.finish()
    return atoms


def parse_clause(text: str) -> HornClause:
    p = TermParser(text)
    c = p.parse_clause()
    p.finish()
    return c
