"""
First-order terms, unification, substitution, renaming and Skolemization.
Text forms follow the knowledge-base notation: ``representation(sk-1,sk-2)``.
"""
import json
import re
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, Iterable, Iterator, List, Optional, Tuple, Union

_PLAIN_CONSTANT = re.compile(r"^[a-z0-9][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*$")
_SKOLEM_TEXT = re.compile(r"^sk-\d+$")


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Constant:
    name: str

    def __str__(self) -> str:
        if _PLAIN_CONSTANT.match(self.name) and not _SKOLEM_TEXT.match(self.name):
            return self.name
        return json.dumps(self.name)


@dataclass(frozen=True)
class Skolem:
    index: int

    def __str__(self) -> str:
        return f"sk-{self.index}"


@dataclass(frozen=True)
class Compound:
    functor: str
    args: Tuple["Term", ...] = ()

    def __str__(self) -> str:
        if self.functor == "&" and len(self.args) == 2:
            return f"{self.args[0]} & {self.args[1]}"
        if not self.args:
            return self.functor
        return f"{self.functor}({','.join(str(a) for a in self.args)})"


Term = Union[Variable, Constant, Skolem, Compound]


@dataclass(frozen=True)
class Atom:
    """A predicate applied to terms; predicate/arity is the lookup key."""

    predicate: str
    args: Tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def key(self) -> Tuple[str, int]:
        return (self.predicate, len(self.args))

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class HornClause:
    """
    A fact (empty body) or rule. Variables are implicitly universally
    quantified. ``level`` tags which retrieval stage may use a rule.
    """

    head: Atom
    body: Tuple[Atom, ...] = ()
    level: Optional[int] = None
    weight: float = 1.0
    id: str = ""

    @property
    def is_fact(self) -> bool:
        return not self.body

    def __str__(self) -> str:
        if not self.body:
            return str(self.head)
        return f"{self.head} <- {', '.join(str(b) for b in self.body)}"


class Level(IntEnum):
    SUPPORT = 0
    ROLE = 1
    MODIFIER = 2
    CIRCUMSTANCE = 3

    def tag(self) -> str:
        return "support" if self is Level.SUPPORT else f"L{int(self)}"


@dataclass
class LogicalForm:
    """A conjunction of atoms with the abstraction level of each atom."""

    atoms: List[Atom] = field(default_factory=list)
    level_of: Dict[Atom, Level] = field(default_factory=dict)

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def variables(self) -> List[Variable]:
        return variables(self.atoms)

    def __str__(self) -> str:
        return ", ".join(str(a) for a in self.atoms)


class Substitution:
    """
    Finite map from variables to terms. Bindings are kept in triangular form;
    ``apply`` resolves them completely, so applying twice equals applying once.
    """

    __slots__ = ("_bindings",)

    def __init__(self, bindings: Optional[Dict[Variable, Term]] = None):
        self._bindings: Dict[Variable, Term] = dict(bindings or {})

    def walk(self, term: Term) -> Term:
        while isinstance(term, Variable) and term in self._bindings:
            term = self._bindings[term]
        return term

    def bind(self, variable: Variable, term: Term) -> "Substitution":
        bindings = dict(self._bindings)
        bindings[variable] = term
        return Substitution(bindings)

    def resolved(self) -> Dict[Variable, Term]:
        return {v: apply(self, v) for v in self._bindings}

    def restrict(self, wanted: Iterable[Variable]) -> "Substitution":
        return Substitution({v: apply(self, v) for v in wanted if v in self._bindings})

    def get(self, variable: Variable, default=None):
        if variable not in self._bindings:
            return default
        return apply(self, variable)

    def __contains__(self, variable: Variable) -> bool:
        return variable in self._bindings

    def __len__(self) -> int:
        return len(self._bindings)

    def __eq__(self, other) -> bool:
        if isinstance(other, Substitution):
            return self.resolved() == other.resolved()
        if isinstance(other, dict):
            return self.resolved() == other
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(f"{v}↦{t}" for v, t in self.resolved().items())
        return "{" + inner + "}"


def _walk(bindings: Dict[Variable, Term], term: Term) -> Term:
    while isinstance(term, Variable) and term in bindings:
        term = bindings[term]
    return term


def _occurs(bindings: Dict[Variable, Term], variable: Variable, term) -> bool:
    stack = [term]
    while stack:
        t = _walk(bindings, stack.pop())
        if t == variable:
            return True
        if isinstance(t, (Compound, Atom)):
            stack.extend(t.args)
    return False


def _parts(term) -> Optional[Tuple[type, str, Tuple[Term, ...]]]:
    if isinstance(term, Compound):
        return (Compound, term.functor, term.args)
    if isinstance(term, Atom):
        return (Atom, term.predicate, term.args)
    return None


def unify(a, b, s: Optional[Substitution] = None) -> Optional[Substitution]:
    """
    Most general unifier of two terms or atoms extending ``s``.

    Args:
        a: Term or Atom
        b: Term or Atom
        s: Substitution to extend (empty when omitted)

    Returns:
        Substitution, or None when no unifier exists (occurs-check included)
    """
    bindings = dict(s._bindings) if s is not None else {}
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = _walk(bindings, x)
        y = _walk(bindings, y)
        if x == y:
            continue
        if isinstance(x, Variable):
            if _occurs(bindings, x, y):
                return None
            bindings[x] = y
            continue
        if isinstance(y, Variable):
            if _occurs(bindings, y, x):
                return None
            bindings[y] = x
            continue
        px, py = _parts(x), _parts(y)
        if px is None or py is None:
            return None
        if px[0] is not py[0] or px[1] != py[1] or len(px[2]) != len(py[2]):
            return None
        stack.extend(zip(px[2], py[2]))
    return Substitution(bindings)


def apply(s: Substitution, t):
    """Replace every bound variable of ``t`` (term, atom or clause) under ``s``."""
    if not len(s):
        return t
    if isinstance(t, Variable):
        u = s.walk(t)
        return u if isinstance(u, Variable) else apply(s, u)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(apply(s, a) for a in t.args))
    if isinstance(t, Atom):
        return Atom(t.predicate, tuple(apply(s, a) for a in t.args))
    if isinstance(t, HornClause):
        return HornClause(apply(s, t.head), tuple(apply(s, b) for b in t.body),
                          t.level, t.weight, t.id)
    return t


def variables(t) -> List[Variable]:
    """Distinct variables in order of first occurrence."""
    seen: Dict[Variable, None] = {}
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Variable):
            seen.setdefault(x)
        elif isinstance(x, (Compound, Atom)):
            stack.extend(reversed(x.args))
        elif isinstance(x, HornClause):
            stack.extend(reversed((x.head,) + x.body))
        elif isinstance(x, (list, tuple)):
            stack.extend(reversed(x))
    return list(seen)


def is_ground(t) -> bool:
    return not variables(t)


def rename_term(t, mapping: Dict[Variable, Variable]):
    if isinstance(t, Variable):
        return mapping.get(t, t)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(rename_term(a, mapping) for a in t.args))
    if isinstance(t, Atom):
        return Atom(t.predicate, tuple(rename_term(a, mapping) for a in t.args))
    return t


def renaming(t, salt: int) -> Dict[Variable, Variable]:
    return {v: Variable(f"{v.name}_{salt}") for v in variables(t)}


def rename_apart(c, salt: int):
    """
    Alpha-equivalent copy of a clause (or atom/term) whose variables carry the
    suffix ``_<salt>``. Distinct salts give disjoint variable sets.
    """
    mapping = renaming(c, salt)
    if not mapping:
        return c
    if isinstance(c, HornClause):
        return HornClause(rename_term(c.head, mapping),
                          tuple(rename_term(b, mapping) for b in c.body),
                          c.level, c.weight, c.id)
    return rename_term(c, mapping)


class SkolemIssuer:
    """Issues Skolem constants with monotonically increasing indices."""

    def __init__(self, next_index: int = 1):
        self.next_index = next_index

    def issue(self) -> Skolem:
        sk = Skolem(self.next_index)
        self.next_index += 1
        return sk


def skolemize(lf: LogicalForm, counter: SkolemIssuer) -> LogicalForm:
    """
    Existential closure: every distinct free variable becomes a fresh Skolem
    constant, the same variable mapping to the same constant.
    """
    free = lf.variables()
    if not free:
        return lf
    s = Substitution({v: counter.issue() for v in free})
    atoms = [apply(s, a) for a in lf.atoms]
    level_of = {apply(s, a): lvl for a, lvl in lf.level_of.items()}
    return LogicalForm(atoms, level_of)


def conjuncts(build) -> List[Atom]:
    """Flatten an ``&`` conjunction of compounds into atoms, dropping ``true``."""
    out: List[Atom] = []
    stack = [build]
    while stack:
        t = stack.pop()
        if isinstance(t, Compound) and t.functor == "&" and len(t.args) == 2:
            stack.append(t.args[1])
            stack.append(t.args[0])
        elif isinstance(t, (Compound, Constant)) and str(t) == "true":
            continue
        elif isinstance(t, Compound):
            out.append(Atom(t.functor, t.args))
        elif isinstance(t, Constant):
            out.append(Atom(t.name))
        elif isinstance(t, Atom):
            out.append(t)
    return out


def atom(predicate: str, *args: Term) -> Atom:
    return Atom(predicate, tuple(args))


def compound(functor: str, *args: Term) -> Compound:
    return Compound(functor, tuple(args))
