"""
Logical forms from chart analyses.

Builds are composed by unification: each rule is renamed apart, each child's
build is unified with the rule's pattern for that child, and the left-hand
build is read off the resulting substitution. Lexical builds come from the
grammar's LEX templates with ``Lemma`` bound to the entry constant.

Atoms are then classified into three abstraction levels plus support atoms:
    1  eventuality/4, action/5 and the six-slot parameter predicates
    2  purpose, method, tool, beneficiary, manner, time, location (Value, Ev)
    3  circumstance(Relation, X, Y)
    support  object/2, property/2, relationship/3
"""
import itertools
import logging
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Set, Tuple

from logdoc.errors import CompositionError, UnknownPredicateFamily
from logdoc.lexicon import Lexicon, analyze_word
from logdoc.terms import (
    Atom,
    Compound,
    Constant,
    Level,
    LogicalForm,
    Substitution,
    Term,
    Variable,
    apply,
    conjuncts,
    rename_term,
    renaming,
    unify,
    variables,
)

if TYPE_CHECKING:
    from logdoc.chart_parser import Analysis, Edge
    from logdoc.resources import ResourceSet

logger = logging.getLogger(__name__)

PARAMETERS = ("locative", "temporal", "active", "objective", "dative", "ambient")
MODIFIER_PREDICATES = ("purpose", "method", "tool", "beneficiary", "manner", "time", "location")
SUPPORT_PREDICATES = {("object", 2), ("property", 2), ("relationship", 3)}
FUNCTION_BUILDS = {"det", "rel", "adv", "poss"}
CLOSED_CATEGORIES = {"det", "poss", "prep"}

# Prepositions that fill parameter slots of movement verbs.
PARAMETER_SLOTS = {
    "from": "source",
    "via": "path",
    "along": "path",
    "through": "path",
    "to": "goal",
    "into": "goal",
    "onto": "goal",
}

STOP_WORDS = frozenset("""
    a an the this that these those some any every each no
    of in on at by for with from to into onto via along through against about
    over under between among after before during without within upon
    and or but nor so yet if than as
    i me my mine we us our you your he him his she her it its they them their
    who whom whose which what where when why how
    is are was were be been being am do does did has have had will would
    shall should can could may might must not
""".split())

_salts = itertools.count(1)


class SchemeTable:
    """Predicate families and the (preposition, semantic type) -> modifier table."""

    def __init__(self):
        self.roles: Set[Tuple[str, int]] = {("eventuality", 4), ("action", 5)}
        self.roles.update((p, 6) for p in PARAMETERS)
        self.modifier_predicates = set(MODIFIER_PREDICATES)
        self.support = set(SUPPORT_PREDICATES)
        self._modifiers: List[Tuple[str, str, str]] = []

    def add_modifier(self, preposition: str, semtype: str, predicate: str) -> None:
        if predicate not in self.modifier_predicates:
            raise ValueError(f"{predicate} is not a modifier predicate")
        self._modifiers.append((preposition, semtype, predicate))

    def modifier_for(self, preposition: str, semtypes) -> Optional[str]:
        for prep, semtype, predicate in self._modifiers:
            if prep == preposition and semtype in semtypes:
                return predicate
        return None

    def is_modifier(self, a: Atom) -> bool:
        return a.arity == 2 and a.predicate in self.modifier_predicates

    def classify(self, a: Atom) -> Level:
        if a.key in self.roles:
            return Level.ROLE
        if self.is_modifier(a):
            return Level.MODIFIER
        if a.key == ("circumstance", 3):
            return Level.CIRCUMSTANCE
        if a.key in self.support:
            return Level.SUPPORT
        raise UnknownPredicateFamily(a.predicate, a.arity)


def classify_level(a: Atom, scheme: Optional[SchemeTable] = None) -> Level:
    return (scheme or SchemeTable()).classify(a)


# -- composition ----------------------------------------------------------------

def build_of(edge: "Edge", resources: "ResourceSet") -> Term:
    """
    Semantic build of an edge, composed bottom-up by unification.

    Raises:
        CompositionError: a child's build does not unify with the rule pattern
    """
    if edge.is_lexical:
        template = resources.grammar.template_for(edge.entry)
        if template is None:
            raise CompositionError("lex", f"no lexical template for {edge.entry.category}")
        mapping = renaming(template.build, next(_salts))
        build = rename_term(template.build, mapping)
        lemma = mapping.get(Variable("Lemma"), Variable("Lemma"))
        return apply(Substitution({lemma: Constant(edge.entry.constant)}), build)

    rule = edge.rule
    mapping = renaming([rule.lhs.build] + [p.build for p in rule.rhs], next(_salts))
    s = Substitution()
    for pattern, child in zip(rule.rhs, edge.children):
        if pattern.build is None:
            continue
        s = unify(rename_term(pattern.build, mapping), build_of(child, resources), s)
        if s is None:
            raise CompositionError(rule.id)
    if rule.lhs.build is None:
        return Constant("true")
    return apply(s, rename_term(rule.lhs.build, mapping))


def peel(build: Term) -> List[Atom]:
    """Strip ``l(V, Body)`` and ``p(R, X, Body)`` layers and flatten the body."""
    while isinstance(build, Compound):
        if build.functor == "l" and len(build.args) == 2:
            build = build.args[1]
        elif build.functor == "p" and len(build.args) == 3:
            build = build.args[2]
        else:
            break
    return [a for a in conjuncts(build)
            if not (a.predicate in FUNCTION_BUILDS and a.arity == 1)]


def _events(atoms: Sequence[Atom], scheme: SchemeTable) -> Set[Term]:
    return {a.args[1] for a in atoms if a.key in scheme.roles}


def _filler_types(filler: Term, atoms: Sequence[Atom], lexicon: Lexicon):
    if isinstance(filler, Constant):
        return lexicon.semtypes_of(filler.name)
    types = set()
    for a in atoms:
        if a.key == ("object", 2) and a.args[1] == filler and isinstance(a.args[0], Constant):
            types |= lexicon.semtypes_of(a.args[0].name, "noun")
    return types


def _normalize_modifiers(atoms: List[Atom], scheme: SchemeTable) -> List[Atom]:
    """Level-2 atoms take (Value, Eventuality) order."""
    events = _events(atoms, scheme)
    out = []
    for a in atoms:
        if scheme.is_modifier(a) and a.args[0] in events and a.args[1] not in events:
            a = Atom(a.predicate, (a.args[1], a.args[0]))
        out.append(a)
    return out


def _map_modifiers(atoms: List[Atom], resources: "ResourceSet") -> List[Atom]:
    scheme = resources.scheme
    events = _events(atoms, scheme)
    out = []
    for a in atoms:
        if a.key == ("circumstance", 3) and isinstance(a.args[0], Constant) \
                and a.args[1] in events:
            filler = a.args[2]
            predicate = scheme.modifier_for(a.args[0].name,
                                            _filler_types(filler, atoms, resources.lexicon))
            if predicate:
                a = Atom(predicate, (filler, a.args[1]))
        out.append(a)
    return out


def _parameter_frames(atoms: List[Atom], resources: "ResourceSet") -> List[Atom]:
    """Intransitive movement verbs with source/path/goal material take the six-slot form."""
    out = list(atoms)
    for a in atoms:
        if a.key != ("eventuality", 4) or not isinstance(a.args[0], Constant) \
                or not isinstance(a.args[3], Variable):
            continue
        parameter = resources.lexicon.param_of(a.args[0].name)
        if parameter is None:
            continue
        event = a.args[1]
        slots: Dict[str, Term] = {}
        consumed = []
        for c in atoms:
            if c.key != ("circumstance", 3) or c.args[1] != event \
                    or not isinstance(c.args[0], Constant):
                continue
            slot = PARAMETER_SLOTS.get(c.args[0].name)
            if slot and slot not in slots:
                slots[slot] = c.args[2]
                consumed.append(c)
        if not consumed:
            continue
        salt = next(_salts)
        filled = [slots.get(s, Variable(f"_{s.capitalize()}{salt}"))
                  for s in ("source", "path", "goal")]
        frame = Atom(parameter, (a.args[0], event, *filled, a.args[2]))
        out = [frame if x == a else x for x in out if x not in consumed]
    return out


def finish(atoms: Sequence[Atom], resources: "ResourceSet") -> LogicalForm:
    """Post-process composed atoms and attach a level to each."""
    atoms = _normalize_modifiers(list(atoms), resources.scheme)
    atoms = _map_modifiers(atoms, resources)
    atoms = _parameter_frames(atoms, resources)
    atoms = list(dict.fromkeys(atoms))
    level_of = {a: resources.scheme.classify(a) for a in atoms}
    return LogicalForm(atoms, level_of)


def compose(analysis: "Analysis", resources: "ResourceSet") -> List[LogicalForm]:
    """
    Logical forms of one analysis; unresolved slots stay free variables.

    Args:
        analysis (Analysis): ranked analysis from the chart parser
        resources (ResourceSet): grammar templates, lexicon and scheme table

    Returns:
        List[LogicalForm]: one logical form for the analysis' reading
    """
    lf = finish(peel(build_of(analysis.edge, resources)), resources)
    logger.debug("Composed %s: %s", analysis.edge, lf)
    return [lf]


def compose_fragments(fragments: Sequence["Analysis"], resources: "ResourceSet") -> LogicalForm:
    """Conjunction of the partial analyses of one input."""
    atoms: List[Atom] = []
    for fragment in fragments:
        atoms.extend(peel(build_of(fragment.edge, resources)))
    return finish(atoms, resources)


def conjoin(*forms: LogicalForm) -> LogicalForm:
    atoms: List[Atom] = []
    level_of: Dict[Atom, Level] = {}
    for lf in forms:
        for a in lf.atoms:
            if a not in level_of:
                atoms.append(a)
                level_of[a] = lf.level_of.get(a, Level.SUPPORT)
    return LogicalForm(atoms, level_of)


def keyword_fallback(tokens: Sequence[str], lexicon: Lexicon) -> LogicalForm:
    """
    ``object(lemma, X)`` for every content word with a fresh variable each;
    the known lemma is preferred over the surface form.
    """
    atoms: List[Atom] = []
    for token in tokens:
        if token in STOP_WORDS:
            continue
        entries = analyze_word(token, lexicon)
        if entries and all(e.category in CLOSED_CATEGORIES for e in entries):
            continue
        nouns = [e for e in entries if e.category == "noun"]
        lemma = (nouns or entries)[0].lemma if entries else token
        atoms.append(Atom("object", (Constant(lemma), Variable(f"_K{next(_salts)}"))))
    return LogicalForm(atoms, {a: Level.SUPPORT for a in atoms})


def canonical(lf: LogicalForm) -> str:
    """Text of a logical form with variables renamed in order of first occurrence."""
    mapping = {v: Variable(f"V{i}") for i, v in enumerate(variables(lf.atoms), 1)}
    return ", ".join(str(rename_term(a, mapping)) for a in lf.atoms)


def format_lf(lf: LogicalForm) -> str:
    """One atom per line with its level tag."""
    lines = []
    for a in lf.atoms:
        level = lf.level_of.get(a)
        tag = level.tag() if level is not None else "?"
        lines.append(f"{tag:<8} {a}")
    return "\n".join(lines)
