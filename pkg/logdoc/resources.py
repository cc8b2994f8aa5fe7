"""
Grammar, preference (spec), meaning postulate and inheritance resources.

Grammar file:
    LEX category[features]: template
    RULE id: lhs -> rhs... { guards }
        (continuation lines are indented; ``*`` marks the head child,
        the last child by default)

Spec file:
    SPEC id value: guards
    PHRASE word word... value
    MODIFIER preposition semtype predicate
    DEFAULT value

Postulate file:  RULE level weight id: head <- body
Inheritance file: isa(child, parent)
"""
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from botocore.exceptions import BotoCoreError, ClientError

from logdoc import storage
from logdoc.errors import LogDocError, ResourceError
from logdoc.knowledge_base import parse_rule_line
from logdoc.lexicon import LexEntry, Lexicon, parse_lexicon
from logdoc.reader import TermParser, parse_atom
from logdoc.semantics import SchemeTable
from logdoc.terms import Constant, HornClause, Term, Variable, variables

logger = logging.getLogger(__name__)

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")

GUARD_KINDS = {"semtype", "transitivity", "spec"}


def bundled_path(name: str) -> str:
    """Path of a resource file shipped in ``logdoc/data``."""
    return os.path.join(DATA_DIR, name)


@dataclass(frozen=True)
class Pattern:
    """``category[feature=value,...](build)``; values are constants or variables."""

    category: str
    features: Tuple[Tuple[str, Term], ...] = ()
    build: Optional[Term] = None

    def __str__(self) -> str:
        text = self.category
        if self.features:
            text += "[" + ",".join(f"{k}={v}" for k, v in self.features) + "]"
        if self.build is not None:
            text += f"({self.build})"
        return text


@dataclass(frozen=True)
class Guard:
    """
    Non-input-consuming test. ``path`` addresses a constituent by 1-based
    child indexes (``(1, 2)`` is the second child of the first child).
    """

    kind: str
    path: Tuple[int, ...] = ()
    value: str = ""

    def __str__(self) -> str:
        if self.kind == "spec":
            return f"spec({self.value})"
        return f"{self.kind}({'.'.join(str(i) for i in self.path)},{self.value})"


@dataclass(frozen=True)
class GrammarRule:
    id: str
    lhs: Pattern
    rhs: Tuple[Pattern, ...]
    head: int
    guards: Tuple[Guard, ...] = ()
    location: str = ""

    @property
    def is_unary(self) -> bool:
        return len(self.rhs) == 1

    @property
    def hard_guards(self) -> Tuple[Guard, ...]:
        return tuple(g for g in self.guards if g.kind != "spec")

    @property
    def spec_ids(self) -> Tuple[str, ...]:
        return tuple(g.value for g in self.guards if g.kind == "spec")

    def __str__(self) -> str:
        rhs = " ".join(("*" if i == self.head else "") + str(p) for i, p in enumerate(self.rhs))
        guards = " {" + " ".join(str(g) for g in self.guards) + "}" if self.guards else ""
        return f"{self.lhs} -> {rhs}{guards}"


@dataclass(frozen=True)
class LexTemplate:
    """Lexical semantic build for a category; ``Lemma`` is bound to the entry constant."""

    category: str
    features: Tuple[Tuple[str, str], ...]
    build: Term

    def matches(self, entry: LexEntry) -> bool:
        if entry.category != self.category:
            return False
        return all(entry.features.get(k) == v for k, v in self.features)


@dataclass
class Grammar:
    rules: List[GrammarRule] = field(default_factory=list)
    templates: List[LexTemplate] = field(default_factory=list)

    def __post_init__(self):
        self._by_id = {r.id: r for r in self.rules}

    def rule(self, rule_id: str) -> GrammarRule:
        return self._by_id[rule_id]

    def template_for(self, entry: LexEntry) -> Optional[LexTemplate]:
        for template in self.templates:
            if template.matches(entry):
                return template
        return None

    def categories(self) -> FrozenSet[str]:
        return frozenset({r.lhs.category for r in self.rules} | {t.category for t in self.templates})

    def __len__(self) -> int:
        return len(self.rules)


@dataclass(frozen=True)
class SpecRule:
    """Subtractive preference correction applied when all its guards hold."""

    id: str
    value: float
    guards: Tuple[Guard, ...] = ()


@dataclass
class SpecTable:
    rules: Dict[str, SpecRule] = field(default_factory=dict)
    phrases: Dict[Tuple[str, ...], float] = field(default_factory=dict)
    modifiers: List[Tuple[str, str, str]] = field(default_factory=list)
    default_value: float = 0.0

    def phrase_value(self, lemmas: Tuple[str, ...]) -> float:
        return self.phrases.get(tuple(lemmas), 0.0)


class IsaHierarchy:
    """Acyclic subsumption edges between constants (child isa parent)."""

    def __init__(self, pairs: Iterable[Tuple[str, str]] = ()):
        self._children: Dict[str, List[str]] = {}
        self._pairs: List[Tuple[str, str]] = []
        for child, parent in pairs:
            self.add(child, parent)

    def add(self, child: str, parent: str) -> None:
        if child == parent or parent in self.descendants(child):
            raise ValueError(f"isa cycle through {child} and {parent}")
        children = self._children.setdefault(parent, [])
        if child not in children:
            children.append(child)
            self._pairs.append((child, parent))

    def descendants(self, constant: str) -> List[str]:
        """Transitive isa-descendants, breadth first, without ``constant`` itself."""
        out: List[str] = []
        frontier = list(self._children.get(constant, ()))
        while frontier:
            c = frontier.pop(0)
            if c in out:
                continue
            out.append(c)
            frontier.extend(self._children.get(c, ()))
        return out

    def pairs(self) -> List[Tuple[str, str]]:
        return list(self._pairs)

    def __len__(self) -> int:
        return len(self._pairs)


@dataclass
class ResourceSet:
    grammar: Grammar
    lexicon: Lexicon
    spec: SpecTable
    postulates: List[HornClause]
    isa: IsaHierarchy
    scheme: SchemeTable

    def without_semtypes(self) -> "ResourceSet":
        """Copy with every lexical semantic type removed."""
        return replace(self, lexicon=self.lexicon.without_semtypes())


# -- readers ------------------------------------------------------------------

def _stanzas(text: str) -> Iterable[Tuple[int, str]]:
    """Logical lines: indented lines continue the previous one; ``#`` starts a comment."""
    current: Optional[List] = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line[0].isspace() and current is not None:
            current[1] += " " + line.strip()
            continue
        if current is not None:
            yield current[0], current[1]
        current = [lineno, line.strip()]
    if current is not None:
        yield current[0], current[1]


def _parse_pattern(p: TermParser) -> Pattern:
    category = p.expect_kind("name")[1]
    features: List[Tuple[str, Term]] = []
    if p.at("["):
        p.next()
        while not p.at("]"):
            name = p.expect_kind("name")[1]
            p.expect("=")
            kind, value, _ = p.next()
            if kind == "name":
                features.append((name, Constant(value)))
            elif kind == "var":
                features.append((name, Variable(value)))
            else:
                raise p.error(f"bad feature value {value!r}")
            if p.at(","):
                p.next()
        p.expect("]")
    build = None
    if p.at("("):
        p.next()
        build = p.parse_term()
        p.expect(")")
    return Pattern(category, tuple(features), build)


def _parse_guard(p: TermParser) -> Guard:
    kind = p.expect_kind("name")[1]
    if kind not in GUARD_KINDS:
        raise p.error(f"unknown guard {kind!r}")
    p.expect("(")
    if kind == "spec":
        value = p.expect_kind("name")[1]
        p.expect(")")
        return Guard("spec", (), value)
    raw = ""
    while not p.at(","):
        raw += p.next()[1]
    p.expect(",")
    value = p.expect_kind("name")[1]
    p.expect(")")
    try:
        path = tuple(int(i) for i in raw.split("."))
    except ValueError:
        raise p.error(f"bad constituent path {raw!r}")
    if not path or any(i < 1 for i in path):
        raise p.error(f"bad constituent path {raw!r}")
    return Guard(kind, path, value)


def _parse_guards(p: TermParser, closer: Optional[str] = None) -> List[Guard]:
    guards = []
    while not p.at_end() and not (closer and p.at(closer)):
        guards.append(_parse_guard(p))
        if p.at(","):
            p.next()
    return guards


def _build_variables(term) -> List[Variable]:
    return [v for v in variables(term) if not v.name.startswith("_")]


def _check_rule(rule: GrammarRule, where: str, errors: List[str]) -> None:
    bound = set()
    feature_vars = set()
    for pattern in rule.rhs:
        if pattern.build is not None:
            bound.update(variables(pattern.build))
        feature_vars.update(v for _, v in pattern.features if isinstance(v, Variable))
    if rule.lhs.build is not None:
        for v in _build_variables(rule.lhs.build):
            if v not in bound:
                errors.append(f"{where}: rule {rule.id}: build variable {v} is not bound")
    for _, v in rule.lhs.features:
        if isinstance(v, Variable) and v not in feature_vars:
            errors.append(f"{where}: rule {rule.id}: feature variable {v} is not bound")
    for g in rule.hard_guards:
        if g.path[0] > len(rule.rhs):
            errors.append(f"{where}: rule {rule.id}: guard {g} addresses a missing child")


def parse_grammar(text: str, source: str, errors: List[str]) -> Grammar:
    rules: List[GrammarRule] = []
    templates: List[LexTemplate] = []
    seen = set()
    for lineno, line in _stanzas(text):
        where = f"{source}:{lineno}"
        keyword, _, rest = line.partition(" ")
        try:
            if keyword == "LEX":
                head, sep, build_text = rest.partition(":")
                if not sep:
                    raise LogDocError("expected 'LEX category: template'")
                p = TermParser(head)
                pattern = _parse_pattern(p)
                p.finish()
                feats = []
                for k, v in pattern.features:
                    if not isinstance(v, Constant):
                        raise LogDocError("lexical template features must be constants")
                    feats.append((k, v.name))
                bp = TermParser(build_text)
                build = bp.parse_term()
                bp.finish()
                templates.append(LexTemplate(pattern.category, tuple(feats), build))
            elif keyword == "RULE":
                rule_id, sep, body = rest.partition(":")
                rule_id = rule_id.strip()
                if not sep or not rule_id:
                    raise LogDocError("expected 'RULE id: lhs -> rhs'")
                if rule_id in seen:
                    errors.append(f"{where}: duplicate rule id {rule_id}")
                    continue
                seen.add(rule_id)
                p = TermParser(body)
                lhs = _parse_pattern(p)
                p.expect("->")
                rhs: List[Pattern] = []
                head = None
                while not p.at_end() and not p.at("{"):
                    if p.at("*"):
                        p.next()
                        if head is not None:
                            raise p.error("more than one head child")
                        head = len(rhs)
                    rhs.append(_parse_pattern(p))
                guards: List[Guard] = []
                if p.at("{"):
                    p.next()
                    guards = _parse_guards(p, "}")
                    p.expect("}")
                p.finish()
                if not rhs:
                    raise LogDocError("empty right-hand side")
                rule = GrammarRule(rule_id, lhs, tuple(rhs),
                                   len(rhs) - 1 if head is None else head,
                                   tuple(guards), where)
                _check_rule(rule, where, errors)
                rules.append(rule)
            else:
                errors.append(f"{where}: unknown grammar line {keyword!r}")
        except (LogDocError, ValueError) as e:
            errors.append(f"{where}: {e}")

    known = {r.lhs.category for r in rules} | {t.category for t in templates}
    for rule in rules:
        for pattern in rule.rhs:
            if pattern.category not in known:
                errors.append(f"{rule.location}: rule {rule.id}: unknown category {pattern.category}")
    logger.debug("Loaded %d rules and %d templates from %s", len(rules), len(templates), source)
    return Grammar(rules, templates)


def parse_spec(text: str, source: str, errors: List[str]) -> SpecTable:
    table = SpecTable()
    for lineno, line in _stanzas(text):
        where = f"{source}:{lineno}"
        keyword, _, rest = line.partition(" ")
        try:
            if keyword == "SPEC":
                head, sep, guard_text = rest.partition(":")
                parts = head.split()
                if not sep or len(parts) != 2:
                    raise LogDocError("expected 'SPEC id value: guards'")
                value = float(parts[1])
                if value < 0:
                    raise LogDocError("spec value must be non-negative")
                p = TermParser(guard_text)
                guards = _parse_guards(p)
                if any(g.kind == "spec" for g in guards):
                    raise LogDocError("spec guards cannot nest")
                if parts[0] in table.rules:
                    raise LogDocError(f"duplicate spec id {parts[0]}")
                table.rules[parts[0]] = SpecRule(parts[0], value, tuple(guards))
            elif keyword == "PHRASE":
                parts = rest.split()
                if len(parts) < 3:
                    raise LogDocError("expected 'PHRASE word word... value'")
                value = float(parts[-1])
                if value < 0:
                    raise LogDocError("phrase value must be non-negative")
                table.phrases[tuple(w.lower() for w in parts[:-1])] = value
            elif keyword == "MODIFIER":
                parts = rest.split()
                if len(parts) != 3:
                    raise LogDocError("expected 'MODIFIER preposition semtype predicate'")
                table.modifiers.append((parts[0], parts[1], parts[2]))
            elif keyword == "DEFAULT":
                table.default_value = float(rest)
            else:
                errors.append(f"{where}: unknown spec line {keyword!r}")
        except (LogDocError, ValueError) as e:
            errors.append(f"{where}: {e}")
    return table


def parse_postulates(text: str, source: str, errors: List[str]) -> List[HornClause]:
    postulates: List[HornClause] = []
    seen = set()
    for lineno, line in _stanzas(text):
        where = f"{source}:{lineno}"
        keyword, _, rest = line.partition(" ")
        if keyword != "RULE":
            errors.append(f"{where}: expected 'RULE level weight id: head <- body'")
            continue
        try:
            clause = parse_rule_line(rest)
        except (LogDocError, ValueError) as e:
            errors.append(f"{where}: {e}")
            continue
        if clause.level is None:
            errors.append(f"{where}: postulate {clause.id} needs a level")
        elif clause.id in seen:
            errors.append(f"{where}: duplicate postulate id {clause.id}")
        else:
            seen.add(clause.id)
            postulates.append(clause)
    return postulates


def parse_isa(text: str, source: str, errors: List[str]) -> IsaHierarchy:
    isa = IsaHierarchy()
    for lineno, line in _stanzas(text):
        where = f"{source}:{lineno}"
        try:
            a = parse_atom(line)
            if a.key != ("isa", 2) or not all(isinstance(x, Constant) for x in a.args):
                raise LogDocError("expected isa(child, parent) over constants")
            isa.add(a.args[0].name, a.args[1].name)
        except (LogDocError, ValueError) as e:
            errors.append(f"{where}: {e}")
    return isa


def _check_spec_references(grammar: Grammar, spec: SpecTable, errors: List[str]) -> None:
    for rule in grammar.rules:
        for spec_id in rule.spec_ids:
            if spec_id not in spec.rules:
                errors.append(f"{rule.location}: rule {rule.id}: unknown spec rule {spec_id}")
                continue
            for g in spec.rules[spec_id].guards:
                if g.path[0] > len(rule.rhs):
                    errors.append(f"{rule.location}: rule {rule.id}: spec {spec_id} guard {g} "
                                  f"addresses a missing child")


def build_resources(grammar_text: str = "", lexicon_text: str = "", spec_text: str = "",
                    postulate_text: str = "", isa_text: str = "",
                    sources: Optional[Dict[str, str]] = None) -> ResourceSet:
    """Build a ResourceSet from file contents; all problems are raised together."""
    sources = sources or {}
    errors: List[str] = []
    grammar = parse_grammar(grammar_text, sources.get("grammar", "<grammar>"), errors)
    lexicon = parse_lexicon(lexicon_text, sources.get("lexicon", "<lexicon>"), errors)
    spec = parse_spec(spec_text, sources.get("spec", "<spec>"), errors)
    postulates = parse_postulates(postulate_text, sources.get("postulates", "<postulates>"), errors)
    isa = parse_isa(isa_text, sources.get("isa", "<isa>"), errors)
    _check_spec_references(grammar, spec, errors)
    scheme = SchemeTable()
    for prep, semtype, predicate in spec.modifiers:
        try:
            scheme.add_modifier(prep, semtype, predicate)
        except ValueError as e:
            errors.append(f"{sources.get('spec', '<spec>')}: {e}")
    if errors:
        raise ResourceError(errors)
    return ResourceSet(grammar, lexicon, spec, postulates, isa, scheme)


def load_resources(grammar_path: Optional[str] = None, lexicon_path: Optional[str] = None,
                   postulate_path: Optional[str] = None, spec_path: Optional[str] = None,
                   isa_path: Optional[str] = None, client=None) -> ResourceSet:
    """
    Load and validate all resource files; omitted paths use the bundled files.

    Returns:
        ResourceSet: immutable after load

    Raises:
        ResourceError: every problem found, each as ``file:line: message``
    """
    paths = {
        "grammar": grammar_path or bundled_path("grammar.txt"),
        "lexicon": lexicon_path or bundled_path("lexicon.txt"),
        "postulates": postulate_path or bundled_path("postulates.txt"),
        "spec": spec_path or bundled_path("spec.txt"),
        "isa": isa_path or bundled_path("isa.txt"),
    }
    texts: Dict[str, str] = {}
    missing: List[str] = []
    for name, path in paths.items():
        try:
            texts[name] = storage.read_text(path, client)
        except (OSError, ValueError) as e:
            missing.append(f"{path}: cannot read {name} file ({e.__class__.__name__})")
        except (BotoCoreError, ClientError) as e:
            missing.append(f"{path}: cannot read {name} file ({e})")
    if missing:
        raise ResourceError(missing)

    resources = build_resources(texts["grammar"], texts["lexicon"], texts["spec"],
                                texts["postulates"], texts["isa"], sources=paths)
    logger.info("Loaded resources: %d rules, %d lexicon entries, %d postulates, %d isa edges",
                len(resources.grammar), len(resources.lexicon),
                len(resources.postulates), len(resources.isa))
    return resources
