"""
Bottom-up chart parser with preference values.

Every new node is charged ``Pen`` and the summed values of its children are
divided by ``Rew``, so deeper attachment is cheaper and extra nodes cost more;
``Spec`` corrections are subtracted before the division. Lower is better.
The agenda pops the lowest value first. Each cohort (span, category, number,
verb form, transitivity) holds at most n_best value levels: an edge worse than
all of them is never built, and a better one evicts the worst level along with
everything built on it.
"""
import heapq
import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from logdoc.errors import ConfigError
from logdoc.lexicon import LexEntry, analyze_word
from logdoc.resources import Guard, GrammarRule, Pattern, ResourceSet
from logdoc.terms import Constant

logger = logging.getLogger(__name__)

FILTER_MODES = ("cluster", "first_n", "within_pct")


@dataclass
class ScoreConfig:
    """Preference and pruning settings; ``n_best`` None or 0 disables pruning."""

    rew: float = 2.25
    pen: float = 15.0
    default_lex_value: Optional[float] = None
    n_best: Optional[int] = 1
    filter: str = "cluster"
    cluster_threshold: float = 0.897
    first_n: int = 1
    within_pct: float = 90.0
    max_unary_depth: int = 4

    def validate(self) -> "ScoreConfig":
        if self.rew <= 1:
            raise ConfigError(f"scoring.rew must be greater than 1, got {self.rew}")
        if self.pen <= 0:
            raise ConfigError(f"scoring.pen must be positive, got {self.pen}")
        if self.n_best is not None and self.n_best < 0:
            raise ConfigError(f"scoring.n_best must be >= 0, got {self.n_best}")
        if self.filter not in FILTER_MODES:
            raise ConfigError(f"scoring.filter must be one of {', '.join(FILTER_MODES)}")
        if not 0 < self.cluster_threshold <= 1:
            raise ConfigError("scoring.cluster_threshold must be in (0, 1]")
        if self.first_n < 1:
            raise ConfigError("scoring.first_n must be >= 1")
        if not 0 < self.within_pct <= 100:
            raise ConfigError("scoring.within_pct must be in (0, 100]")
        if self.max_unary_depth < 1:
            raise ConfigError("scoring.max_unary_depth must be >= 1")
        return self


def score(child_values: Sequence[float], spec: float = 0.0,
          cfg: Optional[ScoreConfig] = None) -> float:
    """(sum of child values - spec) / Rew + Pen"""
    cfg = cfg or ScoreConfig()
    return (sum(child_values) - spec) / cfg.rew + cfg.pen


def cohort_key(start: int, end: int, category: str, features: Dict[str, str]) -> Tuple:
    """Edges sharing a key compete for the same n-best slots."""
    return (start, end, category, features.get("num"), features.get("form"), features.get("trans"))


@dataclass(eq=False)
class Edge:
    id: int
    start: int
    end: int
    category: str
    features: Dict[str, str]
    value: float
    rule: Optional[GrammarRule] = None
    children: Tuple["Edge", ...] = ()
    entry: Optional[LexEntry] = None
    unary_depth: int = 0
    spec: float = 0.0
    dead: bool = False
    parents: List["Edge"] = field(default_factory=list, repr=False)

    @property
    def is_lexical(self) -> bool:
        return self.rule is None

    @property
    def rule_id(self) -> str:
        return "lex" if self.rule is None else self.rule.id

    @property
    def span(self) -> Tuple[int, int]:
        return (self.start, self.end)

    @property
    def cohort_key(self) -> Tuple:
        return cohort_key(self.start, self.end, self.category, self.features)

    def leaves(self) -> List["Edge"]:
        if self.is_lexical:
            return [self]
        return [leaf for c in self.children for leaf in c.leaves()]

    def lemmas(self) -> Tuple[str, ...]:
        return tuple(leaf.entry.lemma for leaf in self.leaves())

    def head_entry(self) -> LexEntry:
        """Lexical entry reached by following head children down."""
        node = self
        while not node.is_lexical:
            node = node.children[node.rule.head]
        return node.entry

    def __str__(self) -> str:
        kids = ",".join(f"#{c.id}" for c in self.children)
        label = f"lex({self.entry.lemma})" if self.is_lexical else self.rule.id
        return f"#{self.id} {self.start}-{self.end} {self.category} {self.value:.3f} {label} [{kids}]"


@dataclass
class Analysis:
    """A ranked analysis rooted at one edge."""

    edge: Edge
    reading: int = 0

    @property
    def value(self) -> float:
        return self.edge.value

    @property
    def span(self) -> Tuple[int, int]:
        return self.edge.span


@dataclass
class Chart:
    tokens: List[str]
    edges: List[Edge] = field(default_factory=list)
    created: int = 0

    def live_edges(self) -> List[Edge]:
        return [e for e in self.edges if not e.dead]

    def __len__(self) -> int:
        return len(self.live_edges())


def constituent(children: Sequence[Edge], path: Tuple[int, ...]) -> Optional[Edge]:
    """Follow 1-based child indexes from a rule's children."""
    nodes = children
    node = None
    for index in path:
        if index > len(nodes):
            return None
        node = nodes[index - 1]
        nodes = node.children
    return node


def guard_holds(guard: Guard, children: Sequence[Edge]) -> bool:
    node = constituent(children, guard.path)
    if node is None:
        return False
    entry = node.head_entry()
    if guard.kind == "semtype":
        return guard.value in entry.semtypes
    if guard.kind == "transitivity":
        return entry.features.get("trans") == guard.value
    return False


class ChartParser:
    """Parses token lists against one ResourceSet."""

    def __init__(self, resources: ResourceSet, cfg: Optional[ScoreConfig] = None):
        self.resources = resources
        self.cfg = cfg or ScoreConfig()
        self._index: Dict[str, List[Tuple[GrammarRule, int]]] = defaultdict(list)
        for rule in resources.grammar.rules:
            for k, pattern in enumerate(rule.rhs):
                self._index[pattern.category].append((rule, k))

    def parse(self, tokens: Sequence[str]) -> Chart:
        self._ids = itertools.count()
        self._agenda: List[Tuple[float, int, Edge]] = []
        self._by_start: Dict[int, List[Edge]] = defaultdict(list)
        self._by_end: Dict[int, List[Edge]] = defaultdict(list)
        self._cohorts: Dict[Tuple, List[Tuple[float, List[Edge]]]] = {}
        chart = Chart(list(tokens))
        self._chart = chart

        lex_value = self.cfg.default_lex_value
        if lex_value is None:
            lex_value = self.resources.spec.default_value
        for i, token in enumerate(tokens):
            for entry in analyze_word(token, self.resources.lexicon):
                if self.resources.grammar.template_for(entry) is None:
                    continue
                self._enter(Edge(next(self._ids), i, i + 1, entry.category,
                                 dict(entry.features), lex_value, entry=entry))

        while self._agenda:
            _, _, edge = heapq.heappop(self._agenda)
            if edge.dead:
                continue
            chart.edges.append(edge)
            self._by_start[edge.start].append(edge)
            self._by_end[edge.end].append(edge)
            for rule, k in self._index.get(edge.category, ()):
                self._combine(rule, k, edge)

        logger.debug("Parsed %d tokens: %d edges created, %d live",
                     len(tokens), chart.created, len(chart))
        return chart

    # -- agenda and pruning ---------------------------------------------------

    def _push(self, edge: Edge) -> None:
        self._chart.created += 1
        heapq.heappush(self._agenda, (edge.value, edge.id, edge))

    def _levels(self, key: Tuple) -> List[Tuple[float, List[Edge]]]:
        """Live value levels of a cohort, best first; pending edges included."""
        levels = self._cohorts.setdefault(key, [])
        kept = []
        for v, es in levels:
            live = [e for e in es if not e.dead]
            if live:
                kept.append((v, live))
        levels[:] = kept
        return levels

    def _beaten(self, key: Tuple, value: float) -> bool:
        """True when n_best better levels already hold the cohort."""
        n_best = self.cfg.n_best
        if not n_best:
            return False
        levels = self._levels(key)
        return len(levels) >= n_best and round(value, 9) > levels[n_best - 1][0]

    def _enter(self, edge: Edge) -> None:
        n_best = self.cfg.n_best
        if n_best:
            levels = self._levels(edge.cohort_key)
            rounded = round(edge.value, 9)
            for v, es in levels:
                if v == rounded:
                    es.append(edge)
                    break
            else:
                levels.append((rounded, [edge]))
                levels.sort(key=lambda level: level[0])
                while len(levels) > n_best:
                    _, worst = levels.pop()
                    for e in worst:
                        self._kill(e)
        self._push(edge)

    def _kill(self, edge: Edge) -> None:
        stack = [edge]
        while stack:
            e = stack.pop()
            if e.dead:
                continue
            e.dead = True
            stack.extend(e.parents)

    # -- rule application ---------------------------------------------------

    @staticmethod
    def _match(pattern: Pattern, edge: Edge, env: Dict[str, str]) -> Optional[Dict[str, str]]:
        if edge.category != pattern.category:
            return None
        for name, expected in pattern.features:
            actual = edge.features.get(name)
            if actual is None:
                continue
            if isinstance(expected, Constant):
                if expected.name != actual:
                    return None
                continue
            bound = env.get(expected.name)
            if bound is None:
                env = {**env, expected.name: actual}
            elif bound != actual:
                return None
        return env

    def _left(self, rule: GrammarRule, pos: int, end: int,
              env: Dict[str, str]) -> Iterator[Tuple[List[Edge], Dict[str, str]]]:
        if pos < 0:
            yield [], env
            return
        for e in list(self._by_end[end]):
            if e.dead:
                continue
            env2 = self._match(rule.rhs[pos], e, env)
            if env2 is None:
                continue
            for rest, env3 in self._left(rule, pos - 1, e.start, env2):
                yield rest + [e], env3

    def _right(self, rule: GrammarRule, pos: int, start: int,
               env: Dict[str, str]) -> Iterator[Tuple[List[Edge], Dict[str, str]]]:
        if pos >= len(rule.rhs):
            yield [], env
            return
        for e in list(self._by_start[start]):
            if e.dead:
                continue
            env2 = self._match(rule.rhs[pos], e, env)
            if env2 is None:
                continue
            for rest, env3 in self._right(rule, pos + 1, e.end, env2):
                yield [e] + rest, env3

    def _combine(self, rule: GrammarRule, k: int, edge: Edge) -> None:
        """Every combination in which ``edge`` is the most recently added member."""
        env = self._match(rule.rhs[k], edge, {})
        if env is None:
            return
        for left, env2 in self._left(rule, k - 1, edge.start, env):
            for right, env3 in self._right(rule, k + 1, edge.end, env2):
                self._fire(rule, left + [edge] + right, env3)

    def _fire(self, rule: GrammarRule, children: List[Edge], env: Dict[str, str]) -> None:
        if any(c.dead for c in children):
            return
        if rule.is_unary:
            depth = children[0].unary_depth + 1
            if depth > self.cfg.max_unary_depth:
                return
        else:
            depth = 0
        for guard in rule.hard_guards:
            if not guard_holds(guard, children):
                return

        spec = 0.0
        for spec_id in rule.spec_ids:
            spec_rule = self.resources.spec.rules[spec_id]
            if all(guard_holds(g, children) for g in spec_rule.guards):
                spec += spec_rule.value
        if not rule.is_unary:
            lemmas = tuple(lemma for c in children for lemma in c.lemmas())
            spec += self.resources.spec.phrase_value(lemmas)

        features = dict(children[rule.head].features)
        for name, value in rule.lhs.features:
            if isinstance(value, Constant):
                features[name] = value.name
            elif env.get(value.name) is not None:
                features[name] = env[value.name]

        start, end = children[0].start, children[-1].end
        value = score([c.value for c in children], spec, self.cfg)
        if self._beaten(cohort_key(start, end, rule.lhs.category, features), value):
            return
        edge = Edge(
            id=next(self._ids),
            start=start,
            end=end,
            category=rule.lhs.category,
            features=features,
            value=value,
            rule=rule,
            children=tuple(children),
            unary_depth=depth,
            spec=spec,
        )
        for c in children:
            c.parents.append(edge)
        self._enter(edge)


def parse(tokens: Sequence[str], resources: ResourceSet,
          cfg: Optional[ScoreConfig] = None) -> Chart:
    """
    Parse a token list bottom-up.

    Args:
        tokens: tokens from ``lexicon.tokenize``
        resources (ResourceSet): loaded grammar, lexicon and spec rules
        cfg (ScoreConfig): scoring and pruning settings

    Returns:
        Chart: closed under rule application modulo pruning
    """
    return ChartParser(resources, cfg).parse(tokens)


def analyses(chart: Chart) -> List[Analysis]:
    """Maximal live full-span edges ranked by (value, creation order)."""
    n = len(chart.tokens)
    if n == 0:
        return []
    full = [e for e in chart.live_edges() if e.start == 0 and e.end == n]
    inner = {id(c) for e in full for c in e.children if c.span == (0, n)}
    ranked = sorted((e for e in full if id(e) not in inner), key=lambda e: (e.value, e.id))
    return [Analysis(e, i) for i, e in enumerate(ranked)]


def coefficient(a: float, b: float) -> float:
    """Ratio of the smaller to the larger absolute value; 1 when both are 0."""
    x, y = abs(a), abs(b)
    if x == 0 and y == 0:
        return 1.0
    return min(x, y) / max(x, y)


def _value(item) -> float:
    return item.value if hasattr(item, "value") else float(item)


def filter_readings(ranked: Sequence, cfg: Optional[ScoreConfig] = None) -> List:
    """
    Select the surviving readings from analyses sorted best first.

    Args:
        ranked: analyses (or plain values) in ascending value order
        cfg (ScoreConfig): ``filter`` selects cluster, first_n or within_pct

    Returns:
        list: the surviving prefix (cluster) or subset
    """
    cfg = cfg or ScoreConfig()
    if not ranked:
        return []
    if cfg.filter == "first_n":
        return list(ranked[:cfg.first_n])
    if cfg.filter == "within_pct":
        best = _value(ranked[0])
        return [r for r in ranked if coefficient(best, _value(r)) >= cfg.within_pct / 100.0]
    kept = [ranked[0]]
    for prev, cur in zip(ranked, ranked[1:]):
        if coefficient(_value(prev), _value(cur)) < cfg.cluster_threshold:
            break
        kept.append(cur)
    return kept


def extract_fragments(chart: Chart, cfg: Optional[ScoreConfig] = None) -> List[Analysis]:
    """
    Filtered full analyses, or else a greedy left-to-right cover by the longest
    maximal edges (lowest value, then lowest id), skipping tokens without edges.
    """
    full = analyses(chart)
    if full:
        return filter_readings(full, cfg)
    starts: Dict[int, List[Edge]] = defaultdict(list)
    for e in chart.live_edges():
        starts[e.start].append(e)
    fragments: List[Analysis] = []
    i, n = 0, len(chart.tokens)
    while i < n:
        candidates = starts.get(i)
        if not candidates:
            i += 1
            continue
        end = max(e.end for e in candidates)
        longest = [e for e in candidates if e.end == end]
        inner = {id(c) for e in longest for c in e.children if c.span == (i, end)}
        best = min((e for e in longest if id(e) not in inner), key=lambda e: (e.value, e.id))
        fragments.append(Analysis(best, len(fragments)))
        i = end
    return fragments


def uncovered(fragments: Sequence[Analysis], n_tokens: int) -> List[int]:
    """Token positions not spanned by any fragment."""
    covered = set()
    for f in fragments:
        covered.update(range(f.edge.start, f.edge.end))
    return [i for i in range(n_tokens) if i not in covered]


def dump_chart(chart: Chart) -> str:
    """One live edge per line: ``#id start-end category value rule [children]``."""
    return "\n".join(str(e) for e in sorted(chart.live_edges(), key=lambda e: e.id))
