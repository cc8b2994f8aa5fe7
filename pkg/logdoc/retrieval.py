"""
Indexing and staged retrieval.

Documents are split into fragments, each fragment is parsed, its surviving
readings are composed, Skolemized and asserted with a fragment/document
back-pointer. Queries are proved against the knowledge base in stages:
direct matches first, then level-2 and level-3 meaning postulates, then
inheritance, each stage only when the previous ones found too few passages.
"""
import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from logdoc.chart_parser import (
    Analysis,
    ScoreConfig,
    analyses,
    extract_fragments,
    filter_readings,
    parse,
    uncovered,
)
from logdoc.errors import ConfigError, EmptyQueryError
from logdoc.knowledge_base import KnowledgeBase, Provenance
from logdoc.lexicon import tokenize
from logdoc.prover import STAGES, Goal, ProofTrace, StagePolicy, prove, stage_policy
from logdoc.resources import IsaHierarchy, ResourceSet, bundled_path
from logdoc.semantics import canonical, compose, compose_fragments, conjoin, keyword_fallback
from logdoc.terms import HornClause, LogicalForm, skolemize

logger = logging.getLogger(__name__)

STAGE_RANK = {"direct": 0, "keyword": 0, "level2": 1, "level3": 2, "isa": 3}

_SENTENCE_END = re.compile(r"[.!?][\"')\]]*$")
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+(?=[A-Z])")


@dataclass
class VDConfig:
    """Escalation thresholds and per-stage proof budgets."""

    m: int = 15
    n: int = 10
    o: int = 5
    escalate_in_band: bool = False
    max_depth: int = 8
    max_inferences: int = 10000
    rule_weight_cap: Optional[float] = None

    def validate(self) -> "VDConfig":
        if not self.m > self.n > self.o > 0:
            raise ConfigError(f"retrieval thresholds need M > N > O > 0, got "
                              f"M={self.m} N={self.n} O={self.o}")
        if self.max_depth < 1:
            raise ConfigError("prover.max_depth must be >= 1")
        if self.max_inferences < 1:
            raise ConfigError("prover.max_inferences must be >= 1")
        if self.rule_weight_cap is not None and self.rule_weight_cap < 0:
            raise ConfigError("prover.rule_weight_cap must be non-negative")
        return self

    def policy(self, stage: str) -> StagePolicy:
        return stage_policy(stage, self.max_inferences, self.max_depth, self.rule_weight_cap)


RECORD_SCHEMA = "records.schema.json"
RECORD_KINDS = ("passage", "trace_line")


def record_schema(kind: Optional[str] = None) -> Dict:
    """
    The bundled JSON schema for passage records and trace lines.

    Args:
        kind (str): 'passage' or 'trace_line' to narrow the schema to one record type

    Returns:
        Dict: a draft-07 schema
    """
    with open(bundled_path(RECORD_SCHEMA), encoding='utf-8') as f:
        schema = json.load(f)
    if kind is None:
        return schema
    if kind not in RECORD_KINDS:
        raise ValueError(f"unknown record kind {kind!r}")
    return {
        '$schema': schema['$schema'],
        'definitions': schema['definitions'],
        'allOf': [{'$ref': f'#/definitions/{kind}'}],
    }


@dataclass
class Passage:
    document: int
    fragment: int
    text: str
    stage: str
    trace_id: str
    trace: Optional[ProofTrace] = None

    def to_record(self) -> Dict:
        return {
            'document': self.document,
            'fragment': self.fragment,
            'stage': self.stage,
            'text': self.text,
            'trace_id': self.trace_id,
            'rules': self.trace.rule_ids() if self.trace else [],
        }

    def to_trace_record(self, query: str) -> Dict:
        return {
            'trace_id': self.trace_id,
            'query': query,
            'stage': self.stage,
            'trace': (self.trace or ProofTrace([])).to_dict(),
        }

    def __str__(self) -> str:
        return f"{self.document}:{self.fragment} [{self.stage}] {self.text}"


@dataclass
class RetrievalResult:
    query: str
    passages: List[Passage] = field(default_factory=list)
    stages: List[str] = field(default_factory=list)
    readings: List[str] = field(default_factory=list)
    truncated: bool = False

    def __iter__(self):
        return iter(self.passages)

    def __len__(self) -> int:
        return len(self.passages)

    def keys(self) -> List[Tuple[int, int]]:
        """(document, fragment) of every passage, in result order."""
        return [(p.document, p.fragment) for p in self.passages]


@dataclass
class Interpretation:
    """Readings of one fragment or query and how they were obtained."""

    tokens: List[str]
    readings: List[LogicalForm]
    analyses: List[Analysis] = field(default_factory=list)
    full: bool = False
    fallback_tokens: List[str] = field(default_factory=list)
    keyword_only: bool = False


@dataclass
class IndexReport:
    document: int
    fragments: int = 0
    readings: int = 0
    partial: int = 0
    fallback_tokens: int = 0
    facts: int = 0
    groups: int = 0

    def to_dict(self) -> Dict:
        return {
            'document': self.document,
            'fragments': self.fragments,
            'readings': self.readings,
            'partial': self.partial,
            'fallback_tokens': self.fallback_tokens,
            'facts': self.facts,
            'groups': self.groups,
        }

    def __str__(self) -> str:
        return (f"document {self.document}: {self.fragments} fragments, "
                f"{self.readings} readings, {self.partial} partial, "
                f"{self.fallback_tokens} fallback tokens, {self.facts} facts, "
                f"{self.groups} reading groups")


def split_fragments(text: str) -> List[str]:
    """
    Fragments of a document: a line without terminal punctuation is a title;
    other lines split after ``.``, ``!`` or ``?`` followed by a capital.
    """
    fragments: List[str] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if not _SENTENCE_END.search(line):
            fragments.append(line)
            continue
        fragments.extend(part.strip() for part in _SENTENCE_SPLIT.split(line) if part.strip())
    return fragments


def trace_id(query: str, document: int, fragment: int, stage: str) -> str:
    return hashlib.sha1(f"{query}|{document}|{fragment}|{stage}".encode('utf-8')).hexdigest()[:12]


def interpret(text: str, resources: ResourceSet,
              cfg: Optional[ScoreConfig] = None) -> Interpretation:
    """
    Parse a fragment and compose its readings.

    Full parses give one logical form per surviving analysis (alpha-equivalent
    forms merged). Otherwise the largest partial analyses are conjoined with
    keyword atoms for the tokens no analysis covers.
    """
    tokens = tokenize(text)
    chart = parse(tokens, resources, cfg)
    full = analyses(chart)
    if full:
        survivors = filter_readings(full, cfg)
        readings: Dict[str, LogicalForm] = {}
        for a in survivors:
            for lf in compose(a, resources):
                readings.setdefault(canonical(lf), lf)
        return Interpretation(tokens, list(readings.values()), survivors, True)

    fragments = extract_fragments(chart, cfg)
    rest = [tokens[i] for i in uncovered(fragments, len(tokens))]
    parsed = compose_fragments(fragments, resources) if fragments else LogicalForm()
    fallback = keyword_fallback(rest, resources.lexicon)
    return Interpretation(tokens, [conjoin(parsed, fallback)], fragments, False, rest,
                          keyword_only=not parsed.atoms)


def index_document(kb: KnowledgeBase, doc_id: int, text: str, resources: ResourceSet,
                   cfg: Optional[ScoreConfig] = None) -> IndexReport:
    """
    Translate a document into facts with fragment/document back-pointers.

    Args:
        kb (KnowledgeBase): target, extended in place
        doc_id (int): document id, new to the knowledge base
        text (str): document text
        resources (ResourceSet): grammar, lexicon and spec rules
        cfg (ScoreConfig): parser settings

    Returns:
        IndexReport: counts of fragments, readings and fallback tokens
    """
    kb.check_new_document(doc_id)
    report = IndexReport(doc_id)
    for fragment in split_fragments(text):
        interpretation = interpret(fragment, resources, cfg)
        if not interpretation.tokens:
            continue
        report.fragments += 1
        readings = [skolemize(lf, kb.skolems) for lf in interpretation.readings]
        ids = kb.assert_fragment(doc_id, report.fragments, readings, fragment)
        report.readings += len(readings)
        report.facts += len(ids)
        report.fallback_tokens += len(interpretation.fallback_tokens)
        if len(readings) > 1:
            report.groups += 1
        if not interpretation.full:
            report.partial += 1
    logger.info("Indexed %s", report)
    return report


def build_query(query_text: str, resources: ResourceSet,
                cfg: Optional[ScoreConfig] = None) -> List[Goal]:
    """
    Goals for a query, one per surviving reading.

    Raises:
        EmptyQueryError: the query yields no atoms and has no content words
    """
    interpretation = interpret(query_text, resources, cfg)
    readings = [lf for lf in interpretation.readings if lf.atoms]
    keyword = interpretation.keyword_only
    if not readings:
        fallback = keyword_fallback(interpretation.tokens, resources.lexicon)
        if not fallback.atoms:
            raise EmptyQueryError(query_text)
        readings, keyword = [fallback], True
    return [Goal.from_lf(lf, query_text, keyword) for lf in readings]


def answer_goals(kb: KnowledgeBase, goals: Sequence[Goal], rules: Sequence[HornClause],
                 isa: Optional[IsaHierarchy] = None, cfg: Optional[VDConfig] = None,
                 query: str = "") -> RetrievalResult:
    """
    Staged retrieval for already-built goals; passages matching any goal are returned.

    Args:
        kb (KnowledgeBase): indexed facts
        goals: one goal per query reading
        rules: rules and postulates the later stages may admit
        isa (IsaHierarchy): inheritance edges for the last stage
        cfg (VDConfig): thresholds M, N, O and budgets
        query (str): query text used for trace ids

    Returns:
        RetrievalResult: passages ordered by stage, then document and fragment
    """
    cfg = cfg or VDConfig()
    result = RetrievalResult(query)
    found: Dict[Tuple[int, int], Passage] = {}

    def run(stage: str) -> None:
        policy = cfg.policy(stage)
        result.stages.append(stage)
        for goal in goals:
            proofs = prove(goal, kb, policy, rules, isa)
            result.truncated = result.truncated or proofs.truncated
            for solution in proofs:
                trace = solution.trace
                key = (trace.document, trace.fragment)
                if key in found:
                    continue
                label = "keyword" if stage == "direct" and goal.keyword else stage
                found[key] = Passage(trace.document, trace.fragment,
                                     kb.text_of(Provenance(trace.fragment, trace.document)),
                                     label, trace_id(query, trace.document, trace.fragment, label),
                                     trace)
        logger.info("Stage %s: %d passages so far", stage, len(found))

    run("direct")
    direct = len(found)
    if direct <= cfg.m:
        if direct < cfg.n or cfg.escalate_in_band:
            run("level2")
            if len(found) < cfg.n:
                run("level3")
        if len(found) < cfg.o:
            run("isa")

    result.passages = sorted(found.values(),
                             key=lambda p: (STAGE_RANK[p.stage], p.document, p.fragment))
    return result


def answer_query(kb: KnowledgeBase, query_text: str, resources: ResourceSet,
                 cfg: Optional[VDConfig] = None,
                 score_cfg: Optional[ScoreConfig] = None) -> RetrievalResult:
    """Parse a query and run staged retrieval with the knowledge base's rules and the postulates."""
    goals = build_query(query_text, resources, score_cfg)
    rules = list(kb.rules) + list(resources.postulates)
    result = answer_goals(kb, goals, rules, resources.isa, cfg, query_text)
    result.readings = [str(g) for g in goals]
    return result


__all__ = [
    "STAGES",
    "IndexReport",
    "Interpretation",
    "Passage",
    "RetrievalResult",
    "VDConfig",
    "answer_goals",
    "answer_query",
    "build_query",
    "index_document",
    "interpret",
    "record_schema",
    "split_fragments",
    "trace_id",
]
