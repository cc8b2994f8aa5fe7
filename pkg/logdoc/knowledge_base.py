"""
Knowledge base of provenance-tagged facts, disjunctive reading groups and
leveled rules, with a line-oriented text file format.

File lines:
    SKOLEM <next index>
    TEXT <frag>/<doc> "<json source text>"
    FACT <atom>/<frag>/<doc>
    GROUP <id> BEGIN <frag>/<doc>   ALT   FACT ...   ALT   FACT ...   GROUP <id> END
    RULE <level|-> <weight> <id>: <head> <- <body>
"""
import json
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from logdoc import storage
from logdoc.errors import (
    DuplicateDocumentError,
    FragmentAlreadyIndexed,
    KBFormatError,
    KnowledgeBaseError,
    LogDocError,
)
from logdoc.reader import TermParser, parse_clause
from logdoc.terms import Atom, HornClause, LogicalForm, SkolemIssuer, is_ground

logger = logging.getLogger(__name__)

PredicateKey = Tuple[str, int]


@dataclass(frozen=True)
class Provenance:
    """Back-pointer to fragment ``fragment`` of document ``document``."""

    fragment: int
    document: int

    @property
    def suffix(self) -> str:
        return f"/{self.fragment}/{self.document}"

    @property
    def sort_key(self) -> Tuple[int, int]:
        return (self.document, self.fragment)

    def __str__(self) -> str:
        return f"{self.fragment}/{self.document}"


@dataclass(frozen=True)
class StoredFact:
    id: str
    atom: Atom
    prov: Provenance
    reading_group: Optional[str] = None
    alternative: Optional[int] = None

    def __str__(self) -> str:
        return f"{self.atom}{self.prov.suffix}"


@dataclass
class ReadingGroup:
    """Alternative readings of one ambiguous fragment; a proof may use one."""

    id: str
    prov: Provenance
    alternatives: List[List[StoredFact]] = field(default_factory=list)


class KnowledgeBase:
    """
    Incrementally growing, append-only clause base. Facts are indexed by
    predicate/arity and by passage; insertion order is preserved everywhere.
    """

    def __init__(self):
        self.rules: List[HornClause] = []
        self.groups: Dict[str, ReadingGroup] = {}
        self.skolems = SkolemIssuer()
        self.texts: Dict[Provenance, str] = {}
        self._index: Dict[PredicateKey, List[StoredFact]] = {}
        self._by_passage: Dict[Provenance, Dict[PredicateKey, List[StoredFact]]] = {}
        self._by_id: Dict[str, StoredFact] = {}
        self._entries: List[Union[StoredFact, ReadingGroup]] = []
        self._next_fact = 1
        self._next_group = 1

    # -- assertion ----------------------------------------------------------

    def assert_fragment(self, doc: int, frag: int, readings: Sequence[LogicalForm],
                        source_text: str) -> List[str]:
        """
        Add the Skolemized readings of one fragment.

        Args:
            doc (int): document id
            frag (int): fragment id within the document
            readings: non-empty list of ground logical forms
            source_text (str): fragment text for the registry

        Returns:
            List[str]: ids of the stored facts
        """
        if not readings:
            raise KnowledgeBaseError("readings must not be empty")
        prov = Provenance(frag, doc)
        if prov in self.texts:
            raise FragmentAlreadyIndexed(frag, doc)
        for lf in readings:
            for a in lf.atoms:
                if not is_ground(a):
                    raise KnowledgeBaseError(f"fact is not ground: {a}")

        self.texts[prov] = source_text
        self._by_passage.setdefault(prov, {})
        ids: List[str] = []

        if len(readings) == 1:
            for a in _unique(readings[0].atoms):
                fact = self._store(a, prov)
                self._entries.append(fact)
                ids.append(fact.id)
        else:
            group = ReadingGroup(f"g{self._next_group}", prov)
            self._next_group += 1
            for alt, lf in enumerate(readings):
                facts = [self._store(a, prov, group.id, alt) for a in _unique(lf.atoms)]
                group.alternatives.append(facts)
                ids.extend(f.id for f in facts)
            self.groups[group.id] = group
            self._entries.append(group)

        logger.debug("Asserted %d facts for %s (%d readings)", len(ids), prov, len(readings))
        return ids

    def _store(self, a: Atom, prov: Provenance, group: Optional[str] = None,
               alternative: Optional[int] = None) -> StoredFact:
        fact = StoredFact(f"f{self._next_fact}", a, prov, group, alternative)
        self._next_fact += 1
        self._index.setdefault(a.key, []).append(fact)
        self._by_passage.setdefault(prov, {}).setdefault(a.key, []).append(fact)
        self._by_id[fact.id] = fact
        return fact

    def add_rule(self, clause: HornClause) -> None:
        if clause.is_fact:
            raise KnowledgeBaseError(f"rule without body: {clause}")
        self.rules.append(clause)

    def check_new_document(self, doc: int) -> None:
        if self.has_document(doc):
            raise DuplicateDocumentError(doc)

    # -- queries ------------------------------------------------------------

    def lookup(self, predicate: str, arity: int) -> Iterator[Union[StoredFact, HornClause]]:
        """Facts, then rules, whose predicate/arity match, in insertion order."""
        yield from self._index.get((predicate, arity), ())
        for rule in self.rules:
            if rule.head.key == (predicate, arity):
                yield rule

    def facts_for(self, key: PredicateKey, prov: Provenance) -> List[StoredFact]:
        return self._by_passage.get(prov, {}).get(key, [])

    def passage_keys(self, prov: Provenance) -> List[PredicateKey]:
        return [k for k, v in self._by_passage.get(prov, {}).items() if v]

    def fact(self, fact_id: str) -> StoredFact:
        return self._by_id[fact_id]

    @property
    def facts(self) -> List[StoredFact]:
        return list(self._by_id.values())

    def passages(self) -> List[Provenance]:
        return sorted(self.texts, key=lambda p: p.sort_key)

    def documents(self) -> List[int]:
        return sorted({p.document for p in self.texts})

    def has_document(self, doc: int) -> bool:
        return any(p.document == doc for p in self.texts)

    def text_of(self, prov: Provenance) -> str:
        return self.texts.get(prov, "")

    def snapshot(self) -> Tuple:
        """Observable state: facts, rules, groups, counter and registry."""
        return (
            tuple((f.id, str(f), f.reading_group, f.alternative) for f in self._by_id.values()),
            tuple((r.id, r.level, r.weight, str(r)) for r in self.rules),
            tuple((g.id, str(g.prov), tuple(tuple(f.id for f in alt) for alt in g.alternatives))
                  for g in self.groups.values()),
            self.skolems.next_index,
            tuple(sorted((p.sort_key, t) for p, t in self.texts.items())),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        return self.snapshot() == other.snapshot()

    def __len__(self) -> int:
        return len(self._by_id)

    # -- persistence --------------------------------------------------------

    def dumps(self) -> str:
        lines = [f"SKOLEM {self.skolems.next_index}"]
        for prov in self.passages():
            lines.append(f"TEXT {prov} {json.dumps(self.texts[prov])}")
        for entry in self._entries:
            if isinstance(entry, StoredFact):
                lines.append(f"FACT {entry}")
            else:
                lines.append(f"GROUP {entry.id} BEGIN {entry.prov}")
                for alt in entry.alternatives:
                    lines.append("ALT")
                    lines.extend(f"FACT {f}" for f in alt)
                lines.append(f"GROUP {entry.id} END")
        for rule in self.rules:
            level = "-" if rule.level is None else str(rule.level)
            lines.append(f"RULE {level} {_format_weight(rule.weight)} {rule.id}: {rule}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "KnowledgeBase":
        kb = cls()
        group: Optional[ReadingGroup] = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            keyword, _, rest = line.partition(" ")
            try:
                if keyword == "SKOLEM":
                    kb.skolems.next_index = int(rest)
                elif keyword == "TEXT":
                    m = re.match(r"^(\d+)/(\d+) (\".*\")$", rest)
                    if not m:
                        raise KBFormatError("malformed TEXT line", lineno)
                    kb.texts[Provenance(int(m.group(1)), int(m.group(2)))] = json.loads(m.group(3))
                elif keyword == "FACT":
                    a, prov = _parse_fact(rest)
                    if prov not in kb.texts:
                        raise KBFormatError(f"fact for unregistered passage {prov}", lineno)
                    if not is_ground(a):
                        raise KBFormatError(f"fact is not ground: {a}", lineno)
                    if group is None:
                        kb._entries.append(kb._store(a, prov))
                    else:
                        if not group.alternatives or prov != group.prov:
                            raise KBFormatError("fact outside an alternative", lineno)
                        alt = len(group.alternatives) - 1
                        group.alternatives[-1].append(kb._store(a, prov, group.id, alt))
                elif keyword == "GROUP":
                    parts = rest.split()
                    if len(parts) == 3 and parts[1] == "BEGIN" and group is None:
                        f, _, d = parts[2].partition("/")
                        group = ReadingGroup(parts[0], Provenance(int(f), int(d)))
                    elif len(parts) == 2 and parts[1] == "END" and group is not None \
                            and parts[0] == group.id:
                        if len(group.alternatives) < 2:
                            raise KBFormatError("reading group needs two alternatives", lineno)
                        kb.groups[group.id] = group
                        kb._entries.append(group)
                        kb._next_group = max(kb._next_group, _numeric_suffix(group.id) + 1)
                        group = None
                    else:
                        raise KBFormatError("malformed GROUP line", lineno)
                elif keyword == "ALT":
                    if group is None:
                        raise KBFormatError("ALT outside a reading group", lineno)
                    group.alternatives.append([])
                elif keyword == "RULE":
                    kb.rules.append(parse_rule_line(rest))
                else:
                    raise KBFormatError(f"unknown line type {keyword!r}", lineno)
            except KBFormatError:
                raise
            except (LogDocError, ValueError) as e:
                raise KBFormatError(str(e), lineno) from e
        if group is not None:
            raise KBFormatError(f"unterminated reading group {group.id}")
        return kb

    def save(self, uri: str, client=None) -> None:
        storage.write_text(uri, self.dumps(), client)
        logger.info("Saved knowledge base to %s (%d facts)", uri, len(self))

    @classmethod
    def load(cls, uri: str, client=None) -> "KnowledgeBase":
        return cls.loads(storage.read_text(uri, client))


def parse_rule_line(rest: str) -> HornClause:
    """``<level|-> <weight> <id>: <clause>`` as used by RULE lines."""
    m = re.match(r"^(\S+)\s+(\S+)\s+([^\s:]+):\s*(.+)$", rest)
    if not m:
        raise ValueError("malformed RULE line")
    level = None if m.group(1) == "-" else int(m.group(1))
    if level is not None and level not in (1, 2, 3):
        raise ValueError(f"rule level must be 1, 2 or 3, not {level}")
    weight = float(m.group(2))
    if weight < 0:
        raise ValueError("rule weight must be non-negative")
    clause = parse_clause(m.group(4))
    if clause.is_fact:
        raise ValueError("rule without body")
    return HornClause(clause.head, clause.body, level, weight, m.group(3))


def _parse_fact(text: str) -> Tuple[Atom, Provenance]:
    p = TermParser(text)
    a = p.parse_atom()
    p.expect("/")
    frag = int(p.expect_kind("number")[1])
    p.expect("/")
    doc = int(p.expect_kind("number")[1])
    p.finish()
    return a, Provenance(frag, doc)


def _unique(atoms: Sequence[Atom]) -> List[Atom]:
    return list(dict.fromkeys(atoms))


def _numeric_suffix(ident: str) -> int:
    m = re.search(r"(\d+)$", ident)
    return int(m.group(1)) if m else 0


def _format_weight(weight: float) -> str:
    return repr(float(weight))
