"""
Refutation prover for Horn clauses over a knowledge base.

Goals are proved one passage at a time: every goal literal carries the same
fragment/document variables, so facts are restricted to the passage being
tried and rules only chain facts of that passage. Search is SLD resolution
with leftmost selection, iterative deepening on rule nesting depth and a fresh
inference budget for every passage tried.
"""
import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, NamedTuple, Optional, Sequence, Set, Tuple

from logdoc.errors import ConfigError
from logdoc.knowledge_base import KnowledgeBase, PredicateKey, Provenance
from logdoc.reader import parse_atom
from logdoc.resources import IsaHierarchy
from logdoc.terms import (
    Atom,
    Constant,
    HornClause,
    LogicalForm,
    Substitution,
    Variable,
    apply,
    rename_apart,
    rename_term,
    renaming,
    unify,
    variables,
)

logger = logging.getLogger(__name__)

S_VAR = Variable("?S")
D_VAR = Variable("?D")

STAGES = ("direct", "level2", "level3", "isa")
STAGE_LEVELS = {
    "direct": frozenset(),
    "level2": frozenset({1, 2}),
    "level3": frozenset({1, 2, 3}),
    "isa": frozenset({1, 2, 3}),
}


@dataclass(frozen=True)
class StagePolicy:
    """Which rules a stage may use and how much search it may spend."""

    name: str
    levels: FrozenSet[int] = frozenset()
    use_isa: bool = False
    max_inferences: int = 10000
    max_depth: int = 8
    rule_weight_cap: Optional[float] = None

    def admits(self, rule: HornClause) -> bool:
        if not self.levels:
            return False
        if self.rule_weight_cap is not None and rule.weight > self.rule_weight_cap:
            return False
        return rule.level is None or rule.level in self.levels


def stage_policy(stage: str, max_inferences: int = 10000, max_depth: int = 8,
                 rule_weight_cap: Optional[float] = None) -> StagePolicy:
    if stage not in STAGE_LEVELS:
        raise ConfigError(f"unknown stage {stage!r}")
    return StagePolicy(stage, STAGE_LEVELS[stage], stage == "isa",
                       max_inferences, max_depth, rule_weight_cap)


@dataclass
class Goal:
    """Conjunction of literals proved within one passage."""

    literals: List[Atom]
    text: str = ""
    keyword: bool = False

    @classmethod
    def from_lf(cls, lf: LogicalForm, text: str = "", keyword: bool = False) -> "Goal":
        return cls(list(lf.atoms), text, keyword)

    def __str__(self) -> str:
        return ", ".join(str(a) for a in self.literals)


@dataclass
class ProofStep:
    kind: str
    ref: str
    text: str
    provenance: str = ""
    salt: int = 0
    variant: Optional[Atom] = None

    def to_dict(self) -> Dict:
        return {
            'kind': self.kind,
            'ref': self.ref,
            'text': self.text,
            'provenance': self.provenance,
            'salt': self.salt,
            'variant': None if self.variant is None else str(self.variant),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ProofStep":
        variant = data.get('variant')
        return cls(data['kind'], data['ref'], data['text'], data.get('provenance', ""),
                   data.get('salt', 0), parse_atom(variant) if variant else None)


@dataclass
class ProofTrace:
    goal: List[Atom]
    steps: List[ProofStep] = field(default_factory=list)
    inferences: int = 0
    stage: str = "direct"
    fragment: Optional[int] = None
    document: Optional[int] = None

    def rule_ids(self) -> List[str]:
        return [s.ref for s in self.steps if s.kind == "rule"]

    def fact_ids(self) -> List[str]:
        return [s.ref for s in self.steps if s.kind == "fact"]

    def replay(self, kb: KnowledgeBase, rules: Sequence[HornClause],
               isa: Optional[IsaHierarchy] = None) -> Optional[Substitution]:
        """
        Re-derive the solution from the recorded steps.

        Returns:
            Substitution over the goal variables, or None when a step no longer applies
        """
        mapping = renaming(self.goal, 0)
        goals: List[Tuple[Atom, int]] = [(rename_term(g, mapping), 0) for g in self.goal]
        by_id = {r.id: r for r in rules}
        prov = Provenance(self.fragment, self.document)
        s = Substitution()
        choices: Dict[str, int] = {}
        steps = iter(self.steps)
        while goals:
            lit, depth = goals.pop(0)
            step = next(steps, None)
            if step is not None and step.kind == "isa":
                if depth != 0 or step.variant is None:
                    return None
                if isa is not None and step.variant not in subsumption_expand(lit, isa):
                    return None
                lit = step.variant
                step = next(steps, None)
            if step is None:
                return None
            if step.kind == "fact":
                try:
                    fact = kb.fact(step.ref)
                except KeyError:
                    return None
                if fact.prov != prov:
                    return None
                if fact.reading_group is not None:
                    if choices.setdefault(fact.reading_group, fact.alternative) != fact.alternative:
                        return None
                s = unify(lit, fact.atom, s)
            elif step.kind == "rule" and step.ref in by_id:
                rule = rename_apart(by_id[step.ref], step.salt)
                s = unify(lit, rule.head, s)
                goals = [(b, depth + 1) for b in rule.body] + goals
            else:
                return None
            if s is None:
                return None
        if next(steps, None) is not None:
            return None
        return Substitution({v: apply(s, mapping[v]) for v in variables(self.goal)})

    def to_dict(self) -> Dict:
        return {
            'goal': [str(g) for g in self.goal],
            'steps': [s.to_dict() for s in self.steps],
            'inferences': self.inferences,
            'stage': self.stage,
            'fragment': self.fragment,
            'document': self.document,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ProofTrace":
        return cls(
            goal=[parse_atom(g) for g in data.get('goal', [])],
            steps=[ProofStep.from_dict(s) for s in data.get('steps', [])],
            inferences=data.get('inferences', 0),
            stage=data.get('stage', "direct"),
            fragment=data.get('fragment'),
            document=data.get('document'),
        )


class Solution(NamedTuple):
    substitution: Substitution
    trace: ProofTrace


@dataclass
class ProofResult:
    solutions: List[Solution] = field(default_factory=list)
    truncated: bool = False
    inferences: int = 0

    def __iter__(self) -> Iterator[Solution]:
        return iter(self.solutions)

    def __len__(self) -> int:
        return len(self.solutions)

    def __getitem__(self, index: int) -> Solution:
        return self.solutions[index]

    def passages(self) -> List[Tuple[int, int]]:
        """(fragment, document) of every solution, in order."""
        return [(sol.trace.fragment, sol.trace.document) for sol in self.solutions]


def subsumption_expand(a: Atom, isa: IsaHierarchy) -> List[Atom]:
    """
    The atom plus every variant with constants replaced by isa-descendants.

    Args:
        a (Atom): query literal
        isa (IsaHierarchy): subsumption edges

    Returns:
        List[Atom]: the original atom first
    """
    options = []
    for arg in a.args:
        if isinstance(arg, Constant):
            options.append([arg] + [Constant(d) for d in isa.descendants(arg.name)])
        else:
            options.append([arg])
    return [Atom(a.predicate, tuple(combo)) for combo in itertools.product(*options)]


class _Exhausted(Exception):
    pass


class Prover:
    """One goal against one knowledge base under one stage policy."""

    def __init__(self, kb: KnowledgeBase, policy: StagePolicy,
                 rules: Optional[Sequence[HornClause]] = None,
                 isa: Optional[IsaHierarchy] = None):
        self.kb = kb
        self.policy = policy
        candidates = kb.rules if rules is None else rules
        self.rules = [r for r in candidates if policy.admits(r)]
        self.isa = isa if policy.use_isa else None
        self._by_head: Dict[PredicateKey, List[HornClause]] = defaultdict(list)
        for rule in self.rules:
            self._by_head[rule.head.key].append(rule)
        self.inferences = 0
        self._spent = 0
        self._salt = 0
        self._cutoff = False

    def prove(self, goal) -> ProofResult:
        literals = list(goal.literals if isinstance(goal, Goal) else goal)
        if not literals:
            return ProofResult([Solution(Substitution(), ProofTrace([], stage=self.policy.name))])

        mapping = renaming(literals, 0)
        renamed = [rename_term(g, mapping) for g in literals]
        variants = [subsumption_expand(g, self.isa) if self.isa is not None else [g]
                    for g in renamed]
        result = ProofResult()
        for prov in self.kb.passages():
            derivable = self._derivable(prov)
            if any(g.key not in derivable for g in renamed):
                continue
            self._spent = 0
            try:
                found = self._prove_passage(renamed, variants, prov)
            except _Exhausted:
                result.truncated = True
                logger.debug("Inference budget of %d exhausted at passage %s",
                            self.policy.max_inferences, prov)
                continue
            if found is None:
                continue
            s, steps = found
            bindings = {v: apply(s, mapping[v]) for v in variables(literals)}
            bindings[S_VAR] = Constant(str(prov.fragment))
            bindings[D_VAR] = Constant(str(prov.document))
            trace = ProofTrace(literals, steps, self._spent,
                               self.policy.name, prov.fragment, prov.document)
            result.solutions.append(Solution(Substitution(bindings), trace))
        result.inferences = self.inferences
        logger.debug("Stage %s: %d solutions, %d inferences%s", self.policy.name,
                     len(result), self.inferences, " (truncated)" if result.truncated else "")
        return result

    def _derivable(self, prov: Provenance) -> Set[PredicateKey]:
        keys = set(self.kb.passage_keys(prov))
        changed = True
        while changed:
            changed = False
            for rule in self.rules:
                if rule.head.key not in keys and all(b.key in keys for b in rule.body):
                    keys.add(rule.head.key)
                    changed = True
        return keys

    def _tick(self) -> None:
        self.inferences += 1
        self._spent += 1
        if self._spent > self.policy.max_inferences:
            raise _Exhausted()

    def _prove_passage(self, renamed: List[Atom], variants: List[List[Atom]],
                       prov: Provenance):
        for limit in range(self.policy.max_depth + 1):
            self._cutoff = False
            goals = [(g, 0, i) for i, g in enumerate(renamed)]
            found = self._solve(goals, Substitution(), {}, [], prov, limit, variants)
            if found is not None:
                return found
            if not self._cutoff:
                return None
        return None

    def _solve(self, goals, s, choices, steps, prov, limit, variants):
        if not goals:
            return s, steps
        (lit, depth, origin), rest = goals[0], goals[1:]
        candidates = [(lit, steps)]
        if depth == 0 and self.isa is not None:
            for variant in variants[origin][1:]:
                step = ProofStep("isa", f"{lit} ~> {variant}", str(variant), str(prov),
                                 variant=variant)
                candidates.append((variant, steps + [step]))
        for i, (candidate, pre) in enumerate(candidates):
            if i:
                self._tick()
            found = self._resolve(candidate, depth, rest, s, choices, pre, prov, limit, variants)
            if found is not None:
                return found
        return None

    def _resolve(self, lit, depth, rest, s, choices, steps, prov, limit, variants):
        for fact in self.kb.facts_for(lit.key, prov):
            self._tick()
            group = fact.reading_group
            if group is not None and choices.get(group, fact.alternative) != fact.alternative:
                continue
            s2 = unify(lit, fact.atom, s)
            if s2 is None:
                continue
            chosen = choices if group is None else {**choices, group: fact.alternative}
            step = ProofStep("fact", fact.id, str(fact), str(prov))
            found = self._solve(rest, s2, chosen, steps + [step], prov, limit, variants)
            if found is not None:
                return found

        rules = self._by_head.get(lit.key, ())
        if rules and depth >= limit:
            self._cutoff = True
            return None
        for rule in rules:
            self._tick()
            self._salt += 1
            renamed = rename_apart(rule, self._salt)
            s2 = unify(lit, renamed.head, s)
            if s2 is None:
                continue
            level = "-" if rule.level is None else f"L{rule.level}"
            step = ProofStep("rule", rule.id, f"[{level}] {rule}", str(prov), self._salt)
            body = [(b, depth + 1, None) for b in renamed.body]
            found = self._solve(body + rest, s2, choices, steps + [step], prov, limit, variants)
            if found is not None:
                return found
        return None


def prove(goal, kb: KnowledgeBase, policy: StagePolicy,
          rules: Optional[Sequence[HornClause]] = None,
          isa: Optional[IsaHierarchy] = None) -> ProofResult:
    """
    Prove a goal in every passage of the knowledge base.

    Args:
        goal: Goal or list of atoms
        kb (KnowledgeBase): facts and rules
        policy (StagePolicy): admitted rule levels, isa use and budgets
        rules: rules to consider (the knowledge base's own rules by default)
        isa (IsaHierarchy): used only when the policy enables it

    Returns:
        ProofResult: at most one solution per passage in (document, fragment)
        order; ``truncated`` is set when the inference budget ran out
    """
    return Prover(kb, policy, rules, isa).prove(goal)


def format_trace(trace: ProofTrace, trace_id: Optional[str] = None) -> str:
    """Numbered resolution steps with the clause used and its provenance."""
    head = f"trace {trace_id}: " if trace_id else ""
    lines = [f"{head}passage {trace.fragment}/{trace.document} "
             f"stage {trace.stage}, {trace.inferences} inferences",
             "goal: " + ", ".join(str(g) for g in trace.goal)]
    for i, step in enumerate(trace.steps, 1):
        where = f"  @{step.provenance}" if step.provenance else ""
        if step.kind == "rule":
            lines.append(f"{i:>3}. rule {step.ref} {step.text}{where}")
        elif step.kind == "fact":
            lines.append(f"{i:>3}. fact {step.ref} {step.text}")
        else:
            lines.append(f"{i:>3}. isa {step.ref}{where}")
    return "\n".join(lines)
