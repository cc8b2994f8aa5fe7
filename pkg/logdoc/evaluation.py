"""
Pruning evaluation: chart sizes and rank-1 readings with and without n-best pruning.
"""
import logging
import time
from dataclasses import replace
from typing import Dict, List, Optional, Sequence

from logdoc.chart_parser import ScoreConfig, analyses, extract_fragments, parse
from logdoc.lexicon import tokenize
from logdoc.resources import ResourceSet
from logdoc.semantics import canonical, compose, compose_fragments

logger = logging.getLogger(__name__)

FIXTURE_SENTENCES = [
    "answering machines",
    "implementing languages",
    "backtracking problems",
    "natural language question answering systems",
    "natural language questions",
    "the operator tested the programs on the system",
    "the operator translated the sentences with a computer",
    "a new characterization of attachment preferences in english",
    "on tuesday john furtively gave mary an apple in the courtyard",
    "on tuesday john gave mary a nice computer table against her will",
    "the ball rolled from the center to the edge",
    "peter beats john",
    "colorless green ideas sleep furiously",
    "the dog fell to the floor",
    "the operator tested the programs on the system with a computer in the courtyard on tuesday",
    "the operator translated the sentences of the documents on the table with a computer"
    " in the courtyard",
]


def best_reading(tokens: Sequence[str], resources: ResourceSet, cfg: ScoreConfig) -> Dict:
    """Edge counts and the canonical rank-1 logical form under one configuration."""
    started = time.perf_counter()
    chart = parse(tokens, resources, cfg)
    elapsed = time.perf_counter() - started
    ranked = analyses(chart)
    if ranked:
        lf = compose(ranked[0], resources)[0]
        value: Optional[float] = ranked[0].value
    else:
        fragments = extract_fragments(chart, cfg)
        lf = compose_fragments(fragments, resources)
        value = None
    return {
        'created': chart.created,
        'live': len(chart),
        'analyses': len(ranked),
        'value': value,
        'reading': canonical(lf),
        'seconds': elapsed,
    }


def compare_pruning(sentences: Sequence[str], resources: ResourceSet,
                    cfg: Optional[ScoreConfig] = None) -> Dict:
    """
    Parse every sentence with pruning (``cfg.n_best``, at least 1) and without.

    Args:
        sentences: fixture sentences
        resources (ResourceSet): loaded resources
        cfg (ScoreConfig): base settings

    Returns:
        Dict: per-sentence rows and totals (edge ratio, rank-1 agreement)
    """
    cfg = cfg or ScoreConfig()
    pruned_cfg = replace(cfg, n_best=cfg.n_best or 1)
    full_cfg = replace(cfg, n_best=0)

    rows: List[Dict] = []
    for text in sentences:
        tokens = tokenize(text)
        pruned = best_reading(tokens, resources, pruned_cfg)
        full = best_reading(tokens, resources, full_cfg)
        rows.append({
            'text': text,
            'pruned': pruned,
            'full': full,
            'agree': pruned['reading'] == full['reading'],
        })
        logger.info("%s: %d vs %d edges", text, pruned['created'], full['created'])

    pruned_edges = sum(r['pruned']['created'] for r in rows)
    full_edges = sum(r['full']['created'] for r in rows)
    agreeing = sum(1 for r in rows if r['agree'])
    return {
        'n_best': pruned_cfg.n_best,
        'sentences': rows,
        'totals': {
            'pruned_edges': pruned_edges,
            'full_edges': full_edges,
            'edge_ratio': pruned_edges / full_edges if full_edges else 0.0,
            'agreement': agreeing / len(rows) if rows else 1.0,
            'pruned_seconds': sum(r['pruned']['seconds'] for r in rows),
            'full_seconds': sum(r['full']['seconds'] for r in rows),
        },
    }


def render_pruning_report(report: Dict) -> str:
    """Markdown summary of a compare_pruning result."""
    totals = report['totals']
    lines = [
        "# Pruning report",
        "",
        f"n-best: {report['n_best']}",
        "",
        "| sentence | edges (pruned) | edges (full) | analyses (pruned) | analyses (full) | rank-1 agrees |",
        "|---|---:|---:|---:|---:|:---:|",
    ]
    for row in report['sentences']:
        lines.append(
            f"| {row['text']} | {row['pruned']['created']} | {row['full']['created']} "
            f"| {row['pruned']['analyses']} | {row['full']['analyses']} "
            f"| {'yes' if row['agree'] else 'no'} |"
        )
    lines += [
        "",
        f"Total edges: {totals['pruned_edges']} pruned vs {totals['full_edges']} full "
        f"({totals['edge_ratio']:.1%}).",
        f"Rank-1 agreement: {totals['agreement']:.1%}.",
        f"Parse time: {totals['pruned_seconds']:.3f}s pruned vs {totals['full_seconds']:.3f}s full.",
        "",
    ]
    return "\n".join(lines)
