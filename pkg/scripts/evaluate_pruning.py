#!/usr/bin/env python3
"""
Pruning evaluation script.
Parses the fixture sentences with and without n-best pruning and writes
PRUNING_REPORT.md plus pruning_report.json.
"""
import json
import os
import sys
from datetime import datetime

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from logdoc.chart_parser import ScoreConfig
from logdoc.errors import ResourceError
from logdoc.evaluation import FIXTURE_SENTENCES, compare_pruning, render_pruning_report
from logdoc.resources import load_resources


def evaluate_pruning(n_best=1):
    """
    Compare chart sizes and rank-1 readings for the fixture sentences.
    """
    print("="*80)
    print("LOGDOC - N-BEST PRUNING EVALUATION")
    print("="*80)
    print(f"\nEvaluation Date: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print(f"Sentences: {len(FIXTURE_SENTENCES)}")
    print(f"n-best: {n_best}")
    print("\n" + "="*80)

    try:
        resources = load_resources()
    except ResourceError as e:
        print(f"\n❌ Error loading resources:\n{e}")
        return 2

    report = compare_pruning(FIXTURE_SENTENCES, resources, ScoreConfig(n_best=n_best))

    for row in report['sentences']:
        mark = "✅" if row['agree'] else "❌"
        print(f"{mark} {row['text']}: {row['pruned']['created']} vs "
              f"{row['full']['created']} edges")

    totals = report['totals']
    print("\n" + "="*80)
    print(f"Edge ratio: {totals['edge_ratio']:.1%} (target <= 50%)")
    print(f"Rank-1 agreement: {totals['agreement']:.1%} (target >= 80%)")
    print("="*80 + "\n")

    with open('pruning_report.json', 'w') as f:
        json.dump(report, f, indent=2)
    with open('PRUNING_REPORT.md', 'w') as f:
        f.write(render_pruning_report(report))

    print("✅ Evaluation complete!")
    print("📄 Report saved to: PRUNING_REPORT.md")
    print("📊 Raw data saved to: pruning_report.json")
    return 0


if __name__ == '__main__':
    sys.exit(evaluate_pruning(int(sys.argv[1]) if len(sys.argv) > 1 else 1))
