"""Monte Carlo estimate of the mean constant, independent of the equation pipeline.

Samples uniform labeled trees through random Prüfer sequences, counts pattern
occurrences with the brute-force matcher, and compares occurrences per node
with the exact constant from the analysis.

    python3 scripts/monte_carlo_mu.py --pattern paper:fig7 --n 4000 --samples 200
"""

from __future__ import annotations

import argparse
import random
import statistics

from treepatterns.analysis import AnalysisConfig, analyze
from treepatterns.oracle import _adjacency, _count, compile_pattern
from treepatterns.pattern import load_pattern
from treepatterns.trees import prufer_decode_edges


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pattern", default="paper:fig7")
    ap.add_argument("--n", type=int, default=4000)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    m = load_pattern(args.pattern)
    plan = compile_pattern(m)
    rng = random.Random(args.seed)
    ratios = []
    for _ in range(args.samples):
        seq = [rng.randint(1, args.n) for _ in range(args.n - 2)]
        ratios.append(_count(plan, _adjacency(args.n, prufer_decode_edges(seq, args.n))) / args.n)
    mean = statistics.fmean(ratios)
    err = statistics.stdev(ratios) / len(ratios) ** 0.5
    exact = analyze(m, AnalysisConfig(sigma2=False, validate=False)).constants.mu
    print(f"pattern {m.name}: n={args.n}, samples={args.samples}")
    print(f"occurrences per node: {mean:.6f} +- {err:.6f} (one standard error)")
    print(f"exact mu: {exact} ~ {float(exact.approx()):.6f}")


if __name__ == "__main__":
    main()
