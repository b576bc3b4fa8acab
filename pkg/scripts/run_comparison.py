"""Run both representations over the corpus and print the summary table.

    python3 scripts/run_comparison.py --seeds 1..10 --out out

Extra arguments are passed through to ``srgen compare``.
"""
import argparse
import csv
import sys
import time
from pathlib import Path

from srgen.cli import main as srgen

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def summary_rows(path: Path) -> list:
    with path.open() as fh:
        return [r for r in csv.DictReader(fh) if r["seed"] == "summary"]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus", default=str(CORPUS))
    ap.add_argument("--seeds", default="1..10")
    ap.add_argument("--out", default="out")
    args, rest = ap.parse_known_args(argv)
    start = time.perf_counter()
    code = srgen(["compare", "--corpus", args.corpus, "--seeds", args.seeds, "--out", args.out, *rest])
    elapsed = time.perf_counter() - start
    table = Path(args.out) / "comparison.csv"
    if not table.exists():
        return code
    cols = ["coverage", "mutation_score", "sr_rate", "mean_coherence", "n_tests"]
    print(f"\n{'subject':<14} {'repr':<9} " + " ".join(f"{c:>26}" for c in cols))
    for r in summary_rows(table):
        print(f"{r['subject']:<14} {r['representation']:<9} " + " ".join(f"{r[c]:>26}" for c in cols))
    print(f"\nmedian [iqr] over seeds {args.seeds}; wall time {elapsed:.1f}s")
    return code


if __name__ == "__main__":
    sys.exit(main())
