"""Randomized integrality-gap search; every record is appended to a JSONL archive and re-verified.

    python scripts/gap_search.py --rho 3/5 --sizes 5 6 7 8 --seeds 4 --archive gaps.jsonl
"""
import argparse
from fractions import Fraction

from dirlat.exact import append_archive, gap_search, read_archive, reverify_record


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--rho", default="3/5")
    ap.add_argument("--sizes", type=int, nargs="+", default=[5, 6, 7, 8])
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--steps", type=int, default=100)
    ap.add_argument("--archive", default="gaps.jsonl")
    args = ap.parse_args(argv)
    rho = Fraction(args.rho)
    for n in args.sizes:
        for seed in range(args.seeds):
            rec = gap_search(n, rho, seed, steps=args.steps)
            append_archive(args.archive, rec)
            print(f"n={n} seed={seed} ratio={rec['ratio']}")
    records = read_archive(args.archive)
    good = sum(reverify_record(r) for r in records)
    finite = [Fraction(r["ratio"]) for r in records if r["ratio"] != "inf"]
    print(f"{good}/{len(records)} archived records re-verified; max finite ratio "
          f"{float(max(finite)) if finite else 'n/a'}")


if __name__ == "__main__":
    main()
