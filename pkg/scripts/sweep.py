"""Ratio sweep: each rounding pipeline against the exact optimum.

    python scripts/sweep.py --seeds 20 --out sweep.csv
"""
import argparse
import csv
import sys
import time
from fractions import Fraction

from dirlat.atspp import round_path, solve_atspp_lp
from dirlat.dirlat import solve
from dirlat.exact import exact_atspp, exact_dirlat
from dirlat.errors import PreconditionError
from dirlat.metric import generate_random, regret_transform, scale_instance
from dirlat.regret import round_regret


def rows(seeds, sizes, rho):
    for n in sizes:
        for seed in range(seeds):
            t0 = time.time()
            M = generate_random(n, 10, seed)
            state = solve_atspp_lp(M, 0, n - 1, rho)
            _, rc = round_path(state)
            exact = exact_atspp(M, 0, n - 1).value
            reg = regret_transform(generate_random(n, 10, seed, symmetric=True), 0)
            _, gc = round_regret(reg, rho)
            L = generate_random(n, 6, seed)
            try:
                _, lc = solve(L, rho)
            except PreconditionError:  # zero distances; the time-indexed LP needs a scaled copy
                _, lc = solve(scale_instance(L, Fraction(1, 10)), rho)
            yield {
                "n": n, "seed": seed, "rho": str(rho),
                "atspp_lp": float(state.opt_lp), "atspp_exact": float(exact),
                "atspp_rounded": float(rc.path_cost), "atspp_ok": rc.ok,
                "regret_ratio": float(gc.ratio), "regret_ok": gc.ok,
                "latency_ratio": float(lc.latency / lc.opt) if lc.opt else 1.0, "latency_ok": lc.ok,
                "seconds": round(time.time() - t0, 3),
            }


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--sizes", type=int, nargs="+", default=[5, 6, 7])
    ap.add_argument("--rho", default="2/3")
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = None
    for row in rows(args.seeds, args.sizes, Fraction(args.rho)):
        if writer is None:
            writer = csv.DictWriter(out, fieldnames=list(row))
            writer.writeheader()
        writer.writerow(row)
    if args.out:
        out.close()


if __name__ == "__main__":
    main()
