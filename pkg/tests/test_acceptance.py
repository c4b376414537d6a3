"""Acceptance suite: one reported line per criterion.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python tests/test_acceptance.py``.
"""
import math
import sys
import time
from fractions import Fraction as F
from functools import lru_cache

import pytest

from dirlat.atspp import (
    MultiLapCircuit, contractibility_check, is_hamiltonian_path, round_path, solve_atspp_lp,
    solve_zmin_dual, tight_set_structure, uncross,
)
from dirlat.dirlat import solve
from dirlat.exact import (
    append_archive, exact_atspp, exact_dirlat, gap_search, permutation_atspp, permutation_dirlat,
    read_archive, reverify_record,
)
from dirlat.metric import Metric, generate_random, path_latency, regret_transform, scale_instance
from dirlat.regret import branching_decomposition, connectivity, covering_lp_feasible, delta_opt, g_value, round_regret

RESULTS = {}
ATSPP_RHOS = (F(11, 20), F(2, 3), F(9, 10), F(1))
REGRET_RHOS = (F(2, 3), F(74743, 100000))


def report(k, ok, detail):
    RESULTS[k] = (ok, detail)
    return ok


def _cut_mass(x, U):
    return sum(v for (a, b), v in x.items() if (a in U) != (b in U))


@lru_cache(maxsize=None)
def atspp_runs():
    t0 = time.time()
    runs = []
    for seed in range(50):
        n = 5 + seed % 4
        M = generate_random(n, 10, 1000 + seed)
        for rho in ATSPP_RHOS:
            state = solve_atspp_lp(M, 0, n - 1, rho)
            dual = solve_zmin_dual(state)
            lam = uncross(dual)
            P, cert = round_path(state, lam)
            runs.append((M, rho, state, dual, lam, P, cert))
    return runs, time.time() - t0


@lru_cache(maxsize=None)
def regret_runs():
    t0 = time.time()
    runs = []
    for seed in range(50):
        n = 6 + seed % 3
        reg = regret_transform(generate_random(n, 10, 2000 + seed, symmetric=True), 0)
        for rho in REGRET_RHOS:
            P, cert = round_regret(reg, rho, delta_opt(rho))
            runs.append((reg, rho, P, cert))
    return runs, time.time() - t0


def test_c1_z_gap():
    runs, secs = atspp_runs()
    bad = [(r[0].n, r[1]) for r in runs if (r[4].z[0] - r[4].z[r[0].n - 1]) * (2 * r[1] - 1) > r[2].opt_lp]
    ok = not bad and secs <= 300
    assert report(1, ok, f"{len(runs)} runs, {len(bad)} violations, {secs:.1f}s"), bad


def test_c2_slackness_and_tight_sets():
    runs, _ = atspp_runs()
    slack, struct = 0, 0
    for M, rho, state, dual, lam, P, cert in runs:
        for D in (dual, lam):
            slack += sum(1 for U in D.support() if _cut_mass(state.x, U) != 2 * rho)
        struct += sum(1 for U in lam.support() if tight_set_structure(state, U))
    ok = slack == 0 and struct == 0
    assert report(2, ok, f"slackness violations {slack}, structure violations {struct}")


def test_c3_contractibility():
    runs, _ = atspp_runs()
    bad = sum(1 for M, rho, state, dual, lam, P, cert in runs
              for v in contractibility_check(lam, state.support(), 0, M.n - 1).values() if not v)
    assert report(3, bad == 0, f"{bad} sets disconnect s from t")


def test_c4_rounding_pipeline():
    runs, _ = atspp_runs()
    ham = sum(is_hamiltonian_path(P, M.n, 0, M.n - 1) for M, rho, state, dual, lam, P, cert in runs)
    stitch_bad = sum(1 for r in runs for k, v in r[6].checks.items() if k.startswith("stitch") and not v)
    cert_bad = sum(1 for r in runs if not r[6].ok)
    multi = 0
    for M, rho, state, dual, lam, P, cert in runs[::8]:
        Q, c2 = round_path(state, lam, circuit_solver=MultiLapCircuit(2))
        multi += c2.k == 2 and is_hamiltonian_path(Q, M.n, 0, M.n - 1) and c2.ok
    n_multi = len(runs[::8])
    ok = ham == len(runs) and stitch_bad == 0 and cert_bad == 0 and multi == n_multi
    assert report(4, ok, f"hamiltonian {ham}/{len(runs)}, stitch failures {stitch_bad}, "
                         f"certificate failures {cert_bad}, multi-lap {multi}/{n_multi}")


def test_c5_regret():
    runs, secs = regret_runs()
    failed = {}
    for reg, rho, P, cert in runs:
        bound = g_value(rho, cert.delta) * cert.opt_lp
        if reg.path_cost(P) > bound:
            failed["final"] = failed.get("final", 0) + 1
        for k, v in cert.checks.items():
            if not v:
                failed[k] = failed.get(k, 0) + 1
    worst = max(float(reg.path_cost(P) / cert.opt_lp) for reg, rho, P, cert in runs if cert.opt_lp)
    ok = not failed and secs <= 600
    assert report(5, ok, f"{len(runs)} runs, failures {failed or 'none'}, worst ratio {worst:.3f}, {secs:.1f}s")


def test_c6_constants():
    tol = 1e-4
    target = 300 / (42 - 12 * math.sqrt(6))
    parts = {
        "23.798": abs(target - 23.798) < 1e-3,
        "g*(2rho-1)": all(abs(float(g_value(r, delta_opt(r)) * (2 * r - 1)) - target) < tol
                          for r in (F(3, 5), F(2, 3), F(74743, 100000), F(1))),
        "14+4sqrt6": abs(target - (14 + 4 * math.sqrt(6))) < tol,
        "778": 4 * (48.09442 + 1) / (1 - 0.74743) <= 778,
        "79.2": abs(4 * (2 / (2 * 0.725 - 1) + 1) / (1 - 0.725) - 79.2) < tol,
    }
    value = 4 * (2 / (2 * 0.725 - 1) + 1) / (1 - 0.725)
    bad = [k for k, v in parts.items() if not v]
    assert report(6, not bad, f"failed parts {bad or 'none'} (79.2 check computes {value:.5f})"), bad


def test_c7_branching_contract():
    runs, _ = regret_runs()
    bad = sum(1 for r in runs if not r[3].checks["branching_contract"])
    agree = 0
    small = 0
    for seed in range(20):
        n = 4 + seed % 2
        reg = regret_transform(generate_random(n, 10, 3000 + seed, symmetric=True), 0)
        state = solve_atspp_lp(reg, 0, n - 1, F(2, 3))
        nodes = list(range(n))
        wb = branching_decomposition(state.x, 0, F(1), nodes)
        lam = connectivity(state.x, 0, nodes)
        contract = not wb.contract_violations(state.x, F(1), lam)
        agree += contract == covering_lp_feasible(state.x, 0, F(1), nodes) and contract
        small += 1
    ok = bad == 0 and agree == small
    assert report(7, ok, f"contract failures {bad}/{len(runs)}, covering LP agreement {agree}/{small}")


def test_c8_guided():
    t0 = time.time()
    failed = {}
    count = 0
    for seed in range(50):
        n = 4 + seed % 3
        M = generate_random(n, 6, 4000 + seed)
        if min(M.dist[u][v] for u in M.nodes for v in M.nodes if u != v) < 1:
            continue
        count += 1
        opt = exact_dirlat(M).value
        P, cert = solve(M, F(2, 3))
        checks = dict(cert.checks)
        checks["lp_le_opt"] = cert.lp_objective <= opt
        checks["twelve"] = cert.latency <= 12 * (cert.alpha_hat + 1) * opt
        for k, v in checks.items():
            if not v:
                failed[k] = failed.get(k, 0) + 1
    secs = time.time() - t0
    ok = not failed and secs <= 900 and count >= 40
    assert report(8, ok, f"{count} instances, failures {failed or 'none'}, {secs:.1f}s")


def test_c9_exhaustive():
    lines = []
    ok = True
    for n in (2, 3, 4):
        M = Metric(tuple(tuple(F(0 if i == j else 1) for j in range(n)) for i in range(n)))
        _, guided = solve(M, F(2, 3))
        _, best = solve(M, F(2, 3), mode="exhaustive")
        good = best.latency <= guided.latency and best.ok and guided.ok
        ok &= good
        lines.append(f"n={n}: {best.latency} vs {guided.latency}")
    assert report(9, ok, "; ".join(lines))


def test_c10_scaling():
    t0 = time.time()
    bad = 0
    eps = F(1, 10)
    for seed in range(25):
        M = generate_random(5, 30, 5000 + seed)
        S = scale_instance(M, eps)
        P = exact_dirlat(S.scaled).path
        if path_latency(M, P) > (1 + eps) * exact_dirlat(M).value:
            bad += 1
    secs = time.time() - t0
    assert report(10, bad == 0 and secs <= 120, f"25 instances, {bad} violations, {secs:.1f}s")


def test_c11_oracles():
    bad = 0
    for seed in range(100):
        n = 2 + seed % 6
        M = generate_random(n, 9, 6000 + seed)
        bad += exact_dirlat(M).value != permutation_dirlat(M).value
        bad += exact_atspp(M, 0, n - 1).value != permutation_atspp(M, 0, n - 1).value
    assert report(11, bad == 0, f"100 seeds, {bad} disagreements")


def test_c12_gap_archive(tmp_path):
    archive = tmp_path / "gaps.jsonl"
    best = F(0)
    for seed, n in enumerate((4, 5, 6)):
        rec = gap_search(n, F(3, 5), seed, steps=25)
        append_archive(archive, rec)
        if rec["ratio"] != "inf":
            best = max(best, F(rec["ratio"]))
    records = read_archive(archive)
    ok = len(records) == 3 and all(reverify_record(r) for r in records)
    assert report(12, ok, f"max ratio {float(best):.4f}, {len(records)} records re-verified")


def summary_lines():
    out = []
    for k in range(1, 13):
        if k in RESULTS:
            ok, detail = RESULTS[k]
            out.append(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            out.append(f"criterion {k:2d}: NOT RUN")
    return out


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
