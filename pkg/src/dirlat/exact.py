"""Brute-force ground truth: exact latency and path optima, gap measurement."""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Optional

from .errors import CapacityError, PreconditionError
from .metric import Metric, as_fraction, fmt, metric_closure, path_latency

DEFAULT_CAP = 14


@dataclass(frozen=True)
class ExactResult:
    value: Fraction
    path: tuple
    nodes: int
    method: str


def _check_cap(n, cap):
    if n > cap:
        raise CapacityError(f"{n} nodes exceeds the exact-solver cap of {cap}")


def exact_dirlat(M: Metric, cap: int = DEFAULT_CAP) -> ExactResult:
    """Minimum total latency over depot-rooted Hamiltonian paths.

    Each edge taken after k clients have been reached is paid by the
    ``m - k`` clients still waiting (m = number of clients), so the DP needs
    only (visited set, last node).
    """
    _check_cap(M.n, cap)
    r = M.depot
    clients = [v for v in M.nodes if v != r]
    m = len(clients)
    d = M.dist
    full = (1 << m) - 1
    best = {}
    for i, v in enumerate(clients):
        best[(1 << i, i)] = (m * d[r][v], None)
    for mask in range(1, full + 1):
        k = bin(mask).count("1")
        for i in range(m):
            key = (mask, i)
            if key not in best:
                continue
            cost = best[key][0]
            u = clients[i]
            for j in range(m):
                if mask >> j & 1:
                    continue
                nkey = (mask | 1 << j, j)
                cand = cost + (m - k) * d[u][clients[j]]
                if nkey not in best or cand < best[nkey][0]:
                    best[nkey] = (cand, i)
    end = min(range(m), key=lambda i: (best[(full, i)][0], i))
    value = best[(full, end)][0]
    order = []
    mask, i = full, end
    while i is not None:
        order.append(clients[i])
        prev = best[(mask, i)][1]
        mask ^= 1 << i
        i = prev
    path = (r, *reversed(order))
    return ExactResult(value, path, M.n, "DP")


def permutation_dirlat(M: Metric) -> ExactResult:
    r = M.depot
    clients = [v for v in M.nodes if v != r]
    best = None
    for perm in permutations(clients):
        path = (r, *perm)
        val = path_latency(M, path)
        if best is None or val < best[0]:
            best = (val, path)
    return ExactResult(best[0], best[1], M.n, "permutation")


def _endpoints(M, s, t):
    s = M.s if s is None else s
    t = M.t if t is None else t
    if s is None or t is None:
        raise PreconditionError("path problems need endpoints s and t")
    if s == t:
        raise PreconditionError("s and t must differ")
    return s, t


def exact_atspp(M: Metric, s=None, t=None, cap: int = DEFAULT_CAP) -> ExactResult:
    """Cheapest Hamiltonian s-t path by subset DP."""
    _check_cap(M.n, cap)
    s, t = _endpoints(M, s, t)
    mids = [v for v in M.nodes if v not in (s, t)]
    m = len(mids)
    d = M.dist
    if m == 0:
        return ExactResult(d[s][t], (s, t), M.n, "DP")
    full = (1 << m) - 1
    best = {(1 << i, i): (d[s][v], None) for i, v in enumerate(mids)}
    for mask in range(1, full + 1):
        for i in range(m):
            key = (mask, i)
            if key not in best:
                continue
            cost = best[key][0]
            u = mids[i]
            for j in range(m):
                if mask >> j & 1:
                    continue
                nkey = (mask | 1 << j, j)
                cand = cost + d[u][mids[j]]
                if nkey not in best or cand < best[nkey][0]:
                    best[nkey] = (cand, i)
    end = min(range(m), key=lambda i: (best[(full, i)][0] + d[mids[i]][t], i))
    value = best[(full, end)][0] + d[mids[end]][t]
    order = []
    mask, i = full, end
    while i is not None:
        order.append(mids[i])
        prev = best[(mask, i)][1]
        mask ^= 1 << i
        i = prev
    return ExactResult(value, (s, *reversed(order), t), M.n, "DP")


def permutation_atspp(M: Metric, s=None, t=None) -> ExactResult:
    s, t = _endpoints(M, s, t)
    mids = [v for v in M.nodes if v not in (s, t)]
    best = None
    for perm in permutations(mids):
        path = (s, *perm, t)
        val = M.path_cost(path)
        if best is None or val < best[0]:
            best = (val, path)
    return ExactResult(best[0], best[1], M.n, "permutation")


# ---------------------------------------------------------------------------
# integrality gaps


def measure_gap(M: Metric, s=None, t=None, rho=Fraction(1)):
    """exact ATSPP optimum / LP optimum; ``math.inf`` when the LP value is 0 but the path is not."""
    from .atspp import solve_atspp_lp

    s, t = _endpoints(M, s, t)
    integral = exact_atspp(M, s, t).value
    lp = solve_atspp_lp(M, s, t, as_fraction(rho)).opt_lp
    if lp == 0:
        return Fraction(1) if integral == 0 else math.inf
    return integral / lp


@dataclass
class GapVerdict:
    feasible: bool
    cost: Optional[Fraction] = None
    integral: Optional[Fraction] = None
    ratio: Optional[object] = None
    meets_claim: Optional[bool] = None
    violated: Optional[tuple] = None

    def to_json(self):
        def q(v):
            if v is None:
                return None
            return "inf" if v == math.inf else fmt(v)

        return {
            "feasible": self.feasible,
            "cost": q(self.cost),
            "integral": q(self.integral),
            "ratio": q(self.ratio),
            "meets_claim": self.meets_claim,
            "violated": None if self.violated is None else [self.violated[0], sorted(self.violated[1])],
        }


def verify_gap_certificate(M: Metric, x: dict, rho, strengthened: bool = False,
                           claim: bool = False, s=None, t=None) -> GapVerdict:
    """Check that ``x`` (arc -> value) is feasible for the path LP and report its gap.

    Violations come back as ``(kind, data)`` with kind one of ``"negative"``,
    ``"degree"``, ``"indegree"`` or ``"cut"``; for cuts ``data`` is the set U.
    """
    from .atspp import violated_cut

    rho = as_fraction(rho)
    s, t = _endpoints(M, s, t)
    x = {(u, v): as_fraction(val) for (u, v), val in x.items() if u != v}
    for a, val in x.items():
        if val < 0:
            return GapVerdict(False, violated=("negative", a))
    for v in M.nodes:
        inflow = sum((val for (a, b), val in x.items() if b == v), Fraction(0))
        outflow = sum((val for (a, b), val in x.items() if a == v), Fraction(0))
        want = -1 if v == s else 1 if v == t else 0
        if inflow - outflow != want:
            return GapVerdict(False, violated=("degree", {v}))
        if strengthened and v not in (s, t) and inflow != 1:
            return GapVerdict(False, violated=("indegree", {v}))
    cut = violated_cut(M.n, s, t, x, rho)
    if cut is not None:
        return GapVerdict(False, violated=("cut", set(cut)))
    cost = sum((M.dist[u][v] * val for (u, v), val in x.items()), Fraction(0))
    integral = exact_atspp(M, s, t).value
    if cost == 0:
        ratio = Fraction(1) if integral == 0 else math.inf
    else:
        ratio = integral / cost
    meets = None
    if claim:
        meets = ratio == math.inf or ratio >= 1 / (2 * rho - 1)
    return GapVerdict(True, cost, integral, ratio, meets)


def gap_search(n: int, rho, seed: int, steps: int = 200, max_dist: int = 4,
               temperature: float = 0.3) -> dict:
    """Simulated annealing over raw matrices (closure-repaired) maximizing the gap at ``rho``.

    Returns the best record ``{"dist", "rho", "ratio"}`` found.
    """
    rho = as_fraction(rho)
    rng = random.Random(seed)

    def score(raw):
        M = metric_closure(raw, 0, 0, n - 1)
        g = measure_gap(M, 0, n - 1, rho)
        return M, g

    raw = [[0 if i == j else rng.randint(0, max_dist) for j in range(n)] for i in range(n)]
    cur_M, cur = score(raw)
    best_M, best = cur_M, cur
    for step in range(steps):
        cand = [row[:] for row in raw]
        i, j = rng.sample(range(n), 2)
        cand[i][j] = rng.randint(0, max_dist)
        M, g = score(cand)
        if g == math.inf:
            raw, cur_M, cur = cand, M, g
            best_M, best = M, g
            break
        temp = temperature * (1 - step / steps) + 1e-9
        if g >= cur or rng.random() < math.exp((float(g) - float(cur)) / temp):
            raw, cur_M, cur = cand, M, g
        if g > best:
            best_M, best = M, g
    return gap_record(best_M, rho, best)


def gap_record(M: Metric, rho, ratio) -> dict:
    return {
        "dist": [[fmt(v) for v in row] for row in M.dist],
        "rho": fmt(rho),
        "ratio": "inf" if ratio == math.inf else fmt(ratio),
    }


def append_archive(path, record: dict):
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record) + "\n")


def read_archive(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def reverify_record(record: dict) -> bool:
    """Recompute the gap of an archived record and compare with the stored ratio."""
    dist = record["dist"]
    n = len(dist)
    M = Metric(tuple(tuple(as_fraction(v) for v in row) for row in dist), 0, 0, n - 1)
    g = measure_gap(M, 0, n - 1, as_fraction(record["rho"]))
    stored = math.inf if record["ratio"] == "inf" else as_fraction(record["ratio"])
    return g == stored
