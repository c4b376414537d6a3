"""Guess-and-bucket approximation for directed latency."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .atspp import round_path, solve_atspp_lp
from .errors import CapacityError, InvariantError, PreconditionError
from .exact import exact_atspp, exact_dirlat
from .latency_lp import (
    GuessProfile, bucket_atspp_input, bucket_range, build_latency_lp, compute_thresholds,
    num_buckets, solve_latency_lp, strengthen_with_guess, time_expanded_flow_check,
)
from .metric import Metric, ScaledInstance, as_fraction, fmt, regret_transform
from .regret import round_regret

ZERO = Fraction(0)
GUESS_CAP = 10**7
BACKENDS = ("exact", "lp-round", "regret")


def latency(P, M: Metric):
    """Total latency and arrival time of every node after the first."""
    arrive = {}
    acc = ZERO
    for a, b in zip(P, P[1:]):
        acc += M.dist[a][b]
        arrive[b] = acc
    return sum(arrive.values(), ZERO), arrive


def guess_from_path(P, S) -> GuessProfile:
    M, T = _unpack(S)
    _, arrive = latency(P, M)
    entries = [None] * num_buckets(T)
    for v in P[1:]:
        t = int(arrive[v])
        if t < 1:
            raise PreconditionError("visit times must be positive")
        i = t.bit_length() - 1
        if i < len(entries):
            entries[i] = (v, t)  # later visits overwrite earlier ones
    return GuessProfile(tuple(entries), T)


def _unpack(S):
    if isinstance(S, ScaledInstance):
        return S.scaled, S.horizon
    return S, S.n * int(S.max_distance())


def count_guesses(m: int, T: int) -> int:
    """Profiles obeying the pruning rules, counted without listing them."""
    L = num_buckets(T)
    ways = {0: 1}
    for i in range(L):
        nxt = {}
        for k, w in ways.items():
            nxt[k] = nxt.get(k, 0) + w
            if k < m:
                times = sum(1 for ell in bucket_range(i, T) if ell >= k + 1)
                if times:
                    nxt[k + 1] = nxt.get(k + 1, 0) + w * (m - k) * times
        ways = nxt
    return sum(ways.values())


def enumerate_guesses(S, mode: str = "guided", cap: int = GUESS_CAP, opt_path=None):
    M, T = _unpack(S)
    if mode == "guided":
        if opt_path is None:
            opt_path = exact_dirlat(M).path
        yield guess_from_path(opt_path, S)
        return
    if mode != "exhaustive":
        raise PreconditionError(f"unknown mode {mode!r}")
    clients = [v for v in M.nodes if v != M.depot]
    total = count_guesses(len(clients), T)
    if total > cap:
        raise CapacityError(f"{total} guesses exceed the cap of {cap}")
    L = num_buckets(T)

    def rec(i, used, acc):
        if i == L:
            yield GuessProfile(tuple(acc), T)
            return
        acc.append(None)
        yield from rec(i + 1, used, acc)
        acc.pop()
        for ell in bucket_range(i, T):
            if ell < len(used) + 1:
                continue
            for v in clients:
                if v in used:
                    continue
                acc.append((v, ell))
                yield from rec(i + 1, used | {v}, acc)
                acc.pop()

    yield from rec(0, frozenset(), [])


@dataclass
class BucketRecord:
    i: int
    anchor: tuple
    nodes: list
    induced_lp: Fraction
    bound: int
    path: list
    cost: Fraction
    alpha: Fraction
    flow_value: Fraction
    flow_cost: Fraction
    cut_ok: bool

    def to_json(self):
        return {
            "i": self.i, "v": self.anchor[0], "ell": self.anchor[1], "nodes": self.nodes,
            "induced_lp": fmt(self.induced_lp), "bound": self.bound, "path": self.path,
            "cost": fmt(self.cost), "alpha": fmt(self.alpha), "flow_value": fmt(self.flow_value),
            "flow_cost": fmt(self.flow_cost), "cut_ok": self.cut_ok,
        }


def _induced(M: Metric, keep, s, t):
    sub, index = M.restrict(keep)
    return sub.with_endpoints(index[s], index[t]), index


def solve_bucket(M: Metric, nodes, anchor, rho, backend: str = "exact", cap: int = 14):
    """Hamiltonian path from the depot to the anchor node through ``nodes``.

    Returns ``(path, induced_lp_value)`` in the original labels.
    """
    if backend not in BACKENDS:
        raise PreconditionError(f"unknown backend {backend!r}")
    r = M.depot
    v_star = anchor[0]
    keep = [r] + [v for v in nodes if v != v_star] + [v_star]
    if len(keep) > cap:
        raise CapacityError(f"bucket with {len(keep)} nodes exceeds the cap of {cap}")
    sub, index = _induced(M, keep, r, v_star)
    back = {j: v for v, j in index.items()}
    if backend == "regret" and not M.symmetric:
        raise PreconditionError("the regret backend needs a symmetric instance")
    state = solve_atspp_lp(sub, sub.s, sub.t, rho)
    if len(keep) == 2:
        path = [sub.s, sub.t]
    elif backend == "exact":
        path = list(exact_atspp(sub, sub.s, sub.t, cap=cap).path)
    elif backend == "lp-round":
        path, cert = round_path(state)
        if not cert.ok:
            raise InvariantError("rounding certificate failed", step="solve_bucket")
    else:
        # rounding happens in the bucket's regret metric rooted at the depot
        path, cert = round_regret(regret_transform(sub, sub.s), rho)
        if not cert.ok:
            raise InvariantError("regret certificate failed", step="solve_bucket")
    return [back[j] for j in path], state.opt_lp


def concatenate(paths, depot):
    out = [depot]
    seen = {depot}
    for P in paths:
        if P[0] != depot:
            raise PreconditionError("bucket paths start at the depot")
        for v in P[1:]:
            if v in seen:
                raise InvariantError(f"node {v} appears in two buckets", step="concatenate")
            seen.add(v)
            out.append(v)
    return out


@dataclass
class LatencyCertificate:
    guess: GuessProfile
    rho: Fraction
    lp_objective: Fraction
    buckets: list
    stitches: list  # (from, to, cost, bound)
    thresholds: dict
    arrivals: dict
    path: list
    latency: Fraction
    alpha_hat: Fraction
    opt: Optional[Fraction] = None
    checks: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(self.checks.values())

    @property
    def factor(self) -> Fraction:
        return 4 * (self.alpha_hat + 1) / (1 - self.rho)

    def to_json(self):
        return {
            "guess": self.guess.to_json(),
            "rho": fmt(self.rho),
            "lp_objective": fmt(self.lp_objective),
            "buckets": [b.to_json() for b in self.buckets],
            "stitches": [{"from": a, "to": b, "cost": fmt(c), "bound": bd} for a, b, c, bd in self.stitches],
            "thresholds": {str(v): t for v, t in sorted(self.thresholds.items())},
            "arrivals": {str(v): fmt(t) for v, t in sorted(self.arrivals.items())},
            "path": self.path,
            "latency": fmt(self.latency),
            "alpha_hat": fmt(self.alpha_hat),
            "factor": fmt(self.factor),
            "opt": None if self.opt is None else fmt(self.opt),
            "checks": dict(self.checks),
        }


def run_guess(S, guess: GuessProfile, rho, backend="exact", opt=None, cap=14):
    """Steps for one guess; None when the strengthened LP is infeasible."""
    M, T = _unpack(S)
    rho = as_fraction(rho)
    r = M.depot
    clients = [v for v in M.nodes if v != r]
    lp = strengthen_with_guess(build_latency_lp(S), guess)
    sol, _, _ = solve_latency_lp(lp)
    if sol is None:
        return None
    checks = {}
    ok, why = time_expanded_flow_check(sol, guess, M)
    checks["time_expanded_flow"] = ok
    plan = compute_thresholds(sol, rho, clients, guess)
    checks["threshold_sum"] = sum(plan.thresholds.values(), ZERO) * (1 - rho) <= sol.objective
    records = []
    paths = []
    for i in guess.admissible:
        anchor = guess.entries[i]
        B = plan.buckets[i]
        xp = bucket_atspp_input(sol, i)
        fv = sum((v for (a, b), v in xp.items() if a == r), ZERO)
        fc = sum((M.dist[a][b] * v for (a, b), v in xp.items()), ZERO)
        cut_ok = _bucket_cuts_ok(xp, r, anchor[0], B, rho)
        P, lpv = solve_bucket(M, B, anchor, rho, backend, cap)
        if sorted(P) != sorted(set([r] + B + [anchor[0]])) or P[0] != r or P[-1] != anchor[0]:
            raise InvariantError("bucket path is not Hamiltonian", step="solve_bucket")
        cost = M.path_cost(P)
        bound = 1 << (i + 1)
        records.append(BucketRecord(i, anchor, B, lpv, bound, P, cost, cost / bound, fv, fc, cut_ok))
        paths.append(P)
    checks["bucket_flow_unit"] = all(b.flow_value == 1 for b in records)
    checks["bucket_flow_cost"] = all(b.flow_cost == b.anchor[1] for b in records)
    checks["bucket_cuts"] = all(b.cut_ok for b in records)
    checks["induced_lp"] = all(b.induced_lp <= b.bound for b in records)
    P = concatenate(paths, r)
    checks["hamiltonian"] = sorted(P) == sorted(M.nodes) and P[0] == r
    stitches = []
    for prev, nxt in zip(records, records[1:]):
        u = nxt.path[1]
        stitches.append((prev.anchor[0], u, M.dist[prev.anchor[0]][u], 1 << (nxt.i + 1)))
    checks["stitch"] = all(c <= bd for _, _, c, bd in stitches)
    total, arrive = latency(P, M)
    alpha_hat = max((b.alpha for b in records), default=ZERO)
    per = 4 * (alpha_hat + 1)
    checks["per_node"] = all(arrive[v] <= per * plan.thresholds[v] for v in clients)
    checks["lp_composition"] = total * (1 - rho) <= per * sol.objective
    if opt is not None:
        checks["opt_composition"] = total * (1 - rho) <= per * opt
    return LatencyCertificate(guess, rho, sol.objective, records, stitches, plan.thresholds, arrive,
                              P, total, alpha_hat, opt, checks)


def _bucket_cuts_ok(xp, r, v_star, B, rho) -> bool:
    from .flow import max_flow_min_cut

    if not xp:
        return not [v for v in B if v != v_star]
    big = sum(xp.values(), ZERO) + 1
    for v in B:
        if v == v_star:
            continue
        # a huge r -> v_star arc keeps v_star on the source side of any min cut
        g = dict(xp)
        g[(r, v_star)] = g.get((r, v_star), ZERO) + big
        if max_flow_min_cut(g, r, v)[0] < rho:
            return False
    return True


def _worker(args):
    S, guess, rho, backend, opt, cap = args
    return run_guess(S, guess, rho, backend, opt, cap)


def solve(S, rho=Fraction(2, 3), mode: str = "guided", backend: str = "exact", cap: int = 14,
          guess_cap: int = GUESS_CAP, with_opt: bool = True, threads: Optional[int] = None):
    """Best path over the enumerated guesses, with its certificate."""
    if not isinstance(S, ScaledInstance):
        S = ScaledInstance.from_integer(S)
    M = S.scaled
    rho = as_fraction(rho)
    r = M.depot
    if M.n == 1:
        raise PreconditionError("instance has no clients")
    opt_res = exact_dirlat(M, cap=cap) if (with_opt or mode == "guided") else None
    opt = opt_res.value if (opt_res is not None and with_opt) else None
    guesses = enumerate_guesses(S, mode, guess_cap, None if opt_res is None else opt_res.path)
    threads = int(os.environ.get("DIRLAT_THREADS", threads or 1))
    jobs = ((S, g, rho, backend, opt, cap) for g in guesses)
    if threads > 1:
        with ProcessPoolExecutor(threads) as pool:
            results = list(pool.map(_worker, jobs, chunksize=4))
    else:
        results = [_worker(j) for j in jobs]
    results = [c for c in results if c is not None]
    if not results:
        if mode == "guided":
            raise InvariantError("the optimum-consistent guess was infeasible", step="solve")
        return None, None
    best = min(results, key=lambda c: (c.latency, c.guess.key()))
    return best.path, best
