"""Rounding the path LP in regret metrics.

Pipeline: branchings from the LP flow, doubled-tree paths, red intervals,
a primal-dual forest for the resulting cut requirement, witness cycles,
a DAG path through the witnesses, and finally grafting the cycles back in.
Every intermediate inequality is evaluated exactly and recorded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

from .atspp import (
    AtsppLpState, crossings, integral_state, scc_chain, shortcut, solve_atspp_lp, solve_zmin_dual,
)
from .errors import InvariantError, PreconditionError
from .flow import max_flow_min_cut
from .lp import LpProblem, solve
from .metric import Metric, as_fraction, fmt

ZERO = Fraction(0)
ONE = Fraction(1)


# ---------------------------------------------------------------------------
# branchings


@dataclass
class WeightedBranchingSet:
    root: int
    branchings: list  # each a tuple of arcs (parent, child), sorted
    weights: list

    @property
    def q(self):
        return len(self.branchings)

    @staticmethod
    def nodes_of(B, root) -> set:
        return {root} | {v for _, v in B}

    def contract_violations(self, x: dict, K, lam: dict) -> list:
        """Which of the three decomposition inequalities fail (empty = all hold)."""
        bad = []
        if sum(self.weights, ZERO) != K:
            bad.append(("total", sum(self.weights, ZERO)))
        load = {}
        cover = {}
        for B, g in zip(self.branchings, self.weights):
            for a in B:
                load[a] = load.get(a, ZERO) + g
            for v in self.nodes_of(B, self.root):
                cover[v] = cover.get(v, ZERO) + g
        for a, val in load.items():
            if val > x.get(a, ZERO):
                bad.append(("arc", a))
        for v, l in lam.items():
            if cover.get(v, ZERO) < min(K, l):
                bad.append(("node", v))
        return bad


def connectivity(x: dict, root, nodes) -> dict:
    """lambda_v: max root-v flow under capacities x."""
    out = {}
    for v in nodes:
        if v == root:
            continue
        out[v] = max_flow_min_cut(x, root, v)[0] if x else ZERO
    return out


def _is_branching(parent, root):
    for v in parent:
        seen = set()
        u = v
        while u != root:
            if u in seen or u not in parent:
                return False
            seen.add(u)
            u = parent[u]
    return True


def branching_decomposition(x: dict, root: int, K=ONE, nodes=None, max_steps: int = 10_000) -> WeightedBranchingSet:
    """Out-branchings B_i with weights g_i: sum g = K, arc loads <= x, node coverage >= min(K, lambda_v).

    Peeling keeps the residual requirement ``req_v <= min(K_rem, lambda(v))``.
    A branching is admissible when it contains every node with
    ``req_v = K_rem`` and enters every tight pair (S, v) (in-capacity of S
    equal to req_v) at most [v in B] times; among admissible branchings the
    one covering most nodes is taken, with the largest step that keeps the
    invariant.
    """
    K = as_fraction(K)
    if K <= 0:
        raise PreconditionError("K must be positive")
    x = {a: as_fraction(v) for a, v in x.items() if v > 0}
    if nodes is None:
        nodes = sorted({root} | {u for a in x for u in a})
    others = [v for v in nodes if v != root]
    lam = connectivity(x, root, nodes)
    req = {v: min(K, lam[v]) for v in others}
    bit = {v: 1 << i for i, v in enumerate(others)}
    full = (1 << len(others)) - 1
    res = dict(x)
    K_rem = K
    out_b, out_w = [], []
    for _ in range(max_steps):
        if K_rem == 0:
            break
        arcs = sorted(res)
        in_cap = {}
        for S in range(1, full + 1):
            in_cap[S] = sum((c for (p, q), c in res.items()
                             if bit.get(q, 0) & S and not bit.get(p, 0) & S), ZERO)
        tight = []
        slack_pairs = []
        for S in range(1, full + 1):
            for v in others:
                if bit[v] & S and req[v] > 0:
                    sl = in_cap[S] - req[v]
                    if sl < 0:
                        raise InvariantError("residual requirement exceeds connectivity", step="branching")
                    (tight if sl == 0 else slack_pairs).append((S, v, sl))
        must = {v for v in others if req[v] == K_rem}
        B = _best_branching(arcs, root, others, must, tight, bit)
        if B is None:
            raise InvariantError("no admissible branching in the residual support", step="branching")
        inB = {v for _, v in B}
        gamma = K_rem
        for a in B:
            gamma = min(gamma, res[a])
        for v in others:
            if v not in inB and req[v] > 0:
                gamma = min(gamma, K_rem - req[v])
        for S, v, sl in slack_pairs:
            cnt = sum(1 for (p, q) in B if bit[q] & S and not bit.get(p, 0) & S)
            c = cnt - (1 if v in inB else 0)
            if c > 0:
                gamma = min(gamma, sl / c)
        if gamma <= 0:
            raise InvariantError("peeling step has zero weight", step="branching")
        for a in B:
            res[a] -= gamma
            if res[a] == 0:
                del res[a]
        for v in inB:
            req[v] = max(ZERO, req[v] - gamma)
        K_rem -= gamma
        key = tuple(B)
        if out_b and out_b[-1] == key:
            out_w[-1] += gamma
        else:
            out_b.append(key)
            out_w.append(gamma)
    else:
        raise InvariantError("branching peel did not finish", step="branching")
    return WeightedBranchingSet(root, out_b, out_w)


def _best_branching(arcs, root, others, must, tight, bit):
    preds = {v: sorted(p for p, q in arcs if q == v) for v in others}
    best = [None]

    def score(parent):
        return (-len(parent), sorted((p, v) for v, p in parent.items()))

    def ok(parent):
        if not _is_branching(parent, root):
            return False
        for S, v, _ in tight:
            cnt = 0
            for q, p in parent.items():
                if bit[q] & S and not bit.get(p, 0) & S:
                    cnt += 1
            if cnt > (1 if v in parent else 0):
                return False
        return True

    def rec(i, parent):
        if i == len(others):
            if ok(parent):
                sc = score(parent)
                if best[0] is None or sc < best[0][0]:
                    best[0] = (sc, dict(parent))
            return
        v = others[i]
        options = list(preds[v])
        if v not in must:
            options.append(None)
        for p in options:
            if p is None:
                rec(i + 1, parent)
            else:
                parent[v] = p
                rec(i + 1, parent)
                del parent[v]

    rec(0, {})
    if best[0] is None:
        return None
    return sorted((p, v) for v, p in best[0][1].items())


def all_branchings(arcs, root, nodes):
    """Every out-branching rooted at ``root`` using the given arcs (exponential; tiny n)."""
    others = [v for v in nodes if v != root]
    preds = {v: sorted(p for p, q in arcs if q == v) for v in others}
    out = []

    def rec(i, parent):
        if i == len(others):
            if _is_branching(parent, root):
                out.append(tuple(sorted((p, v) for v, p in parent.items())))
            return
        v = others[i]
        rec(i + 1, parent)
        for p in preds[v]:
            parent[v] = p
            rec(i + 1, parent)
            del parent[v]

    rec(0, {})
    return out


def covering_lp_feasible(x: dict, root, K, nodes) -> bool:
    """Does some weighting of all branchings meet the decomposition contract?"""
    x = {a: v for a, v in x.items() if v > 0}
    lam = connectivity(x, root, nodes)
    Bs = all_branchings(sorted(x), root, nodes)
    prob = LpProblem()
    cols = [prob.add_var(f"b{i}") for i in range(len(Bs))]
    prob.add_constraint({j: 1 for j in cols}, "=", K, "total")
    for a, cap in x.items():
        prob.add_constraint({cols[i]: 1 for i, B in enumerate(Bs) if a in B}, "<=", cap, f"arc{a}")
    for v, l in lam.items():
        prob.add_constraint({cols[i]: 1 for i, B in enumerate(Bs) if v in {q for _, q in B}}, ">=", min(K, l), f"node{v}")
    return solve(prob).optimal


# ---------------------------------------------------------------------------
# paths from branchings and red intervals


def branching_to_path(B, s, t, base: Metric) -> list:
    """Double the off-path arcs of B, walk s -> t, and shortcut (t kept last)."""
    children = {}
    for p, v in B:
        children.setdefault(p, []).append(v)
    parent = {v: p for p, v in B}
    if t != s and t not in parent:
        raise PreconditionError("t is not in the branching")
    spine = [t]
    while spine[-1] != s:
        spine.append(parent[spine[-1]])
    spine.reverse()
    on_spine = set(spine)
    walk = []

    def explore(u):
        walk.append(u)
        for c in sorted(children.get(u, [])):
            if c in on_spine:
                continue
            explore(c)
            walk.append(u)

    for u in spine:
        explore(u)
    return shortcut(walk, last=t)


def doubled_cost_bound(B, s, t, base: Metric) -> Fraction:
    """2 c(B) - c(s, t), the doubling bound for branching_to_path."""
    return 2 * sum((base.dist[p][v] for p, v in B), ZERO) - base.dist[s][t]


@dataclass
class RedDecoration:
    path: list
    red: list  # red[k] is True when edge path[k] -> path[k+1] is red
    intervals: list  # maximal red runs as node lists
    node_interval: dict  # v -> frozenset of nodes of its run (empty if none)

    def red_cost(self, base: Metric) -> Fraction:
        p = self.path
        return sum((base.dist[p[k]][p[k + 1]] for k, r in enumerate(self.red) if r), ZERO)


def red_edges(P, base: Metric, root: int) -> RedDecoration:
    d = base.dist[root]
    m = len(P) - 1
    pre = []
    cur = None
    for v in P:
        cur = d[v] if cur is None else max(cur, d[v])
        pre.append(cur)
    suf = [None] * len(P)
    cur = None
    for k in range(len(P) - 1, -1, -1):
        cur = d[P[k]] if cur is None else min(cur, d[P[k]])
        suf[k] = cur
    red = [pre[k] >= suf[k + 1] for k in range(m)]
    intervals = []
    node_interval = {v: frozenset() for v in P}
    k = 0
    while k < m:
        if not red[k]:
            k += 1
            continue
        j = k
        while j < m and red[j]:
            j += 1
        nodes = P[k: j + 1]
        intervals.append(list(nodes))
        fs = frozenset(nodes)
        for v in nodes:
            node_interval[v] = fs
        k = j
    return RedDecoration(list(P), red, intervals, node_interval)


def cut_requirement(S, decorations, gammas, delta) -> int:
    """1 iff every v in S has less than delta weight of paths whose red run at v lies inside S."""
    S = frozenset(S)
    for v in S:
        total = ZERO
        for dec, g in zip(decorations, gammas):
            iv = dec.node_interval.get(v)
            if iv is not None and iv <= S:
                total += g
        if total >= delta:
            return 0
    return 1


# ---------------------------------------------------------------------------
# primal-dual forest


@dataclass
class ForestResult:
    edges: list
    dual_total: Fraction
    cost: Fraction


def pd_forest(f, base: Metric, nodes) -> ForestResult:
    """Uniform dual growth over active components, then reverse delete.

    ``f`` maps a frozenset to 0/1 and must be downward monotone with
    ``f(nodes) = 0``. The forest crosses every S with f(S) = 1.
    """
    nodes = sorted(nodes)
    if f(frozenset(nodes)):
        raise InvariantError("requirement on the whole node set is 1", step="pd_forest")
    d = base.dist
    comp = {v: frozenset([v]) for v in nodes}
    load = {(u, v): ZERO for u, v in combinations(nodes, 2)}
    dual_total = ZERO
    added = []
    while True:
        comps = set(comp.values())
        active = {C for C in comps if f(C)}
        if not active:
            break
        best = None
        for (u, v), l in load.items():
            cu, cv = comp[u], comp[v]
            if cu == cv:
                continue
            rate = (cu in active) + (cv in active)
            if rate == 0:
                continue
            tau = (d[u][v] - l) / rate
            key = (tau, u, v)
            if best is None or key < best:
                best = key
        tau, u, v = best
        if tau < 0:
            raise InvariantError("negative step in dual growth", step="pd_forest")
        dual_total += tau * len(active)
        for (a, b) in load:
            ca, cb = comp[a], comp[b]
            if ca != cb:
                load[(a, b)] += tau * ((ca in active) + (cb in active))
        merged = comp[u] | comp[v]
        for w in merged:
            comp[w] = merged
        added.append((u, v))
    kept = list(added)
    for e in reversed(added):
        trial = [g for g in kept if g != e]
        if all(f(C) == 0 for C in _components(nodes, trial)):
            kept = trial
    cost = sum((d[u][v] for u, v in kept), ZERO)
    return ForestResult(sorted(kept), dual_total, cost)


def _components(nodes, edges):
    parent = {v: v for v in nodes}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for u, v in edges:
        parent[find(u)] = find(v)
    groups = {}
    for v in nodes:
        groups.setdefault(find(v), set()).add(v)
    return [frozenset(g) for g in groups.values()]


def forest_lp_value(f, base: Metric, nodes) -> Fraction:
    """Optimum of the cut-covering LP over all subsets (exponential; tiny n)."""
    nodes = sorted(nodes)
    prob = LpProblem()
    idx = {}
    for u, v in combinations(nodes, 2):
        idx[(u, v)] = prob.add_var(f"e{u}_{v}", base.dist[u][v])
    for k in range(1, len(nodes)):
        for S in combinations(nodes, k):
            S = frozenset(S)
            if f(S):
                prob.add_constraint({j: 1 for (u, v), j in idx.items() if (u in S) != (v in S)}, ">=", 1)
    sol = solve(prob)
    return sol.objective


# ---------------------------------------------------------------------------
# witnesses


@dataclass
class WitnessStructure:
    forest: list
    cycles: list  # node lists, cyclic order starting at the witness
    witnesses: list
    delta: Fraction
    cycle_of: dict = field(default_factory=dict)  # node -> cycle index

    def cycle_cost(self, M: Metric) -> Fraction:
        total = ZERO
        for C in self.cycles:
            if len(C) > 1:
                total += M.path_cost(C + C[:1])
        return total


def _witness_weight(w, C, decorations, gammas):
    total = ZERO
    for dec, g in zip(decorations, gammas):
        iv = dec.node_interval.get(w)
        if iv is not None and iv <= C:
            total += g
    return total


def witness_structure(forest, decorations, gammas, delta, nodes) -> WitnessStructure:
    """One cycle (doubled tree, shortcut) and one witness per forest component."""
    nodes = sorted(nodes)
    adj = {v: [] for v in nodes}
    for u, v in forest:
        adj[u].append(v)
        adj[v].append(u)
    cycles, witnesses, cycle_of = [], [], {}
    comps = sorted(_components(nodes, forest), key=lambda C: min(C))
    for C in comps:
        cands = [w for w in sorted(C) if _witness_weight(w, C, decorations, gammas) >= delta]
        if not cands:
            raise InvariantError(f"component {sorted(C)} has no witness", step="witness_structure")
        w = cands[0]
        order = []
        stack = [w]
        seen = set()
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            order.append(u)
            stack.extend(sorted(adj[u], reverse=True))
        j = len(cycles)
        for v in C:
            cycle_of[v] = j
        cycles.append(order)
        witnesses.append(w)
    return WitnessStructure(sorted(forest), cycles, witnesses, delta, cycle_of)


def shortcut_to_witnesses(P, dec: RedDecoration, ws: WitnessStructure, s, t) -> list:
    keep = set()
    wset = set(ws.witnesses)
    for w in P:
        if w in wset:
            C = set(ws.cycles[ws.cycle_of[w]])
            if dec.node_interval[w] <= C:
                keep.add(w)
    return [v for v in P if v in keep or v in (s, t)]


def witness_path(paths, gammas, delta, W, base: Metric, reg: Metric, s, t):
    """Cheapest s-t path in the union of the shortcut paths that visits every witness.

    Nodes are ordered by (c(s, v), v) with s first and t last; an arc may be
    used only if no witness sits strictly between its endpoints in that
    order, which forces every witness onto the path.
    """
    arcs = {}
    for P, g in zip(paths, gammas):
        for a, b in zip(P, P[1:]):
            arcs[(a, b)] = arcs.get((a, b), ZERO) + g / delta

    def key(v):
        if v == s:
            return (0, ZERO, v)
        if v == t:
            return (2, ZERO, v)
        return (1, base.dist[s][v], v)

    for a, b in arcs:
        if key(a) >= key(b):
            raise InvariantError(f"arc {(a, b)} breaks the distance order", step="witness_path")
    wkeys = sorted(key(w) for w in set(W) | {s, t})
    nodes = sorted({v for a in arcs for v in a} | {s, t}, key=key)
    best = {s: (ZERO, None)}
    for v in nodes:
        if v not in best:
            continue
        for (a, b) in sorted(arcs):
            if a != v:
                continue
            if any(key(a) < wk < key(b) for wk in wkeys):
                continue
            cand = best[v][0] + reg.dist[a][b]
            if b not in best or cand < best[b][0]:
                best[b] = (cand, a)
    if t not in best:
        raise InvariantError("no s-t path through all witnesses", step="witness_path")
    path = [t]
    while best[path[-1]][1] is not None:
        path.append(best[path[-1]][1])
    path.reverse()
    return path, arcs


def graft(P, ws: WitnessStructure, t, n) -> list:
    """Splice every witness cycle into P at its witness, then shortcut."""
    at = {w: ws.cycles[j] for j, w in enumerate(ws.witnesses)}
    walk = []
    for v in P:
        walk.append(v)
        if v in at and len(at[v]) > 1:
            walk.extend(at[v][1:])
            walk.append(v)
    out = shortcut(walk, last=t)
    if len(out) != n:
        raise InvariantError("grafting left nodes uncovered", step="graft")
    return out


# ---------------------------------------------------------------------------
# the delta parameter


def _ge_sqrt6_times(L: Fraction, R) -> bool:
    """L >= sqrt(6) * R, exactly."""
    if R <= 0:
        return L >= 0 or L * L <= 6 * R * R
    return L >= 0 and L * L >= 6 * R * R


def delta_opt(rho, denom: int = 10**6) -> Fraction:
    """(2 rho + sqrt 6) / (2 + 2 sqrt 6) rounded down to a multiple of 1/denom."""
    rho = as_fraction(rho)
    if rho <= Fraction(1, 2) or rho > 1:
        raise PreconditionError("rho must lie in (1/2, 1]")
    est = int((2 * float(rho) + math.sqrt(6)) / (2 + 2 * math.sqrt(6)) * denom)

    def below(a):  # a/denom <= delta
        return _ge_sqrt6_times(2 * rho * denom - 2 * a, 2 * a - denom)

    a = est
    while not below(a):
        a -= 1
    while below(a + 1):
        a += 1
    return Fraction(a, denom)


def g_value(rho, delta) -> Fraction:
    rho, delta = as_fraction(rho), as_fraction(delta)
    return 6 / (rho - delta) + 2 / (2 * delta - 1)


# ---------------------------------------------------------------------------


@dataclass
class RegretCertificate:
    opt_lp: Fraction
    path: list
    path_cost: Fraction
    ratio: Fraction
    z_gap: Fraction
    rho: Fraction
    k: int
    ell: int
    delta: Fraction
    red_ratio_max: Fraction
    cycle_cost: Fraction
    branching_q: int
    bound: Fraction
    values: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(self.checks.values())

    def to_json(self):
        return {
            "opt_lp": fmt(self.opt_lp),
            "path": list(self.path),
            "path_cost": fmt(self.path_cost),
            "ratio": fmt(self.ratio),
            "z_gap": fmt(self.z_gap),
            "rho": fmt(self.rho),
            "k": self.k,
            "ell": self.ell,
            "delta": fmt(self.delta),
            "red_ratio_max": fmt(self.red_ratio_max),
            "cycle_cost": fmt(self.cycle_cost),
            "branching_q": self.branching_q,
            "bound": fmt(self.bound),
            "values": {k: fmt(v) for k, v in self.values.items()},
            "checks": dict(self.checks),
        }


def round_regret(reg: Metric, rho, delta=None, s=None, t=None,
                 state: Optional[AtsppLpState] = None):
    """Hamiltonian s-t path in a regret metric with cost within the stated bound of OPT_LP."""
    if reg.regret_base is None:
        raise PreconditionError("round_regret needs a metric built by regret_transform")
    base = reg.regret_base
    s = reg.s if s is None else s
    t = reg.t if t is None else t
    if reg.regret_root != s:
        raise PreconditionError("the regret root must be the start node s")
    rho = as_fraction(rho)
    delta = delta_opt(rho) if delta is None else as_fraction(delta)
    if not Fraction(1, 2) < delta < rho:
        raise PreconditionError("need 1/2 < delta < rho")
    n = reg.n
    nodes = list(range(n))
    checks, values = {}, {}

    # D1
    if state is None:
        state = solve_atspp_lp(reg, s, t, rho)
    opt = state.opt_lp
    x = state.x

    # D2: branchings and their paths
    wb = branching_decomposition(x, s, ONE, nodes)
    lam = connectivity(x, s, nodes)
    checks["branching_contract"] = not wb.contract_violations(x, ONE, lam)
    checks["t_on_every_branching"] = all(t in wb.nodes_of(B, s) for B in wb.branchings)
    cover = {v: sum((g for B, g in zip(wb.branchings, wb.weights) if v in wb.nodes_of(B, s)), ZERO)
             for v in nodes}
    checks["rho_coverage"] = all(cover[v] >= rho for v in nodes)
    gammas = wb.weights
    paths = []
    doubling_ok = True
    for B in wb.branchings:
        P = branching_to_path(B, s, t, base)
        if P[0] != s or P[-1] != t or set(P) != wb.nodes_of(B, s) or len(P) != len(set(P)):
            raise InvariantError("branching path malformed", step="round_regret.paths")
        doubling_ok &= base.path_cost(P) <= doubled_cost_bound(B, s, t, base)
        paths.append(P)
    checks["doubling"] = doubling_ok
    reg_costs = [reg.path_cost(P) for P in paths]
    weighted = sum((g * c for g, c in zip(gammas, reg_costs)), ZERO)
    values["weighted_path_cost"] = weighted
    checks["paths_cost"] = weighted <= 2 * opt

    decs = [red_edges(P, base, s) for P in paths]
    red_ratio_max = ZERO
    red_ok = True
    for dec, c in zip(decs, reg_costs):
        rc = dec.red_cost(base)
        red_ok &= 2 * rc <= 3 * c
        if c > 0:
            red_ratio_max = max(red_ratio_max, rc / c)
    checks["red_cost"] = red_ok

    # D3: forest, cycles, witnesses
    f = lambda S: cut_requirement(S, decs, gammas, delta)  # noqa: E731
    forest = pd_forest(f, base, nodes)
    ws = witness_structure(forest.edges, decs, gammas, delta, nodes)
    cyc_cost = ws.cycle_cost(reg)
    checks["cycles_regret_equals_base"] = cyc_cost == ws.cycle_cost(base)
    checks["cycles_cost"] = cyc_cost * (rho - delta) <= 6 * opt
    checks["forest_vs_dual"] = forest.cost <= 2 * forest.dual_total

    # D4
    short = [shortcut_to_witnesses(P, dec, ws, s, t) for P, dec in zip(paths, decs)]
    inc_ok = True
    for Q in short:
        inner = [base.dist[s][v] for v in Q[1:-1]]
        inc_ok &= all(a < b for a, b in zip(inner, inner[1:]))
    checks["shortcut_increasing"] = inc_ok
    wcover = all(
        sum((g for Q, g in zip(short, gammas) if w in Q), ZERO) >= delta for w in ws.witnesses
    )
    checks["witness_coverage"] = wcover
    short_cost = sum((g * reg.path_cost(Q) for Q, g in zip(short, gammas)), ZERO)
    checks["shortcut_cost"] = short_cost <= 2 * opt

    # D5
    P, z = witness_path(short, gammas, delta, ws.witnesses, base, reg, s, t)
    checks["flow_value"] = sum((v for (a, b), v in z.items() if a == s), ZERO) == 1 / delta
    checks["witness_path_spans_W"] = set(ws.witnesses) <= set(P)
    wp_cost = reg.path_cost(P)
    values["witness_path_cost"] = wp_cost
    checks["witness_path_cost"] = wp_cost * (2 * delta - 1) <= 2 * opt

    # D6
    final = graft(P, ws, t, n)
    if not (final[0] == s and final[-1] == t and sorted(final) == nodes):
        raise InvariantError("final path is not Hamiltonian", step="round_regret.graft")
    cost = reg.path_cost(final)
    bound = g_value(rho, delta) * opt
    checks["final_bound"] = cost <= bound
    ratio = cost / opt if opt else (ONE if cost == 0 else Fraction(-1))
    dual = solve_zmin_dual(state) if state.solution is not None else None
    z_gap = dual.z[s] - dual.z[t] if dual else ZERO
    ell = scc_chain(state).ell
    cert = RegretCertificate(opt, final, cost, ratio, z_gap, rho, 1, ell, delta, red_ratio_max,
                             cyc_cost, wb.q, bound, values, checks)
    return final, cert
