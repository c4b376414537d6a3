"""Path LP with relaxed cut requirements, its duals, and the rounding pipeline.

Arcs are ordered pairs ``(u, v)`` of metric nodes. Degree rows are written
as ``x(in(v)) - x(out(v)) = -1 / +1 / 0`` for ``v = s / t / other`` so
that their duals are the node potentials ``z_v`` directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Optional

import networkx as nx

from .errors import CapacityError, InvariantError, PreconditionError
from .flow import max_flow_min_cut
from .lp import Constraint, LpProblem, LpSolution, cutting_plane, solve
from .metric import Metric, as_fraction, fmt

ZERO = Fraction(0)
_SINK = "sink"


def _check_rho(rho):
    rho = as_fraction(rho)
    if not Fraction(1, 2) < rho <= 1:
        raise PreconditionError(f"rho={rho} must lie in (1/2, 1]")
    return rho


def cut_value(x: dict, U) -> Fraction:
    """x(delta(U)), arcs in both directions."""
    return sum((val for (u, v), val in x.items() if (u in U) != (v in U)), ZERO)


def in_value(x: dict, U) -> Fraction:
    return sum((val for (u, v), val in x.items() if u not in U and v in U), ZERO)


def out_value(x: dict, U) -> Fraction:
    return sum((val for (u, v), val in x.items() if u in U and v not in U), ZERO)


def _min_cuts(n, s, t, x, scale):
    """For each v outside {s, t}: (value, source side) of the min cut v | {s, t}."""
    cap = {}
    for (u, v), val in x.items():
        if val:
            key = (min(u, v), max(u, v))
            cap[key] = cap.get(key, ZERO) + val
    big = sum(cap.values(), ZERO) + 1
    edges = []
    for (u, v), c in cap.items():
        edges.append((u, v, c))
        edges.append((v, u, c))
    edges.append((s, _SINK, big))
    edges.append((t, _SINK, big))
    out = []
    for v in range(n):
        if v in (s, t):
            continue
        value, _, side = max_flow_min_cut(edges, v, _SINK)
        out.append((value, frozenset(side)))
    return out


def violated_cut(n, s, t, x: dict, rho, scale=Fraction(1)):
    """The most violated U with x(delta(U)) < 2*rho*scale, or None."""
    worst = None
    for value, U in _min_cuts(n, s, t, x, scale):
        if value < 2 * rho * scale:
            key = (value, len(U), sorted(U))
            if worst is None or key < worst[0]:
                worst = (key, U)
    return None if worst is None else worst[1]


class CutOracle:
    """Separates x(delta(U)) >= 2*rho*scale over U within V - {s, t}.

    ``scale_var`` (a column index) turns the right-hand side into
    ``2*rho*x[scale_var]``, which the z-min dual's primal needs.
    """

    def __init__(self, n, s, t, rho, arcs, scale_var=None):
        self.n, self.s, self.t, self.rho = n, s, t, rho
        self.arcs = arcs
        self.scale_var = scale_var

    def _x(self, vec):
        return {a: vec[j] for a, j in self.arcs.items() if vec[j]}

    def row(self, U) -> Constraint:
        coeffs = {j: Fraction(1) for (u, v), j in self.arcs.items() if (u in U) != (v in U)}
        name = "cut:" + ",".join(map(str, sorted(U)))
        if self.scale_var is None:
            return Constraint(coeffs, ">=", 2 * self.rho, name)
        coeffs[self.scale_var] = -2 * self.rho
        return Constraint(coeffs, ">=", 0, name)

    def _scale(self, vec):
        return Fraction(1) if self.scale_var is None else vec[self.scale_var]

    def separate(self, vec):
        U = violated_cut(self.n, self.s, self.t, self._x(vec), self.rho, self._scale(vec))
        return None if U is None else self.row(U)

    def separate_all(self, vec):
        scale = self._scale(vec)
        seen = set()
        rows = []
        for value, U in _min_cuts(self.n, self.s, self.t, self._x(vec), scale):
            if value < 2 * self.rho * scale and U not in seen:
                seen.add(U)
                rows.append(self.row(U))
        return rows


def all_cut_sets(n, s, t):
    inner = [v for v in range(n) if v not in (s, t)]
    for k in range(1, len(inner) + 1):
        for combo in combinations(inner, k):
            yield frozenset(combo)


# ---------------------------------------------------------------------------


@dataclass
class AtsppLpState:
    metric: Metric
    s: int
    t: int
    rho: Fraction
    x: dict
    opt_lp: Fraction
    cuts: list
    solution: LpSolution = field(repr=False)

    @property
    def n(self):
        return self.metric.n

    def support(self) -> nx.DiGraph:
        G = nx.DiGraph()
        G.add_nodes_from(range(self.n))
        G.add_edges_from(sorted(self.x))
        return G


def _atspp_core(M: Metric, s, t, arcs=None):
    n = M.n
    if arcs is None:
        arcs = [(u, v) for u in range(n) for v in range(n) if u != v]
    prob = LpProblem()
    index = {}
    for a in arcs:
        index[a] = prob.add_var(f"x_{a[0]}_{a[1]}", M.dist[a[0]][a[1]])
    for v in range(n):
        coeffs = {}
        for (a, b), j in index.items():
            if b == v:
                coeffs[j] = coeffs.get(j, 0) + 1
            if a == v:
                coeffs[j] = coeffs.get(j, 0) - 1
        rhs = -1 if v == s else 1 if v == t else 0
        prob.add_constraint(coeffs, "=", rhs, f"deg:{v}")
    return prob, index


def solve_atspp_lp(M: Metric, s=None, t=None, rho=Fraction(1), explicit=False, mode="most") -> AtsppLpState:
    """Optimal basic solution of the path LP by cutting planes (or all cuts if ``explicit``)."""
    rho = _check_rho(rho)
    s = M.s if s is None else s
    t = M.t if t is None else t
    if M.n < 2 or s is None or t is None or s == t:
        raise PreconditionError("need n >= 2 and distinct endpoints s, t")
    prob, index = _atspp_core(M, s, t)
    oracle = CutOracle(M.n, s, t, rho, index)
    if explicit:
        for U in all_cut_sets(M.n, s, t):
            r = oracle.row(U)
            prob.add_constraint(r.coeffs, r.sense, r.rhs, r.name)
        sol = solve(prob)
        cuts = list(all_cut_sets(M.n, s, t))
    else:
        sol, rows = cutting_plane(prob, oracle, mode=mode)
        cuts = [frozenset(int(v) for v in r.name[4:].split(",")) for r in rows]
    if not sol.optimal:
        raise InvariantError(f"path LP is {sol.status}", step="solve_atspp_lp")
    x = {a: sol.x[j] for a, j in index.items() if sol.x[j]}
    if violated_cut(M.n, s, t, x, rho) is not None:
        raise InvariantError("final sweep found a violated cut", step="solve_atspp_lp")
    return AtsppLpState(M, s, t, rho, x, sol.objective, cuts, sol)


def integral_state(M: Metric, path, rho=Fraction(1)) -> AtsppLpState:
    """State whose x is the given Hamiltonian path (for tests and baselines)."""
    x = {(a, b): Fraction(1) for a, b in zip(path, path[1:])}
    return AtsppLpState(M, path[0], path[-1], as_fraction(rho), x, M.path_cost(path), [], None)


# ---------------------------------------------------------------------------
# duals


@dataclass
class DualState:
    z: dict
    y: dict
    laminar: bool = False
    kappa: Optional[Fraction] = None

    def objective(self, s, t, rho) -> Fraction:
        return self.z[t] - self.z[s] + 2 * rho * sum(self.y.values(), ZERO)

    def support(self):
        return sorted((U for U, w in self.y.items() if w > 0), key=lambda U: (len(U), sorted(U)))


def dual_violations(state: AtsppLpState, dual: DualState, arcs=None) -> list:
    """Arcs whose dual row z_v - z_u + sum y_U <= c_uv fails (supported arcs by default)."""
    arcs = sorted(state.x) if arcs is None else arcs
    bad = []
    for (u, v) in arcs:
        lhs = dual.z[v] - dual.z[u] + sum((w for U, w in dual.y.items() if (u in U) != (v in U)), ZERO)
        if lhs > state.metric.dist[u][v]:
            bad.append((u, v))
    return bad


def reduced_cost(state, dual, u, v) -> Fraction:
    """c_uv - (z_v - z_u) - c^y_uv; zero on supported arcs by complementary slackness."""
    cy = sum((w for U, w in dual.y.items() if (u in U) != (v in U)), ZERO)
    return state.metric.dist[u][v] - (dual.z[v] - dual.z[u]) - cy


def solve_zmin_dual(state: AtsppLpState) -> DualState:
    """Optimal dual maximizing z_t - z_s among optimal duals, arcs restricted to supp(x).

    Solved through its own dual (flow x' plus scalar kappa) by cutting planes;
    the potentials and cut weights are read off that LP's row duals.
    """
    M, s, t, rho = state.metric, state.s, state.t, state.rho
    arcs = sorted(state.x)
    prob, index = _atspp_core(M, s, t, arcs)
    kappa = prob.add_var("kappa", -state.opt_lp)
    prob.constraints[s].coeffs[kappa] = Fraction(1)
    prob.constraints[t].coeffs[kappa] = Fraction(-1)
    oracle = CutOracle(M.n, s, t, rho, index, scale_var=kappa)
    for U in state.cuts:
        r = oracle.row(U)
        prob.add_constraint(r.coeffs, r.sense, r.rhs, r.name)
    sol, generated = cutting_plane(prob, oracle)
    if not sol.optimal:
        raise InvariantError(f"z-min dual LP is {sol.status}", step="solve_zmin_dual")
    z = {v: sol.duals[v] for v in range(M.n)}
    y = {}
    names = [r.name for r in prob.constraints] + [r.name for r in generated]
    for name, w in zip(names, sol.duals):
        if w and name.startswith("cut:"):
            U = frozenset(int(v) for v in name[4:].split(","))
            y[U] = y.get(U, ZERO) + w
    dual = DualState(z, y, kappa=sol.x[kappa])
    if dual.objective(s, t, rho) != state.opt_lp:
        raise InvariantError("dual objective differs from OPT_LP", step="solve_zmin_dual")
    if dual_violations(state, dual):
        raise InvariantError("z-min dual infeasible on supp(x)", step="solve_zmin_dual")
    return dual


def is_laminar(sets) -> bool:
    sets = list(sets)
    for A, B in combinations(sets, 2):
        if A & B and not (A <= B or B <= A):
            return False
    return True


def uncross(dual: DualState, max_steps: int = 100_000) -> DualState:
    """Make supp(y) laminar without touching z.

    A crossing pair A, B (both inside V - {s, t}, so A|B is too) loses
    min(y_A, y_B) to A&B and A|B. Cut indicators are submodular, so every
    arc's load can only drop, and sum y_U |U|^2 strictly increases.
    """
    y = {U: w for U, w in dual.y.items() if w > 0}
    for _ in range(max_steps):
        pair = None
        sup = sorted(y, key=lambda U: (len(U), sorted(U)))
        for A, B in combinations(sup, 2):
            if A & B and not (A <= B or B <= A):
                pair = (A, B)
                break
        if pair is None:
            return DualState(dict(dual.z), y, True, dual.kappa)
        A, B = pair
        w = min(y[A], y[B])
        for U, dw in ((A, -w), (B, -w), (A & B, w), (A | B, w)):
            nv = y.get(U, ZERO) + dw
            if nv:
                y[U] = nv
            else:
                y.pop(U, None)
    raise InvariantError("uncrossing did not terminate", step="uncross")


def contractibility_check(dual: DualState, G: nx.DiGraph, s, t) -> dict:
    """For each U in supp(y): does s still reach t once U is deleted?"""
    out = {}
    for U in dual.support():
        H = G.subgraph([v for v in G.nodes if v not in U])
        out[U] = nx.has_path(H, s, t)
    return out


def tight_set_structure(state: AtsppLpState, U) -> list:
    """Problems with the component structure of a tight set U (empty list = fine)."""
    x = state.x
    G = state.support()
    H = G.subgraph(U)
    C = nx.condensation(H)
    order = [frozenset(C.nodes[c]["members"]) for c in nx.topological_sort(C)]
    problems = []

    def ins(S):
        return {a for a in x if a[0] not in S and a[1] in S}

    def outs(S):
        return {a for a in x if a[0] in S and a[1] not in S}

    if ins(order[0]) != ins(U):
        problems.append(("in", sorted(order[0])))
    if outs(order[-1]) != outs(U):
        problems.append(("out", sorted(order[-1])))
    for A, B in zip(order, order[1:]):
        if outs(A) != ins(B):
            problems.append(("chain-edges", sorted(A), sorted(B)))
        ma = sum((x[a] for a in outs(A)), ZERO)
        mb = sum((x[a] for a in ins(B)), ZERO)
        if not ma == mb == state.rho:
            problems.append(("chain-mass", sorted(A), sorted(B)))
    return problems


# ---------------------------------------------------------------------------
# component chain and stitching


@dataclass
class SccChain:
    components: list

    @property
    def ell(self):
        return len(self.components)

    def index_of(self, v):
        for i, U in enumerate(self.components):
            if v in U:
                return i
        raise KeyError(v)


def scc_chain(state: AtsppLpState) -> SccChain:
    G = state.support()
    C = nx.condensation(G)
    order = [frozenset(C.nodes[c]["members"]) for c in nx.topological_sort(C)]
    chain = SccChain(order)
    pos = {v: i for i, U in enumerate(order) for v in U}
    for (u, v) in state.x:
        if pos[u] > pos[v]:
            raise InvariantError(f"supported arc {(u, v)} goes backwards", step="scc_chain")
    if state.s not in order[0] or state.t not in order[-1]:
        raise InvariantError("s must lie in the first component and t in the last", step="scc_chain")
    return chain


@dataclass(frozen=True)
class Stitch:
    edge: tuple
    cost: Fraction
    mass: Fraction
    weighted: Fraction


def stitch_edge(state: AtsppLpState, chain: SccChain, i: int) -> Stitch:
    """Cheapest supported arc from component i to component i+1 (0-based)."""
    if not 0 <= i < chain.ell - 1:
        raise PreconditionError(f"no stitch after component {i}")
    A, B = chain.components[i], chain.components[i + 1]
    cand = sorted(a for a in state.x if a[0] in A and a[1] in B)
    if not cand:
        raise InvariantError(f"no supported arc between components {i} and {i + 1}", step="stitch_edge")
    d = state.metric.dist
    edge = min(cand, key=lambda a: (d[a[0]][a[1]], a))
    mass = sum((state.x[a] for a in cand), ZERO)
    weighted = sum((d[a[0]][a[1]] * state.x[a] for a in cand), ZERO)
    return Stitch(edge, d[edge[0]][edge[1]], mass, weighted)


def crossings(path, U) -> int:
    return sum(1 for a, b in zip(path, path[1:]) if (a in U) != (b in U))


def _bfs_path(G, u, w, allowed):
    if u == w:
        return [u]
    parent = {u: None}
    frontier = [u]
    while frontier:
        nxt = []
        for a in frontier:
            for b in sorted(G.successors(a)):
                if b in allowed and b not in parent:
                    parent[b] = a
                    if b == w:
                        path = [w]
                        while parent[path[-1]] is not None:
                            path.append(parent[path[-1]])
                        return path[::-1]
                    nxt.append(b)
        frontier = nxt
    return None


def low_crossing_path(u, w, U, family, G: nx.DiGraph) -> list:
    """u-w path inside G[U] crossing every family member strictly inside U at most twice.

    Start from a BFS path; while some inner set is re-entered, take the
    largest such set U', and replace the stretch between the first and last
    visit of U' by a recursively built path inside G[U'].
    """
    U = frozenset(U)
    path = _bfs_path(G, u, w, U)
    if path is None:
        raise PreconditionError(f"{w} is not reachable from {u} inside the given set")
    inner = [S for S in family if S < U]
    while True:
        bad = [S for S in inner if crossings(path, S) > 2 or _reenters(path, S)]
        if not bad:
            return path
        top = max(bad, key=lambda S: (len(S), [-v for v in sorted(S)]))
        idx = [k for k, v in enumerate(path) if v in top]
        a, b = idx[0], idx[-1]
        sub = low_crossing_path(path[a], path[b], top, family, G)
        path = path[:a] + sub + path[b + 1:]


def _reenters(path, S) -> bool:
    idx = [k for k, v in enumerate(path) if v in S]
    return bool(idx) and idx[-1] - idx[0] + 1 != len(idx)


# ---------------------------------------------------------------------------
# the augmented circuit instance


@dataclass
class AugmentedInstance:
    """Support graph plus the extra node ``vbar`` (= n) with arcs t->vbar and vbar->s."""

    n: int
    s: int
    t: int
    opt_lp: Fraction
    dist: list  # shortest-path distances inside the support graph; None if unreachable
    hop: dict  # (u, w) -> next node on that shortest path

    @property
    def vbar(self):
        return self.n

    def expand(self, u, w) -> list:
        out = [u]
        while out[-1] != w:
            out.append(self.hop[(out[-1], w)])
        return out



def augmented_instance(state: AtsppLpState) -> AugmentedInstance:
    n = state.n
    d = state.metric.dist
    dist = [[None] * n for _ in range(n)]
    hop = {}
    for u in range(n):
        dist[u][u] = ZERO
    for (u, v) in sorted(state.x):
        dist[u][v] = d[u][v]
        hop[(u, v)] = v
    for k in range(n):
        for i in range(n):
            if dist[i][k] is None:
                continue
            for j in range(n):
                if dist[k][j] is None or i == j:
                    continue
                alt = dist[i][k] + dist[k][j]
                if dist[i][j] is None or alt < dist[i][j]:
                    dist[i][j] = alt
                    hop[(i, j)] = hop[(i, k)]
    return AugmentedInstance(n, state.s, state.t, state.opt_lp, dist, hop)


CircuitSolver = Callable[[AugmentedInstance], list]


def exact_circuit(H: AugmentedInstance, cap: int = 14) -> list:
    """Cheapest spanning circuit of H; vbar is entered only from t and left only to s."""
    if H.n + 1 > cap:
        raise CapacityError(f"circuit DP cap {cap} exceeded ({H.n + 1} nodes)")
    path = _forbidden_arc_dp(H.dist, H.s, H.t)
    if path is None:
        raise InvariantError("no spanning s-t walk in the support graph", step="circuit")
    return [H.vbar, *path, H.vbar]


def _forbidden_arc_dp(dist, s, t):
    """Cheapest Hamiltonian s-t path where ``None`` marks an unusable arc."""
    n = len(dist)
    mids = [v for v in range(n) if v not in (s, t)]
    if not mids:
        return [s, t] if dist[s][t] is not None else None
    m = len(mids)
    best = {}
    for i, v in enumerate(mids):
        if dist[s][v] is not None:
            best[(1 << i, i)] = (dist[s][v], None)
    for mask in range(1, 1 << m):
        for i in range(m):
            cur = best.get((mask, i))
            if cur is None:
                continue
            u = mids[i]
            for j in range(m):
                if mask >> j & 1 or dist[u][mids[j]] is None:
                    continue
                key = (mask | 1 << j, j)
                cand = cur[0] + dist[u][mids[j]]
                if key not in best or cand < best[key][0]:
                    best[key] = (cand, i)
    full = (1 << m) - 1
    ends = [i for i in range(m) if (full, i) in best and dist[mids[i]][t] is not None]
    if not ends:
        return None
    end = min(ends, key=lambda i: (best[(full, i)][0] + dist[mids[i]][t], i))
    order = []
    mask, i = full, end
    while i is not None:
        order.append(mids[i])
        prev = best[(mask, i)][1]
        mask ^= 1 << i
        i = prev
    return [s, *reversed(order), t]


class MultiLapCircuit:
    """Test double: the exact circuit followed by ``laps - 1`` extra direct s->t laps."""

    def __init__(self, laps: int = 2):
        if laps < 1:
            raise PreconditionError("laps must be >= 1")
        self.laps = laps

    def __call__(self, H: AugmentedInstance) -> list:
        walk = exact_circuit(H)
        for _ in range(self.laps - 1):
            walk += [H.s, H.t, H.vbar]
        return walk


def circuit_cost(H: AugmentedInstance, walk) -> Fraction:
    total = ZERO
    for a, b in zip(walk, walk[1:]):
        if a == H.vbar:
            if b != H.s:
                raise InvariantError("circuit leaves vbar other than to s", step="circuit")
        elif b == H.vbar:
            if a != H.t:
                raise InvariantError("circuit enters vbar other than from t", step="circuit")
            total += H.opt_lp
        else:
            total += H.dist[a][b]
    return total


# ---------------------------------------------------------------------------
# rounding


def shortcut(walk, last=None) -> list:
    """Keep first occurrences; ``last`` (if given) is held back to the end."""
    seen = set()
    out = []
    for v in walk:
        if v == last or v in seen:
            continue
        seen.add(v)
        out.append(v)
    if last is not None:
        out.append(last)
    return out


@dataclass
class RoundCertificate:
    opt_lp: Fraction
    path: list
    path_cost: Fraction
    ratio: Fraction
    z_gap: Fraction
    rho: Fraction
    k: int
    ell: int
    circuit_cost: Fraction = ZERO
    walks_cost: Fraction = ZERO
    stitch_cost: Fraction = ZERO
    cycles_cost: Fraction = ZERO
    y_total: Fraction = ZERO
    stitches: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {
            "opt_lp": fmt(self.opt_lp),
            "path": list(self.path),
            "path_cost": fmt(self.path_cost),
            "ratio": fmt(self.ratio),
            "z_gap": fmt(self.z_gap),
            "rho": fmt(self.rho),
            "k": self.k,
            "ell": self.ell,
            "checks": dict(self.checks),
        }


def is_hamiltonian_path(path, n, s, t) -> bool:
    return len(path) == n and set(path) == set(range(n)) and path[0] == s and path[-1] == t


def round_path(state: AtsppLpState, dual: Optional[DualState] = None,
               circuit_solver: CircuitSolver = exact_circuit):
    """Hamiltonian s-t path from an optimal LP state and a laminar z-min dual."""
    M, s, t, rho = state.metric, state.s, state.t, state.rho
    d = M.dist
    if dual is None:
        dual = uncross(solve_zmin_dual(state))
    if not dual.laminar:
        raise PreconditionError("round_path needs a laminar dual")
    family = dual.support()
    G = state.support()
    checks = {}
    z_gap = dual.z[s] - dual.z[t]
    if 2 * rho - 1 > 0:
        checks["z_gap_bound"] = z_gap * (2 * rho - 1) <= state.opt_lp

    # circuit on H, split into s-t walks of G
    H = augmented_instance(state)
    circuit = circuit_solver(H)
    if circuit[0] != H.vbar or circuit[-1] != H.vbar:
        raise InvariantError("circuit must start and end at vbar", step="round_path.circuit")
    if set(circuit) != set(range(H.n + 1)):
        raise InvariantError("circuit does not span H", step="round_path.circuit")
    c_cost = circuit_cost(H, circuit)
    walks = []
    cur = []
    for v in circuit[1:]:
        if v == H.vbar:
            walks.append(cur)
            cur = []
        else:
            cur.append(v)
    expanded = []
    for w in walks:
        if w[0] != s or w[-1] != t:
            raise InvariantError("walk between vbar visits is not s-t", step="round_path.walks")
        full = [w[0]]
        for a, b in zip(w, w[1:]):
            full.extend(H.expand(a, b)[1:])
        expanded.append(full)
    k = len(expanded)
    walks_cost = sum((M.path_cost(w) for w in expanded), ZERO)

    chain = scc_chain(state)
    ell = chain.ell
    pos = {v: i for i, U in enumerate(chain.components) for v in U}

    # per-component circuits C_i
    cycles = []
    for i, U in enumerate(chain.components):
        pieces = []
        for j, w in enumerate(expanded):
            idx = [q for q, v in enumerate(w) if pos[v] == i]
            if not idx:
                continue
            if idx[-1] - idx[0] + 1 != len(idx):
                raise InvariantError("walk re-enters a component", step="round_path.restrict")
            pieces.append(w[idx[0]: idx[-1] + 1])
        if not pieces:
            raise InvariantError(f"component {i} not visited by any walk", step="round_path.restrict")
        cyc = []
        for m, R in enumerate(pieces):
            nxt = pieces[(m + 1) % len(pieces)][0]
            link = low_crossing_path(R[-1], nxt, U, family, G)
            for S in family:
                if S < U and crossings(link, S) > 2:
                    raise InvariantError("connecting path crosses a set more than twice",
                                         step="round_path.low_crossing")
            cyc.extend(R)
            cyc.extend(link[1:-1])
        # drop repeated neighbours, cyclically
        cleaned = [v for q, v in enumerate(cyc) if v != cyc[q - 1]] if len(cyc) > 1 else cyc
        cycles.append(cleaned or cyc[:1])
    cycles_cost = sum((_cycle_cost(M, C) for C in cycles), ZERO)

    stitches = [stitch_edge(state, chain, i) for i in range(ell - 1)]
    stitch_total = sum((st.cost for st in stitches), ZERO)
    for i, st in enumerate(stitches):
        checks[f"stitch_mass_{i}"] = st.mass >= 2 * rho - 1 and (
            st.mass >= rho if i in (0, ell - 2) else True)
        checks[f"stitch_cost_{i}"] = st.cost * (2 * rho - 1) <= st.weighted
    checks["stitch_total"] = stitch_total * (2 * rho - 1) <= state.opt_lp

    enter = [s] + [st.edge[1] for st in stitches]
    leave = [st.edge[0] for st in stitches] + [t]
    walk = []
    for i, C in enumerate(cycles):
        walk.extend(_around(C, enter[i], leave[i]))
    path = shortcut(walk, last=t)
    if not is_hamiltonian_path(path, M.n, s, t):
        raise InvariantError(f"output {path} is not a Hamiltonian s-t path", step="round_path.output")
    cost = M.path_cost(path)
    y_total = sum(dual.y.values(), ZERO)
    checks["path_vs_walk"] = cost <= stitch_total + 2 * cycles_cost
    checks["cycles_vs_walks"] = cycles_cost <= 2 * k * y_total + walks_cost
    checks["final_chain"] = cost * (2 * rho - 1) <= state.opt_lp + (2 * rho - 1) * (
        2 * walks_cost + 2 * k * y_total)
    ratio = cost / state.opt_lp if state.opt_lp else (Fraction(1) if cost == 0 else Fraction(-1))
    cert = RoundCertificate(
        state.opt_lp, path, cost, ratio, z_gap, rho, k, ell, c_cost, walks_cost,
        stitch_total, cycles_cost, y_total, stitches, checks,
    )
    return path, cert


def _cycle_cost(M, C) -> Fraction:
    if len(C) < 2:
        return ZERO
    return M.path_cost(C + C[:1])


def _around(C, start, stop) -> list:
    """Go once fully around C from ``start`` and continue to ``stop``."""
    k = C.index(start)
    rot = C[k:] + C[:k]
    if len(rot) == 1:
        return rot
    out = rot + [start]
    if stop != start:
        out += rot[1: rot.index(stop) + 1]
    return out
