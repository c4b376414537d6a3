"""Time-indexed latency LP, its guess strengthening, and the bucket quantities derived from it.

Variables live on the time-expanded DAG: node (v, t) for a client v and a
time t, and an arc (u, t - c_uv) -> (v, t) for every pair u != v. ``x[v, t]``
is the flow entering (v, t); ``z[u, v, t]`` is the flow on the arc that
arrives at v at time t. The depot emits at most one unit at time 0 and is
never re-entered.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import InvariantError, PreconditionError
from .flow import max_flow_min_cut
from .lp import Constraint, LpProblem, cutting_plane
from .metric import Metric, ScaledInstance, as_fraction, fmt

ZERO = Fraction(0)


def num_buckets(T: int) -> int:
    """Indices 0..floor(log2 T)."""
    return max(T, 1).bit_length()


def bucket_range(i: int, T: int) -> range:
    return range(1 << i, min(1 << (i + 1), T + 1))


def bucket_of(t: int) -> int:
    if t < 1:
        raise PreconditionError("times start at 1 for bucketing")
    return t.bit_length() - 1


@dataclass(frozen=True)
class GuessProfile:
    """``entries[i]`` is None or ``(v, ell)`` with ell in [2^i, 2^(i+1))."""

    entries: tuple
    T: int

    @property
    def admissible(self) -> list:
        return [i for i, e in enumerate(self.entries) if e is not None]

    @property
    def forbidden(self) -> frozenset:
        F = set()
        for i, e in enumerate(self.entries):
            lo = 1 << i if e is None else e[1] + 1
            F.update(range(lo, min(1 << (i + 1), self.T + 1)))
        return frozenset(F)

    def anchors(self) -> list:
        return [self.entries[i] for i in self.admissible]

    def problems(self) -> list:
        out = []
        if len(self.entries) != num_buckets(self.T):
            out.append("wrong number of buckets")
        seen = set()
        for i, e in enumerate(self.entries):
            if e is None:
                continue
            v, ell = e
            if ell not in bucket_range(i, self.T):
                out.append(f"bucket {i}: time {ell} outside its interval")
            if v in seen:
                out.append(f"node {v} guessed twice")
            seen.add(v)
        return out

    def key(self):
        return tuple((-1, -1) if e is None else e for e in self.entries)

    def to_json(self):
        return [None if e is None else {"v": e[0], "ell": e[1]} for e in self.entries]


@dataclass
class TimeIndexedSolution:
    T: int
    x: dict  # (v, t) -> value, nonzeros only
    z: dict  # (u, v, t) -> value, nonzeros only
    depot: int

    @property
    def objective(self) -> Fraction:
        return sum((t * val for (v, t), val in self.x.items()), ZERO)

    def cumulative(self, t: int) -> dict:
        cap = {}
        for (u, v, tt), val in self.z.items():
            if tt <= t:
                cap[(u, v)] = cap.get((u, v), ZERO) + val
        return cap

    def to_json(self) -> str:
        return json.dumps({
            "T": self.T,
            "x": {f"{v},{t}": fmt(val) for (v, t), val in sorted(self.x.items())},
            "z": {f"{u},{v},{t}": fmt(val) for (u, v, t), val in sorted(self.z.items())},
        })

    @classmethod
    def from_json(cls, text: str, depot: int = 0):
        d = json.loads(text)
        x = {tuple(map(int, k.split(","))): as_fraction(v) for k, v in d["x"].items()}
        z = {tuple(map(int, k.split(","))): as_fraction(v) for k, v in d["z"].items()}
        return cls(d["T"], x, z, depot)


# ---------------------------------------------------------------------------
# model


class LatencyCutOracle:
    """Separates the cumulative cut rows by one min cut per (v, t)."""

    def __init__(self, lp: "LatencyLp"):
        self.lp = lp

    def decode(self, values) -> TimeIndexedSolution:
        return self.lp.decode(values)

    def find(self, sol: TimeIndexedSolution):
        return separate_latency(sol, self.lp.metric)

    def row(self, v, t, S) -> Constraint:
        coeffs = {}
        for (a, b, tt), j in self.lp.zvar.items():
            if tt <= t and b in S and a not in S:
                coeffs[j] = coeffs.get(j, 0) + 1
        for (w, tt), j in self.lp.xvar.items():
            if w == v and tt <= t:
                coeffs[j] = coeffs.get(j, 0) - 1
        name = f"lcut:{v},{t}:" + ",".join(map(str, sorted(S)))
        return Constraint({j: Fraction(c) for j, c in coeffs.items() if c}, ">=", ZERO, name)

    def separate(self, values) -> Optional[Constraint]:
        hit = self.find(self.decode(values))
        return None if hit is None else self.row(*hit)


@dataclass
class LatencyLp:
    metric: Metric
    T: int
    problem: LpProblem
    xvar: dict
    zvar: dict
    guess: Optional[GuessProfile] = None
    oracle: LatencyCutOracle = field(init=False)

    def __post_init__(self):
        self.oracle = LatencyCutOracle(self)

    def decode(self, values) -> TimeIndexedSolution:
        x = {k: values[j] for k, j in self.xvar.items() if values[j] != 0}
        z = {k: values[j] for k, j in self.zvar.items() if values[j] != 0}
        return TimeIndexedSolution(self.T, x, z, self.metric.depot)


def _check_integer(M: Metric):
    for u in M.nodes:
        for v in M.nodes:
            if u != v and (M.dist[u][v].denominator != 1 or M.dist[u][v] < 1):
                raise PreconditionError("latency LP needs positive integer distances")


def _support(M: Metric, T: int, guess: Optional[GuessProfile]):
    """Time-expanded nodes and arcs that some feasible flow could use.

    Without a guess this is forward reachability from (r, 0). With a guess,
    every unit of flow has to pass through each anchor (v*_i, l*_i) in
    order, so a node survives only if it sits on an anchor-to-anchor route
    that avoids forbidden times and other visits of anchor nodes.
    """
    r = M.depot
    clients = [v for v in M.nodes if v != r]
    d = [[int(c) for c in row] for row in M.dist]
    if guess is None:
        nodes = set()
        for t in range(1, T + 1):
            for v in clients:
                if d[r][v] == t or any((u, t - d[u][v]) in nodes for u in clients if u != v):
                    nodes.add((v, t))
        return nodes
    F = guess.forbidden
    anchors = [(r, 0)] + guess.anchors()
    anchor_node = {v: ell for v, ell in guess.anchors()}

    def ok(v, t):
        if t in F or t < 1 or t > T:
            return False
        return v not in anchor_node or anchor_node[v] == t

    nodes = set()
    for (a, ta), (b, tb) in zip(anchors, anchors[1:]):
        fwd = {(a, ta)}
        for t in range(ta + 1, tb + 1):
            for v in clients:
                if not ok(v, t) or (t == tb and v != b):
                    continue
                if any((u, t - d[u][v]) in fwd for u in M.nodes if u != v):
                    fwd.add((v, t))
        if (b, tb) not in fwd:
            return None
        bwd = {(b, tb)}
        for t in range(tb - 1, ta - 1, -1):
            for (v, tt) in [p for p in fwd if p[1] == t]:
                if any((w, t + d[v][w]) in bwd for w in clients if w != v):
                    bwd.add((v, tt))
        nodes |= {p for p in fwd & bwd if p[0] != r}
    return nodes


def _assemble(M: Metric, T: int, nodes, guess=None) -> LatencyLp:
    r = M.depot
    d = M.dist
    clients = [v for v in M.nodes if v != r]
    prob = LpProblem()
    xvar, zvar = {}, {}
    for v, t in sorted(nodes, key=lambda p: (p[1], p[0])):
        xvar[(v, t)] = prob.add_var(f"x[{v},{t}]", t)
    for v, t in sorted(xvar, key=lambda p: (p[1], p[0])):
        for u in M.nodes:
            if u == v:
                continue
            tu = t - int(d[u][v])
            if (u == r and tu == 0) or (u, tu) in xvar:
                zvar[(u, v, t)] = prob.add_var(f"z[{u},{v},{t}]")
    for v in clients:
        prob.add_constraint({j: 1 for (w, t), j in xvar.items() if w == v}, "=", 1, f"visit:{v}")
    for (v, t), j in xvar.items():
        row = {j: Fraction(1)}
        for (a, b, tt), k in zvar.items():
            if b == v and tt == t:
                row[k] = Fraction(-1)
        prob.add_constraint(row, "=", 0, f"in:{v},{t}")
        row = {j: Fraction(1)}
        for (a, b, tt), k in zvar.items():
            if a == v and tt - int(d[a][b]) == t:
                row[k] = Fraction(-1)
        prob.add_constraint(row, ">=", 0, f"out:{v},{t}")
    prob.add_constraint({k: 1 for (a, b, tt), k in zvar.items() if a == r}, "<=", 1, "depot")
    return LatencyLp(M, T, prob, xvar, zvar, guess)


def build_latency_lp(S) -> LatencyLp:
    """Core LP (visit rows, flow rows, objective); cut rows come from ``lp.oracle``."""
    M, T = _unpack(S)
    _check_integer(M)
    return _assemble(M, T, _support(M, T, None))


def _unpack(S):
    if isinstance(S, ScaledInstance):
        return S.scaled, S.horizon
    M = S
    return M, M.n * int(M.max_distance())


def strengthen_with_guess(core: LatencyLp, guess: GuessProfile, presolve: bool = True) -> LatencyLp:
    """Add ``x[v*_i, l*_i] = 1`` for i in A and ``x[v, t] = 0`` for t in F.

    With ``presolve`` the model is rebuilt on the anchor-compatible support
    first; the zero rows then only touch variables that exist (usually none).
    """
    if guess.problems():
        raise PreconditionError("; ".join(guess.problems()))
    M, T = core.metric, core.T
    if presolve:
        nodes = _support(M, T, guess)
        if nodes is None:
            nodes = set()
        lp = _assemble(M, T, nodes, guess)
    else:
        lp = _assemble(M, T, set(core.xvar), guess)
    F = guess.forbidden
    for i in guess.admissible:
        v, ell = guess.entries[i]
        j = lp.xvar.get((v, ell))
        lp.problem.add_constraint({} if j is None else {j: 1}, "=", 1, f"anchor:{i}")
    for (v, t), j in lp.xvar.items():
        if t in F:
            lp.problem.add_constraint({j: 1}, "=", 0, f"forbid:{v},{t}")
    return lp


def solve_latency_lp(lp: LatencyLp, mode: str = "most"):
    """Cutting-plane solve. Returns ``(solution or None, lp_solution, generated_rows)``."""
    for c in lp.problem.constraints:
        if not c.coeffs and c.sense == "=" and c.rhs != 0:
            return None, None, []
    sol, generated = cutting_plane(lp.problem, lp.oracle, mode=mode)
    if not sol.optimal:
        return None, sol, generated
    out = lp.decode(sol.x)
    if lp.oracle.find(out) is not None:
        raise InvariantError("cut sweep failed on an accepted solution", step="latency_lp")
    return out, sol, generated


def separate_latency(sol: TimeIndexedSolution, M: Metric):
    """First (v, t, S) whose cumulative cut is short, scanning t upward, or None."""
    r = M.depot
    for t in sorted({t for (v, t) in sol.x}):
        cap = sol.cumulative(t)
        for v in sorted({v for (v, tt) in sol.x if tt == t}):
            need = sum((val for (w, tt), val in sol.x.items() if w == v and tt <= t), ZERO)
            value, _, side = max_flow_min_cut(cap, r, v)
            if value < need:
                return v, t, frozenset(M.nodes) - side
    return None


# ---------------------------------------------------------------------------
# thresholds and bucket inputs


@dataclass
class BucketPlan:
    rho: Fraction
    thresholds: dict  # v -> t(v)
    buckets: dict  # i -> sorted node list


def compute_thresholds(sol: TimeIndexedSolution, rho, clients, guess: Optional[GuessProfile] = None) -> BucketPlan:
    rho = as_fraction(rho)
    if not Fraction(1, 2) < rho <= 1:
        raise PreconditionError("rho must lie in (1/2, 1]")
    th = {}
    for v in clients:
        acc = ZERO
        for t in sorted(t for (w, t) in sol.x if w == v):
            acc += sol.x[(v, t)]
            if acc >= rho:
                th[v] = t
                break
        else:
            raise InvariantError(f"node {v} is visited less than rho in total", step="compute_thresholds")
    buckets = {}
    if guess is not None:
        for i in guess.admissible:
            buckets[i] = []
    for v in clients:
        i = bucket_of(th[v])
        if guess is not None:
            if i not in buckets:
                raise InvariantError(f"t({v}) = {th[v]} lies in a non-admissible bucket", step="compute_thresholds")
            if th[v] > guess.entries[i][1]:
                raise InvariantError(f"t({v}) exceeds the bucket anchor time", step="compute_thresholds")
        buckets.setdefault(i, []).append(v)
    return BucketPlan(rho, th, {i: sorted(b) for i, b in sorted(buckets.items())})


def bucket_atspp_input(sol: TimeIndexedSolution, i: int) -> dict:
    """Arc flow obtained by summing z over arrival times before 2^(i+1)."""
    out = {}
    for (u, v, t), val in sol.z.items():
        if t < 1 << (i + 1):
            out[(u, v)] = out.get((u, v), ZERO) + val
    return out


def time_expanded_flow_check(sol: TimeIndexedSolution, guess: GuessProfile, M: Metric):
    """``(True, None)`` when z is a unit flow from (r, 0) to the last anchor that never jumps an anchor.

    On failure returns ``(False, reason)`` where reason names the node or arc.
    """
    r = M.depot
    d = M.dist
    anchors = guess.anchors()
    if not anchors:
        return (not sol.z, None if not sol.z else "flow without anchors")
    last = anchors[-1]
    inflow, outflow = {}, {}
    for (u, v, t), val in sol.z.items():
        tu = t - int(d[u][v])
        outflow[(u, tu)] = outflow.get((u, tu), ZERO) + val
        inflow[(v, t)] = inflow.get((v, t), ZERO) + val
    if outflow.get((r, 0), ZERO) != 1:
        return False, "depot does not emit one unit"
    for node in set(inflow) | set(outflow):
        if node == (r, 0):
            continue
        a, b = inflow.get(node, ZERO), outflow.get(node, ZERO)
        want = 1 if node == last else 0
        if a - b != want:
            return False, f"conservation fails at {node}"
    for (u, v, t), val in sorted(sol.z.items()):
        tu = t - int(d[u][v])
        for _, ell in anchors:
            if tu < ell < t:
                return False, f"arc ({u},{tu})->({v},{t}) jumps over time {ell}"
    return True, None
