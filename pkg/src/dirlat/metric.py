"""Metric data types, generators, the regret transform and the scaling reduction.

All distances are ``fractions.Fraction``; integer metrics simply have
denominator 1.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import networkx as nx

from .errors import PreconditionError, StructuralError


def as_fraction(value) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings; floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise StructuralError(f"distance {value!r} must be an int or 'p/q' string")
    if isinstance(value, (int, str)):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise StructuralError(f"cannot parse rational {value!r}") from exc
    raise StructuralError(f"unsupported distance type {type(value).__name__}")


def fmt(q: Fraction) -> str:
    return str(Fraction(q))


@dataclass(frozen=True)
class Metric:
    """Complete directed distance matrix over nodes ``0..n-1``.

    ``depot`` is the DirLat root; ``s``/``t`` are the endpoints for path
    problems. Regret metrics keep a reference to the symmetric base they were
    built from (``regret_base``) together with the root used.
    """

    dist: tuple
    depot: int = 0
    s: Optional[int] = None
    t: Optional[int] = None
    symmetric: bool = False
    regret_base: Optional["Metric"] = field(default=None, compare=False, repr=False)
    regret_root: Optional[int] = None

    def __post_init__(self):
        rows = [tuple(as_fraction(v) for v in row) for row in self.dist]
        n = len(rows)
        if n < 2:
            raise StructuralError("a metric needs at least 2 nodes")
        for row in rows:
            if len(row) != n:
                raise StructuralError("distance matrix is not square")
            for v in row:
                if v < 0:
                    raise StructuralError(f"negative distance {v}")
        object.__setattr__(self, "dist", tuple(rows))
        for name in ("depot", "s", "t", "regret_root"):
            idx = getattr(self, name)
            if idx is not None and not 0 <= idx < n:
                raise StructuralError(f"{name}={idx} out of range for n={n}")

    @property
    def n(self) -> int:
        return len(self.dist)

    @property
    def nodes(self) -> range:
        return range(len(self.dist))

    def __call__(self, u: int, v: int) -> Fraction:
        return self.dist[u][v]

    def with_endpoints(self, s: int, t: int) -> "Metric":
        return Metric(self.dist, self.depot, s, t, self.symmetric, self.regret_base, self.regret_root)

    def restrict(self, keep: Sequence[int]):
        """Sub-metric on ``keep`` (order preserved). Returns (metric, old->new map)."""
        keep = list(keep)
        index = {v: i for i, v in enumerate(keep)}
        sub = tuple(tuple(self.dist[u][v] for v in keep) for u in keep)
        remap = lambda x: index.get(x) if x is not None else None  # noqa: E731
        base = None
        if self.regret_base is not None:
            base = self.regret_base.restrict(keep)[0]
        return (
            Metric(sub, remap(self.depot) or 0, remap(self.s), remap(self.t), self.symmetric,
                   base, remap(self.regret_root)),
            index,
        )

    def path_cost(self, path: Sequence[int]) -> Fraction:
        return sum((self.dist[a][b] for a, b in zip(path, path[1:])), Fraction(0))

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for row in self.dist for v in row)

    def max_distance(self) -> Fraction:
        return max(v for row in self.dist for v in row)


def validate_metric(M: Metric) -> list:
    """Every violation of the metric axioms.

    Entries are ``(u,)`` for a nonzero diagonal, ``(u, v, w)`` when
    ``d[u][w] > d[u][v] + d[v][w]``, and ``(u, v)`` for an asymmetric pair on
    a matrix flagged symmetric.
    """
    d = M.dist
    n = M.n
    report = [(u,) for u in range(n) if d[u][u] != 0]
    for u in range(n):
        du = d[u]
        for v in range(n):
            duv = du[v]
            dv = d[v]
            for w in range(n):
                if du[w] > duv + dv[w]:
                    report.append((u, v, w))
    if M.symmetric:
        report.extend((u, v) for u in range(n) for v in range(u + 1, n) if d[u][v] != d[v][u])
    return report


def metric_closure(D, depot: int = 0, s=None, t=None, symmetric=None) -> Metric:
    """All-pairs shortest paths of a raw non-negative matrix with zero diagonal."""
    rows = [[as_fraction(v) for v in row] for row in D]
    n = len(rows)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise StructuralError("distance matrix is not square")
        if any(v < 0 for v in row):
            raise StructuralError("negative entry in raw matrix")
        if row[i] != 0:
            raise StructuralError("raw matrix must have a zero diagonal")
    for k in range(n):
        dk = rows[k]
        for i in range(n):
            dik = rows[i][k]
            ri = rows[i]
            for j in range(n):
                alt = dik + dk[j]
                if alt < ri[j]:
                    ri[j] = alt
    if symmetric is None:
        symmetric = all(rows[i][j] == rows[j][i] for i in range(n) for j in range(n))
    return Metric(tuple(tuple(r) for r in rows), depot, s, t, symmetric)


def regret_transform(M: Metric, root: int) -> Metric:
    """c_reg(u, v) = c(root, u) + c(u, v) - c(root, v)."""
    if not M.symmetric or any(M.dist[u][v] != M.dist[v][u] for u in M.nodes for v in M.nodes):
        raise PreconditionError("regret transform needs a symmetric metric")
    d = M.dist
    rows = tuple(
        tuple(d[root][u] + d[u][v] - d[root][v] for v in M.nodes) for u in M.nodes
    )
    return Metric(rows, M.depot, M.s, M.t, False, regret_base=M, regret_root=root)


def generate_random(n: int, max_dist: int, seed: int, symmetric: bool = False) -> Metric:
    """Metric closure of a uniform integer matrix in [1, max_dist]; depot 0, s=0, t=n-1."""
    if n < 2 or max_dist < 1:
        raise PreconditionError("need n >= 2 and max_dist >= 1")
    rng = random.Random(seed)
    raw = [[0 if i == j else rng.randint(1, max_dist) for j in range(n)] for i in range(n)]
    if symmetric:
        for i in range(n):
            for j in range(i + 1, n):
                raw[j][i] = raw[i][j]
    return metric_closure(raw, depot=0, s=0, t=n - 1, symmetric=symmetric)


# ---------------------------------------------------------------------------
# chain-of-components feasibility and the scaling reduction


def _threshold_graph(M: Metric, bound: Fraction) -> nx.DiGraph:
    G = nx.DiGraph()
    G.add_nodes_from(M.nodes)
    G.add_edges_from((u, v) for u in M.nodes for v in M.nodes if u != v and M.dist[u][v] <= bound)
    return G


def component_chain(G: nx.DiGraph, root: int):
    """Topologically ordered SCCs if they form a single chain starting at ``root``.

    Returns ``None`` when the condensation is not a path (so no single walk
    from the root covers every node).
    """
    C = nx.condensation(G)
    order = list(nx.topological_sort(C))
    members = C.graph["mapping"]
    if members[root] != order[0]:
        return None
    for a, b in zip(order, order[1:]):
        if not C.has_edge(a, b):
            return None
    return [sorted(C.nodes[c]["members"]) for c in order]


def _chain_ok(M: Metric, bound: Fraction) -> bool:
    return component_chain(_threshold_graph(M, bound), M.depot) is not None


def compute_nu(M: Metric) -> Fraction:
    """Smallest distance value whose threshold graph admits one covering walk from the depot."""
    values = sorted({M.dist[u][v] for u in M.nodes for v in M.nodes if u != v})
    lo, hi = 0, len(values) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _chain_ok(M, values[mid]):
            hi = mid
        else:
            lo = mid + 1
    return values[lo]


def chain_path(M: Metric, bound: Fraction) -> list:
    """A depot-rooted Hamiltonian order following the component chain of G_bound."""
    chain = component_chain(_threshold_graph(M, bound), M.depot)
    if chain is None:
        raise PreconditionError(f"threshold {bound} does not give a component chain")
    order = [M.depot]
    for comp in chain:
        order.extend(v for v in comp if v != M.depot)
    return order


def nearest_neighbour_path(M: Metric) -> list:
    path = [M.depot]
    left = set(M.nodes) - {M.depot}
    while left:
        cur = path[-1]
        nxt = min(left, key=lambda v: (M.dist[cur][v], v))
        path.append(nxt)
        left.remove(nxt)
    return path


def path_latency(M: Metric, path: Sequence[int]) -> Fraction:
    total = Fraction(0)
    elapsed = Fraction(0)
    for a, b in zip(path, path[1:]):
        elapsed += M.dist[a][b]
        total += elapsed
    return total


class ZeroOptimum(Exception):
    """Raised by :func:`scale_instance` when a zero-latency path exists."""

    def __init__(self, path):
        super().__init__(f"optimum latency is 0 (path {path})")
        self.path = path


@dataclass(frozen=True)
class ScaledInstance:
    scaled: Metric
    scale_factor: Fraction
    nu: Optional[Fraction]
    epsilon: Optional[Fraction]
    alpha: Optional[Fraction]
    horizon: int
    original: Metric = field(repr=False, compare=False, default=None)
    nu_lower: Optional[Fraction] = None

    @classmethod
    def from_integer(cls, M: Metric) -> "ScaledInstance":
        """Wrap a metric that already has positive integer off-diagonal distances."""
        for u in M.nodes:
            for v in M.nodes:
                if u != v and (M.dist[u][v].denominator != 1 or M.dist[u][v] < 1):
                    raise PreconditionError("distances must be positive integers; use scale_instance")
        return cls(M, Fraction(1), None, None, None, M.n * int(M.max_distance()), M)


def scale_instance(M: Metric, epsilon, alpha=1) -> ScaledInstance:
    """Round ``M`` to polynomially bounded positive integers.

    Three steps in order: lift distances below eps*nu/n^3, truncate above
    (alpha+2eps)*nu, then floor c*n^4/(nu*eps) and take the shortest-path
    closure. ``nu`` must upper-bound OPT for the truncation to be harmless, so
    it is the cheaper of two feasible path latencies (component-chain order
    and nearest neighbour); both are <= n^3 * compute_nu(M).
    """
    epsilon = as_fraction(epsilon)
    alpha = as_fraction(alpha)
    if epsilon <= 0:
        raise PreconditionError("epsilon must be positive")
    if _chain_ok(M, Fraction(0)):
        raise ZeroOptimum(chain_path(M, Fraction(0)))
    n = M.n
    nu_lower = compute_nu(M)
    nu = min(path_latency(M, chain_path(M, nu_lower)), path_latency(M, nearest_neighbour_path(M)))
    low = epsilon * nu / n**3
    high = (alpha + 2 * epsilon) * nu
    factor = Fraction(n**4) / (nu * epsilon)
    raw = []
    for u in M.nodes:
        row = []
        for v in M.nodes:
            if u == v:
                row.append(0)
                continue
            c = min(max(M.dist[u][v], low), high)
            row.append((c * factor).numerator // (c * factor).denominator)
        raw.append(row)
    closed = metric_closure(raw, M.depot, M.s, M.t, symmetric=M.symmetric)
    horizon = n * int(closed.max_distance())
    return ScaledInstance(closed, factor, nu, epsilon, alpha, horizon, M, nu_lower)


# ---------------------------------------------------------------------------
# instance files


def dump_instance(M: Metric) -> str:
    doc = {
        "n": M.n,
        "symmetric": M.symmetric,
        "depot": M.depot,
        "s": M.s,
        "t": M.t,
        "dist": [[fmt(v) for v in row] for row in M.dist],
    }
    return json.dumps(doc) + "\n"


def load_instance(text: str) -> Metric:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructuralError(f"instance is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "dist" not in doc:
        raise StructuralError("instance must be an object with a 'dist' matrix")
    dist = doc["dist"]
    if not isinstance(dist, list) or not all(isinstance(r, list) for r in dist):
        raise StructuralError("'dist' must be a list of rows")
    if "n" in doc and doc["n"] != len(dist):
        raise StructuralError(f"n={doc['n']} but matrix has {len(dist)} rows")
    M = Metric(
        tuple(tuple(as_fraction(v) for v in row) for row in dist),
        depot=doc.get("depot", 0) or 0,
        s=doc.get("s"),
        t=doc.get("t"),
        symmetric=bool(doc.get("symmetric", False)),
    )
    bad = validate_metric(M)
    if bad:
        raise StructuralError(f"not a metric; first violations: {bad[:5]}")
    return M
