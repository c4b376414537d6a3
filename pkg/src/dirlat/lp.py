"""Exact rational linear programming.

A sparse two-phase tableau simplex over ``Fraction``. Pricing is Dantzig's
rule, switching to Bland's rule while a run of degenerate pivots is in
progress, which rules out cycling while keeping the pivot sequence
deterministic. Every optimal answer is re-certified in exact arithmetic
(primal feasibility, dual feasibility, equal objectives) before it is
returned.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Protocol, Sequence

from .errors import InvariantError, PreconditionError

ZERO = Fraction(0)
ONE = Fraction(1)
SENSES = ("<=", ">=", "=")

# degenerate pivots tolerated under Dantzig pricing before Bland takes over
_DEGENERATE_SWITCH = 20


@dataclass
class Constraint:
    coeffs: dict
    sense: str
    rhs: Fraction
    name: str = ""

    def __post_init__(self):
        if self.sense not in SENSES:
            raise PreconditionError(f"unknown relation {self.sense!r}")
        self.coeffs = {j: Fraction(a) for j, a in self.coeffs.items() if a != 0}
        self.rhs = Fraction(self.rhs)

    def activity(self, x) -> Fraction:
        return sum((a * x[j] for j, a in self.coeffs.items()), ZERO)

    def violation(self, x) -> Fraction:
        """Positive amount by which ``x`` violates the row, else <= 0."""
        lhs = self.activity(x)
        if self.sense == "<=":
            return lhs - self.rhs
        if self.sense == ">=":
            return self.rhs - lhs
        return abs(lhs - self.rhs)


@dataclass
class LpProblem:
    """Variables are >= 0 unless declared free; optional finite upper bounds."""

    names: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)
    sense: str = "min"
    constraints: list = field(default_factory=list)
    upper: dict = field(default_factory=dict)
    free: set = field(default_factory=set)

    def add_var(self, name, cost=0, upper=None, free=False) -> int:
        j = len(self.names)
        self.names.append(name)
        if cost:
            self.objective[j] = Fraction(cost)
        if upper is not None:
            self.upper[j] = Fraction(upper)
        if free:
            self.free.add(j)
        return j

    def add_constraint(self, coeffs, sense, rhs, name="") -> int:
        row = Constraint(dict(coeffs), sense, rhs, name)
        for j in row.coeffs:
            if not 0 <= j < len(self.names):
                raise PreconditionError(f"constraint {name!r} references unknown variable {j}")
        self.constraints.append(row)
        return len(self.constraints) - 1

    @property
    def num_vars(self) -> int:
        return len(self.names)

    def copy(self) -> "LpProblem":
        return LpProblem(
            list(self.names), dict(self.objective), self.sense,
            [Constraint(dict(c.coeffs), c.sense, c.rhs, c.name) for c in self.constraints],
            dict(self.upper), set(self.free),
        )

    def objective_value(self, x) -> Fraction:
        return sum((c * x[j] for j, c in self.objective.items()), ZERO)


@dataclass
class LpSolution:
    status: str
    x: Optional[list] = None
    duals: Optional[list] = None
    bound_duals: Optional[dict] = None
    objective: Optional[Fraction] = None
    basis: Optional[list] = None
    certificate: Optional[object] = None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def value(self, j) -> Fraction:
        return self.x[j]


class SeparationOracle(Protocol):
    def separate(self, x: Sequence[Fraction]) -> Optional[Constraint]:
        """One row violated by ``x`` by a positive amount, or None."""


# ---------------------------------------------------------------------------


class _Tableau:
    def __init__(self, problem: LpProblem):
        self.problem = problem
        self.cols = []  # (kind, payload): ("x", j, +1/-1) | ("slack", i) | ("art", i)
        self.col_of_var = {}
        for j in range(problem.num_vars):
            self.col_of_var[j] = [len(self.cols)]
            self.cols.append(("x", j, 1))
            if j in problem.free:
                self.col_of_var[j].append(len(self.cols))
                self.cols.append(("x", j, -1))

        rows = [(c.coeffs, c.sense, c.rhs) for c in problem.constraints]
        rows += [({j: ONE}, "<=", u) for j, u in sorted(problem.upper.items())]
        self.n_rows = len(rows)
        self.flip = []
        self.rows = []
        self.rhs = []
        self.basis = []
        self.marker = []
        self.artificial = set()
        for i, (coeffs, sense, b) in enumerate(rows):
            sign = -1 if b < 0 else 1
            if sign < 0:
                b = -b
                sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
            self.flip.append(sign)
            row = {}
            for j, a in coeffs.items():
                a = a * sign
                for c in self.col_of_var[j]:
                    row[c] = a if self.cols[c][2] > 0 else -a
            if sense == "<=":
                c = self._new_col(("slack", i))
                row[c] = ONE
                self.marker.append(c)
                basic = c
            else:
                if sense == ">=":
                    c = self._new_col(("slack", i))
                    row[c] = -ONE
                a = self._new_col(("art", i))
                row[a] = ONE
                self.artificial.add(a)
                self.marker.append(a)
                basic = a
            self.rows.append(row)
            self.rhs.append(b)
            self.basis.append(basic)
        self.pivots = 0

    def _new_col(self, kind) -> int:
        self.cols.append(kind)
        return len(self.cols) - 1

    def pivot(self, r, k, obj):
        row_r = self.rows[r]
        p = row_r[k]
        if p != 1:
            inv = 1 / p
            row_r = {c: v * inv for c, v in row_r.items()}
            self.rows[r] = row_r
            self.rhs[r] *= inv
        b_r = self.rhs[r]
        items = list(row_r.items())
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row.get(k)
            if f is None:
                continue
            for c, v in items:
                nv = row.get(c, ZERO) - f * v
                if nv:
                    row[c] = nv
                else:
                    row.pop(c, None)
            if b_r:
                self.rhs[i] -= f * b_r
        d, _ = obj
        f = d.get(k)
        if f is not None:
            for c, v in items:
                nv = d.get(c, ZERO) - f * v
                if nv:
                    d[c] = nv
                else:
                    d.pop(c, None)
            obj[1] += f * b_r
        self.basis[r] = k
        self.pivots += 1

    def run(self, obj, allowed):
        """Primal simplex on ``obj = [reduced_costs, value]``.

        Returns None at optimality or the entering column of an unbounded ray.
        """
        degenerate = 0
        while True:
            d = obj[0]
            candidates = [c for c, v in d.items() if v < 0 and allowed(c)]
            if not candidates:
                return None
            if degenerate >= _DEGENERATE_SWITCH:
                k = min(candidates)
            else:
                k = min(candidates, key=lambda c: (d[c], c))
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(k)
                if a is not None and a > 0:
                    ratio = self.rhs[i] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return k
            ratio, r = best[0][0], best[1]
            degenerate = degenerate + 1 if ratio == 0 else 0
            self.pivot(r, k, obj)

    def objective_row(self, costs):
        d = {c: v for c, v in costs.items() if v}
        obj = [d, ZERO]
        for i, b in enumerate(self.basis):
            cb = costs.get(b)
            if not cb:
                continue
            for c, v in self.rows[i].items():
                nv = d.get(c, ZERO) - cb * v
                if nv:
                    d[c] = nv
                else:
                    d.pop(c, None)
            obj[1] += cb * self.rhs[i]
        return obj

    def row_duals(self, obj, costs=None):
        """Duals of the normalized rows: y_i = cost - reduced cost of the marker column."""
        d = obj[0]
        costs = costs or {}
        return [costs.get(self.marker[i], ZERO) - d.get(self.marker[i], ZERO) for i in range(self.n_rows)]

    def primal(self):
        vals = [ZERO] * len(self.cols)
        for i, b in enumerate(self.basis):
            vals[b] = self.rhs[i]
        x = [ZERO] * self.problem.num_vars
        for c, kind in enumerate(self.cols):
            if kind[0] == "x" and vals[c]:
                x[kind[1]] += vals[c] * kind[2]
        return x, vals


def _split_duals(problem, y_norm, flip, sign):
    y = [flip[i] * y_norm[i] * sign for i in range(len(flip))]
    m = len(problem.constraints)
    bounds = {j: y[m + k] for k, j in enumerate(sorted(problem.upper))}
    return y[:m], bounds


def _reduced_costs(problem, duals, bound_duals):
    red = dict(problem.objective)
    for y, row in zip(duals, problem.constraints):
        if y:
            for j, a in row.coeffs.items():
                red[j] = red.get(j, ZERO) - y * a
    for j, y in bound_duals.items():
        if y:
            red[j] = red.get(j, ZERO) - y
    return red


def certify_optimal(problem: LpProblem, sol: LpSolution):
    """Exact primal/dual feasibility, strong duality and complementary slackness."""
    x, y, yb = sol.x, sol.duals, sol.bound_duals
    maximize = problem.sense == "max"
    for j in range(problem.num_vars):
        if j not in problem.free and x[j] < 0:
            raise InvariantError(f"x[{problem.names[j]}] = {x[j]} < 0", step="lp.certify")
        if j in problem.upper and x[j] > problem.upper[j]:
            raise InvariantError(f"x[{problem.names[j]}] above its bound", step="lp.certify")
    for i, row in enumerate(problem.constraints):
        if row.violation(x) > 0:
            raise InvariantError(f"row {i} ({row.name}) violated", step="lp.certify")
        lhs = row.activity(x)
        # sign of the dual for a minimization; reversed for maximization
        if row.sense == "<=":
            ok = y[i] <= 0 if not maximize else y[i] >= 0
        elif row.sense == ">=":
            ok = y[i] >= 0 if not maximize else y[i] <= 0
        else:
            ok = True
        if not ok:
            raise InvariantError(f"dual of row {i} has the wrong sign", step="lp.certify")
        if y[i] and lhs != row.rhs:
            raise InvariantError(f"complementary slackness fails on row {i}", step="lp.certify")
    for j, w in yb.items():
        if (w > 0) if not maximize else (w < 0):
            raise InvariantError("bound dual has the wrong sign", step="lp.certify")
        if w and x[j] != problem.upper[j]:
            raise InvariantError("complementary slackness fails on a bound", step="lp.certify")
    red = _reduced_costs(problem, y, yb)
    for j in range(problem.num_vars):
        r = red.get(j, ZERO)
        if j in problem.free:
            if r != 0:
                raise InvariantError("free variable with nonzero reduced cost", step="lp.certify")
            continue
        if (r < 0) if not maximize else (r > 0):
            raise InvariantError(f"reduced cost of {problem.names[j]} has the wrong sign", step="lp.certify")
        if r and x[j]:
            raise InvariantError(f"complementary slackness fails on {problem.names[j]}", step="lp.certify")
    primal = problem.objective_value(x)
    dual = sum((yi * row.rhs for yi, row in zip(y, problem.constraints)), ZERO)
    dual += sum((yb[j] * problem.upper[j] for j in yb), ZERO)
    if primal != dual or primal != sol.objective:
        raise InvariantError(f"duality gap: primal {primal} vs dual {dual}", step="lp.certify")


def certify_infeasible(problem: LpProblem, y, yb) -> bool:
    """Farkas check: y^T A <= 0 on every column, sign-correct y, y^T b > 0."""
    for i, row in enumerate(problem.constraints):
        if row.sense == "<=" and y[i] > 0 or row.sense == ">=" and y[i] < 0:
            return False
    if any(v > 0 for v in yb.values()):
        return False
    col = {}
    for yi, row in zip(y, problem.constraints):
        if yi:
            for j, a in row.coeffs.items():
                col[j] = col.get(j, ZERO) + yi * a
    for j, v in yb.items():
        col[j] = col.get(j, ZERO) + v
    for j, v in col.items():
        if v > 0 or (j in problem.free and v != 0):
            return False
    rhs = sum((yi * row.rhs for yi, row in zip(y, problem.constraints)), ZERO)
    rhs += sum((v * problem.upper[j] for j, v in yb.items()), ZERO)
    return rhs > 0


def certify_ray(problem: LpProblem, ray) -> bool:
    """``ray`` keeps every row feasible when added to a feasible point and improves the objective."""
    for j, v in enumerate(ray):
        if j not in problem.free and v < 0:
            return False
        if j in problem.upper and v > 0:
            return False
    for row in problem.constraints:
        a = row.activity(ray)
        if row.sense == "<=" and a > 0 or row.sense == ">=" and a < 0 or row.sense == "=" and a != 0:
            return False
    gain = problem.objective_value(ray)
    return gain > 0 if problem.sense == "max" else gain < 0


def solve(problem: LpProblem) -> LpSolution:
    """Optimal basic solution with exact duals, or an infeasible/unbounded verdict.

    Duals follow the convention ``objective = sum(duals[i] * rhs[i]) +
    sum(bound_duals[j] * upper[j])``. Infeasibility comes with a Farkas vector
    ``(row multipliers, bound multipliers)``; unboundedness with a ray over
    the structural variables.
    """
    for j in problem.objective:
        if not 0 <= j < problem.num_vars:
            raise PreconditionError("objective references an unknown variable")
    tab = _Tableau(problem)
    not_art = lambda c: c not in tab.artificial  # noqa: E731

    if tab.artificial:
        art_costs = {c: ONE for c in tab.artificial}
        phase1 = tab.objective_row(art_costs)
        tab.run(phase1, not_art)
        if phase1[1] > 0:
            y1 = tab.row_duals(phase1, art_costs)
            y, yb = _split_duals(problem, y1, tab.flip, 1)
            if not certify_infeasible(problem, y, yb):
                raise InvariantError("phase-one multipliers are not a Farkas certificate", step="lp.solve")
            return LpSolution("infeasible", certificate=(y, yb), pivots=tab.pivots)
        for r, b in enumerate(tab.basis):
            if b in tab.artificial:
                for c in sorted(tab.rows[r]):
                    if c not in tab.artificial:
                        tab.pivot(r, c, phase1)
                        break

    sign = -1 if problem.sense == "max" else 1
    costs = {}
    for j, cj in problem.objective.items():
        for c in tab.col_of_var[j]:
            costs[c] = sign * cj * tab.cols[c][2]
    obj = tab.objective_row(costs)
    k = tab.run(obj, not_art)
    if k is not None:
        ray_cols = {k: ONE}
        for i, row in enumerate(tab.rows):
            a = row.get(k)
            if a:
                ray_cols[tab.basis[i]] = -a
        ray = [ZERO] * problem.num_vars
        for c, v in ray_cols.items():
            kind = tab.cols[c]
            if kind[0] == "x":
                ray[kind[1]] += v * kind[2]
        if not certify_ray(problem, ray):
            raise InvariantError("unbounded direction failed verification", step="lp.solve")
        return LpSolution("unbounded", certificate=ray, pivots=tab.pivots)

    x, _ = tab.primal()
    y_norm = tab.row_duals(obj)
    duals, bound_duals = _split_duals(problem, y_norm, tab.flip, sign)
    basis = []
    for b in tab.basis:
        kind = tab.cols[b]
        if kind[0] == "x":
            basis.append(problem.names[kind[1]])
        else:
            basis.append(f"{kind[0]}:{kind[1]}")
    sol = LpSolution(
        "optimal", x, duals, bound_duals, problem.objective_value(x), basis, pivots=tab.pivots
    )
    certify_optimal(problem, sol)
    return sol


def cutting_plane(core: LpProblem, oracles, mode: str = "most", max_rounds: int = 10_000):
    """Solve ``core`` plus whatever rows the oracles generate.

    ``oracles`` is one oracle or a list. In ``"most"`` mode each oracle
    contributes one row per round (its ``separate`` answer); ``"all"`` mode
    uses ``separate_all`` when the oracle has it. Returns
    ``(solution, generated_rows)``; the last round is a full sweep in which
    no oracle separates.
    """
    if not isinstance(oracles, (list, tuple)):
        oracles = [oracles]
    problem = core.copy()
    generated = []
    for _ in range(max_rounds):
        sol = solve(problem)
        if not sol.optimal:
            return sol, generated
        new = []
        for oracle in oracles:
            if mode == "all" and hasattr(oracle, "separate_all"):
                rows = list(oracle.separate_all(sol.x))
            else:
                row = oracle.separate(sol.x)
                rows = [] if row is None else [row]
            for row in rows:
                if row.violation(sol.x) <= 0:
                    raise InvariantError(f"oracle returned a non-violated row {row.name}", step="cutting_plane")
            new.extend(rows)
        if not new:
            return sol, generated
        for row in new:
            problem.add_constraint(row.coeffs, row.sense, row.rhs, row.name)
            generated.append(row)
    raise InvariantError("cutting-plane round limit reached", step="cutting_plane")


def dump_lp(problem: LpProblem) -> str:
    """CPLEX-LP-like plain text, for eyeballing only."""

    def expr(coeffs):
        parts = []
        for j in sorted(coeffs):
            a = coeffs[j]
            s = "-" if a < 0 else "+"
            parts.append(f"{s} {abs(a)} {problem.names[j]}")
        text = " ".join(parts) or "0"
        return text[2:] if text.startswith("+ ") else text

    out = ["Minimize" if problem.sense == "min" else "Maximize", f" obj: {expr(problem.objective)}", "Subject To"]
    for i, row in enumerate(problem.constraints):
        out.append(f" {row.name or f'c{i}'}: {expr(row.coeffs)} {row.sense} {row.rhs}")
    if problem.upper or problem.free:
        out.append("Bounds")
        for j, u in sorted(problem.upper.items()):
            out.append(f" 0 <= {problem.names[j]} <= {u}")
        for j in sorted(problem.free):
            out.append(f" {problem.names[j]} free")
    out.append("End")
    return "\n".join(out) + "\n"
