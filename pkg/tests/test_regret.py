import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_metric
from dirlat.atspp import integral_state, solve_atspp_lp
from dirlat.errors import InvariantError, PreconditionError
from dirlat.exact import exact_atspp
from dirlat.metric import generate_random, regret_transform
from dirlat.regret import (
    WeightedBranchingSet, branching_decomposition, branching_to_path, connectivity,
    covering_lp_feasible, cut_requirement, delta_opt, doubled_cost_bound, forest_lp_value, g_value,
    graft, pd_forest, red_edges, round_regret, shortcut_to_witnesses, witness_path, witness_structure,
)

ONE = Fraction(1)


def _sym(n, seed, max_dist=9):
    return generate_random(n, max_dist, seed, symmetric=True)


def test_single_branching():
    x = {(0, 1): ONE, (1, 2): ONE, (0, 3): ONE}
    wb = branching_decomposition(x, 0)
    assert wb.branchings == [((0, 1), (0, 3), (1, 2))] and wb.weights == [1]


def test_two_disjoint_branchings_split_evenly():
    half = Fraction(1, 2)
    x = {(0, 1): half, (1, 2): half, (0, 2): half, (2, 1): half}
    wb = branching_decomposition(x, 0)
    assert sorted(wb.branchings) == [((0, 1), (1, 2)), ((0, 2), (2, 1))]
    assert wb.weights == [half, half]


@pytest.mark.parametrize("seed", range(4))
def test_contract_on_lp_flows(seed):
    n = 6
    M = regret_transform(_sym(n, seed), 0)
    state = solve_atspp_lp(M, 0, n - 1, Fraction(2, 3))
    wb = branching_decomposition(state.x, 0, ONE, list(range(n)))
    lam = connectivity(state.x, 0, range(n))
    assert wb.contract_violations(state.x, ONE, lam) == []
    assert all(n - 1 in WeightedBranchingSet.nodes_of(B, 0) for B in wb.branchings)


@pytest.mark.parametrize("seed", range(4))
def test_covering_lp_agrees_small(seed):
    n = 5
    M = regret_transform(_sym(n, seed), 0)
    state = solve_atspp_lp(M, 0, n - 1, Fraction(2, 3))
    wb = branching_decomposition(state.x, 0, ONE, list(range(n)))
    assert covering_lp_feasible(state.x, 0, ONE, list(range(n)))
    assert wb.q >= 1


def test_branching_path_is_itself():
    M = _sym(4, 1)
    B = ((0, 2), (1, 3), (2, 1))
    assert branching_to_path(B, 0, 3, M) == [0, 2, 1, 3]


def test_star_branching_doubles_spokes():
    M = _sym(5, 2)
    B = ((0, 1), (0, 2), (0, 3), (0, 4))
    P = branching_to_path(B, 0, 4, M)
    assert P[0] == 0 and P[-1] == 4 and sorted(P) == [0, 1, 2, 3, 4]
    assert M.path_cost(P) <= doubled_cost_bound(B, 0, 4, M)


def test_branching_path_needs_t():
    with pytest.raises(PreconditionError):
        branching_to_path(((0, 1),), 0, 2, _sym(3, 0))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_random_branching_paths_obey_doubling(seed):
    rng = random.Random(seed)
    n = 7
    M = _sym(n, seed)
    parent = {}
    order = list(range(1, n))
    rng.shuffle(order)
    placed = [0]
    for v in order:
        parent[v] = rng.choice(placed)
        placed.append(v)
    B = tuple(sorted((p, v) for v, p in parent.items()))
    P = branching_to_path(B, 0, n - 1, M)
    assert sorted(P) == list(range(n)) and P[-1] == n - 1
    assert M.path_cost(P) <= doubled_cost_bound(B, 0, n - 1, M)


def test_increasing_path_has_no_red():
    base = make_metric([[0, 1, 2, 3], [1, 0, 1, 2], [2, 1, 0, 1], [3, 2, 1, 0]], symmetric=True)
    dec = red_edges([0, 1, 2, 3], base, 0)
    assert not any(dec.red) and dec.intervals == []


def test_backtracking_edge_is_red():
    base = make_metric([[0, 1, 2, 3], [1, 0, 1, 2], [2, 1, 0, 1], [3, 2, 1, 0]], symmetric=True)
    dec = red_edges([0, 2, 1, 3], base, 0)
    assert dec.red == [False, True, False] or dec.red[1]
    assert dec.node_interval[1] == frozenset({2, 1})


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_red_cost_bound_on_random_paths(seed):
    rng = random.Random(seed)
    n = 7
    base = _sym(n, seed)
    reg = regret_transform(base, 0)
    mid = list(range(1, n - 1))
    rng.shuffle(mid)
    P = [0] + mid + [n - 1]
    dec = red_edges(P, base, 0)
    assert 2 * dec.red_cost(base) <= 3 * reg.path_cost(P)


def _pipeline_parts(n, seed, rho=Fraction(2, 3)):
    base = _sym(n, seed)
    reg = regret_transform(base, 0)
    state = solve_atspp_lp(reg, 0, n - 1, rho)
    wb = branching_decomposition(state.x, 0, ONE, list(range(n)))
    paths = [branching_to_path(B, 0, n - 1, base) for B in wb.branchings]
    decs = [red_edges(P, base, 0) for P in paths]
    return base, reg, state, wb, paths, decs


@pytest.mark.parametrize("seed", range(3))
def test_requirement_monotone_and_forest(seed):
    n = 7
    base, reg, state, wb, paths, decs = _pipeline_parts(n, seed)
    delta = delta_opt(Fraction(2, 3))
    f = lambda S: cut_requirement(S, decs, wb.weights, delta)  # noqa: E731
    vals = {}
    for k in range(1, n + 1):
        for S in itertools.combinations(range(n), k):
            vals[frozenset(S)] = f(S)
    assert vals[frozenset(range(n))] == 0
    for S, v in vals.items():
        for w in range(n):
            if w not in S:
                assert vals[S | {w}] <= v
    forest = pd_forest(f, base, range(n))
    for S, v in vals.items():
        if v:
            assert any((a in S) != (b in S) for a, b in forest.edges)
    if n <= 7:
        assert forest.cost <= 2 * forest_lp_value(f, base, range(n))


def test_forest_empty_requirement():
    assert pd_forest(lambda S: 0, _sym(4, 0), range(4)).edges == []


def test_forest_single_singleton():
    base = _sym(5, 3)
    v = 2
    f = lambda S: 1 if S == frozenset({v}) else 0  # noqa: E731
    F = pd_forest(f, base, range(5))
    cheapest = min(base.dist[v][u] for u in range(5) if u != v)
    assert len(F.edges) == 1 and F.cost == cheapest and v in F.edges[0]


def test_component_without_witness_is_rejected():
    base = _sym(4, 0)
    dec = red_edges([0, 1, 2, 3], base, 0)
    with pytest.raises(InvariantError):
        witness_structure([], [dec], [ONE], Fraction(3, 5), range(4))


def test_witness_tree_component_cycle():
    base = _sym(4, 0)
    dec = red_edges([0, 1, 2, 3], base, 0)
    ws = witness_structure([(1, 2), (2, 3)], [dec], [ONE], Fraction(3, 5), range(4))
    big = [C for C in ws.cycles if len(C) == 3][0]
    assert sorted(big) == [1, 2, 3]


def test_shortcut_without_witnesses_keeps_endpoints():
    base = _sym(4, 0)
    dec = red_edges([0, 1, 2, 3], base, 0)
    ws = witness_structure([(0, 1), (1, 2), (2, 3)], [dec], [ONE], Fraction(3, 5), range(4))
    assert ws.witnesses == [0]
    assert shortcut_to_witnesses([0, 1, 2, 3], dec, ws, 0, 3) == [0, 3]


def test_witness_path_picks_cheaper_parallel():
    base = make_metric([[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]], symmetric=True)
    reg = regret_transform(base, 0)
    half = Fraction(1, 2)
    P, z = witness_path([[0, 1, 3], [0, 2, 3]], [half, half], Fraction(1, 2), [], base, reg, 0, 3)
    assert P == min([[0, 1, 3], [0, 2, 3]], key=reg.path_cost)


def test_delta_values():
    d = delta_opt(Fraction(74743, 100000))
    assert abs(float(d) - 0.571730) < 1e-5
    assert abs(float(g_value(Fraction(74743, 100000), d)) - 48.0903) < 1e-3
    assert float(g_value(Fraction(74743, 100000), d)) <= 48.09442
    d1 = float(delta_opt(ONE))
    lo, hi = 0.5 + 1e-9, 1 - 1e-9
    for _ in range(200):
        a, b = lo + (hi - lo) / 3, hi - (hi - lo) / 3
        if g_value(ONE, Fraction(a)) < g_value(ONE, Fraction(b)):
            hi = b
        else:
            lo = a
    assert abs(d1 - lo) < 1e-5 and abs(d1 - 0.6450) < 1e-4
    with pytest.raises(PreconditionError):
        delta_opt(Fraction(1, 2))


@settings(max_examples=30, deadline=None)
@given(st.fractions(Fraction(51, 100), ONE))
def test_delta_inside_interval_and_constant(rho):
    d = delta_opt(rho)
    assert Fraction(1, 2) < d < rho
    target = 300 / (42 - 12 * math.sqrt(6))
    assert abs(float(g_value(rho, d)) * float(2 * rho - 1) - target) < 1e-4


def test_integral_state_is_certified():
    # an integral start gives a single branching, yet grafting may reorder the path
    n = 6
    base = _sym(n, 5)
    reg = regret_transform(base, 0)
    P = list(exact_atspp(reg, 0, n - 1).path)
    out, cert = round_regret(reg, Fraction(2, 3), state=integral_state(reg, P, Fraction(2, 3)))
    assert cert.ok and cert.branching_q == 1
    assert cert.opt_lp == reg.path_cost(P) and reg.path_cost(out) <= cert.bound


@pytest.mark.parametrize("seed", range(4))
def test_round_regret_full_certificate(seed):
    n = 7
    reg = regret_transform(_sym(n, seed), 0)
    out, cert = round_regret(reg, Fraction(2, 3))
    assert sorted(out) == list(range(n)) and out[0] == 0 and out[-1] == n - 1
    assert cert.ok, cert.checks
    assert cert.path_cost * (2 * Fraction(2, 3) - 1) <= 24 * cert.opt_lp


def test_round_regret_requires_regret_metric():
    with pytest.raises(PreconditionError):
        round_regret(generate_random(4, 5, 0), Fraction(2, 3))
