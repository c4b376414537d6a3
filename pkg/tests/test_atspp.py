import itertools
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_metric, uniform
from dirlat.atspp import (
    DualState, MultiLapCircuit, augmented_instance, circuit_cost, contractibility_check, crossings,
    exact_circuit, integral_state, is_hamiltonian_path, is_laminar, low_crossing_path, round_path,
    scc_chain, solve_atspp_lp, solve_zmin_dual, stitch_edge, tight_set_structure, uncross,
    violated_cut,
)
from dirlat.errors import PreconditionError
from dirlat.exact import exact_atspp
from dirlat.metric import generate_random

RHOS = [Fraction(11, 20), Fraction(2, 3), Fraction(9, 10), Fraction(1)]


def test_two_nodes():
    M = make_metric([[0, 3], [4, 0]])
    st_ = solve_atspp_lp(M, 0, 1, Fraction(2, 3))
    assert st_.x == {(0, 1): 1} and st_.opt_lp == 3
    dual = solve_zmin_dual(st_)
    assert dual.y == {} and dual.z[1] - dual.z[0] == 3


def test_rho_out_of_range():
    with pytest.raises(PreconditionError):
        solve_atspp_lp(uniform(3, s=0, t=2), 0, 2, Fraction(1, 2))


@pytest.mark.parametrize("seed", range(3))
def test_cutting_plane_equals_explicit_n5(seed):
    M = generate_random(5, 8, seed)
    for rho in (Fraction(2, 3), Fraction(1)):
        assert solve_atspp_lp(M, 0, 4, rho).opt_lp == solve_atspp_lp(M, 0, 4, rho, explicit=True).opt_lp


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 10**6), st.integers(3, 7), st.sampled_from(RHOS))
def test_lp_below_integral_and_duals(seed, n, rho):
    M = generate_random(n, 9, seed)
    state = solve_atspp_lp(M, 0, n - 1, rho)
    assert state.opt_lp <= exact_atspp(M, 0, n - 1).value
    assert violated_cut(n, 0, n - 1, state.x, rho) is None
    dual = solve_zmin_dual(state)
    assert dual.objective(0, n - 1, rho) == state.opt_lp
    if rho > Fraction(1, 2):
        assert (dual.z[0] - dual.z[n - 1]) * (2 * rho - 1) <= state.opt_lp
    lam = uncross(dual)
    assert is_laminar(lam.support())
    assert lam.objective(0, n - 1, rho) == state.opt_lp
    assert all(contractibility_check(lam, state.support(), 0, n - 1).values())
    for U in lam.support():
        assert sum(v for (a, b), v in state.x.items() if (a in U) != (b in U)) == 2 * rho
        assert tight_set_structure(state, U) == []


def test_uncross_fixed_point_and_step():
    lam = DualState({0: 0, 1: 0, 2: 0, 3: 0, 4: 0}, {frozenset({1}): Fraction(1), frozenset({1, 2}): Fraction(1)})
    assert uncross(lam).y == lam.y
    A, B = frozenset({1, 2}), frozenset({2, 3})
    crossed = DualState({v: 0 for v in range(5)}, {A: Fraction(1, 2), B: Fraction(1, 2)})
    out = uncross(crossed)
    assert out.y == {A & B: Fraction(1, 2), A | B: Fraction(1, 2)}
    assert sum(out.y.values()) == 1


def test_contractibility_negative_control():
    G = nx.DiGraph([(0, 1), (1, 2)])
    bad = DualState({0: 0, 1: 0, 2: 0}, {frozenset({1}): Fraction(1)})
    assert contractibility_check(bad, G, 0, 2) == {frozenset({1}): False}
    assert contractibility_check(DualState({}, {}), G, 0, 2) == {}


def test_chain_on_integral_path():
    M = generate_random(5, 6, 0)
    state = integral_state(M, [0, 2, 1, 3, 4])
    chain = scc_chain(state)
    assert chain.ell == 5 and [sorted(C) for C in chain.components] == [[0], [2], [1], [3], [4]]
    st_ = stitch_edge(state, chain, 1)
    assert st_.edge == (2, 1) and st_.mass == 1


@pytest.mark.parametrize("seed", range(6))
def test_chain_order_and_stitch_bounds(seed):
    n = 8
    M = generate_random(n, 9, seed)
    rho = Fraction(3, 5)
    state = solve_atspp_lp(M, 0, n - 1, rho)
    chain = scc_chain(state)
    G = state.support()
    reach = {v: nx.descendants(G, v) | {v} for v in G}
    pos = {v: i for i, C in enumerate(chain.components) for v in C}
    for (a, b) in state.x:
        assert pos[a] <= pos[b]
    for i, C in enumerate(chain.components):
        for j, D in enumerate(chain.components):
            if i < j:
                assert not any(u in reach[w] for u in C for w in D)
    assert 0 in chain.components[0] and n - 1 in chain.components[-1]
    for i in range(chain.ell - 1):
        s_ = stitch_edge(state, chain, i)
        assert s_.mass >= 2 * rho - 1
        if i in (0, chain.ell - 2):
            assert s_.mass >= rho
        assert s_.cost * (2 * rho - 1) <= s_.weighted


def test_low_crossing_single_recursion():
    # naive BFS route 0->1->2->3 leaves and re-enters U' = {1, 3}
    G = nx.DiGraph([(0, 1), (1, 2), (2, 3), (1, 3), (3, 4)])
    Up = frozenset({1, 3})
    p = low_crossing_path(0, 4, frozenset(range(5)), [Up], G)
    assert p[0] == 0 and p[-1] == 4 and crossings(p, Up) <= 2


def test_low_crossing_unreachable():
    G = nx.DiGraph([(1, 0)])
    with pytest.raises(PreconditionError):
        low_crossing_path(0, 1, frozenset({0, 1}), [], G)


@pytest.mark.parametrize("seed", range(5))
def test_low_crossing_on_random_states(seed):
    n = 8
    M = generate_random(n, 9, seed)
    state = solve_atspp_lp(M, 0, n - 1, Fraction(2, 3))
    fam = uncross(solve_zmin_dual(state)).support()
    G = state.support()
    for U in fam + [frozenset(range(n))]:
        for u, w in itertools.permutations(sorted(U), 2):
            if nx.has_path(G.subgraph(U), u, w):
                p = low_crossing_path(u, w, U, fam, G)
                assert all(crossings(p, S) <= 2 for S in fam if S < U)


def test_integral_circuit_and_rounding():
    M = generate_random(5, 6, 2)
    P = list(exact_atspp(M, 0, 4).path)
    state = integral_state(M, P)
    H = augmented_instance(state)
    c = exact_circuit(H)
    assert circuit_cost(H, c) == M.path_cost(P) + state.opt_lp
    out, cert = round_path(state)
    assert out == P and cert.path_cost == state.opt_lp


def test_three_node_circuit_minimal():
    M = generate_random(3, 7, 4)
    state = solve_atspp_lp(M, 0, 2, Fraction(1))
    H = augmented_instance(state)
    assert circuit_cost(H, exact_circuit(H)) == M.path_cost(exact_atspp(M, 0, 2).path) + state.opt_lp


@pytest.mark.parametrize("seed", range(5))
def test_round_path_hamiltonian_and_sandwich(seed):
    n = 6
    M = generate_random(n, 9, seed)
    state = solve_atspp_lp(M, 0, n - 1, Fraction(1), explicit=True)
    P, cert = round_path(state)
    assert is_hamiltonian_path(P, n, 0, n - 1) and cert.ok
    assert cert.path_cost >= exact_atspp(M, 0, n - 1).value >= state.opt_lp


@pytest.mark.parametrize("seed", range(4))
def test_multi_lap_stub_runs_k_above_one(seed):
    n = 7
    M = generate_random(n, 9, seed)
    state = solve_atspp_lp(M, 0, n - 1, Fraction(2, 3))
    P, cert = round_path(state, circuit_solver=MultiLapCircuit(2))
    assert cert.k == 2 and is_hamiltonian_path(P, n, 0, n - 1) and cert.ok
