import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_metric, uniform
from dirlat.errors import PreconditionError, StructuralError
from dirlat.exact import exact_dirlat
from dirlat.metric import (
    ZeroOptimum, compute_nu, dump_instance, generate_random, load_instance, metric_closure,
    path_latency, regret_transform, scale_instance, validate_metric,
)

seeds = st.integers(0, 10_000)


def test_uniform_metric_is_valid():
    assert validate_metric(uniform(3)) == []


def test_triangle_violation_reported():
    M = make_metric([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    assert (0, 1, 2) in validate_metric(M)


def test_negative_entry_rejected():
    with pytest.raises(StructuralError):
        make_metric([[0, -1], [1, 0]])


def test_closure_two_hop():
    M = metric_closure([[0, 1, 10], [1, 0, 1], [10, 1, 0]])
    assert M.dist[0][2] == 2


def test_closure_idempotent_on_metric():
    M = generate_random(6, 8, 7)
    assert metric_closure([list(r) for r in M.dist]).dist == M.dist


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 7))
def test_closure_matches_relaxation(seed, n):
    rng = random.Random(seed)
    D = [[0 if i == j else rng.randint(1, 9) for j in range(n)] for i in range(n)]
    ref = [row[:] for row in D]
    changed = True
    while changed:
        changed = False
        for u, v, w in itertools.product(range(n), repeat=3):
            if ref[u][v] + ref[v][w] < ref[u][w]:
                ref[u][w] = ref[u][v] + ref[v][w]
                changed = True
    M = metric_closure(D)
    assert [[int(x) for x in r] for r in M.dist] == ref
    assert validate_metric(M) == []
    assert all(M.dist[u][v] <= D[u][v] for u in range(n) for v in range(n))


def test_regret_small_example():
    M = make_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]], symmetric=True)
    R = regret_transform(M, 0)
    assert R.dist[1][2] == 0 and R.dist[2][1] == 2
    assert all(R.dist[0][v] == 0 for v in R.nodes)


def test_regret_needs_symmetric():
    with pytest.raises(PreconditionError):
        regret_transform(generate_random(4, 5, 1), 0)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_regret_is_metric_and_path_identity(seed):
    M = generate_random(6, 9, seed, symmetric=True)
    R = regret_transform(M, 0)
    assert validate_metric(R) == []
    for k in range(1, 4):
        for rest in itertools.permutations(range(1, 6), k):
            P = (0, *rest)
            assert M.path_cost(P) == R.path_cost(P) + M.dist[0][P[-1]]
    for C in itertools.permutations(range(6), 4):
        cyc = (*C, C[0])
        assert M.path_cost(cyc) == R.path_cost(cyc)


def test_nu_uniform():
    assert compute_nu(uniform(4, 3)) == 3


def test_nu_mandatory_edge():
    # r->a costs 1, a->b costs 7, everything else through the closure
    big = 100
    M = metric_closure([[0, 1, big], [big, 0, 7], [big, big, 0]])
    assert compute_nu(M) == 7


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(3, 7))
def test_nu_sandwich(seed, n):
    M = generate_random(n, 9, seed)
    opt = exact_dirlat(M).value
    nu = compute_nu(M)
    assert nu <= opt <= n ** 2 * nu


def test_generator_deterministic_and_valid():
    assert generate_random(6, 8, 7) == generate_random(6, 8, 7)
    assert validate_metric(generate_random(6, 8, 7)) == []
    two = generate_random(2, 1, 123)
    assert two.dist == ((0, 1), (1, 0))
    S = generate_random(5, 8, 3, symmetric=True)
    assert all(S.dist[u][v] == S.dist[v][u] for u in S.nodes for v in S.nodes)


def test_instance_round_trip():
    M = generate_random(5, 7, 2, symmetric=True)
    assert load_instance(dump_instance(M)) == M


def test_load_rejects_non_metric():
    with pytest.raises(StructuralError):
        load_instance('{"dist": [["0","1","5"],["1","0","1"],["5","1","0"]]}')


def test_scaling_bounds_and_horizon():
    M = generate_random(5, 9, 4)
    eps = Fraction(1)
    S = scale_instance(M, eps)
    n = M.n
    for u in S.scaled.nodes:
        for v in S.scaled.nodes:
            if u != v:
                c = S.scaled.dist[u][v]
                assert c.denominator == 1 and 1 <= c <= Fraction(n ** 4) / eps * (1 + 2 * eps)
    assert S.horizon == n * S.scaled.max_distance()


def test_scaling_rejects_bad_epsilon():
    with pytest.raises(PreconditionError):
        scale_instance(generate_random(4, 5, 0), 0)


def test_zero_optimum_detected():
    M = metric_closure([[0, 0, 3], [3, 0, 0], [3, 3, 0]])
    with pytest.raises(ZeroOptimum):
        scale_instance(M, Fraction(1, 10))


def test_scaling_uniform_preserves_optimal_orders():
    M = uniform(4, 1)
    S = scale_instance(M, Fraction(1, 10))
    assert exact_dirlat(S.scaled).value / exact_dirlat(M).value == S.scaled.dist[0][1]


@pytest.mark.parametrize("seed", range(5))
def test_scaling_latency_guarantee(seed):
    M = generate_random(5, 9, seed)
    eps = Fraction(1, 10)
    S = scale_instance(M, eps)
    P = exact_dirlat(S.scaled).path
    assert path_latency(M, P) <= (1 + eps) * exact_dirlat(M).value
