from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import legendre as npleg

from stochwave.gpc import (GpcBasis, build_index_set, eval_basis, gauss_rule,
                           legendre_orthonormal, make_basis)


@pytest.mark.parametrize("N,P,M", [(2, 4, 15), (1, 7, 8), (2, 1, 3)])
def test_index_set_sizes(N, P, M):
    idx = build_index_set(N, P)
    assert idx.size == M
    assert idx.indices[0] == (0,) * N


def test_index_set_cardinality_and_order():
    for N in range(1, 5):
        for P in range(0, 9):
            idx = build_index_set(N, P)
            assert idx.size == comb(N + P, N)
            assert len(set(idx.indices)) == idx.size
            degrees = [sum(a) for a in idx.indices]
            assert max(degrees) <= P
            assert degrees == sorted(degrees)


def test_index_set_rejects_bad_input():
    with pytest.raises(ValueError):
        build_index_set(0, 2)
    with pytest.raises(ValueError):
        build_index_set(2, -1)


def test_mean_mode_is_one():
    basis = make_basis(2, 3)
    for y in ([0.3, -0.7], [1.0, 1.0], [-1.0, 0.0]):
        assert eval_basis(basis, 0, y) == pytest.approx(1.0, abs=1e-15)


def test_degree_one_at_endpoint_is_sqrt3():
    basis = make_basis(1, 1)
    assert eval_basis(basis, 1, [1.0]) == pytest.approx(np.sqrt(3.0), rel=1e-14)
    # unit norm against the uniform density
    vals = basis.values[1]
    assert np.sum(basis.weights * vals ** 2) == pytest.approx(1.0, abs=1e-14)


def test_third_and_fifth_modes_orthogonal():
    basis = make_basis(2, 4)
    # third and fifth modes (numbered from one) are indices 2 and 4 here
    val = np.sum(basis.weights * basis.values[2] * basis.values[4])
    assert abs(val) < 1e-12


def test_eval_basis_out_of_range():
    basis = make_basis(2, 1)
    with pytest.raises(IndexError):
        eval_basis(basis, 3, [0.0, 0.0])
    with pytest.raises(IndexError):
        eval_basis(basis, -1, [0.0, 0.0])


def test_gauss_rule_examples():
    nodes, weights = gauss_rule(1)
    assert nodes.shape == (1, 1) and nodes[0, 0] == 0.0 and weights[0] == 1.0
    nodes, weights = gauss_rule(2)
    assert np.sum(weights * nodes[:, 0] ** 2) == pytest.approx(1 / 3, abs=1e-15)
    nodes, weights = gauss_rule(3, 2)
    assert nodes.shape == (9, 2)
    assert abs(weights.sum() - 1) < 1e-14
    assert np.all(weights > 0)
    with pytest.raises(ValueError):
        gauss_rule(0)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_gauss_rule_monomial_exactness(n):
    nodes, weights = gauss_rule(n)
    for j in range(2 * n):
        exact = 0.0 if j % 2 else 1.0 / (j + 1)
        got = np.sum(weights * nodes[:, 0] ** j)
        assert abs(got - exact) <= 1e-13 * max(1.0, abs(exact))


def test_legendre_matches_numpy():
    y = np.linspace(-1, 1, 11)
    vals = legendre_orthonormal(5, y)
    for n in range(6):
        c = np.zeros(n + 1)
        c[n] = 1
        np.testing.assert_allclose(vals[n], np.sqrt(2 * n + 1) * npleg.legval(y, c), atol=1e-13)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 4), st.integers(0, 3))
def test_orthonormality_property(N, P, extra):
    basis = GpcBasis(build_index_set(N, P), P + 1 + extra)
    gram = np.einsum("q,mq,nq->mn", basis.weights, basis.values, basis.values)
    np.testing.assert_allclose(gram, np.eye(basis.size), atol=1e-12)


def test_project_recovers_modes(rng):
    basis = make_basis(2, 3)
    coef = rng.standard_normal(basis.size)
    samples = coef @ basis.values
    np.testing.assert_allclose(basis.project(samples), coef, atol=1e-13)


def test_too_few_nodes_rejected():
    with pytest.raises(ValueError):
        GpcBasis(build_index_set(2, 4), 4)
