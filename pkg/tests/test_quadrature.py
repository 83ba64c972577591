import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import roots_jacobi

from mbpei.errors import QuadratureError
from mbpei.quadrature import (
    QuadratureFamily as QF,
    build_rule,
    exp_residue_sign,
    scale_to_interval,
)

R6 = math.sqrt(6.0)
MBP_FAMILIES = [QF.GAUSS_LEGENDRE, QF.LEFT_RADAU]
NON_MBP_FAMILIES = [QF.RIGHT_RADAU, QF.LOBATTO]


def counts(family, top):
    return range(2 if family is QF.LOBATTO else 1, top + 1)


def test_midpoint():
    r = build_rule(QF.GAUSS_LEGENDRE, 1)
    assert r.nodes == (0.5,) and r.weights == (1.0,) and r.degree == 1


def test_left_radau_two_nodes_matches_table():
    # nodes -1, 1/3 and weights 1/2, 3/2 on [-1, 1]
    r = build_rule(QF.LEFT_RADAU, 2)
    np.testing.assert_allclose(r.nodes, [0.0, 2 / 3], atol=1e-13, rtol=0)
    np.testing.assert_allclose(r.weights, [0.25, 0.75], atol=1e-13, rtol=0)
    assert r.degree == 2


def test_left_radau_three_nodes_matches_table():
    r = build_rule(QF.LEFT_RADAU, 3)
    np.testing.assert_allclose(r.nodes, [0.0, (6 - R6) / 10, (6 + R6) / 10], atol=1e-13, rtol=0)
    np.testing.assert_allclose(r.weights, [1 / 9, (16 + R6) / 36, (16 - R6) / 36], atol=1e-13, rtol=0)
    assert r.degree == 4


def test_gauss_two_nodes_from_moment_equations():
    s1, s2, w1, w2 = sp.symbols("s1 s2 w1 w2", real=True)
    eqs = [w1 * s1**p + w2 * s2**p - sp.Rational(1, p + 1) for p in range(4)]
    sols = [s for s in sp.solve(eqs, [s1, s2, w1, w2], dict=True) if s[s1] < s[s2]]
    assert len(sols) == 1
    exp_nodes = [float(sols[0][s1]), float(sols[0][s2])]
    exp_weights = [float(sols[0][w1]), float(sols[0][w2])]
    r = build_rule(QF.GAUSS_LEGENDRE, 2)
    np.testing.assert_allclose(r.nodes, exp_nodes, atol=1e-15)
    np.testing.assert_allclose(r.weights, exp_weights, atol=1e-15)
    assert r.degree == 3


@pytest.mark.parametrize(
    "family,a,b,shift",
    [(QF.GAUSS_LEGENDRE, 0, 0, 0), (QF.LEFT_RADAU, 0, 1, 1), (QF.RIGHT_RADAU, 1, 0, 1), (QF.LOBATTO, 1, 1, 2)],
)
@pytest.mark.parametrize("m", range(2, 11))
def test_interior_nodes_against_golub_welsch(family, a, b, shift, m):
    """Interior nodes are Jacobi roots; scipy finds them by an eigenvalue method."""
    if m - shift < 1:
        pytest.skip("no interior nodes")
    ref, _ = roots_jacobi(m - shift, a, b)
    r = build_rule(family, m)
    k0 = 1 if family in (QF.LEFT_RADAU, QF.LOBATTO) else 0
    interior = np.array(r.nodes[k0 : k0 + m - shift])
    np.testing.assert_allclose(interior, 0.5 * (np.sort(ref) + 1.0), atol=1e-14)


@pytest.mark.parametrize("family", list(QF))
def test_endpoint_membership(family):
    for m in counts(family, 6):
        r = build_rule(family, m)
        assert (r.nodes[0] == 0.0) == (family in (QF.LEFT_RADAU, QF.LOBATTO))
        assert (r.nodes[-1] == 1.0) == (family in (QF.RIGHT_RADAU, QF.LOBATTO))


@pytest.mark.parametrize("family", list(QF))
def test_exactness_up_to_degree(family):
    for m in counts(family, 6):
        r = build_rule(family, m)
        s, w = np.array(r.nodes), np.array(r.weights)
        assert r.degree == 2 * r.interior_count + r.boundary_count - 1
        for p in range(r.degree + 1):
            assert abs(np.dot(w, s**p) - 1.0 / (p + 1)) <= 1e-12


@pytest.mark.parametrize("family", list(QF))
def test_positivity_ordering_and_unit_mass(family):
    for m in counts(family, 10):
        r = build_rule(family, m)
        assert all(w > 0 for w in r.weights)
        assert all(a < b for a, b in zip(r.nodes, r.nodes[1:]))
        assert 0.0 <= r.nodes[0] and r.nodes[-1] <= 1.0
        assert abs(math.fsum(r.weights) - 1.0) <= 1e-13


def test_reproducible():
    for family in QF:
        for m in counts(family, 8):
            a, b = build_rule(family, m), build_rule(family, m)
            assert np.max(np.abs(np.subtract(a.nodes, b.nodes))) <= 1e-14
            assert np.max(np.abs(np.subtract(a.weights, b.weights))) <= 1e-14


def test_rejects_bad_counts():
    with pytest.raises(QuadratureError):
        build_rule(QF.GAUSS_LEGENDRE, 0)
    with pytest.raises(QuadratureError):
        build_rule(QF.LOBATTO, 1)
    with pytest.raises(QuadratureError):
        build_rule("simpson", 3)


def test_scale_examples():
    tau = 0.37
    nodes, weights = scale_to_interval(build_rule(QF.LEFT_RADAU, 2), tau)
    np.testing.assert_allclose(nodes, [0.0, 2 * tau / 3], rtol=1e-15)
    np.testing.assert_allclose(weights, [tau / 4, 3 * tau / 4], rtol=1e-15)
    r = build_rule(QF.GAUSS_LEGENDRE, 3)
    n1, w1 = scale_to_interval(r, 1.0)
    assert tuple(n1) == r.nodes and tuple(w1) == r.weights
    n2, w2 = scale_to_interval(build_rule(QF.GAUSS_LEGENDRE, 1), 2.0)
    assert list(n2) == [1.0] and list(w2) == [2.0]
    with pytest.raises(QuadratureError):
        scale_to_interval(r, 0.0)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(list(QF)), st.integers(2, 6), st.floats(1e-3, 50.0))
def test_scaled_rule_keeps_exactness(family, m, length):
    r = build_rule(family, m)
    s, w = scale_to_interval(r, length)
    for p in range(r.degree + 1):
        exact = length ** (p + 1) / (p + 1)
        assert abs(np.dot(w, s**p) - exact) <= 1e-12 * max(1.0, exact)


def test_residue_examples():
    assert exp_residue_sign(build_rule(QF.GAUSS_LEGENDRE, 2), 2.0, 1.0) > 0
    assert exp_residue_sign(build_rule(QF.LEFT_RADAU, 2), 8.02, 10.0) > 0
    assert exp_residue_sign(build_rule(QF.LOBATTO, 3), 2.0, 1.0) < 0
    with pytest.raises(QuadratureError):
        exp_residue_sign(build_rule(QF.LOBATTO, 3), 0.0, 1.0)


def test_residue_matches_direct_evaluation():
    # Simpson on e^{2s}: (e^2 - 1)/2 - (1 + 4e + e^2)/6
    direct = (math.e**2 - 1) / 2 - (1 + 4 * math.e + math.e**2) / 6
    assert exp_residue_sign(build_rule(QF.LOBATTO, 3), 2.0, 1.0) == pytest.approx(direct, rel=1e-12)


KAPPAS = [0.1, 1.0, 2.0, 8.02, 50.0]
TAUS = [1e-3, 0.1, 1.0, 10.0]


@pytest.mark.parametrize("family", MBP_FAMILIES)
def test_underestimation(family):
    for m in range(1, 7):
        r = build_rule(family, m)
        for k in KAPPAS:
            for t in TAUS:
                assert exp_residue_sign(r, k, t) >= -1e-13, (family, m, k, t)


@pytest.mark.parametrize("family", NON_MBP_FAMILIES)
def test_overestimation(family):
    for m in range(2, 6):
        r = build_rule(family, m)
        for k in KAPPAS:
            for t in TAUS:
                assert exp_residue_sign(r, k, t) <= 1e-13, (family, m, k, t)
