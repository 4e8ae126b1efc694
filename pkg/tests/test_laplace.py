import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hcnsec.analytic.laplace import (
    ToeplitzTheta,
    _g_bracket_closed,
    _g_bracket_quad,
    _upsilon_bracket_closed,
    _upsilon_bracket_quad,
    build_theta,
    g_entries,
    mark_components,
    mark_derivative_term,
    mark_laplace,
    upsilon_k,
)
from hcnsec.model import LAMBDA_1, canonical_config, derive_constants, tiers_from, NetworkConfig

# Frozen from 30-digit mpmath quadrature of the defining integrals (void term
# plus the Laplace exponent of the active interferers beyond the exclusion
# radius, and the i-th derivative terms of the interference Laplace transform).
UPSILON_CANONICAL_B5 = (1.065526650153133e-5, 3.4673885152924057e-5)
G_CANONICAL_B5 = (
    (1.4586587648719145e-5, 3.626005674130184e-6, 1.786130214591542e-6,
     1.0860034628048216e-6, 7.2906272464800462e-7),
    (4.6018898025370287e-5, 1.1275866793295319e-5, 5.38751773939197e-6),
)


@pytest.fixture(scope="module")
def canon():
    return derive_constants(canonical_config())


@pytest.mark.parametrize("k", [0, 1])
def test_upsilon_matches_quadrature_oracle(canon, k):
    assert upsilon_k(canon, k, 5.0) == pytest.approx(UPSILON_CANONICAL_B5[k], rel=1e-10)


@pytest.mark.parametrize("k", [0, 1])
def test_g_matches_quadrature_oracle(canon, k):
    assert np.allclose(g_entries(canon, k, 5.0), G_CANONICAL_B5[k], rtol=1e-10, atol=0)


def test_upsilon_small_beta_limit(canon):
    for k in range(2):
        assert upsilon_k(canon, k, 1e-9) == pytest.approx(canon.ue_exclusion_factor(k), rel=1e-6)


def test_upsilon_without_activity_is_exclusion_only():
    c = derive_constants(canonical_config(ue_density=1e-300))
    assert np.all(c.activation_prob < 1e-280)
    for k in range(2):
        assert upsilon_k(c, k, 7.0) == pytest.approx(c.ue_exclusion_factor(k), rel=1e-14)


def test_g_vanishes_like_beta_power(canon):
    small = g_entries(canon, 0, 1e-6)
    smaller = g_entries(canon, 0, 1e-7)
    for i, (a, b) in enumerate(zip(small, smaller), start=1):
        assert a / b == pytest.approx(10.0**i, rel=1e-3)


@given(st.floats(0.05, 0.999), st.integers(2, 9), st.floats(1e-3, 1e3))
def test_mark_components_reproduce_laplace(phi_like, m, t):
    xi = phi_like * 0.9
    comps = mark_components(xi, m)
    if comps is None:
        return
    val = sum(c.coef * (1 + c.theta * t) ** (-c.power) for c in comps)
    # cancellation between components costs at most max|coef| ulps
    scale = max(abs(c.coef) for c in comps)
    assert val == pytest.approx(float(mark_laplace(t, xi, m)), rel=1e-9, abs=scale * 1e-14)


@pytest.mark.parametrize("xi,m", [(0.2, 6), (1 / 3, 4), (0.0, 3), (1.0, 5), (2.5, 4)])
@pytest.mark.parametrize("i", [1, 2, 4])
def test_derivative_term_against_mpmath(xi, m, i):
    f = lambda s: (1 + s) ** -1 * (1 + xi * s) ** -(m - 1)
    for t in (0.01, 0.7, 9.0):
        want = float(t**i / mp.factorial(i) * (-1) ** i * mp.diff(f, t, i))
        assert mark_derivative_term(t, i, xi, m) == pytest.approx(want, rel=1e-9)


@pytest.mark.parametrize("xi,m", [(0.2, 6), (1.0, 4), (1.7, 3), (0.0, 2)])
@pytest.mark.parametrize("b", [0.05, 1.3, 40.0])
def test_closed_and_quadrature_brackets_agree(xi, m, b):
    comps = mark_components(xi, m)
    assert _upsilon_bracket_closed(comps, 0.5, 4.0, b) == pytest.approx(
        _upsilon_bracket_quad(xi, m, 0.5, b), rel=1e-8)
    for i in range(1, m):
        assert _g_bracket_closed(comps, 0.5, b, i) == pytest.approx(
            _g_bracket_quad(xi, m, 0.5, b, i), rel=1e-8)


def test_near_unit_xi_is_continuous():
    # 1/M - small: xi slightly above one, partial fractions ill-conditioned
    base = dict(powers_dbm=[30, 20], antennas=[6, 4], densities=[LAMBDA_1, 2 * LAMBDA_1])
    vals = []
    for eps in (0.0, 1e-9, 1e-5, 1e-3):
        cfg = NetworkConfig(tiers=tiers_from(splits=[1 / 6 + eps, 0.5], **base), tau_dbm=-80)
        c = derive_constants(cfg)
        vals.append((upsilon_k(c, 1, 3.0), g_entries(c, 1, 3.0)))
    for (u0, g0), (u, g) in zip(vals, vals[1:]):
        assert u == pytest.approx(u0, rel=1e-2)
        assert np.allclose(g, g0, rtol=2e-2)
    assert vals[1][0] == pytest.approx(vals[0][0], rel=1e-7)


def test_ill_conditioned_components_trigger_fallback():
    assert mark_components(1 - 1e-4, 8) is None
    assert mark_components(1 - 1e-7, 8)[0].power == 8


def test_theta_structure_and_nilpotency(canon):
    th = build_theta(canon, 0, 5.0)
    mat = th.matrix()
    assert th.dimension == 6
    assert np.all(np.triu(mat) == 0)
    for p in range(1, 6):
        for q in range(p):
            assert mat[p, q] == th.first_column[p - q - 1]
    assert np.all(th.power(6) == 0.0)
    naive = np.eye(6)
    for i, P in enumerate(th.powers()):
        assert np.allclose(P, naive, rtol=1e-14, atol=0)
        naive = naive @ mat


def test_theta_single_antenna():
    cfg = canonical_config().with_tier(0, antennas=1, power_split=1.0)
    th = build_theta(derive_constants(cfg), 0, 2.0)
    assert th.dimension == 1 and len(th.first_column) == 0
    assert th.matrix().tolist() == [[0.0]]


def test_theta_scaled_and_column_sums(canon):
    th = build_theta(canon, 1, 2.0)
    s = th.scaled(3.0)
    assert np.allclose(s.first_column, 3.0 * th.first_column)
    sums = th.column_sums()
    assert sums[0] == 1.0
    assert sums[1] == pytest.approx(th.first_column.sum())
