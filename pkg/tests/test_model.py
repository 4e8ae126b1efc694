import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hcnsec.errors import ConfigError, DomainError
from hcnsec.model import (
    LAMBDA_1,
    NetworkConfig,
    TierParams,
    an_coefficient,
    canonical_config,
    check,
    dbm_to_mw,
    derive_constants,
    mw_to_dbm,
    tiers_from,
    validate,
)


def test_canonical_is_valid():
    assert validate(canonical_config()) == []


def test_alpha_two_is_one_violation():
    v = validate(canonical_config(alpha=2.0))
    assert len(v) == 1 and v[0].field == "alpha"


def test_artificial_noise_needs_two_antennas():
    cfg = canonical_config().with_tier(0, antennas=1)
    assert [x.field for x in validate(cfg)] == ["tiers[0].power_split"]


def test_violations_collected_together():
    cfg = canonical_config(alpha=1.5, ue_density=-1.0, secrecy_constraint=1.0)
    fields = {v.field for v in validate(cfg)}
    assert {"alpha", "ue_density", "secrecy_constraint"} <= fields
    with pytest.raises(ConfigError) as err:
        check(cfg)
    assert len(err.value.violations) == len(validate(cfg))


def test_empty_tiers_invalid():
    assert validate(NetworkConfig(tiers=()))[0].field == "tiers"


def test_derive_rejects_small_alpha():
    with pytest.raises(DomainError):
        derive_constants(canonical_config(alpha=2.0))


@given(st.floats(-150, 60))
def test_dbm_round_trip(x):
    assert mw_to_dbm(dbm_to_mw(x)) == pytest.approx(x, abs=1e-12)


def test_canonical_constants():
    c = derive_constants(canonical_config())
    assert c.delta == 0.5
    assert np.allclose(c.serving_radius, (c.power * c.antennas / dbm_to_mw(-70)) ** 0.25, rtol=0, atol=0)
    total = 1 - math.exp(-math.pi * dbm_to_mw(-70) ** -0.5 * c.xi_total)
    assert c.assoc_prob.sum() == pytest.approx(total, rel=1e-14)
    assert np.allclose(c.activation_prob, 1 - np.exp(-(c.config.ue_density / c.density) * c.assoc_prob),
                       rtol=1e-12, atol=0)
    assert np.all(c.active_density < c.config.ue_density)
    assert c.xi_k == pytest.approx([0.2, 1 / 3])
    assert c.gamma_k is None


def test_psi_formula():
    c = derive_constants(canonical_config())
    from hcnsec.specfun import c_alpha_m
    for k in range(2):
        want = sum(c.activation_prob[j] * c.density[j] * c_alpha_m(4, int(c.antennas[j]))
                   * (c.xi_k[j] * c.power_split[j] * c.power[j] / (c.power_split[k] * c.power[k])) ** 0.5
                   for j in range(2))
        assert c.psi_k[k] == pytest.approx(want, rel=1e-14)


def test_gamma_k_only_for_alpha4_with_noise():
    c = derive_constants(canonical_config(noise_dbm=-90.0, target_sinr_e=2.0))
    want = 4 * 2.0 * dbm_to_mw(-90) / (math.pi**2 * c.power_split * c.power)
    assert np.allclose(c.gamma_k, want, rtol=1e-14)
    assert derive_constants(canonical_config(alpha=3.5, noise_dbm=-90.0)).gamma_k is None


def test_xi_is_exactly_one_at_matched_split():
    assert an_coefficient(1 / 6, 6) == 1.0
    assert an_coefficient(1.0, 6) == 0.0
    assert an_coefficient(0.5, 1) == 0.0


def test_single_tier_tiny_threshold_associates_everyone():
    cfg = NetworkConfig(tiers=(TierParams(30, 4, LAMBDA_1, 0.5),), tau_dbm=-300.0)
    assert derive_constants(cfg).assoc_prob[0] == pytest.approx(1.0, abs=1e-12)


def test_identical_tiers_share_association():
    cfg = NetworkConfig(tiers=tiers_from([25, 25], [4, 4], [LAMBDA_1, LAMBDA_1], [0.7, 0.7]), tau_dbm=-75)
    s = derive_constants(cfg).assoc_prob
    assert s[0] == s[1]


def test_active_density_monotone_and_saturates():
    lam_u = 2 * LAMBDA_1
    grid = np.geomspace(lam_u / 100, 100 * lam_u, 40)
    vals = [derive_constants(canonical_config(ue_density=lam_u).with_tier(1, bs_density=g)).active_density[1]
            for g in grid]
    assert np.all(np.diff(vals) >= 0)
    far = derive_constants(canonical_config(tau_dbm=-200.0).with_tier(1, bs_density=1e4 * lam_u))
    assert abs(far.active_density[1] - lam_u) / lam_u <= 1e-3


@given(st.floats(-140, 0), st.floats(-140, 0))
def test_association_and_activation_decrease_in_tau(t1, t2):
    lo, hi = sorted((t1, t2))
    a, b = derive_constants(canonical_config(tau_dbm=lo)), derive_constants(canonical_config(tau_dbm=hi))
    assert np.all(b.assoc_prob <= a.assoc_prob)
    assert np.all(b.activation_prob <= a.activation_prob)


def test_config_is_immutable():
    cfg = canonical_config()
    with pytest.raises(Exception):
        cfg.alpha = 3.0
    assert cfg.with_tier(0, power_split=0.9).tiers[0].power_split == 0.9
    assert cfg.tiers[0].power_split == 0.5
