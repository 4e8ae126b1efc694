"""Bounds on the secrecy probability of a tier-k link against a PPP of Eves."""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from ..errors import ConvergenceError, DegenerateScenarioError, DispatchError
from ..model import DerivedConstants
from ..specfun import omega_tail_scaled
from .laplace import QUAD_EPSABS, QUAD_EPSREL

# High-secrecy regime convention for the first-order approximation.
APPROX_REGIME = 0.9
# exp(-40) ~ 4e-18: the integrands below peak at x = 0, so this is far below 1e-16 of the peak.
TAIL_CUTOFF = 40.0


@dataclass(frozen=True)
class SecrecyBounds:
    lower: float
    upper: float
    approx: float

    @property
    def approx_valid(self) -> bool:
        """True when the first-order approximation sits in its high-secrecy regime."""
        return self.approx >= APPROX_REGIME


def _an_penalty(consts: DerivedConstants, k: int, beta_e: float) -> float:
    """(1 + xi_k beta_e)^(1 - M_k): the serving BS's own artificial noise at an Eve."""
    mk = int(consts.antennas[k])
    xi = consts.xi_k[k]
    if mk <= 1 or xi == 0.0:
        return 1.0
    return math.exp((1 - mk) * math.log1p(xi * beta_e))


def _no_eves(consts: DerivedConstants) -> bool:
    return consts.config.eve_density == 0.0


def laplace_integral(a: float, alpha: float, b: float) -> float:
    """int_0^inf exp(-a x^(alpha/2) - b x) dx for a, b >= 0 (not both zero)."""
    if a < 0 or b < 0 or (a == 0 and b == 0):
        raise DegenerateScenarioError("integral diverges without noise or artificial noise")
    half = alpha / 2.0
    if a == 0.0:
        return 1.0 / b
    if b == 0.0:
        return math.gamma(1.0 + 1.0 / half) * a ** (-1.0 / half)
    # rescale so the faster of the two decays has unit rate
    scale = min(1.0 / b, a ** (-1.0 / half))
    a_s, b_s = a * scale**half, b * scale
    f = lambda y: math.exp(-a_s * y**half - b_s * y)
    val, err = integrate.quad(f, 0.0, TAIL_CUTOFF, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
    if not math.isfinite(val) or err > 1e-8 * abs(val):
        raise ConvergenceError(f"quadrature failed to converge (value {val}, error {err})")
    return val * scale


def secrecy_probability_general(consts: DerivedConstants, tier: int, beta_e: float) -> SecrecyBounds:
    if _no_eves(consts):
        return SecrecyBounds(1.0, 1.0, 1.0)
    k = tier
    lam_e = consts.config.eve_density
    psi = float(consts.psi_k[k])
    noise_rate = beta_e * consts.noise_mw / (consts.power_split[k] * consts.power[k])
    an_rate = math.pi * psi * beta_e ** consts.delta
    pen = _an_penalty(consts, k, beta_e)
    i_low = laplace_integral(noise_rate, consts.alpha, an_rate)
    i_up = laplace_integral(noise_rate, consts.alpha, an_rate + math.pi * lam_e)
    x = math.pi * lam_e * pen
    return SecrecyBounds(math.exp(-x * i_low), 1.0 - x * i_up, 1.0 - x * i_low)


def secrecy_probability_alpha4(consts: DerivedConstants, tier: int, beta_e: float) -> SecrecyBounds:
    if consts.alpha != 4.0:
        raise DispatchError(f"closed form needs alpha = 4 (got {consts.alpha})")
    if consts.noise_mw <= 0.0:
        raise DispatchError("closed form needs a positive noise power; use the interference-limited form")
    if _no_eves(consts):
        return SecrecyBounds(1.0, 1.0, 1.0)
    k = tier
    lam_e = consts.config.eve_density
    psi = float(consts.psi_k[k])
    gamma = 4.0 * beta_e * consts.noise_mw / (math.pi**2 * consts.power_split[k] * consts.power[k])
    root = math.sqrt(gamma)
    pen = _an_penalty(consts, k, beta_e)
    scale = math.sqrt(math.pi) * lam_e / root * pen
    sb = psi * math.sqrt(beta_e)
    low_term = scale * omega_tail_scaled(sb / root)
    up_term = scale * omega_tail_scaled((lam_e + sb) / root)
    return SecrecyBounds(math.exp(-low_term), 1.0 - up_term, 1.0 - low_term)


def secrecy_probability_il(consts: DerivedConstants, tier: int, beta_e: float) -> SecrecyBounds:
    if not consts.config.interference_limited:
        raise DispatchError("interference-limited form requested for a noisy scenario")
    if _no_eves(consts):
        return SecrecyBounds(1.0, 1.0, 1.0)
    k = tier
    lam_e = consts.config.eve_density
    psi = float(consts.psi_k[k])
    if psi <= 0.0:
        raise DegenerateScenarioError(
            "no artificial noise reaches the Eves (psi_k = 0); the secrecy bound is degenerate")
    sb = psi * beta_e ** consts.delta
    pen = _an_penalty(consts, k, beta_e)
    x = lam_e / sb * pen
    return SecrecyBounds(math.exp(-x), 1.0 - lam_e / (lam_e + sb) * pen, 1.0 - x)


def secrecy_probability(consts: DerivedConstants, tier: int, beta_e: float) -> SecrecyBounds:
    """Dispatch to the interference-limited, alpha = 4 or general form."""
    if consts.config.interference_limited:
        return secrecy_probability_il(consts, tier, beta_e)
    if consts.alpha == 4.0:
        return secrecy_probability_alpha4(consts, tier, beta_e)
    return secrecy_probability_general(consts, tier, beta_e)
