"""Connection probability of a typical UE served by tier k."""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from ..errors import ConvergenceError, DispatchError
from ..model import DerivedConstants
from ..specfun import regularized_gamma_p
from .laplace import QUAD_EPSABS, QUAD_EPSREL, build_theta, upsilon_k

CONSISTENCY_SLACK = 1e-8


def _prefactor(consts: DerivedConstants, k: int, ups: float) -> float:
    # lambda_k / (S_k Upsilon_k), written without S_k to stay finite when S_k underflows
    d = consts.delta
    covered = -math.expm1(-math.pi * consts.config.tau_mw ** (-d) * consts.xi_total)
    return consts.ue_exclusion_factor(k) / (covered * ups)


def _checked(value: float, what: str) -> float:
    if not (-CONSISTENCY_SLACK <= value <= 1.0 + CONSISTENCY_SLACK):
        raise ConvergenceError(f"{what} evaluated to {value}, outside [0, 1]")
    return value


def connection_probability_il(consts: DerivedConstants, tier: int, beta_t: float) -> float:
    """Interference-limited connection probability (N0 = 0)."""
    if not consts.config.interference_limited:
        raise DispatchError("interference-limited form requested for a noisy scenario")
    k = tier
    ups = upsilon_k(consts, k, beta_t)
    theta = build_theta(consts, k, beta_t).scaled(1.0 / (math.pi * ups))
    y = math.pi * ups * consts.serving_radius[k] ** 2
    total = 0.0
    for i, norm in enumerate(theta.column_sums()):
        if norm == 0.0 and i > 0:
            continue
        total += norm * regularized_gamma_p(i + 1, y)
    return _checked(_prefactor(consts, k, ups) * total, "connection probability")


def _z_integral(order: float, nu: float, half_alpha: float, upper: float) -> float:
    """int_0^upper y^order exp(-nu y^(alpha/2) - y) dy, truncated where negligible."""
    cut = order + 60.0 + 12.0 * math.sqrt(order + 1.0)
    hi = min(upper, cut)
    if hi <= 0.0:
        return 0.0

    def f(y):
        if y <= 0.0:
            return 0.0 if order > 0 else 1.0
        return math.exp(order * math.log(y) - nu * y**half_alpha - y)

    pts = [order] if 0.0 < order < hi else None
    val, err = integrate.quad(f, 0.0, hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL,
                              limit=200, points=pts)
    if not math.isfinite(val) or err > max(1e-8 * abs(val), 1e-13):
        raise ConvergenceError(f"quadrature failed to converge (value {val}, error {err})")
    return val


def connection_probability_general(consts: DerivedConstants, tier: int, beta_t: float) -> float:
    """Connection probability with thermal noise N0 >= 0."""
    k = tier
    n0 = consts.noise_mw
    ups = upsilon_k(consts, k, beta_t)
    theta = build_theta(consts, k, beta_t).scaled(1.0 / (math.pi * ups))
    mk = theta.dimension
    half_alpha = consts.alpha / 2.0
    nu = beta_t * n0 / (consts.power_split[k] * consts.power[k]) / (math.pi * ups) ** half_alpha
    y_max = math.pi * ups * consts.serving_radius[k] ** 2
    cols = [P[:, 0] for P in theta.powers()]
    total = 0.0
    for i, col in enumerate(cols):
        for q in range(mk):
            if q > 0 and nu == 0.0:
                break
            weight = float(np.sum(col[: mk - q]))
            if weight == 0.0:
                continue
            z = _z_integral(i + q * half_alpha, nu, half_alpha, y_max)
            total += weight * (nu**q if q else 1.0) / (math.factorial(q) * math.factorial(i)) * z
    return _checked(_prefactor(consts, k, ups) * total, "connection probability")


def connection_probability_alzer_bounds(consts: DerivedConstants, tier: int,
                                        beta_t: float) -> tuple[float, float]:
    """(lower, upper) bounds on the interference-limited connection probability."""
    if not consts.config.interference_limited:
        raise DispatchError("interference-limited bounds requested for a noisy scenario")
    k = tier
    mk = int(consts.antennas[k])
    factor = math.exp(-math.lgamma(mk + 1) / mk)

    def pb(beta):
        total = 0.0
        for m in range(1, mk + 1):
            ups = upsilon_k(consts, k, m * beta)
            y = math.pi * ups * consts.serving_radius[k] ** 2
            total += math.comb(mk, m) * (-1) ** (m + 1) * _prefactor(consts, k, ups) * -math.expm1(-y)
        return total

    return pb(beta_t), pb(factor * beta_t)
