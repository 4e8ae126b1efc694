"""Rate roots under reliability/secrecy constraints and the secrecy throughput."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from ..errors import BracketError, DegenerateScenarioError, DispatchError, DomainError
from ..model import DerivedConstants
from ..specfun import lambert_w0
from .connection import connection_probability_il
from .secrecy import secrecy_probability_il

BETA_BRACKET = (1e-6, 1e6)
MAX_BISECTIONS = 200
BETA_T_TOL = 1e-10
BETA_E_TOL = 1e-11
LOG_BETA_TOL = 1e-12
# Upper end the transmission-threshold search may grow to when the default
# bracket cannot reach the target (sparse activity pushes P_c towards 1).
BETA_T_EXPANSION_LIMIT = 1e100

METHODS = ("bisection", "cardano", "lambert")


def _bisect_log(f: Callable[[float], float], target: float, lo: float, hi: float,
                increasing: bool, tol: float) -> float:
    """Root of f(beta) = target for monotone f, bisected in log(beta)."""
    a, b = math.log(lo), math.log(hi)
    mid = 0.5 * (a + b)
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (a + b)
        val = f(math.exp(mid))
        if val == target:
            break
        if (val < target) == increasing:
            a = mid
        else:
            b = mid
        # a flat curve can meet tol in value long before beta is pinned down
        if b - a < LOG_BETA_TOL and abs(val - target) <= tol:
            break
    return math.exp(mid)


def solve_beta_t(consts: DerivedConstants, tier: int, rho: float,
                 bracket: tuple[float, float] = BETA_BRACKET) -> float:
    """Largest SINR threshold meeting connection probability rho (bisection)."""
    if not 0.0 < rho < 1.0:
        raise DomainError(f"connection constraint must lie in (0, 1), got {rho}")
    f = lambda b: connection_probability_il(consts, tier, b)
    lo, hi = bracket
    p_lo, p_hi = f(lo), f(hi)
    if not (p_lo >= rho >= p_hi):
        raise BracketError(
            f"connection constraint {rho} not attainable on beta in [{lo:g}, {hi:g}]; "
            f"attainable interval is [{p_hi:.12g}, {p_lo:.12g}]")
    return _bisect_log(f, rho, lo, hi, increasing=False, tol=BETA_T_TOL)


def secrecy_approx_il(consts: DerivedConstants, tier: int, beta_e: float) -> float:
    return secrecy_probability_il(consts, tier, beta_e).approx


def _require_psi(consts: DerivedConstants, k: int) -> float:
    psi = float(consts.psi_k[k])
    if psi <= 0.0:
        raise DegenerateScenarioError("psi_k = 0: no artificial noise in the network")
    return psi


def cardano_beta_e(consts: DerivedConstants, tier: int, eps: float) -> float:
    k = tier
    if consts.alpha != 4.0 or int(consts.antennas[k]) != 2:
        raise DispatchError("the cubic closed form needs alpha = 4 and M_k = 2")
    xi = consts.xi_k[k]
    if xi <= 0.0:
        raise DispatchError("the cubic closed form needs artificial noise (power_split < 1)")
    psi = _require_psi(consts, k)
    lam_e = consts.config.eve_density
    half_q = math.sqrt(xi) * lam_e / (2.0 * (1.0 - eps) * psi)
    u = half_q + math.sqrt(half_q**2 + 1.0 / 27.0)
    cu = u ** (1.0 / 3.0)
    return ((3.0 * cu * cu - 1.0) / (3.0 * math.sqrt(xi) * cu)) ** 2


def lambert_beta_e(consts: DerivedConstants, tier: int, eps: float) -> float:
    k = tier
    phi = consts.power_split[k]
    if phi >= 1.0:
        raise DispatchError("the large-antenna closed form needs artificial noise (power_split < 1)")
    psi = _require_psi(consts, k)
    lam_e = consts.config.eve_density
    alpha = consts.alpha
    ratio = (1.0 - phi) / phi
    theta = alpha / 2.0 * ratio * (psi * (1.0 - eps) / lam_e) ** (-alpha / 2.0)
    return consts.delta / ratio * math.log(theta / lambert_w0(theta))


def large_antenna_secrecy(consts: DerivedConstants, tier: int, beta_e: float) -> float:
    """M_k -> infinity limit of the first-order secrecy approximation."""
    k = tier
    phi = consts.power_split[k]
    lam_e = consts.config.eve_density
    return 1.0 - lam_e / (consts.psi_k[k] * beta_e**consts.delta) * math.exp(-(1.0 - phi) / phi * beta_e)


def solve_beta_e(consts: DerivedConstants, tier: int, eps: float, method: str = "bisection") -> float:
    """Smallest Eve SINR threshold meeting secrecy probability eps."""
    if not 0.0 < eps < 1.0:
        raise DomainError(f"secrecy constraint must lie in (0, 1), got {eps}")
    if method == "cardano":
        return cardano_beta_e(consts, tier, eps)
    if method == "lambert":
        return lambert_beta_e(consts, tier, eps)
    if method != "bisection":
        raise DispatchError(f"unknown method {method!r}; choose from {METHODS}")
    if consts.config.eve_density == 0.0:
        return BETA_BRACKET[0]
    _require_psi(consts, tier)
    f = lambda b: secrecy_approx_il(consts, tier, b)
    lo, hi = BETA_BRACKET
    p_lo, p_hi = f(lo), f(hi)
    if p_lo >= eps:
        return lo
    if p_hi < eps:
        raise BracketError(
            f"secrecy constraint {eps} not attainable on beta in [{lo:g}, {hi:g}]; "
            f"attainable interval is [{p_lo:.12g}, {p_hi:.12g}]")
    return _bisect_log(f, eps, lo, hi, increasing=True, tol=BETA_E_TOL)


@dataclass(frozen=True)
class TierRates:
    beta_t: float
    beta_e: float
    rate_t: float
    rate_e: float
    rate_s: float


@dataclass(frozen=True)
class ThroughputReport:
    per_tier_rates: tuple[TierRates, ...]
    network_throughput: float
    per_user: tuple[float, ...]
    min_per_user: float
    tier_throughput: tuple[float, ...] = ()


def _solve_beta_t_expanding(consts: DerivedConstants, k: int, rho: float) -> float:
    lo, hi = BETA_BRACKET
    while True:
        try:
            return solve_beta_t(consts, k, rho, (lo, hi))
        except BracketError:
            if hi >= BETA_T_EXPANSION_LIMIT or connection_probability_il(consts, k, lo) < rho:
                raise
            hi *= 100.0


def secrecy_throughput(consts: DerivedConstants, rho: float, eps: float) -> ThroughputReport:
    """Network secrecy throughput (bits/s/Hz/m^2) and its per-user split."""
    rates, tier_t, per_user = [], [], []
    lam_u = consts.config.ue_density
    for k in range(consts.num_tiers):
        bt = _solve_beta_t_expanding(consts, k, rho)
        be = solve_beta_e(consts, k, eps, "bisection")
        rt, re = math.log2(1.0 + bt), math.log2(1.0 + be)
        rs = max(rt - re, 0.0)
        rates.append(TierRates(bt, be, rt, re, rs))
        # per-BS throughput A_k rho R_s, shared among N_k = (lambda_u / lambda_k) S_k users
        t_k = consts.activation_prob[k] * rho * rs
        n_k = lam_u / consts.density[k] * consts.assoc_prob[k]
        tier_t.append(float(consts.density[k] * t_k))
        per_user.append(float(t_k / n_k) if n_k > 0 else 0.0)
    total = float(sum(tier_t))
    return ThroughputReport(tuple(rates), total, tuple(per_user), min(per_user), tuple(tier_t))
