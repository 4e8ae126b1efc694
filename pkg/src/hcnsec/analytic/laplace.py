"""Laplace-transform machinery of the aggregate interference at a typical UE.

The interference mark of an active tier-j BS, normalized by phi_j P_j, is
X = U + xi_j V with U ~ Exp(1) and V ~ Gamma(M_j - 1, 1). Its Laplace
transform is a finite mixture of scaled-gamma transforms

    E[exp(-t X)] = sum_c coef_c * (1 + theta_c t)^(-p_c),

and every closed form below (the exponent Upsilon_k and the Toeplitz entries
g_i) is linear in the mixture components. When xi_j is close to (but not
equal to) one, the partial-fraction coefficients blow up like
(1 - xi_j)^-(M_j - 1); the tier contribution is then evaluated by quadrature
of the defining integrals instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from ..errors import ConvergenceError
from ..model import DerivedConstants
from ..specfun import c_alpha_m, gauss_2f1

XI_ONE_TOL = 1e-6
# Largest partial-fraction coefficient tolerated before switching to quadrature.
COEF_LIMIT = 1e6
QUAD_EPSREL = 1e-10
QUAD_EPSABS = 1e-14


@dataclass(frozen=True)
class MarkComponent:
    coef: float
    theta: float
    power: int


def mark_components(xi: float, antennas: int) -> Optional[list[MarkComponent]]:
    """Partial fractions of 1/((1+t)(1+xi t)^(M-1)); None if ill-conditioned."""
    m = int(antennas)
    if m <= 1 or xi == 0.0:
        return [MarkComponent(1.0, 1.0, 1)]
    if abs(1.0 - xi) < XI_ONE_TOL:
        return [MarkComponent(1.0, 1.0, m)]
    one_minus = 1.0 - xi
    comps = [MarkComponent(one_minus ** (1 - m), 1.0, 1)]
    for n in range(m - 1):
        comps.append(MarkComponent(-xi * one_minus ** (1 - m + n), xi, n + 1))
    if max(abs(c.coef) for c in comps) > COEF_LIMIT:
        return None
    return comps


def mark_laplace(t, xi: float, antennas: int):
    """E[exp(-t X)] evaluated directly (no partial fractions)."""
    t = np.asarray(t, dtype=float)
    return np.exp(-np.log1p(t) - (antennas - 1) * np.log1p(xi * t))


def mark_derivative_term(t: float, n: int, xi: float, antennas: int) -> float:
    """t^n/n! E[X^n exp(-t X)] via Leibniz; every summand is non-negative."""
    m1 = antennas - 1
    total = 0.0
    for l in range(n + 1):
        first = (t / (1.0 + t)) ** l / (1.0 + t)
        r = n - l
        if m1 == 0 or xi == 0.0:
            second = 1.0 if r == 0 else 0.0
        else:
            u = xi * t
            # (m1)_r / r! * u^r (1+u)^-(m1+r)
            second = math.exp(math.lgamma(m1 + r) - math.lgamma(m1) - math.lgamma(r + 1)
                              + r * math.log(u) - (m1 + r) * math.log1p(u)) if u > 0 else (
                1.0 if r == 0 else 0.0)
        total += first * second
    return total


# ---------------------------------------------------------------------------
# Per-tier building blocks
# ---------------------------------------------------------------------------

def _tier_ratios(consts: DerivedConstants, k: int, j: int, beta: float):
    """c_j = (P_jk M_jk)^delta and b_j = phi_jk beta / M_jk."""
    d = consts.delta
    P, M, phi = consts.power, consts.antennas, consts.power_split
    c = (P[j] * M[j] / (P[k] * M[k])) ** d
    b = phi[j] / phi[k] * beta * M[k] / M[j]
    return c, b


def _upsilon_bracket_closed(comps, delta: float, alpha: float, b: float) -> float:
    """sum_c coef [(theta b)^delta C_{p+1} + delta (theta b)^-p 2F1(...)/(p+delta)]."""
    total = 0.0
    for comp in comps:
        tb = comp.theta * b
        p = comp.power
        whole_plane = tb**delta * c_alpha_m(alpha, p + 1)
        inside = (delta * tb ** (-p) / (p + delta)
                  * gauss_2f1(p, p + delta, p + delta + 1.0, -1.0 / tb))
        total += comp.coef * (whole_plane + inside)
    return total


def _quad(f, lo, hi, **kw):
    val, err = integrate.quad(f, lo, hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200, **kw)
    if not math.isfinite(val) or err > max(1e-8 * abs(val), 1e-12):
        raise ConvergenceError(f"quadrature failed to converge (value {val}, error {err})")
    return val


def _upsilon_bracket_quad(xi: float, antennas: int, delta: float, b: float) -> float:
    def tail(t):
        # 1 - E[exp(-tX)] without cancellation for small t
        return -math.expm1(-math.log1p(t) - (antennas - 1) * math.log1p(xi * t)) * t ** (-delta - 1.0)

    # delta * int_0^inf (1 - L(t)) t^(-delta-1) dt = Gamma(1-delta) E[X^delta]
    whole = delta * (_quad(tail, 0.0, 1.0) + _quad(tail, 1.0, math.inf))
    inside = _quad(lambda w: float(mark_laplace(b * w ** (-1.0 / delta), xi, antennas)) if w > 0 else 0.0,
                   0.0, 1.0)
    return b**delta * whole + inside


def _g_bracket_closed(comps, delta: float, b: float, i: int) -> float:
    total = 0.0
    for comp in comps:
        tb = comp.theta * b
        p = comp.power
        total += (comp.coef * math.comb(p + i - 1, i) * tb**i
                  * gauss_2f1(p + i, i - delta, i - delta + 1.0, -tb))
    return delta / (i - delta) * total


def _g_bracket_quad(xi: float, antennas: int, delta: float, b: float, i: int) -> float:
    f = lambda v: mark_derivative_term(b * v, i, xi, antennas) * v ** (-delta - 1.0) if v > 0 else 0.0
    return delta * _quad(f, 0.0, 1.0)


def upsilon_k(consts: DerivedConstants, tier: int, beta_t: float) -> float:
    """Exponent Upsilon_k of the conditional void/Laplace term exp(-pi Upsilon_k R_k^2)."""
    k = tier
    d, alpha = consts.delta, consts.alpha
    total = 0.0
    for j in range(consts.num_tiers):
        c, b = _tier_ratios(consts, k, j, beta_t)
        A = consts.activation_prob[j]
        lam = consts.density[j]
        if A == 0.0:
            total += lam * c
            continue
        xi, m = consts.xi_k[j], int(consts.antennas[j])
        comps = mark_components(xi, m)
        if comps is None:
            bracket = _upsilon_bracket_quad(xi, m, d, b)
        else:
            bracket = _upsilon_bracket_closed(comps, d, alpha, b)
        total += lam * c * (1.0 - A + A * bracket)
    return total


def g_entries(consts: DerivedConstants, tier: int, beta_t: float) -> np.ndarray:
    """g_1 .. g_{M_k - 1} of the Toeplitz matrix (units 1/m^2)."""
    k = tier
    d = consts.delta
    mk = int(consts.antennas[k])
    g = np.zeros(max(mk - 1, 0))
    for idx in range(mk - 1):
        i = idx + 1
        acc = 0.0
        for j in range(consts.num_tiers):
            A = consts.activation_prob[j]
            if A == 0.0:
                continue
            c, b = _tier_ratios(consts, k, j, beta_t)
            xi, m = consts.xi_k[j], int(consts.antennas[j])
            comps = mark_components(xi, m)
            if comps is None:
                br = _g_bracket_quad(xi, m, d, b, i)
            else:
                br = _g_bracket_closed(comps, d, b, i)
            acc += A * consts.density[j] * c * br
        g[idx] = math.pi * acc
    return g


@dataclass
class ToeplitzTheta:
    """Strictly lower-triangular Toeplitz matrix with first column (0, g_1, ..., g_{M-1})."""

    dimension: int
    first_column: np.ndarray
    powers_cache: Optional[list[np.ndarray]] = field(default=None, repr=False)

    def matrix(self) -> np.ndarray:
        n = self.dimension
        out = np.zeros((n, n))
        for p in range(1, n):
            out[p, :p] = self.first_column[p - 1::-1][:p]
        return out

    def scaled(self, factor: float) -> "ToeplitzTheta":
        return ToeplitzTheta(self.dimension, self.first_column * factor)

    def powers(self) -> list[np.ndarray]:
        """Theta^0 .. Theta^{M-1}; cached after the first call."""
        if self.powers_cache is None:
            base = self.matrix()
            out = [np.eye(self.dimension)]
            for _ in range(1, self.dimension):
                out.append(out[-1] @ base)
            self.powers_cache = out
        return self.powers_cache

    def power(self, i: int) -> np.ndarray:
        if i < self.dimension:
            return self.powers()[i]
        return np.linalg.matrix_power(self.matrix(), i)

    def column_sums(self) -> np.ndarray:
        """||Theta^i||_1 for i = 0..M-1 (first column carries the maximum)."""
        return np.array([np.abs(P).sum(axis=0).max() for P in self.powers()])


def build_theta(consts: DerivedConstants, tier: int, beta_t: float) -> ToeplitzTheta:
    mk = int(consts.antennas[tier])
    return ToeplitzTheta(mk, g_entries(consts, tier, beta_t))
