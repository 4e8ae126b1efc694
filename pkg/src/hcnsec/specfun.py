"""Special functions used by the closed-form expressions.

Everything here is real-valued and pure. The kernel covers exactly what the
coverage and secrecy formulas need: the Gauss hypergeometric function on the
non-positive real axis, the principal Lambert W branch for non-negative
arguments, the normalized integral ``Omega`` (the error function), the moment
constant ``C_{alpha,m}`` and the regularized incomplete gamma function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError

SERIES_TERM_CAP = 10_000
NEWTON_STEP_CAP = 100

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class SpecfunResult:
    value: float
    converged: bool
    terms_used: int


def _lanczos_sum(x: float) -> float:
    # x is the shifted argument (Gamma(x + 1)).
    acc = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[i] / (x + i)
    return acc


def gamma(x: float) -> float:
    """Gamma function for real ``x`` (reflection below 1/2, raises at poles)."""
    if x <= 0.0 and x == math.floor(x):
        raise DomainError(f"gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    if x > 171.0:
        raise DomainError(f"gamma({x}) overflows double precision")
    x -= 1.0
    t = x + _LANCZOS_G + 0.5
    # split the power so t^(x+1/2) does not overflow before e^-t pulls it back
    half = t ** (0.5 * (x + 0.5))
    return math.sqrt(2.0 * math.pi) * (half * math.exp(-t)) * half * _lanczos_sum(x)


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if x <= 0.0:
        raise DomainError("log_gamma requires x > 0")
    if x < 0.5:
        # Gamma(x) = Gamma(x + 1) / x keeps us on the accurate side.
        return log_gamma(x + 1.0) - math.log(x)
    x -= 1.0
    t = x + _LANCZOS_G + 0.5
    return _HALF_LOG_TWO_PI + (x + 0.5) * math.log(t) - t + math.log(_lanczos_sum(x))


def rgamma(x: float) -> float:
    """1/Gamma(x), which is zero at the poles x = 0, -1, -2, ..."""
    if x <= 0.0 and x == math.floor(x):
        return 0.0
    return 1.0 / gamma(x)


# ---------------------------------------------------------------------------
# Gauss hypergeometric function
# ---------------------------------------------------------------------------

def _hyp2f1_series(a: float, b: float, c: float, z: float, tol: float = 1e-16) -> SpecfunResult:
    """Plain power series, valid for |z| < 1."""
    total = 1.0
    term = 1.0
    small_run = 0
    for n in range(SERIES_TERM_CAP):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        if term == 0.0:
            return SpecfunResult(total, True, n + 1)
        if abs(term) <= tol * abs(total):
            small_run += 1
            # Two consecutive negligible terms, and the ratio has settled below one.
            ratio = abs((a + n + 1) * (b + n + 1) / ((c + n + 1) * (n + 2.0)) * z)
            if small_run >= 2 and ratio < 1.0:
                return SpecfunResult(total, True, n + 1)
        else:
            small_run = 0
    return SpecfunResult(total, False, SERIES_TERM_CAP)


def _is_integer(x: float, tol: float = 1e-9) -> bool:
    return abs(x - round(x)) < tol


def gauss_2f1_detail(a: float, b: float, c: float, z: float) -> SpecfunResult:
    """Evaluate 2F1(a, b; c; z) for z <= 0 and report convergence details.

    On [-50, 0) the Pfaff transformation maps z to w = z/(z-1) in
    (0, 50/51]; with a, c - b, c > 0 the transformed series has positive
    terms, so it is cancellation free (the direct series alternates and
    loses digits for large a, b). Below -50 the 1/z connection formula is used and its
    two series run with |1/z| <= 0.02. When b - a is (nearly) an integer that
    formula is singular (logarithmic case) and Pfaff is used over the whole
    range instead, failing explicitly if the series cannot converge.
    """
    for name, val in (("a", a), ("b", b), ("c", c), ("z", z)):
        if not math.isfinite(val):
            raise DomainError(f"gauss_2f1: {name} must be finite, got {val}")
    if a <= 0 or b <= 0 or c <= 0:
        raise DomainError("gauss_2f1 requires a, b, c > 0")
    if c - b <= 0:
        raise DomainError(f"gauss_2f1 requires c > b (got c={c}, b={b})")
    if z > 0:
        raise DomainError(f"gauss_2f1 is only provided for z <= 0 (got {z})")
    if z == 0.0:
        return SpecfunResult(1.0, True, 1)

    if z >= -50.0 or _is_integer(b - a, 1e-3):
        w = z / (z - 1.0)
        inner = _hyp2f1_series(a, c - b, c, w)
        res = SpecfunResult((1.0 - z) ** (-a) * inner.value, inner.converged, inner.terms_used)
    else:
        res = _hyp2f1_inverse(a, b, c, z)

    if not res.converged or not math.isfinite(res.value):
        raise ConvergenceError(
            f"2F1({a}, {b}; {c}; {z}) did not converge within {SERIES_TERM_CAP} terms"
        )
    return res


def _hyp2f1_inverse(a: float, b: float, c: float, z: float) -> SpecfunResult:
    u = 1.0 / z
    gc = gamma(c)
    t1 = gc * gamma(b - a) * rgamma(b) * rgamma(c - a)
    t2 = gc * gamma(a - b) * rgamma(a) * rgamma(c - b)
    s1 = _hyp2f1_series(a, 1.0 - c + a, 1.0 - b + a, u) if t1 != 0.0 else SpecfunResult(0.0, True, 0)
    s2 = _hyp2f1_series(b, 1.0 - c + b, 1.0 - a + b, u) if t2 != 0.0 else SpecfunResult(0.0, True, 0)
    value = t1 * (-z) ** (-a) * s1.value + t2 * (-z) ** (-b) * s2.value
    return SpecfunResult(value, s1.converged and s2.converged, max(1, s1.terms_used + s2.terms_used))


def gauss_2f1(a: float, b: float, c: float, z: float) -> float:
    """2F1(a, b; c; z) for z <= 0, c > b, positive parameters."""
    return gauss_2f1_detail(a, b, c, z).value


# ---------------------------------------------------------------------------
# Lambert W, principal branch
# ---------------------------------------------------------------------------

def lambert_w0_detail(x: float) -> SpecfunResult:
    if not (x >= 0.0) or not math.isfinite(x):
        raise DomainError(f"lambert_w0 requires finite x >= 0 (got {x})")
    if x == 0.0:
        return SpecfunResult(0.0, True, 1)
    if x < math.e:
        w = math.log1p(x) * (1.0 - math.log1p(math.log1p(x)) / (2.0 + math.log1p(x)))
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    for step in range(1, NEWTON_STEP_CAP + 1):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        # Halley step
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 4e-16 * (1.0 + abs(w)):
            return SpecfunResult(w, True, step)
    raise ConvergenceError(f"lambert_w0({x}) did not converge in {NEWTON_STEP_CAP} steps")


def lambert_w0(x: float) -> float:
    """Principal branch W0 of the Lambert function, x >= 0."""
    return lambert_w0_detail(x).value


# ---------------------------------------------------------------------------
# Incomplete gamma and Omega
# ---------------------------------------------------------------------------

def _gamma_p_series(a: float, x: float) -> SpecfunResult:
    total = term = 1.0 / a
    ap = a
    for n in range(1, SERIES_TERM_CAP + 1):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-17:
            return SpecfunResult(total, True, n)
    return SpecfunResult(total, False, SERIES_TERM_CAP)


def _gamma_q_cf(a: float, x: float) -> SpecfunResult:
    """Continued fraction for Gamma(a, x) e^x x^-a (modified Lentz)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, SERIES_TERM_CAP + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return SpecfunResult(h, True, i)
    return SpecfunResult(h, False, SERIES_TERM_CAP)


def _check_gamma_args(a: float, x: float) -> None:
    if not (a > 0.0) or not math.isfinite(a):
        raise DomainError(f"incomplete gamma requires a > 0 (got {a})")
    if not (x >= 0.0):
        raise DomainError(f"incomplete gamma requires x >= 0 (got {x})")


def regularized_gamma_p(a: float, x: float) -> float:
    """Lower regularized incomplete gamma P(a, x)."""
    _check_gamma_args(a, x)
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    log_pref = a * math.log(x) - x - log_gamma(a)
    if x < a + 1.0:
        s = _gamma_p_series(a, x)
        if not s.converged:
            raise ConvergenceError(f"P({a}, {x}) series did not converge")
        return min(1.0, math.exp(log_pref) * s.value)
    cf = _gamma_q_cf(a, x)
    if not cf.converged:
        raise ConvergenceError(f"Q({a}, {x}) continued fraction did not converge")
    return max(0.0, 1.0 - math.exp(log_pref) * cf.value)


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(a, x) = 1 - P(a, x), without cancellation."""
    _check_gamma_args(a, x)
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return 1.0 - regularized_gamma_p(a, x)
    cf = _gamma_q_cf(a, x)
    if not cf.converged:
        raise ConvergenceError(f"Q({a}, {x}) continued fraction did not converge")
    return math.exp(a * math.log(x) - x - log_gamma(a)) * cf.value


def omega(x: float) -> float:
    """(1/sqrt(pi)) * integral_0^{x^2} e^-t / sqrt(t) dt, i.e. erf(x) for x >= 0."""
    if not (x >= 0.0):
        raise DomainError(f"omega requires x >= 0 (got {x})")
    return regularized_gamma_p(0.5, x * x)


def omega_tail_scaled(x: float) -> float:
    """exp(x^2) * (1 - omega(x)), evaluated without overflow or cancellation."""
    if not (x >= 0.0):
        raise DomainError(f"omega_tail_scaled requires x >= 0 (got {x})")
    x2 = x * x
    if x2 < 1.5:
        return math.exp(x2) * (1.0 - regularized_gamma_p(0.5, x2))
    cf = _gamma_q_cf(0.5, x2)
    if not cf.converged:
        raise ConvergenceError(f"omega tail at {x} did not converge")
    # Q(1/2, x^2) e^{x^2} = x * cf / Gamma(1/2)
    return x * cf.value / math.sqrt(math.pi)


def c_alpha_m(alpha: float, m: int) -> float:
    """Gamma(m - 1 + 2/alpha) Gamma(1 - 2/alpha) / Gamma(m - 1)."""
    if not alpha > 2.0:
        raise DomainError(f"c_alpha_m requires alpha > 2 (got {alpha})")
    if int(m) != m or m < 2:
        raise DomainError(f"c_alpha_m requires integer m >= 2 (got {m})")
    delta = 2.0 / alpha
    if m > 100:
        return math.exp(log_gamma(m - 1 + delta) - log_gamma(m - 1.0)) * gamma(1.0 - delta)
    return gamma(m - 1 + delta) * gamma(1.0 - delta) / gamma(m - 1.0)
