"""Parameter sweeps and access-threshold optimization on the analytic engine."""
from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .analytic import (
    connection_probability_general,
    connection_probability_il,
    secrecy_probability,
    secrecy_throughput,
)
from .errors import ConfigError, HcnError
from .model import LAMBDA_1, NetworkConfig, Violation, derive_constants

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_TAU_BRACKET = (-120.0, -20.0)
COARSE_POINTS = 25


def golden_section_maximize(f: Callable[[float], float], lo: float, hi: float, tol: float):
    """Maximize a unimodal f on [lo, hi]; returns (x*, f(x*), trace of (x, f(x)))."""
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    trace = []

    def ev(x):
        y = f(x)
        trace.append((x, y))
        return y

    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = ev(c), ev(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = ev(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = ev(d)
    x, y = max(trace, key=lambda t: t[1])
    return x, y, trace


@dataclass(frozen=True)
class TauOptimum:
    tau_star: float
    throughput: float
    degenerate: bool
    trace: tuple[tuple[float, float], ...] = ()


def throughput_at(config: NetworkConfig, tau_dbm: float, rho: float, eps: float) -> float:
    consts = derive_constants(config.replace(tau_dbm=float(tau_dbm)))
    return secrecy_throughput(consts, rho, eps).network_throughput


def golden_section_tau(config: NetworkConfig, rho: float, eps: float,
                       bracket: tuple[float, float] = DEFAULT_TAU_BRACKET,
                       tol: float = 0.1) -> TauOptimum:
    """Access threshold (dBm) maximizing the network secrecy throughput."""
    lo, hi = bracket
    f = lambda t: throughput_at(config, t, rho, eps)
    x, y, trace = golden_section_maximize(f, lo, hi, tol)
    coarse = [(t, f(t)) for t in np.linspace(lo, hi, COARSE_POINTS)]
    best_t, best_y = max(coarse, key=lambda t: t[1])
    if best_y > y and abs(best_t - x) > tol:
        warnings.warn(f"golden-section optimum {x:.3f} dBm disagrees with the coarse-grid "
                      f"optimum {best_t:.3f} dBm; the throughput may not be unimodal",
                      RuntimeWarning)
    degenerate = all(v == 0.0 for _, v in trace) and all(v == 0.0 for _, v in coarse)
    return TauOptimum(float(x), float(y), degenerate, tuple(trace))


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

METRICS = (
    "assoc_prob", "activation_prob", "active_density",
    "connection", "connection_il", "connection_general",
    "secrecy_lower", "secrecy_upper", "secrecy_approx",
    "throughput", "min_per_user",
)

_SCALAR_PATHS = {
    "alpha": "alpha", "tau_dbm": "tau_dbm", "ue_density": "ue_density",
    "eve_density": "eve_density", "noise_dbm": "noise_dbm",
    "target_sinr_t": "target_sinr_t", "target_sinr_e": "target_sinr_e",
    "connection_constraint": "connection_constraint",
    "secrecy_constraint": "secrecy_constraint",
}
_TIER_FIELDS = {
    "power_dbm": "transmit_power_dbm", "transmit_power_dbm": "transmit_power_dbm",
    "antennas": "antennas", "density": "bs_density", "bs_density": "bs_density",
    "power_split": "power_split",
}
_TIER_RE = re.compile(r"^tiers\[(\d+)\]\.(\w+)$")


def apply_parameter(config: NetworkConfig, path: str, value: float) -> NetworkConfig:
    """Return a copy of config with the parameter at ``path`` set to value.

    Paths are top-level names (``tau_dbm``, ``ue_density_rel``, ...) or
    ``tiers[i].field`` with a 0-based tier index; ``*_rel`` densities are in
    units of the reference density LAMBDA_1.
    """
    if path in _SCALAR_PATHS:
        return config.replace(**{_SCALAR_PATHS[path]: value})
    if path in ("ue_density_rel", "eve_density_rel"):
        return config.replace(**{path[:-4]: value * LAMBDA_1})
    m = _TIER_RE.match(path)
    if m:
        k, name = int(m.group(1)), m.group(2)
        if k >= config.num_tiers:
            raise ConfigError([Violation(path, f"tier index out of range (have {config.num_tiers})")])
        if name == "density_rel":
            return config.with_tier(k, bs_density=value * LAMBDA_1)
        if name in _TIER_FIELDS:
            v = int(round(value)) if name == "antennas" else value
            return config.with_tier(k, **{_TIER_FIELDS[name]: v})
    raise ConfigError([Violation(path, "unknown parameter path")])


@dataclass(frozen=True)
class SweepSpec:
    parameter_path: str
    grid: tuple[float, ...]
    metrics: tuple[str, ...] = ("assoc_prob",)

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        object.__setattr__(self, "metrics", tuple(self.metrics))

    def violations(self) -> list[Violation]:
        out = []
        if len(self.grid) < 1:
            out.append(Violation("grid", "at least one grid point is required"))
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            out.append(Violation("grid", "must be strictly increasing"))
        for m in self.metrics:
            if m not in METRICS:
                out.append(Violation("metrics", f"unknown metric {m!r}"))
        if not self.metrics:
            out.append(Violation("metrics", "at least one metric is required"))
        return out


def metric_values(config: NetworkConfig, metric: str) -> list[float]:
    """Per-tier values of a metric (a single value for network-wide ones)."""
    consts = derive_constants(config)
    K = consts.num_tiers
    if metric == "assoc_prob":
        return [float(v) for v in consts.assoc_prob]
    if metric == "activation_prob":
        return [float(v) for v in consts.activation_prob]
    if metric == "active_density":
        return [float(v) for v in consts.active_density]
    bt, be = config.target_sinr_t, config.target_sinr_e
    if metric == "connection":
        fn = connection_probability_il if config.interference_limited else connection_probability_general
        return [fn(consts, k, bt) for k in range(K)]
    if metric == "connection_il":
        return [connection_probability_il(consts, k, bt) for k in range(K)]
    if metric == "connection_general":
        return [connection_probability_general(consts, k, bt) for k in range(K)]
    if metric.startswith("secrecy_"):
        part = metric.split("_", 1)[1]
        return [float(getattr(secrecy_probability(consts, k, be), part)) for k in range(K)]
    if metric in ("throughput", "min_per_user"):
        rep = secrecy_throughput(consts, config.connection_constraint, config.secrecy_constraint)
        return [rep.network_throughput if metric == "throughput" else rep.min_per_user]
    raise ConfigError([Violation("metrics", f"unknown metric {metric!r}")])


def metric_columns(config: NetworkConfig, metric: str) -> list[str]:
    if metric in ("throughput", "min_per_user"):
        return [metric]
    return [f"{metric}[{k}]" for k in range(config.num_tiers)]


@dataclass
class SweepTable:
    columns: list[str]
    rows: list[dict] = field(default_factory=list)

    def column(self, name: str) -> list:
        return [r.get(name) for r in self.rows]


def run_sweep(config: NetworkConfig, spec: SweepSpec) -> SweepTable:
    bad = spec.violations()
    if bad:
        raise ConfigError(bad)
    cols = [spec.parameter_path]
    for m in spec.metrics:
        cols += metric_columns(config, m)
    cols.append("error")
    table = SweepTable(cols)
    for value in spec.grid:
        row = {c: math.nan for c in cols}
        row[spec.parameter_path] = value
        row["error"] = ""
        errors = []
        try:
            point = apply_parameter(config, spec.parameter_path, value)
        except HcnError as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
            table.rows.append(row)
            continue
        for m in spec.metrics:
            try:
                for name, v in zip(metric_columns(point, m), metric_values(point, m)):
                    row[name] = float(v)
            except (HcnError, ArithmeticError, ValueError) as exc:
                errors.append(f"{m}: {type(exc).__name__}: {exc}")
        row["error"] = "; ".join(errors)
        table.rows.append(row)
    return table


def is_unimodal(values: Sequence[float], rel_tol: float = 1e-9) -> bool:
    """Non-decreasing then non-increasing, ignoring wiggles below rel_tol of the peak."""
    v = np.asarray(values, dtype=float)
    tol = rel_tol * np.max(np.abs(v)) if v.size else 0.0
    peak = int(np.argmax(v))
    rising = np.all(np.diff(v[: peak + 1]) >= -tol)
    falling = np.all(np.diff(v[peak:]) <= tol)
    return bool(rising and falling)
