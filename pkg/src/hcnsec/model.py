"""Scenario configuration and the per-tier constants every formula shares.

Units: powers and the access threshold are given in dBm at the boundary and
held in linear milliwatts internally; distances are in metres and densities
in points per square metre.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .specfun import c_alpha_m

# Reference density: one tier-1 BS per disk of radius 400 m.
LAMBDA_1 = 1.0 / (math.pi * 400.0**2)

INTERFERENCE_LIMITED = "interference-limited"


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    return 10.0 * math.log10(mw)


@dataclass(frozen=True)
class TierParams:
    transmit_power_dbm: float
    antennas: int
    bs_density: float
    power_split: float = 1.0

    @property
    def power_mw(self) -> float:
        return dbm_to_mw(self.transmit_power_dbm)


@dataclass(frozen=True)
class NetworkConfig:
    """A complete K-tier scenario.

    ``noise_dbm=None`` selects the interference-limited model (N0 = 0), which
    is dispatched to separate closed forms rather than approximated by a tiny
    noise power.
    """

    tiers: tuple[TierParams, ...]
    alpha: float = 4.0
    tau_dbm: float = -90.0
    ue_density: float = 2.0 * LAMBDA_1
    eve_density: float = 0.05 * LAMBDA_1
    noise_dbm: Optional[float] = None
    target_sinr_t: float = 5.0
    target_sinr_e: float = 1.0
    connection_constraint: float = 0.95
    secrecy_constraint: float = 0.95

    def __post_init__(self):
        object.__setattr__(self, "tiers", tuple(self.tiers))

    @property
    def interference_limited(self) -> bool:
        return self.noise_dbm is None

    @property
    def noise_mw(self) -> float:
        return 0.0 if self.noise_dbm is None else dbm_to_mw(self.noise_dbm)

    @property
    def tau_mw(self) -> float:
        return dbm_to_mw(self.tau_dbm)

    @property
    def num_tiers(self) -> int:
        return len(self.tiers)

    def with_tier(self, index: int, **changes) -> "NetworkConfig":
        tiers = list(self.tiers)
        tiers[index] = replace(tiers[index], **changes)
        return replace(self, tiers=tuple(tiers))

    def replace(self, **changes) -> "NetworkConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class Violation:
    field: str
    rule: str

    def __str__(self):
        return f"{self.field}: {self.rule}"


def _finite(x) -> bool:
    try:
        return math.isfinite(x)
    except TypeError:
        return False


def validate(config: NetworkConfig) -> list[Violation]:
    """Return every broken invariant; an empty list means the config is valid."""
    out: list[Violation] = []
    if len(config.tiers) < 1:
        out.append(Violation("tiers", "at least one tier is required"))
    if not (_finite(config.alpha) and config.alpha > 2.0):
        out.append(Violation("alpha", "path-loss exponent must be finite and > 2"))
    if not _finite(config.tau_dbm):
        out.append(Violation("tau_dbm", "access threshold must be finite"))
    if not (_finite(config.ue_density) and config.ue_density > 0):
        out.append(Violation("ue_density", "must be finite and > 0"))
    if not (_finite(config.eve_density) and config.eve_density >= 0):
        out.append(Violation("eve_density", "must be finite and >= 0"))
    if config.noise_dbm is not None and not _finite(config.noise_dbm):
        out.append(Violation("noise_dbm", "must be finite or interference-limited"))
    for name in ("target_sinr_t", "target_sinr_e"):
        v = getattr(config, name)
        if not (_finite(v) and v > 0):
            out.append(Violation(name, "must be finite and > 0"))
    for name in ("connection_constraint", "secrecy_constraint"):
        v = getattr(config, name)
        if not (_finite(v) and 0.0 < v < 1.0):
            out.append(Violation(name, "must lie in (0, 1)"))
    for k, t in enumerate(config.tiers):
        where = f"tiers[{k}]"
        if not _finite(t.transmit_power_dbm):
            out.append(Violation(f"{where}.transmit_power_dbm", "must be finite"))
        if int(t.antennas) != t.antennas or t.antennas < 1:
            out.append(Violation(f"{where}.antennas", "must be an integer >= 1"))
        if not (_finite(t.bs_density) and t.bs_density > 0):
            out.append(Violation(f"{where}.bs_density", "must be finite and > 0"))
        if not (_finite(t.power_split) and 0.0 < t.power_split <= 1.0):
            out.append(Violation(f"{where}.power_split", "must lie in (0, 1]"))
        elif t.power_split < 1.0 and t.antennas < 2:
            out.append(Violation(
                f"{where}.power_split",
                "artificial noise (power_split < 1) needs antennas >= 2",
            ))
    return out


def check(config: NetworkConfig) -> NetworkConfig:
    violations = validate(config)
    if violations:
        raise ConfigError(violations)
    return config


@dataclass(frozen=True)
class DerivedConstants:
    """Per-tier derived quantities (arrays are indexed by tier, 0-based)."""

    config: NetworkConfig
    delta: float
    xi_total: float
    power: np.ndarray            # P_k, mW
    antennas: np.ndarray         # M_k
    density: np.ndarray          # lambda_k
    power_split: np.ndarray      # phi_k
    serving_radius: np.ndarray   # D_k, m
    xi_k: np.ndarray
    assoc_prob: np.ndarray
    activation_prob: np.ndarray
    active_density: np.ndarray
    psi_k: np.ndarray
    cell_load: np.ndarray
    gamma_k: Optional[np.ndarray] = field(default=None)

    @property
    def num_tiers(self) -> int:
        return len(self.power)

    @property
    def alpha(self) -> float:
        return self.config.alpha

    @property
    def noise_mw(self) -> float:
        return self.config.noise_mw

    def ue_exclusion_factor(self, k: int) -> float:
        """Xi / (P_k M_k)^delta, the void-probability exponent per unit area."""
        return self.xi_total / (self.power[k] * self.antennas[k]) ** self.delta


def an_coefficient(phi: float, antennas: int) -> float:
    """xi = (1/phi - 1)/(M - 1); zero when there is no artificial noise."""
    if antennas <= 1 or phi >= 1.0:
        return 0.0
    if abs(phi - 1.0 / antennas) < 1e-12:
        return 1.0
    return (1.0 / phi - 1.0) / (antennas - 1)


def derive_constants(config: NetworkConfig) -> DerivedConstants:
    if not (config.alpha > 2.0):
        raise DomainError(f"path-loss exponent must exceed 2 (got {config.alpha})")
    check(config)
    tau = config.tau_mw
    if not tau > 0:
        raise DomainError("access threshold must be positive in linear units")
    delta = 2.0 / config.alpha
    P = np.array([t.power_mw for t in config.tiers])
    M = np.array([int(t.antennas) for t in config.tiers])
    lam = np.array([t.bs_density for t in config.tiers], dtype=float)
    phi = np.array([t.power_split for t in config.tiers], dtype=float)

    weight = (P * M) ** delta
    xi_total = float(np.sum(lam * weight))
    D = (P * M / tau) ** (1.0 / config.alpha)

    # 1 - exp(-pi tau^-delta Xi), kept accurate when the exponent is tiny.
    covered = -math.expm1(-math.pi * tau ** (-delta) * xi_total)
    S = lam * weight / xi_total * covered
    load = config.ue_density / lam * S
    A = -np.expm1(-load)
    xi = np.array([an_coefficient(phi[k], M[k]) for k in range(len(P))])

    psi = np.zeros(len(P))
    for k in range(len(P)):
        acc = 0.0
        for j in range(len(P)):
            if xi[j] == 0.0:
                continue
            acc += (A[j] * lam[j] * c_alpha_m(config.alpha, int(M[j]))
                    * (xi[j] * phi[j] * P[j] / (phi[k] * P[k])) ** delta)
        psi[k] = acc

    gamma_k = None
    if config.alpha == 4.0 and not config.interference_limited:
        gamma_k = 4.0 * config.target_sinr_e * config.noise_mw / (math.pi**2 * phi * P)

    return DerivedConstants(
        config=config, delta=delta, xi_total=xi_total, power=P, antennas=M,
        density=lam, power_split=phi, serving_radius=D, xi_k=xi,
        assoc_prob=S, activation_prob=A, active_density=A * lam, psi_k=psi,
        cell_load=load, gamma_k=gamma_k,
    )


def canonical_config(**overrides) -> NetworkConfig:
    """Two-tier scenario of the secrecy-vs-P1 study (alpha = 4).

    P = {30, 20} dBm, M = {6, 4}, lambda_1 = 1/(pi 400^2), {lambda_2, lambda_u,
    lambda_e} = {2, 2, 0.05} lambda_1, phi = {0.5, 0.5}, tau = -70 dBm,
    interference limited.
    """
    base = NetworkConfig(
        tiers=(
            TierParams(30.0, 6, LAMBDA_1, 0.5),
            TierParams(20.0, 4, 2.0 * LAMBDA_1, 0.5),
        ),
        alpha=4.0,
        tau_dbm=-70.0,
        ue_density=2.0 * LAMBDA_1,
        eve_density=0.05 * LAMBDA_1,
        noise_dbm=None,
        target_sinr_t=5.0,
        target_sinr_e=1.0,
        connection_constraint=0.95,
        secrecy_constraint=0.95,
    )
    return replace(base, **overrides)


def tiers_from(powers_dbm: Sequence[float], antennas: Sequence[int],
               densities: Sequence[float], splits: Sequence[float]) -> tuple[TierParams, ...]:
    return tuple(TierParams(float(p), int(m), float(l), float(s))
                 for p, m, l, s in zip(powers_dbm, antennas, densities, splits))
