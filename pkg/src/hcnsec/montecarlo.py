"""Poisson-point-process network simulator.

Every process lives on a disk of radius ``window_radius`` centred on the
typical UE at the origin. Each simulation attempt uses its own counter-based
Philox stream keyed by (seed, attempt index), so results depend only on
(config, trials, seed) and never on how attempts are split across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConditioningError, ConfigError, SimulationError
from .model import NetworkConfig, Violation, an_coefficient, check

DEFAULT_WINDOW = 5000.0
MAX_EXPECTED_POINTS = 1e7
# Rejection sampling gives up after this many attempts per requested trial.
ATTEMPTS_PER_TRIAL = 100
MIN_TRIALS = 100
BATCH = 2000


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    trials: int
    ci95: tuple[float, float]

    @classmethod
    def from_samples(cls, values) -> "Estimate":
        x = np.asarray(values, dtype=float)
        n = x.size
        if n < 1:
            raise SimulationError("an estimate needs at least one trial")
        mean = float(x.mean())
        se = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(mean, se, n, (mean - 1.96 * se, mean + 1.96 * se))

    def z_score(self, value: float) -> float:
        # a zero-variance estimate still carries 1/trials of resolution
        se = max(self.std_error, 1.0 / self.trials)
        return (self.mean - value) / se


@dataclass
class Realization:
    bs_points: list[np.ndarray]
    ue_points: np.ndarray
    eve_points: np.ndarray
    association: tuple[np.ndarray, np.ndarray]   # (tier, bs index) per UE, -1 if none
    active_flags: list[np.ndarray]
    typical_association: tuple[int, int]
    fading_draws: dict = field(default_factory=dict)


@dataclass(frozen=True)
class _Arrays:
    """Plain-array view of a config, cheap to ship to worker processes."""

    alpha: float
    power: np.ndarray
    antennas: np.ndarray
    density: np.ndarray
    phi: np.ndarray
    xi: np.ndarray
    radius: np.ndarray
    ue_density: float
    eve_density: float
    noise: float

    @classmethod
    def of(cls, config: NetworkConfig) -> "_Arrays":
        check(config)
        P = np.array([t.power_mw for t in config.tiers])
        M = np.array([int(t.antennas) for t in config.tiers])
        phi = np.array([t.power_split for t in config.tiers])
        return cls(
            alpha=config.alpha, power=P, antennas=M,
            density=np.array([t.bs_density for t in config.tiers]),
            phi=phi, xi=np.array([an_coefficient(p, m) for p, m in zip(phi, M)]),
            radius=(P * M / config.tau_mw) ** (1.0 / config.alpha),
            ue_density=config.ue_density, eve_density=config.eve_density,
            noise=config.noise_mw,
        )


def _rng(seed: int, index: int) -> np.random.Generator:
    if seed < 0 or seed >= 2**64:
        raise SimulationError("seed must lie in [0, 2^64)")
    return np.random.Generator(np.random.Philox(key=(int(index) << 64) | int(seed)))


def _disk(rng: np.random.Generator, density: float, radius: float) -> np.ndarray:
    n = rng.poisson(density * math.pi * radius**2) if density > 0 else 0
    r = radius * np.sqrt(rng.random(n))
    a = 2.0 * math.pi * rng.random(n)
    return np.column_stack((r * np.cos(a), r * np.sin(a)))


def _guard_points(arr: _Arrays, window: float):
    expected = (arr.density.sum() + arr.ue_density + arr.eve_density) * math.pi * window**2
    if expected > MAX_EXPECTED_POINTS:
        raise SimulationError(f"window would hold {expected:.3g} points on average (limit {MAX_EXPECTED_POINTS:g})")


def _associate(points: np.ndarray, trees, arr: _Arrays) -> tuple[np.ndarray, np.ndarray]:
    """Max truncated-ARSP association: tier and BS index per point (-1 if none)."""
    n = len(points)
    best = np.full(n, -np.inf)
    tier = np.full(n, -1)
    idx = np.full(n, -1)
    if n == 0:
        return tier, idx
    for k, tree in enumerate(trees):
        if tree is None:
            continue
        d, j = tree.query(points)
        score = math.log(arr.power[k] * arr.antennas[k]) - arr.alpha * np.log(np.maximum(d, 1e-300))
        ok = (d <= arr.radius[k]) & (score > best)
        best = np.where(ok, score, best)
        tier = np.where(ok, k, tier)
        idx = np.where(ok, j, idx)
    return tier, idx


def _network(arr: _Arrays, window: float, rng: np.random.Generator):
    bs = [_disk(rng, lam, window) for lam in arr.density]
    ues = _disk(rng, arr.ue_density, window)
    eves = _disk(rng, arr.eve_density, window)
    trees = [cKDTree(p) if len(p) else None for p in bs]
    ue_tier, ue_idx = _associate(ues, trees, arr)
    active = []
    for k, pts in enumerate(bs):
        sel = ue_idx[ue_tier == k]
        active.append(np.bincount(sel, minlength=len(pts)) > 0)
    t_tier, t_idx = _associate(np.zeros((1, 2)), trees, arr)
    return bs, ues, eves, (ue_tier, ue_idx), active, (int(t_tier[0]), int(t_idx[0]))


def _typical_link(arr: _Arrays, bs, eves, active, typical, rng):
    """Fading draws and the resulting typical-UE SINR and max Eve SINR."""
    k, b = typical
    a = arr.alpha
    pos = [p for p in bs]
    desired = rng.gamma(arr.antennas[k])
    r0 = math.hypot(*pos[k][b])
    signal = arr.phi[k] * arr.power[k] * desired * r0 ** (-a)

    interference = 0.0
    an_tx = []   # (positions, AN power per unit gain, AN shape) of every active BS but the server
    for j, pts in enumerate(pos):
        mask = active[j].copy()
        if j == k:
            mask[b] = False
        p = pts[mask]
        n = len(p)
        an_power = arr.xi[j] * arr.phi[j] * arr.power[j]
        shape = max(int(arr.antennas[j]) - 1, 1)
        sig = rng.exponential(size=n)
        an = rng.gamma(shape, size=n) if an_power > 0 else np.zeros(n)
        d = np.hypot(p[:, 0], p[:, 1])
        interference += float(np.sum(arr.phi[j] * arr.power[j] * (sig + arr.xi[j] * an) * d ** (-a)))
        an_tx.append((p, an_power, shape))
    with np.errstate(divide="ignore"):
        # no interferers and no noise: the link is perfect
        sinr_ue = float(np.float64(signal) / (interference + arr.noise))

    max_eve = 0.0
    n_e = len(eves)
    draws = {"desired": desired}
    if n_e:
        serving = pos[k][b]
        r_be = np.hypot(eves[:, 0] - serving[0], eves[:, 1] - serving[1])
        u = rng.exponential(size=n_e)
        own_shape = max(int(arr.antennas[k]) - 1, 1)
        v = rng.gamma(own_shape, size=n_e)
        own_an = arr.xi[k] * arr.phi[k] * arr.power[k]
        eve_sig = arr.phi[k] * arr.power[k] * u * r_be ** (-a)
        eve_int = own_an * v * r_be ** (-a) + arr.noise
        for p, an_power, shape in an_tx:
            if an_power == 0.0 or len(p) == 0:
                continue
            g = rng.gamma(shape, size=(n_e, len(p)))
            dist = np.hypot(eves[:, None, 0] - p[None, :, 0], eves[:, None, 1] - p[None, :, 1])
            eve_int = eve_int + an_power * np.sum(g * dist ** (-a), axis=1)
        with np.errstate(divide="ignore"):
            max_eve = float(np.max(eve_sig / eve_int))
        draws.update(eve_signal=u, eve_own_an=v)
    return sinr_ue, max_eve, draws


def sample_realization(config: NetworkConfig, window_radius: float = DEFAULT_WINDOW,
                       seed: int = 0) -> Realization:
    if not window_radius > 0:
        raise ConfigError([Violation("window_radius", "must be > 0")])
    arr = _Arrays.of(config)
    _guard_points(arr, window_radius)
    rng = _rng(seed, 0)
    bs, ues, eves, assoc, active, typical = _network(arr, window_radius, rng)
    draws = {}
    if typical[0] >= 0:
        sinr, eve, draws = _typical_link(arr, bs, eves, active, typical, rng)
        draws.update(sinr_ue=sinr, max_sinr_eve=eve)
    return Realization(bs, ues, eves, assoc, active, typical, draws)


# ---------------------------------------------------------------------------
# Typical-link sampling shared by the connection and secrecy estimators
# ---------------------------------------------------------------------------

def _link_batch(arr: _Arrays, window: float, seed: int, start: int, stop: int):
    out = np.empty((stop - start, 3))
    for row, i in enumerate(range(start, stop)):
        rng = _rng(seed, i)
        bs, _, eves, _, active, typical = _network(arr, window, rng)
        if typical[0] < 0:
            out[row] = (-1, np.nan, np.nan)
            continue
        sinr, eve, _ = _typical_link(arr, bs, eves, active, typical, rng)
        out[row] = (typical[0], sinr, eve)
    return out


@dataclass(frozen=True)
class LinkSamples:
    """Per-tier arrays of typical-UE SINR and strongest-Eve SINR, in attempt order."""

    sinr_ue: tuple[np.ndarray, ...]
    sinr_eve: tuple[np.ndarray, ...]
    attempts: int

    def connection(self, tier: int, beta_t: float) -> Estimate:
        return Estimate.from_samples(self.sinr_ue[tier] >= beta_t)

    def secrecy(self, tier: int, beta_e: float) -> Estimate:
        return Estimate.from_samples(self.sinr_eve[tier] < beta_e)


def sample_links(config: NetworkConfig, tiers: Sequence[int], trials: int, seed: int,
                 window_radius: float = DEFAULT_WINDOW, workers: int = 1) -> LinkSamples:
    """Collect ``trials`` accepted typical links for every tier in ``tiers``."""
    if trials < 1:
        raise SimulationError("trials must be >= 1")
    arr = _Arrays.of(config)
    _guard_points(arr, window_radius)
    tiers = sorted(set(tiers))
    for k in tiers:
        if not 0 <= k < len(arr.power):
            raise SimulationError(f"tier index {k} out of range")
    cap = ATTEMPTS_PER_TRIAL * trials
    chunks = []
    done = 0
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        while done < cap:
            counts = np.concatenate(chunks)[:, 0] if chunks else np.empty(0)
            if all(np.count_nonzero(counts == k) >= trials for k in tiers):
                break
            step = min(BATCH * max(workers, 1), cap - done)
            if pool is None:
                chunks.append(_link_batch(arr, window_radius, seed, done, done + step))
            else:
                edges = np.linspace(done, done + step, workers + 1).astype(int)
                futs = [pool.submit(_link_batch, arr, window_radius, seed, int(a), int(b))
                        for a, b in zip(edges[:-1], edges[1:]) if b > a]
                chunks.extend(f.result() for f in futs)
            done += step
    finally:
        if pool is not None:
            pool.shutdown()
    data = np.concatenate(chunks)
    ue, eve = [], []
    for k in range(len(arr.power)):
        rows = data[data[:, 0] == k]
        if k in tiers and len(rows) < trials:
            raise ConditioningError(
                f"tier {k} accepted {len(rows)} of {trials} trials in {done} attempts; "
                "the tier is essentially never chosen")
        rows = rows[:trials]
        ue.append(rows[:, 1])
        eve.append(rows[:, 2])
    return LinkSamples(tuple(ue), tuple(eve), done)


def estimate_connection_probability(config: NetworkConfig, tier: int, beta_t: float, trials: int,
                                    seed: int, window_radius: float = DEFAULT_WINDOW,
                                    workers: int = 1) -> Estimate:
    _min_trials(trials)
    return sample_links(config, [tier], trials, seed, window_radius, workers).connection(tier, beta_t)


def estimate_secrecy_probability(config: NetworkConfig, tier: int, beta_e: float, trials: int,
                                 seed: int, window_radius: float = DEFAULT_WINDOW,
                                 workers: int = 1) -> Estimate:
    _min_trials(trials)
    if config.eve_density == 0.0:
        return Estimate.from_samples(np.ones(trials))
    return sample_links(config, [tier], trials, seed, window_radius, workers).secrecy(tier, beta_e)


def _min_trials(trials: int):
    if trials < MIN_TRIALS:
        raise SimulationError(f"at least {MIN_TRIALS} trials are required (got {trials})")


# ---------------------------------------------------------------------------
# Association and activation frequencies
# ---------------------------------------------------------------------------

def _count_batch(arr: _Arrays, window: float, inner: float, seed: int, start: int, stop: int):
    K = len(arr.power)
    # columns: typical tier, then (active, total) inner BS counts per tier
    out = np.empty((stop - start, 1 + 2 * K))
    for row, i in enumerate(range(start, stop)):
        rng = _rng(seed, i)
        bs, _, _, _, active, typical = _network(arr, window, rng)
        out[row, 0] = typical[0]
        for k in range(K):
            inside = np.hypot(bs[k][:, 0], bs[k][:, 1]) <= inner
            out[row, 1 + 2 * k] = np.count_nonzero(active[k] & inside)
            out[row, 2 + 2 * k] = np.count_nonzero(inside)
    return out


def _ratio_estimate(num: np.ndarray, den: np.ndarray) -> Estimate:
    """Pooled ratio sum(num)/sum(den) with its linearized per-trial values."""
    mean_den = den.mean()
    if mean_den == 0:
        raise SimulationError("no base stations fell inside the inner window")
    ratio = num.sum() / den.sum()
    return Estimate.from_samples(ratio + (num - ratio * den) / mean_den)


def estimate_association_activation(config: NetworkConfig, trials: int, seed: int,
                                    window_radius: float = DEFAULT_WINDOW,
                                    workers: int = 1) -> list[tuple[Estimate, Estimate]]:
    """Per tier: (association frequency of the typical UE, activation frequency)."""
    _min_trials(trials)
    arr = _Arrays.of(config)
    _guard_points(arr, window_radius)
    # a BS's load depends on UEs within D_k and on competitors within D_max of those UEs
    guard = 2.0 * float(arr.radius.max())
    if guard >= window_radius:
        raise ConfigError([Violation(
            "window_radius", f"guard margin {guard:.1f} m must be smaller than the window")])
    inner = window_radius - guard
    if workers > 1:
        edges = np.linspace(0, trials, workers + 1).astype(int)
        with ProcessPoolExecutor(workers) as pool:
            futs = [pool.submit(_count_batch, arr, window_radius, inner, seed, int(a), int(b))
                    for a, b in zip(edges[:-1], edges[1:]) if b > a]
            data = np.concatenate([f.result() for f in futs])
    else:
        data = _count_batch(arr, window_radius, inner, seed, 0, trials)
    out = []
    for k in range(len(arr.power)):
        assoc = Estimate.from_samples(data[:, 0] == k)
        act = _ratio_estimate(data[:, 1 + 2 * k], data[:, 2 + 2 * k])
        out.append((assoc, act))
    return out
