"""Command-line entry point.

    hcnsec <command> --config FILE --out FILE [--seed N] [--trials N]
           [--format csv|json] [--window-radius M]

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical failure, 4 simulation failure, 5 degenerate optimization.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import montecarlo as mc
from .analytic import (
    connection_probability_alzer_bounds,
    connection_probability_general,
    connection_probability_il,
    secrecy_probability,
    secrecy_throughput,
)
from .configio import load_config
from .errors import ConfigError, HcnError, SimulationError
from .model import NetworkConfig, Violation, derive_constants
from .optimizer import DEFAULT_TAU_BRACKET, METRICS, SweepSpec, golden_section_tau, run_sweep

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_SIMULATION = 4
EXIT_DEGENERATE = 5

COMMANDS = ("analyze", "simulate", "validate", "sweep", "optimize")
Z_LIMIT = 3.0


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_path: Path
    output_path: Path
    seed: Optional[int]
    trials: int
    format: str
    window_radius: float = mc.DEFAULT_WINDOW
    workers: int = 1


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def _write(path: Path, fmt: str, rows: list[dict], columns: list[str], extra: Optional[dict] = None):
    if fmt == "json":
        doc = dict(extra or {})
        doc["rows"] = [{c: _jsonable(r.get(c)) for c in columns} for r in rows]
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])
        text = buf.getvalue()
    path.write_text(text, encoding="utf-8")


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

ANALYZE_COLUMNS = ["quantity", "tier", "value"]


def _il_consts(config: NetworkConfig):
    # throughput roots and the Alzer bounds use the interference-limited forms
    return derive_constants(config if config.interference_limited else config.replace(noise_dbm=None))


def analyze_rows(config: NetworkConfig) -> list[dict]:
    consts = derive_constants(config)
    il = _il_consts(config)
    bt, be = config.target_sinr_t, config.target_sinr_e
    rows = []

    def add(q, k, v):
        rows.append({"quantity": q, "tier": k, "value": float(v)})

    report = secrecy_throughput(il, config.connection_constraint, config.secrecy_constraint)
    for k in range(consts.num_tiers):
        add("assoc_prob", k, consts.assoc_prob[k])
        add("activation_prob", k, consts.activation_prob[k])
        add("active_density", k, consts.active_density[k])
        add("connection_general", k, connection_probability_general(consts, k, bt))
        add("connection_il", k, connection_probability_il(il, k, bt))
        lo, hi = connection_probability_alzer_bounds(il, k, bt)
        add("connection_alzer_lower", k, lo)
        add("connection_alzer_upper", k, hi)
        s = secrecy_probability(consts, k, be)
        add("secrecy_lower", k, s.lower)
        add("secrecy_upper", k, s.upper)
        add("secrecy_approx", k, s.approx)
        r = report.per_tier_rates[k]
        add("beta_t", k, r.beta_t)
        add("beta_e", k, r.beta_e)
        add("rate_t", k, r.rate_t)
        add("rate_e", k, r.rate_e)
        add("rate_s", k, r.rate_s)
        add("per_user_throughput", k, report.per_user[k])
    rows.append({"quantity": "throughput", "tier": "", "value": report.network_throughput})
    rows.append({"quantity": "min_per_user_throughput", "tier": "", "value": report.min_per_user})
    return rows


def cmd_analyze(m: RunManifest, args) -> int:
    config = load_config(m.config_path)
    _write(m.output_path, m.format, analyze_rows(config), ANALYZE_COLUMNS)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

SIM_COLUMNS = ["quantity", "tier", "mean", "std_error", "trials", "ci95_low", "ci95_high"]


def _est_row(q, k, e: mc.Estimate) -> dict:
    return {"quantity": q, "tier": k, "mean": e.mean, "std_error": e.std_error,
            "trials": e.trials, "ci95_low": e.ci95[0], "ci95_high": e.ci95[1]}


def _simulate_all(config: NetworkConfig, m: RunManifest):
    """(association/activation estimates, link samples); either may be the SimulationError raised."""
    try:
        counts = mc.estimate_association_activation(config, m.trials, m.seed, m.window_radius, m.workers)
    except SimulationError as exc:
        counts = exc
    try:
        links = mc.sample_links(config, range(config.num_tiers), m.trials, m.seed,
                                m.window_radius, m.workers)
    except SimulationError as exc:
        links = exc
    return counts, links


def cmd_simulate(m: RunManifest, args) -> int:
    config = load_config(m.config_path)
    _need_seed(m)
    if args.dump_realization:
        real = mc.sample_realization(config, m.window_radius, m.seed)
        Path(args.dump_realization).write_text(json.dumps(_realization_doc(real)) + "\n", encoding="utf-8")
    counts, links = _simulate_all(config, m)
    rows = []
    if not isinstance(counts, SimulationError):
        for k, (s, a) in enumerate(counts):
            rows.append(_est_row("assoc_prob", k, s))
            rows.append(_est_row("activation_prob", k, a))
    for failed in (counts, links):
        if isinstance(failed, SimulationError):
            _write(m.output_path, m.format, rows, SIM_COLUMNS)
            raise failed
    for k in range(config.num_tiers):
        rows.append(_est_row("connection", k, links.connection(k, config.target_sinr_t)))
        rows.append(_est_row("secrecy", k, links.secrecy(k, config.target_sinr_e)))
    _write(m.output_path, m.format, rows, SIM_COLUMNS)
    return EXIT_OK


def _realization_doc(r: mc.Realization) -> dict:
    return {
        "bs_points": [p.tolist() for p in r.bs_points],
        "ue_points": r.ue_points.tolist(),
        "eve_points": r.eve_points.tolist(),
        "association_tier": r.association[0].tolist(),
        "association_bs": r.association[1].tolist(),
        "active_flags": [a.tolist() for a in r.active_flags],
        "typical_association": list(r.typical_association),
        "fading_draws": {k: np.asarray(v).tolist() for k, v in r.fading_draws.items()},
    }


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

VALIDATE_COLUMNS = ["metric", "tier", "analytic", "analytic_lower", "analytic_upper",
                    "mc_mean", "mc_std_error", "ci95_low", "ci95_high", "z_score", "verdict", "note"]


def _parse_perturb(items) -> dict[str, float]:
    out = {}
    for item in items or []:
        name, _, delta = item.partition("=")
        try:
            out[name.strip()] = float(delta)
        except ValueError:
            raise ConfigError([Violation("--perturb-analytic", f"expected METRIC=DELTA, got {item!r}")])
    return out


def validation_rows(config: NetworkConfig, m: RunManifest, perturb: dict[str, float]):
    consts = derive_constants(config)
    counts, links = _simulate_all(config, m)
    rows = []

    def point(metric, k, analytic, est):
        analytic += perturb.get(metric, 0.0)
        z = est.z_score(analytic)
        rows.append({"metric": metric, "tier": k, "analytic": analytic, "mc_mean": est.mean,
                     "mc_std_error": est.std_error, "ci95_low": est.ci95[0], "ci95_high": est.ci95[1],
                     "z_score": z, "verdict": "PASS" if abs(z) <= Z_LIMIT else "FAIL", "note": ""})

    for k in range(config.num_tiers):
        if isinstance(counts, SimulationError):
            for metric in ("assoc_prob", "activation_prob"):
                rows.append({"metric": metric, "tier": k, "verdict": "ERROR", "note": str(counts)})
            continue
        s, a = counts[k]
        point("assoc_prob", k, consts.assoc_prob[k], s)
        point("activation_prob", k, consts.activation_prob[k], a)
    conn = connection_probability_il if config.interference_limited else connection_probability_general
    for k in range(config.num_tiers):
        if isinstance(links, SimulationError):
            for metric in ("connection", "secrecy"):
                rows.append({"metric": metric, "tier": k, "verdict": "ERROR", "note": str(links)})
            continue
        point("connection", k, conn(consts, k, config.target_sinr_t),
              links.connection(k, config.target_sinr_t))
        b = secrecy_probability(consts, k, config.target_sinr_e)
        d = perturb.get("secrecy", 0.0)
        lo, hi = b.lower + d, b.upper + d
        est = links.secrecy(k, config.target_sinr_e)
        se = max(est.std_error, 1.0 / est.trials)
        inside = lo - Z_LIMIT * se <= est.mean <= hi + Z_LIMIT * se
        z = 0.0 if lo <= est.mean <= hi else (est.mean - (lo if est.mean < lo else hi)) / se
        rows.append({"metric": "secrecy", "tier": k, "analytic": b.approx + d, "analytic_lower": lo,
                     "analytic_upper": hi, "mc_mean": est.mean, "mc_std_error": est.std_error,
                     "ci95_low": est.ci95[0], "ci95_high": est.ci95[1], "z_score": z,
                     "verdict": "PASS" if inside else "FAIL", "note": "bracket containment"})
    return rows, any(isinstance(x, SimulationError) for x in (counts, links))


def cmd_validate(m: RunManifest, args) -> int:
    config = load_config(m.config_path)
    _need_seed(m)
    rows, sim_failed = validation_rows(config, m, _parse_perturb(args.perturb_analytic))
    _write(m.output_path, m.format, rows, VALIDATE_COLUMNS)
    for r in rows:
        print(f"{r['verdict']:5s} {r['metric']}[{r['tier']}]", file=sys.stderr)
    if sim_failed:
        return EXIT_SIMULATION
    return EXIT_OK if all(r["verdict"] == "PASS" for r in rows) else EXIT_FAIL


# ---------------------------------------------------------------------------
# sweep / optimize
# ---------------------------------------------------------------------------

def parse_grid(text: str) -> list[float]:
    """'a,b,c' or 'start:stop:step' (stop inclusive)."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            # round away accumulated float error so 0.1 steps print as 0.3, not 0.30000000000000004
            return [round(start + i * step, 12) for i in range(n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError([Violation("--grid", f"cannot parse {text!r}")])


def cmd_sweep(m: RunManifest, args) -> int:
    config = load_config(m.config_path)
    if not args.parameter or not args.grid:
        raise ConfigError([Violation("sweep", "--parameter and --grid are required")])
    metrics = [s.strip() for s in args.metrics.split(",") if s.strip()]
    spec = SweepSpec(args.parameter, parse_grid(args.grid), metrics)
    table = run_sweep(config, spec)
    _write(m.output_path, m.format, table.rows, table.columns)
    return EXIT_OK


def cmd_optimize(m: RunManifest, args) -> int:
    config = load_config(m.config_path)
    bracket = (args.tau_lo, args.tau_hi)
    if not bracket[0] < bracket[1]:
        raise ConfigError([Violation("--tau-lo/--tau-hi", "need tau_lo < tau_hi")])
    res = golden_section_tau(config, config.connection_constraint, config.secrecy_constraint,
                             bracket, args.tol)
    rows = [{"step": i, "tau_dbm": t, "throughput": v} for i, (t, v) in enumerate(res.trace)]
    extra = {"tau_star": res.tau_star, "throughput_star": res.throughput, "degenerate": res.degenerate}
    if m.format == "json":
        _write(m.output_path, "json", rows, ["step", "tau_dbm", "throughput"], extra)
    else:
        rows = [{"step": "optimum", "tau_dbm": res.tau_star, "throughput": res.throughput}] + rows
        _write(m.output_path, "csv", rows, ["step", "tau_dbm", "throughput"])
    if res.degenerate:
        print("throughput is identically zero on the bracket", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


# ---------------------------------------------------------------------------

def _need_seed(m: RunManifest):
    if m.seed is None:
        raise ConfigError([Violation("--seed", f"required by {m.command}")])
    if m.trials < 1:
        raise ConfigError([Violation("--trials", "must be >= 1")])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hcnsec", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--window-radius", type=float, default=mc.DEFAULT_WINDOW)
    p.add_argument("--workers", type=int, default=1)
    g = p.add_argument_group("sweep")
    g.add_argument("--parameter", help="e.g. tau_dbm or tiers[1].power_split (0-based tier)")
    g.add_argument("--grid", help="comma list or start:stop:step")
    g.add_argument("--metrics", default="assoc_prob", help="comma list from: " + ", ".join(METRICS))
    g = p.add_argument_group("optimize")
    g.add_argument("--tau-lo", type=float, default=DEFAULT_TAU_BRACKET[0])
    g.add_argument("--tau-hi", type=float, default=DEFAULT_TAU_BRACKET[1])
    g.add_argument("--tol", type=float, default=0.1, help="bracket width in dBm")
    p.add_argument("--dump-realization", help="simulate: also write one sampled network as JSON")
    # test hook: shift analytic values to check that validation can fail
    p.add_argument("--perturb-analytic", action="append", help=argparse.SUPPRESS)
    return p


HANDLERS = {"analyze": cmd_analyze, "simulate": cmd_simulate, "validate": cmd_validate,
            "sweep": cmd_sweep, "optimize": cmd_optimize}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    m = RunManifest(args.command, args.config, args.out, args.seed, args.trials, args.format,
                    args.window_radius, args.workers)
    try:
        return HANDLERS[m.command](m, args)
    except ConfigError as exc:
        print("configuration error:", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except (HcnError, ArithmeticError) as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
