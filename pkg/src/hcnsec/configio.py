"""Reading and writing scenario files (TOML, or JSON with the same keys).

Example::

    alpha = 4.0
    tau_dbm = -70.0
    ue_density_rel = 2.0          # or ue_density in 1/m^2
    eve_density_rel = 0.05
    noise = "interference-limited"  # or noise_dbm = -90.0

    [[tiers]]
    power_dbm = 30.0
    antennas = 6
    density_rel = 1.0             # or density in 1/m^2
    power_split = 0.5
"""
from __future__ import annotations

import json
import math
import sys
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .model import INTERFERENCE_LIMITED, LAMBDA_1, NetworkConfig, TierParams, Violation, validate

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_TOP_KEYS = {
    "alpha", "tau_dbm", "ue_density", "ue_density_rel", "eve_density", "eve_density_rel",
    "noise", "noise_dbm", "target_sinr_t", "target_sinr_e", "connection_constraint",
    "secrecy_constraint", "tiers",
}
_TIER_KEYS = {"power_dbm", "antennas", "density", "density_rel", "power_split"}


def _density(table: dict, key: str, where: str, errors: list, default=None):
    absolute, rel = table.get(key), table.get(f"{key}_rel")
    if absolute is not None and rel is not None:
        errors.append(Violation(where, f"give either {key} or {key}_rel, not both"))
        return None
    if absolute is not None:
        return _number(absolute, where, errors)
    if rel is not None:
        v = _number(rel, where, errors)
        return None if v is None else v * LAMBDA_1
    if default is None:
        errors.append(Violation(where, f"missing {key} (or {key}_rel)"))
    return default


def _number(value, where: str, errors: list):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(Violation(where, f"expected a number, got {value!r}"))
        return None
    return float(value)


def config_from_dict(data: dict[str, Any]) -> NetworkConfig:
    errors: list[Violation] = []
    for key in data:
        if key not in _TOP_KEYS:
            errors.append(Violation(key, "unknown key"))
    raw_tiers = data.get("tiers")
    if not isinstance(raw_tiers, list) or not raw_tiers:
        errors.append(Violation("tiers", "an array of at least one tier table is required"))
        raw_tiers = []
    tiers = []
    for k, t in enumerate(raw_tiers):
        where = f"tiers[{k}]"
        if not isinstance(t, dict):
            errors.append(Violation(where, "must be a table"))
            continue
        for key in t:
            if key not in _TIER_KEYS:
                errors.append(Violation(f"{where}.{key}", "unknown key"))
        power = _number(t.get("power_dbm"), f"{where}.power_dbm", errors)
        antennas = t.get("antennas")
        if isinstance(antennas, bool) or not isinstance(antennas, (int, float)):
            errors.append(Violation(f"{where}.antennas", f"expected an integer, got {antennas!r}"))
        density = _density(t, "density", f"{where}.density", errors)
        split = _number(t.get("power_split", 1.0), f"{where}.power_split", errors)
        if None not in (power, density, split) and isinstance(antennas, (int, float)):
            tiers.append(TierParams(power, antennas, density, split))

    noise = data.get("noise", INTERFERENCE_LIMITED if "noise_dbm" not in data else None)
    noise_dbm = None
    if "noise_dbm" in data:
        if "noise" in data:
            errors.append(Violation("noise", "give either noise or noise_dbm, not both"))
        noise_dbm = _number(data["noise_dbm"], "noise_dbm", errors)
    elif noise != INTERFERENCE_LIMITED:
        errors.append(Violation("noise", f"must be {INTERFERENCE_LIMITED!r} or use noise_dbm"))

    kwargs = {}
    for key in ("alpha", "tau_dbm", "target_sinr_t", "target_sinr_e",
                "connection_constraint", "secrecy_constraint"):
        if key in data:
            v = _number(data[key], key, errors)
            if v is not None:
                kwargs[key] = v
    defaults = NetworkConfig(tiers=())
    kwargs["ue_density"] = _density(data, "ue_density", "ue_density", errors, defaults.ue_density)
    kwargs["eve_density"] = _density(data, "eve_density", "eve_density", errors, defaults.eve_density)
    if errors:
        raise ConfigError(errors)
    config = NetworkConfig(tiers=tuple(tiers), noise_dbm=noise_dbm, **kwargs)
    violations = validate(config)
    if violations:
        raise ConfigError(violations)
    return config


def load_config(path: str | Path) -> NetworkConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([Violation("config", f"cannot read {path}: {exc.strerror}")]) from exc
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError([Violation("config", f"parse error: {exc}")]) from exc
    if not isinstance(data, dict):
        raise ConfigError([Violation("config", "top level must be a table")])
    return config_from_dict(data)


def config_to_dict(config: NetworkConfig) -> dict[str, Any]:
    out: dict[str, Any] = {
        "alpha": config.alpha,
        "tau_dbm": config.tau_dbm,
        "ue_density": config.ue_density,
        "eve_density": config.eve_density,
    }
    if config.noise_dbm is None:
        out["noise"] = INTERFERENCE_LIMITED
    else:
        out["noise_dbm"] = config.noise_dbm
    for key in ("target_sinr_t", "target_sinr_e", "connection_constraint", "secrecy_constraint"):
        out[key] = getattr(config, key)
    out["tiers"] = [
        {"power_dbm": t.transmit_power_dbm, "antennas": int(t.antennas),
         "density": t.bs_density, "power_split": t.power_split}
        for t in config.tiers
    ]
    return out


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"cannot write non-finite value {v}")
        return repr(v)
    return json.dumps(v)


def dumps_toml(config: NetworkConfig) -> str:
    """TOML text that parses back to an identical NetworkConfig (floats via repr)."""
    data = config_to_dict(config)
    lines = [f"{k} = {_toml_value(v)}" for k, v in data.items() if k != "tiers"]
    for tier in data["tiers"]:
        lines.append("")
        lines.append("[[tiers]]")
        lines.extend(f"{k} = {_toml_value(v)}" for k, v in tier.items())
    return "\n".join(lines) + "\n"


def save_config(config: NetworkConfig, path: str | Path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(config_to_dict(config), indent=2) + "\n", encoding="utf-8")
    else:
        path.write_text(dumps_toml(config), encoding="utf-8")
