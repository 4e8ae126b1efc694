import csv
import json

import pytest

from hcnsec.analytic import secrecy_throughput
from hcnsec.cli import main, parse_grid
from hcnsec.configio import save_config
from hcnsec.model import canonical_config, derive_constants

SMALL = ["--trials", "150", "--window-radius", "2000"]


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "canonical.toml"
    save_config(canonical_config(), p)
    return p


def _rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_analyze_schema_and_throughput(cfg_path, tmp_path):
    out = tmp_path / "a.csv"
    assert main(["analyze", "--config", str(cfg_path), "--out", str(out)]) == 0
    rows = _rows(out)
    per_tier = {r["quantity"] for r in rows if r["tier"] != ""}
    for q in ("assoc_prob", "activation_prob", "active_density", "connection_general",
              "connection_il", "connection_alzer_lower", "connection_alzer_upper", "secrecy_lower",
              "secrecy_upper", "secrecy_approx", "beta_t", "beta_e", "rate_t", "rate_e", "rate_s",
              "per_user_throughput"):
        assert q in per_tier
        assert sorted(r["tier"] for r in rows if r["quantity"] == q) == ["0", "1"]
    total = next(float(r["value"]) for r in rows if r["quantity"] == "throughput")
    want = secrecy_throughput(derive_constants(canonical_config()), 0.95, 0.95).network_throughput
    assert total == want


def test_analyze_json(cfg_path, tmp_path):
    out = tmp_path / "a.json"
    assert main(["analyze", "--config", str(cfg_path), "--out", str(out), "--format", "json"]) == 0
    doc = json.loads(out.read_text())
    assert any(r["quantity"] == "min_per_user_throughput" for r in doc["rows"])


def test_bad_config_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    save_config(canonical_config(), p)
    p.write_text(p.read_text().replace("alpha = 4.0", "alpha = 2.0"))
    assert main(["analyze", "--config", str(p), "--out", str(tmp_path / "x.csv")]) == 2
    assert "alpha" in capsys.readouterr().err


def test_sweep_seven_rows(cfg_path, tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--config", str(cfg_path), "--out", str(out), "--parameter", "tau_dbm",
                 "--grid=-110:-50:10", "--metrics", "assoc_prob,secrecy_lower"]) == 0
    rows = _rows(out)
    assert len(rows) == 7
    assert list(rows[0].keys())[:3] == ["tau_dbm", "assoc_prob[0]", "assoc_prob[1]"]
    assert [float(r["tau_dbm"]) for r in rows] == [-110.0, -100.0, -90.0, -80.0, -70.0, -60.0, -50.0]


def test_parse_grid():
    assert parse_grid("0.1:0.5:0.1") == [0.1, 0.2, 0.3, 0.4, 0.5]
    assert parse_grid("1, 2,3") == [1.0, 2.0, 3.0]


def test_sweep_bad_grid(cfg_path, tmp_path):
    assert main(["sweep", "--config", str(cfg_path), "--out", str(tmp_path / "s.csv"),
                 "--parameter", "tau_dbm", "--grid", "a:b"]) == 2


def test_optimize_within_bracket(cfg_path, tmp_path):
    out = tmp_path / "o.json"
    assert main(["optimize", "--config", str(cfg_path), "--out", str(out), "--format", "json",
                 "--tau-lo", "-80", "--tau-hi", "-40", "--tol", "0.5"]) == 0
    doc = json.loads(out.read_text())
    assert -80 <= doc["tau_star"] <= -40 and doc["throughput_star"] > 0
    assert len(doc["rows"]) > 5


def test_optimize_degenerate(tmp_path):
    p = tmp_path / "c.toml"
    save_config(canonical_config(secrecy_constraint=1 - 1e-9), p)
    assert main(["optimize", "--config", str(p), "--out", str(tmp_path / "o.csv"),
                 "--tau-lo", "-120", "--tau-hi", "-60", "--tol", "1"]) == 5


def test_simulate_is_deterministic(cfg_path, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    dump = tmp_path / "real.json"
    args = ["simulate", "--config", str(cfg_path), "--seed", "42", *SMALL]
    assert main(args + ["--out", str(a), "--dump-realization", str(dump)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(_rows(a)) == 8
    assert set(json.loads(dump.read_text())) >= {"bs_points", "ue_points", "active_flags"}


def test_simulate_requires_seed(cfg_path, tmp_path):
    assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "x.csv")]) == 2


def test_validate_detects_corrupted_analytics(cfg_path, tmp_path, capsys):
    out = tmp_path / "v.csv"
    code = main(["validate", "--config", str(cfg_path), "--out", str(out), "--seed", "3", *SMALL,
                 "--perturb-analytic", "connection=0.5"])
    assert code == 1
    rows = _rows(out)
    assert all(r["verdict"] == "FAIL" for r in rows if r["metric"] == "connection")
    assert "FAIL  connection[0]" in capsys.readouterr().err


def test_validate_without_eves(tmp_path):
    p = tmp_path / "c.toml"
    save_config(canonical_config(eve_density=0.0), p)
    out = tmp_path / "v.csv"
    main(["validate", "--config", str(p), "--out", str(out), "--seed", "5", *SMALL])
    for r in _rows(out):
        if r["metric"] == "secrecy":
            assert r["verdict"] == "PASS"
            assert float(r["mc_mean"]) == 1.0 and float(r["analytic_lower"]) == 1.0


def test_validate_conditioning_failure(tmp_path):
    # tier-2 BSs exist but are far too weak to ever serve the typical UE
    cfg = canonical_config().with_tier(1, transmit_power_dbm=-60.0)
    p = tmp_path / "c.toml"
    save_config(cfg, p)
    out = tmp_path / "v.csv"
    code = main(["validate", "--config", str(p), "--out", str(out), "--seed", "1",
                 "--trials", "100", "--window-radius", "1500"])
    assert code == 4
    rows = _rows(out)
    assert any(r["verdict"] == "ERROR" for r in rows if r["metric"] == "connection")
    assert all(r["verdict"] != "ERROR" for r in rows if r["metric"] == "assoc_prob")


def test_simulate_inner_window_failure(tmp_path):
    cfg = canonical_config().with_tier(1, bs_density=1e-12)
    p = tmp_path / "c.toml"
    save_config(cfg, p)
    assert main(["simulate", "--config", str(p), "--out", str(tmp_path / "s.csv"), "--seed", "1",
                 "--trials", "100", "--window-radius", "1500"]) == 4
