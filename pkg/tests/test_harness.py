"""Experiment harness and CLI: config validation, reproducibility, artifacts.

Runs here are deliberately tiny (N around 30, tens of samples): they
exercise plumbing, determinism, and error paths, not statistical targets.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from resolventlab import cli, harness
from resolventlab.ensembles import Ginibre
from resolventlab.harness import (
    EXPERIMENTS,
    ConfigError,
    PartialResultsError,
    config_from_dict,
    config_to_dict,
    default_config,
    estimate_limits,
    load_config,
    run,
    sample_statistic,
)
from resolventlab.stats import read_samples_csv


def tiny_node(experiment="regime1", **over):
    node = {
        "experiment": experiment,
        "n_samples": 40,
        "seed": 7,
        "workers": 1,
        "ensemble": {"variant": "ginibre", "N": 30},
        "regime": {"variant": "bulk", "z": [0.7, 0.0]},
        "extras": {},
    }
    node.update(over)
    return node


# ---------------------------------------------------------------------------
# config parsing


def test_config_roundtrip():
    cfg = config_from_dict(tiny_node())
    assert cfg.experiment == "regime1"
    assert cfg.ensemble == Ginibre(30)
    node = config_to_dict(cfg)
    assert config_from_dict(node) == cfg


def test_config_error_paths_are_exact():
    with pytest.raises(ConfigError) as e:
        config_from_dict(tiny_node(extras={"zz": 1}))
    assert e.value.path == "extras.zz"
    with pytest.raises(ConfigError) as e:
        config_from_dict(tiny_node(ensemble={"variant": "wishart", "N": 10}))
    assert e.value.path == "ensemble.variant"
    with pytest.raises(ConfigError) as e:
        config_from_dict(tiny_node(regime={"variant": "bulk", "z": "not-a-number"}))
    assert e.value.path == "regime.z"
    with pytest.raises(ConfigError) as e:
        config_from_dict(tiny_node(experiment="regime99"))
    assert e.value.path == "experiment"
    with pytest.raises(ConfigError) as e:
        config_from_dict(tiny_node(n_samples=0))
    assert e.value.path == "n_samples"


def test_config_rejects_incompatible_ensemble():
    # overlap experiments are defined for spectra, not for the GUE baseline
    with pytest.raises(ConfigError):
        config_from_dict(
            tiny_node(
                experiment="overlap_invgamma",
                ensemble={"variant": "gue", "N": 30},
                regime=None,
                extras={"z": [0.4, 0.0]},
            )
        )


def test_every_experiment_has_runnable_defaults():
    for name in EXPERIMENTS:
        cfg = default_config(name)
        assert cfg.experiment == name
        assert cfg.n_samples >= 1
        # defaults survive a dict roundtrip
        assert config_from_dict(config_to_dict(cfg)) == cfg
        full = default_config(name, full=True)
        assert full.n_samples >= cfg.n_samples


def test_load_config_merges_cli_overrides(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(tiny_node(seed=5)))
    cfg = load_config(path, full=False, seed=None, workers=None, output_dir=None)
    assert cfg.seed == 5
    cfg = load_config(path, full=False, seed=11, workers=2, output_dir=tmp_path / "o")
    assert cfg.seed == 11 and cfg.workers == 2
    assert cfg.output_dir == tmp_path / "o"
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad, full=False, seed=None, workers=None, output_dir=None)


# ---------------------------------------------------------------------------
# runs: determinism, worker invariance, artifacts


def _strip_volatile(report_dict):
    report_dict = dict(report_dict)
    report_dict.pop("timing", None)
    cfg = dict(report_dict.get("config", {}))
    cfg.pop("output_dir", None)
    report_dict["config"] = cfg
    return report_dict


def test_run_is_deterministic_modulo_timing(tmp_path):
    reports = []
    for sub in ("a", "b"):
        cfg = config_from_dict(tiny_node(output_dir=str(tmp_path / sub)))
        reports.append(json.loads(run(cfg).to_json()))
    assert _strip_volatile(reports[0]) == _strip_volatile(reports[1])
    csv_a = (tmp_path / "a" / "g11_samples.csv").read_bytes()
    csv_b = (tmp_path / "b" / "g11_samples.csv").read_bytes()
    assert csv_a == csv_b


def test_worker_count_does_not_change_results(tmp_path):
    r1 = run(config_from_dict(tiny_node(output_dir=str(tmp_path / "w1"), workers=1)))
    r3 = run(config_from_dict(tiny_node(output_dir=str(tmp_path / "w3"), workers=3)))
    assert r1.results == r3.results
    a = read_samples_csv(tmp_path / "w1" / "g11_samples.csv")
    b = read_samples_csv(tmp_path / "w3" / "g11_samples.csv")
    np.testing.assert_array_equal(a, b)


def test_run_writes_all_declared_artifacts(tmp_path):
    node = tiny_node(
        experiment="regime4",
        n_samples=25,
        regime={"variant": "outside", "z": [2.0, 0.0]},
    )
    node["output_dir"] = str(tmp_path / "r4")
    report = run(config_from_dict(node))
    assert "report.json" in report.files
    for f in report.files:
        assert (tmp_path / "r4" / f).exists(), f
    payload = json.loads((tmp_path / "r4" / "report.json").read_text())
    assert payload["experiment"] == "regime4"
    assert "timing" in payload and "results" in payload


def test_theorem1_smoke_run(tmp_path):
    # pair list carries (N, z) itself; the experiment takes no ensemble node
    node = {
        "experiment": "theorem1_oracle",
        "n_samples": 300,
        "seed": 1,
        "workers": 1,
        "extras": {"pairs": [[8, 0.3, 0.0]]},
        "output_dir": str(tmp_path / "t1"),
    }
    report = run(config_from_dict(node))
    pair = report.results["pairs"][0]
    assert pair["ks_modulus"] < 0.2 and pair["ks_real"] < 0.2


def test_theorem1_rejects_ensemble_node():
    node = {
        "experiment": "theorem1_oracle",
        "n_samples": 10,
        "ensemble": {"variant": "ginibre", "N": 8},
        "extras": {"pairs": [[8, 0.3, 0.0]]},
    }
    with pytest.raises(ConfigError) as e:
        config_from_dict(node)
    assert e.value.path == "ensemble"


def _boom_at_five(index):
    # module level so the process pool can pickle it
    if index == 5:
        raise RuntimeError("synthetic failure")
    return index


def test_partial_results_carries_progress():
    for workers in (1, 2):
        with pytest.raises(PartialResultsError) as e:
            harness._run_pool(_boom_at_five, 10, workers)
        assert e.value.completed == 5 and e.value.requested == 10
        assert "5/10" in str(e.value)


def test_sample_statistic_kinds():
    vals, rejected = sample_statistic(Ginibre(12), "g11", 0.4 + 0j, 30, seed=0, workers=1)
    assert vals.shape == (30,) and rejected == 0
    again, _ = sample_statistic(Ginibre(12), "g11", 0.4 + 0j, 30, seed=0, workers=1)
    np.testing.assert_array_equal(vals, again)
    radii, _ = sample_statistic(Ginibre(12), "spectral_radius", 0j, 5, seed=0, workers=1)
    assert np.all(radii.real > 0.5) and np.all(radii.imag == 0.0)
    eigs, _ = sample_statistic(Ginibre(12), "eigenvalues", 0j, 3, seed=0, workers=1)
    assert eigs.shape == (36,)
    with pytest.raises(ValueError):
        sample_statistic(Ginibre(12), "determinant", 0j, 3, seed=0, workers=1)


def test_estimate_limits_outside_point():
    est = estimate_limits(Ginibre(60), 2.0 + 0j, pool_size=3, seed=0, density_radius=0.5)
    # trace near 1/z = 0.5 outside; no eigenvalues near z = 2
    assert abs(est.g_hat - 0.5) < 0.05
    assert est.disk_count == 0 and est.rho_hat == 0.0
    assert est.pool_draws == 3 and est.pool_N == 60


# ---------------------------------------------------------------------------
# CLI


def test_cli_density_csv(tmp_path, capsys):
    out = tmp_path / "dens.csv"
    rc = cli.main(
        ["--out", str(out), "density", "--model", "student",
         "--beta", "0.51", "--center", "0.7,0", "--grid", "0:3:10"]
    )
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x,pdf"
    assert len(lines) == 11
    x0, p0 = lines[1].split(",")
    assert float(x0) == 0.0
    # peak value at the center is 1/(pi beta)
    xs = [float(l.split(",")[0]) for l in lines[1:]]
    ps = [float(l.split(",")[1]) for l in lines[1:]]
    import math

    assert max(ps) == pytest.approx(1.0 / (math.pi * 0.51), rel=0.05)
    assert xs[-1] == 3.0


def test_cli_density_missing_param_is_validation_error(capsys):
    rc = cli.main(["density", "--model", "student", "--grid", "0:1:5"])
    assert rc == 2
    assert "requires" in capsys.readouterr().err


def test_cli_sample_and_fit_tail_closed_loop(tmp_path, capsys):
    out = tmp_path / "s.csv"
    rc = cli.main(
        ["--seed", "3", "--out", str(out), "sample", "--ensemble", "ginibre",
         "--N", "24", "--statistic", "g11", "--z", "0.5,0", "--count", "600"]
    )
    assert rc == 0
    assert read_samples_csv(out).size == 600
    rc = cli.main(["fit-tail", str(out), "--center", "0.5,0", "--q-lo", "0.8"])
    assert rc == 0
    text = capsys.readouterr().out
    assert "slope" in text and "amplitude" in text


def test_cli_check_symmetry(tmp_path, capsys):
    from resolventlab.densities import ComplexStudent, sample as dsample
    from resolventlab.stats import write_samples_csv

    path = tmp_path / "w.csv"
    write_samples_csv(path, dsample(ComplexStudent(1.0, 0j), 20000, seed=8))
    rc = cli.main(["check-symmetry", str(path), "--map", "inv"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "ks modulus" in out


def test_cli_experiment_list(capsys):
    rc = cli.main(["experiment", "list"])
    assert rc == 0
    out = capsys.readouterr().out
    for name in EXPERIMENTS:
        assert name in out


def test_cli_experiment_run_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(tiny_node(n_samples=20, output_dir=str(tmp_path / "run"))))
    rc = cli.main(["experiment", "run", str(cfg)])
    assert rc == 0
    assert (tmp_path / "run" / "report.json").exists()
    rc = cli.main(["report", str(tmp_path / "run")])
    assert rc == 0
    assert "regime1" in capsys.readouterr().out


def test_cli_exit_codes(tmp_path, capsys, monkeypatch):
    # validation error from a bad config field
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(tiny_node(extras={"nope": True})))
    assert cli.main(["experiment", "run", str(cfg)]) == 2
    assert "extras.nope" in capsys.readouterr().err
    # unknown experiment name (no such file either)
    assert cli.main(["experiment", "run", "regime99"]) == 2
    capsys.readouterr()
    # missing report dir
    assert cli.main(["report", str(tmp_path / "missing")]) == 2
    capsys.readouterr()
    # partial results surface as exit 3
    def fake_run(config):
        raise PartialResultsError("lost a worker", completed=3, requested=9)

    monkeypatch.setattr(harness, "run", fake_run)
    cfg2 = tmp_path / "ok.json"
    cfg2.write_text(json.dumps(tiny_node()))
    assert cli.main(["experiment", "run", str(cfg2)]) == 3
    # argparse rejects unknown flags with SystemExit(2)
    with pytest.raises(SystemExit) as e:
        cli.main(["--bogus-flag", "experiment", "list"])
    assert e.value.code == 2
