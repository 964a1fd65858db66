import json

import numpy as np
import pytest

from attractor_scout.cli import main
from attractor_scout.experiment import read_report
from attractor_scout.io import load_model, read_trajectory


@pytest.fixture(scope="module")
def tiny_config_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "tiny.json"
    path.write_text(json.dumps({
        "scenario": "A",
        "reservoir": {"n_nodes": 30},
        "n_seeds": 2,
        "autonomous_steps": 300,
    }))
    return str(path)


@pytest.fixture(scope="module")
def model_file(tmp_path_factory, tiny_config_file):
    out = tmp_path_factory.mktemp("model") / "model.npz"
    assert main(["train", "--config", tiny_config_file, "--seed", "4",
                 "--out", str(out)]) == 0
    return str(out)


def test_generate_data_file_contract(tmp_path):
    out = tmp_path / "data"
    assert main(["generate-data", "--scenario", "A", "--seed", "7",
                 "--out", str(out)]) == 0
    training = read_trajectory(out / "training_A.csv")
    assert len(training) == 11000
    assert training.rng_seed == 7
    for attractor in ("limit_cycle_plus", "limit_cycle_minus", "torus"):
        transient = read_trajectory(out / f"{attractor}_transient.csv")
        reference = read_trajectory(out / f"{attractor}_reference.csv")
        assert len(transient) == 1000
        assert len(reference) == 10000


def test_train_writes_model(model_file):
    model = load_model(model_file)
    assert model.config.n_nodes == 30
    assert model.config.topology_seed == 4
    assert model.w_out.shape == (31, 4)


def test_infer_writes_series_with_metadata(tmp_path, tiny_config_file,
                                           model_file):
    out = tmp_path / "gen.csv"
    assert main(["infer", "--config", tiny_config_file, "--model", model_file,
                 "--attractor", "torus", "--steps", "100",
                 "--out", str(out)]) == 0
    rows = np.loadtxt(out, delimiter=",", skiprows=1, ndmin=2)
    assert rows.shape[1] == 5
    assert len(rows) <= 100
    meta = json.loads((tmp_path / "gen.meta.json").read_text())
    assert meta["attractor_id"] == "torus"
    assert meta["scenario"] == "A"
    assert meta["model_file"] == model_file
    assert "diverged_at" in meta


def test_infer_unknown_attractor_fails(tmp_path, tiny_config_file, model_file,
                                       capsys):
    code = main(["infer", "--config", tiny_config_file, "--model", model_file,
                 "--attractor", "nope", "--out", str(tmp_path / "x.csv")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_evaluate_writes_report(tmp_path, tiny_config_file, model_file):
    out = tmp_path / "report.csv"
    assert main(["evaluate", "--config", tiny_config_file, "--model",
                 model_file, "--out", str(out)]) == 0
    rows = read_report(out)
    assert len(rows) == 3
    assert {r["attractor_id"] for r in rows} == {
        "limit_cycle_plus", "limit_cycle_minus", "torus"}
    assert rows[0]["seed"] == 4


def test_ensemble_writes_report_and_histogram(tmp_path, tiny_config_file):
    out = tmp_path / "runs"
    assert main(["ensemble", "--config", tiny_config_file, "--n-seeds", "2",
                 "--out", str(out), "--parallelism", "2"]) == 0
    rows = read_report(out / "report.csv")
    assert len(rows) == 6  # one row per (seed, attractor)
    assert sorted({r["seed"] for r in rows}) == [0, 1]
    hist_lines = (out / "histogram.csv").read_text().splitlines()
    assert hist_lines[0] == "bin_low,bin_high,count"
    counts = [int(line.split(",")[2]) for line in hist_lines[1:]]
    assert sum(counts) == 2


def test_histogram_rebins_report(tmp_path, tiny_config_file):
    runs = tmp_path / "runs"
    assert main(["ensemble", "--config", tiny_config_file,
                 "--out", str(runs)]) == 0
    out = tmp_path / "hist.csv"
    assert main(["histogram", "--report", str(runs / "report.csv"),
                 "--out", str(out), "--bin-width", "1", "--max", "4"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "bin_low,bin_high,count"
    assert len(lines) == 6  # 4 bins + overflow row + header
    counts = [int(line.split(",")[2]) for line in lines[1:]]
    assert sum(counts) == 2


@pytest.mark.slow
def test_evaluate_full_scale_magnitudes(tmp_path, model_a):
    from attractor_scout.io import save_model

    model_path = tmp_path / "model_a.npz"
    save_model(model_a, model_path)
    out = tmp_path / "report.csv"
    assert main(["evaluate", "--scenario", "A", "--model", str(model_path),
                 "--out", str(out)]) == 0
    rows = {r["attractor_id"]: r for r in read_report(out)}
    assert rows["limit_cycle_plus"]["delta_att"] < 0.05
    assert rows["limit_cycle_minus"]["delta_att"] < 0.15
    assert rows["torus"]["delta_att"] < 0.15
    assert rows["torus"]["class"] == "PartialSuccess"


def test_config_parse_error_cites_line(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n "scenario": oops\n}\n')
    code = main(["train", "--config", str(bad), "--out",
                 str(tmp_path / "m.npz")])
    assert code == 1
    err = capsys.readouterr().err
    assert "line 2" in err


def test_usage_error_prints_synopsis(capsys):
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err.lower()


def test_unknown_scenario_rejected(tmp_path, capsys):
    with pytest.raises(SystemExit):
        main(["generate-data", "--scenario", "Q", "--out", str(tmp_path)])
