"""CLI: exit codes, artifacts, determinism across repeated invocations."""

import os

import numpy as np
import pytest

from neuedge import netio
from neuedge.cli import main
from neuedge.datasets import make_blobs


@pytest.fixture()
def dataset_file(tmp_path):
    data = make_blobs(n_samples=48, seed=5)
    path = str(tmp_path / "blobs.csv")
    netio.save_dataset_text(data.features, data.labels, data.n_classes, path)
    return path


@pytest.fixture(autouse=True)
def fast_training(monkeypatch):
    monkeypatch.setenv("NEUEDGE_TRAINER_EPOCHS", "2")


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_train_writes_artifacts(tmp_path, dataset_file, capsys):
    out = str(tmp_path / "out")
    rc = main(["train", "--dataset", dataset_file, "--out", out, "--seed", "1"])
    assert rc == 0
    for name in ("network.txt", "mapping.txt", "history.csv", "summary.md"):
        assert os.path.exists(os.path.join(out, name))
    assert "val accuracy" in capsys.readouterr().out


def test_map_writes_mapping_and_utilization(tmp_path, capsys):
    out = str(tmp_path / "out")
    rc = main(["map", "--network", "desk-mlp", "--out", out])
    assert rc == 0
    assert os.path.exists(os.path.join(out, "mapping.txt"))
    util = netio.load_kv_csv(os.path.join(out, "utilization.csv"))
    assert "core_utilization_pct" in util and "hw_loss" in util
    assert "inter-core traffic" in capsys.readouterr().out


def test_run_reports_and_adaptive_trajectory(tmp_path, dataset_file, capsys):
    out = str(tmp_path / "out")
    rc = main(["run", "--dataset", dataset_file, "--out", out, "--adaptive", "on"])
    assert rc == 0
    rep = netio.load_kv_csv(os.path.join(out, "run_report.csv"))
    assert rep["adaptive"] == "on"
    assert float(rep["accuracy"]) >= 0.0
    energy = netio.load_kv_csv(os.path.join(out, "energy_report.csv"))
    assert float(energy["e_total_j"]) > 0
    assert os.path.exists(os.path.join(out, "activity.csv"))
    stdout = capsys.readouterr().out
    assert "latency stages" in stdout  # timings shown, never persisted


def test_repeated_runs_byte_identical(tmp_path, dataset_file):
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    for out in (out1, out2):
        assert main(["run", "--dataset", dataset_file, "--out", out,
                     "--seed", "9"]) == 0
    for name in ("run_report.csv", "energy_report.csv"):
        assert _read(os.path.join(out1, name)) == _read(os.path.join(out2, name))


def test_repeated_training_byte_identical(tmp_path, dataset_file):
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    for out in (out1, out2):
        assert main(["train", "--dataset", dataset_file, "--out", out,
                     "--seed", "4"]) == 0
    for name in ("network.txt", "mapping.txt", "history.csv", "summary.md"):
        assert _read(os.path.join(out1, name)) == _read(os.path.join(out2, name))


def test_missing_dataset_is_usage_error(tmp_path, capsys):
    rc = main(["run", "--out", str(tmp_path / "out")])
    assert rc == 1
    err = capsys.readouterr().err
    assert "--dataset" in err or "dataset" in err

    rc = main(["run", "--dataset", "nowhere.csv", "--out", str(tmp_path / "o2")])
    assert rc == 1
    assert "not found" in capsys.readouterr().err


def test_unknown_flag_and_missing_command_exit_1(capsys):
    assert main(["run", "--bogus"]) == 1
    assert main([]) == 1


def test_bad_config_file_exit_1(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("mystery = 1\n")
    rc = main(["show-config", "--config", str(cfg)])
    assert rc == 1
    assert "run.cfg:1" in capsys.readouterr().err


def test_computation_error_exit_2(tmp_path, dataset_file, capsys):
    # chip too small for the network: a computation-domain failure
    chip = tmp_path / "tiny_chip.cfg"
    chip.write_text("name = tiny\nn_cores = 1\nneurons_per_core = 2\n"
                    "synapses_per_core = 4\n")
    rc = main(["train", "--dataset", dataset_file, "--chip", str(chip),
               "--out", str(tmp_path / "out")])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_show_config_prints_merged_values(tmp_path, capsys):
    rc = main(["show-config", "--seed", "123"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "seed = 123" in out
    assert "encoder.scheme = hybrid" in out


def test_report_builds_tables_and_plots(tmp_path, dataset_file, capsys):
    run_out = str(tmp_path / "run1")
    assert main(["run", "--dataset", dataset_file, "--out", run_out]) == 0
    run_out2 = str(tmp_path / "run2")
    assert main(["run", "--dataset", dataset_file, "--out", run_out2,
                 "--adaptive", "on"]) == 0
    rep_out = str(tmp_path / "rep")
    rc = main(["report", os.path.join(run_out, "run_report.csv"),
               os.path.join(run_out2, "run_report.csv"), "--out", rep_out])
    assert rc == 0
    text = open(os.path.join(rep_out, "report.md")).read()
    assert "spike ratio" in text
    for png in ("spikes.png", "energy.png"):
        assert os.path.getsize(os.path.join(rep_out, png)) > 0


def test_report_skips_unreadable_and_fails_when_none(tmp_path, capsys):
    rc = main(["report", str(tmp_path / "missing.csv"),
               "--out", str(tmp_path / "rep")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "skipping" in err
