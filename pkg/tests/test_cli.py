import json

import numpy as np
import pytest

from rosvm.cli import main


@pytest.fixture
def data_file(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, (60, 2))
    y = np.where(X[:, 0] - X[:, 1] > 0, 1, -1)
    p = tmp_path / "train.csv"
    p.write_text("\n".join(f"{int(l)},{float(a)!r},{float(b)!r}" for l, (a, b) in zip(y, X)))
    return p


def _payload(out):
    return json.loads(out[out.index("{"):])


def test_train_predict_robust_error(tmp_path, data_file, capsys):
    model, trace = tmp_path / "m.json", tmp_path / "trace.csv"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"data": {"path": str(data_file)}, "solver": {"epochs": 5, "lambda": 0.1,
                                                                            "trace_every": 30}}))
    rc = main(["train", "--config", str(cfg), "--output.model", str(model), "--output.trace", str(trace),
               "--features.D", "32", "--uncertainty.gamma", "0.05"])
    assert rc == 0
    res = _payload(capsys.readouterr().out)
    assert res["updates"] == 300 and res["objective"] < res["initial_objective"]
    assert res["features"] == 32
    assert trace.read_text().startswith("update_index,objective")
    meta = json.loads(model.read_text())["metadata"]
    assert meta["lambda"] == 0.1 and meta["epochs"] == 5

    rc = main(["predict", "--model", str(model), "--data.path", str(data_file)])
    assert rc == 0
    acc = _payload(capsys.readouterr().out)["accuracy"]
    assert acc == pytest.approx(res["train_accuracy"])

    report = tmp_path / "r.json"
    rc = main(["robust-error", "--model", str(model), "--data.path", str(data_file), "--verify.trials", "20",
               "--uncertainty.gamma", "0.1", "--output.report", str(report)])
    assert rc == 0
    out = _payload(capsys.readouterr().out)
    assert out["robust_error"] >= out["standard_error"]
    assert json.loads(report.read_text()) == out


def test_train_is_reproducible(tmp_path, data_file, capsys):
    for name in ("a", "b"):
        assert main(["train", "--data.path", str(data_file), "--solver.epochs", "2",
                     "--output.model", str(tmp_path / f"{name}.json"), "--seed", "11"]) == 0
    assert (tmp_path / "a.json").read_text() == (tmp_path / "b.json").read_text()


@pytest.mark.parametrize("kind", ["rff", "nystrom", "linear"])
def test_train_feature_kinds(tmp_path, data_file, capsys, kind):
    rc = main(["train", "--data.path", str(data_file), "--features.kind", kind, "--features.m", "10",
               "--solver.epochs", "3", "--output.model", str(tmp_path / "m.json")])
    assert rc == 0


def test_verify_bounds(capsys):
    rc = main(["verify-bounds", "--verify.trials", "500", "--verify.points", "2", "--verify.gammas", "[0, 0.5]"])
    assert rc == 0
    out = _payload(capsys.readouterr().out)
    assert out["violations"] == 0 and len(out["reports"]) == 3 * 2 * 2
    rc = main(["verify-bounds", "--features.kind", "nystrom", "--features.m", "10", "--verify.trials", "200",
               "--verify.points", "2", "--verify.gammas", "[0.1]"])
    assert rc == 0
    assert len(_payload(capsys.readouterr().out)["reports"]) == 2


def test_kernel_error(capsys):
    assert main(["kernel-error", "--features.D", "2000", "--verify.points", "10"]) == 0
    out = _payload(capsys.readouterr().out)
    assert out["pairs"] == 55 and out["max"] < 0.2 and out["dim"] == 2000


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["train"],
    ["train", "--no.such.field", "1"],
    ["train", "--features.kind", "nystrom", "--uncertainty.p", "1", "--data.path", "x"],
    ["train", "--pbar", "3", "--data.path", "x"],
    ["predict", "--data.path", "x"],
    ["train", "--config", "/nonexistent/cfg.json"],
    ["train", "--features.D"],
])
def test_usage_errors(argv, capsys):
    try:
        rc = main(argv)
    except SystemExit as exc:
        rc = exc.code
    assert rc == 1


def test_data_errors(tmp_path, capsys):
    bad = tmp_path / "bad.svm"
    bad.write_text("1 1:1\n1 2:1 1:3\n")
    assert main(["train", "--data.path", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err
    assert main(["train", "--data.path", str(tmp_path / "missing.svm")]) == 2
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    assert main(["predict", "--model", str(junk), "--data.path", str(bad)]) == 2


def test_diverged_exit_code(tmp_path, data_file, capsys):
    rc = main(["train", "--data.path", str(data_file), "--solver.method", "subgradient",
               "--solver.schedule", "constant", "--solver.eta0", "1e200", "--output.model", str(tmp_path / "m.json")])
    assert rc == 3
