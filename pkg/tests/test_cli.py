"""Command-line behavior: determinism, outputs, and error handling."""

import numpy as np
import pytest

from conftest import parse_listing
from fuzzynet import cli, dataio, layers, training


@pytest.fixture
def toy_csv(tmp_path):
    rng = np.random.default_rng(0)
    data = training.gate_dataset("xor")
    # replicate the truth table so a split always has both classes
    features = np.tile(data.features, (8, 1)) + rng.normal(0, 0.01, (32, 2))
    labels = np.tile(data.labels, 8)
    ds = dataio.Dataset(features, labels, data.class_names, data.feature_names)
    path = tmp_path / "toy.csv"
    dataio.save_csv(ds, path)
    return path


def run(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_train_writes_model_and_metrics(toy_csv, tmp_path, capsys):
    model = tmp_path / "m.flmodel"
    code, out, err = run(["train", "--data", str(toy_csv), "--epochs", "20",
                          "--lr", "0.1", "--hidden", "2", "--model-out", str(model),
                          "--seed", "3"], capsys)
    assert code == 0
    assert model.exists()
    lines = out.strip().splitlines()
    epoch_lines = [l for l in lines if l.split("\t")[0].isdigit()]
    assert len(epoch_lines) == 20
    assert epoch_lines[0].startswith("0\t")
    metrics = dict(l.split("\t")[:2] for l in lines if not l.split("\t")[0].isdigit())
    assert "train_error" in metrics and "validation_error" in metrics
    assert float(metrics["validation_error"]) <= 0.5
    assert "# config" in err
    loaded, meta = layers.load_model(model)
    assert meta["arch"] == "fuzzy"
    assert meta["config"]["epochs"] == 20
    assert loaded.class_names == ["false", "true"]


def test_train_is_byte_deterministic(toy_csv, tmp_path, capsys):
    blobs = []
    for name in ("a.flmodel", "b.flmodel"):
        model = tmp_path / name
        code, _, _ = run(["train", "--data", str(toy_csv), "--epochs", "5",
                          "--model-out", str(model), "--seed", "11"], capsys)
        assert code == 0
        blobs.append(model.read_bytes())
    assert blobs[0] == blobs[1]


def test_train_zero_epochs_saves_initialization(toy_csv, tmp_path, capsys):
    model = tmp_path / "init.flmodel"
    code, out, _ = run(["train", "--data", str(toy_csv), "--epochs", "0",
                        "--model-out", str(model), "--seed", "1"], capsys)
    assert code == 0
    network, _ = layers.load_model(model)
    # untouched uniform selector initialization survives
    selector = network.layers[4]
    assert np.all(selector.weights == selector.weights.flat[0])


def test_eval_command(toy_csv, tmp_path, capsys):
    model = tmp_path / "m.flmodel"
    run(["train", "--data", str(toy_csv), "--epochs", "30", "--lr", "0.1",
         "--model-out", str(model), "--seed", "2"], capsys)
    code, out, _ = run(["eval", "--model", str(model), "--data", str(toy_csv)], capsys)
    assert code == 0
    values = dict(line.split("\t", 1) for line in out.strip().splitlines())
    assert "error" in values
    assert values["rows"] == "32"


def test_extract_command(toy_csv, tmp_path, capsys):
    model = tmp_path / "m.flmodel"
    run(["train", "--data", str(toy_csv), "--epochs", "200", "--lr", "0.1",
         "--hidden", "2", "--model-out", str(model), "--seed", "5"], capsys)
    code, out, err = run(["extract", "--model", str(model)], capsys)
    assert code == 0
    parsed = parse_listing(out, hidden_vars=True)
    assert "c0" in parsed and "c1" in parsed
    assert "# class c0 = false" in err

    code, flat_out, _ = run(["extract", "--model", str(model), "--flatten"], capsys)
    assert code == 0
    assert set(parse_listing(flat_out)) == {"c0", "c1"}

    code, ast_out, _ = run(["extract", "--model", str(model), "--ast"], capsys)
    assert code == 0
    assert "(" in ast_out

    code, data_out, _ = run(["extract", "--model", str(model), "--flatten",
                             "--data", str(toy_csv)], capsys)
    assert code == 0
    assert any(l.startswith("snapped_error\t") for l in data_out.splitlines())


def test_gradcheck_command(capsys):
    code, out, _ = run(["gradcheck", "--seed", "4"], capsys)
    assert code == 0
    values = dict(line.split("\t", 1) for line in out.strip().splitlines())
    assert float(values["max_error"]) < 1e-4
    assert int(values["checked"]) > 0


def test_gates_command_small(capsys):
    code, out, err = run(["gates", "--seeds", "2", "--epochs", "500"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "gate\tseed\tconverged\tepochs"
    assert len(lines) == 1 + 8 * 2
    assert "overall convergence" in err
    # deterministic
    code2, out2, _ = run(["gates", "--seeds", "2", "--epochs", "500"], capsys)
    assert out2 == out


def test_compare_ops_command(capsys):
    # leading-dash values use the = form, per standard argparse rules
    code, out, _ = run(["compare-ops", "--pattern", "1,1,1", "--grid=-1:1:5"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 6
    assert lines[0].split("\t")[0] == "alpha"

    code, out, _ = run(["compare-ops", "--pattern", "1,-1,-1", "--grid", "0:0:1"], capsys)
    assert code == 0
    assert len(out.strip().splitlines()) == 2


def test_cli_errors(tmp_path, capsys):
    code, _, err = run(["compare-ops", "--pattern", "1,1"], capsys)
    assert code == cli.EXIT_ERROR
    assert "error:" in err

    code, _, err = run(["eval", "--model", str(tmp_path / "no.flmodel"),
                        "--data", str(tmp_path / "no.csv")], capsys)
    assert code == cli.EXIT_ERROR

    with pytest.raises(SystemExit) as exc:
        cli.main(["train", "--data", "x.csv", "--bogus-flag"])
    assert exc.value.code == 2

    with pytest.raises(SystemExit):
        cli.main(["not-a-command"])


def test_train_rejects_missing_label_column(toy_csv, capsys):
    code, _, err = run(["train", "--data", str(toy_csv), "--label-col", "nope",
                        "--epochs", "1"], capsys)
    assert code == cli.EXIT_ERROR
    assert "label column" in err
