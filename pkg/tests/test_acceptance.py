"""Acceptance suite: one test per acceptance criterion, at the stated
tolerances. Each prints an ACCEPTANCE line (run with -s to see them live).

Dataset criteria need files under data/; waveform.csv is generated on
demand (it is synthetic and deterministic), the four UCI files come from
scripts/fetch_data.py and their criteria skip with a reason when absent.
"""

import itertools
from pathlib import Path

import numpy as np
import pytest

from conftest import mixed_error, parse_listing, random_tiny_network
from fuzzynet import cli, dataio, extraction, layers, ops, training

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

# Per-dataset schedules for the ballpark runs. Epoch counts and rates are
# chosen for stable online SGD at each problem's pairing width within the
# suite's runtime budget; thresholds are the acceptance bounds.
DATASET_RUNS = {
    "waveform": dict(file="waveform.csv", threshold=0.20, learning_rate=0.001,
                     epochs=10, hidden=16),
    "breast-cancer": dict(file="breast-cancer.csv", threshold=0.06, learning_rate=0.01,
                          epochs=200, hidden=16),
    "diabetes": dict(file="diabetes.csv", threshold=0.30, learning_rate=0.01,
                     epochs=200, hidden=16),
    "yeast": dict(file="yeast.csv", threshold=0.60, learning_rate=0.005,
                  epochs=300, hidden=16),
    "vehicle": dict(file="vehicle.csv", threshold=0.40, learning_rate=0.005,
                    epochs=300, hidden=16),
}
SEEDS = (1, 2, 3, 4, 5)


def report(criterion, status, detail=""):
    print(f"ACCEPTANCE {criterion}: {status} {detail}".rstrip())


def ensure_waveform():
    DATA_DIR.mkdir(exist_ok=True)
    path = DATA_DIR / "waveform.csv"
    if not path.exists():
        dataio.save_csv(dataio.generate_waveform(5000, seed=0), path)
    return path


def dataset_path(name):
    if name == "waveform":
        return ensure_waveform()
    path = DATA_DIR / DATASET_RUNS[name]["file"]
    if not path.exists():
        pytest.skip(f"{path.name} not present (no network to UCI in this environment; "
                    "run scripts/fetch_data.py where downloads are possible)")
    return path


def train_on_dataset(name, seed):
    run = DATASET_RUNS[name]
    data = dataio.load_csv(dataset_path(name), "class")
    train_set, val_set = dataio.split(data, dataio.SplitSpec(0.7, seed))
    normalizer = dataio.fit_normalizer(train_set)
    network = layers.build_fuzzy_network(normalizer, data.n_classes,
                                         hidden_width=run["hidden"], logic_depth=2,
                                         rng=np.random.default_rng([2, seed]),
                                         class_names=data.class_names,
                                         feature_names=data.feature_names)
    config = training.TrainConfig(learning_rate=run["learning_rate"],
                                  epochs=run["epochs"], seed=seed,
                                  hidden_width=run["hidden"])
    training.train(network, train_set, config)
    return network, train_set, val_set


_model_cache = {}


def trained_model(name, seed):
    key = (name, seed)
    if key not in _model_cache:
        _model_cache[key] = train_on_dataset(name, seed)
    return _model_cache[key]


# ---------------------------------------------------------------------------
# Criterion 1: operator exactness on boolean inputs (zero tolerance).

def test_criterion_1_operator_exactness():
    for op in ops.ALL_OPS:
        for inputs, expected in ops.boolean_table(op, remapped=True).items():
            assert float(ops.op_via_gate(op, *inputs)) == expected, (op, inputs)
    report(1, "PASS", "all eight operators plus constants exact on {-1,1} inputs")


# ---------------------------------------------------------------------------
# Criterion 2: gradient fidelity (1e-5 pointwise, 1e-4 whole network).

def test_criterion_2_gradient_fidelity():
    rng = np.random.default_rng(20)
    worst = 0.0
    for _ in range(1000):
        x, y = rng.uniform(-1.0, 1.0, 2)
        alpha = rng.uniform(0.05, 1.0) * (1 if rng.random() < 0.5 else -1)
        h = 1e-5
        pairs = [
            (ops.gate_abs_dx(x, y, alpha),
             (ops.gate_abs(x + h, y, alpha) - ops.gate_abs(x - h, y, alpha)) / (2 * h)),
            (ops.gate_abs_dy(x, y, alpha),
             (ops.gate_abs(x, y + h, alpha) - ops.gate_abs(x, y - h, alpha)) / (2 * h)),
            (ops.gate_abs_dalpha(x, y, alpha),
             (ops.gate_abs(x, y, alpha + h) - ops.gate_abs(x, y, alpha - h)) / (2 * h)),
        ]
        for analytic, numeric in pairs:
            worst = max(worst, mixed_error(float(analytic), float(numeric)))
    assert worst < 1e-5

    net_worst = 0.0
    for setting in range(50):
        net_rng = np.random.default_rng([4, setting])
        network = random_tiny_network(net_rng)
        x = net_rng.uniform(-1.0, 1.0, 3)
        check = training.grad_check(network, x, label=int(net_rng.integers(0, 2)))
        net_worst = max(net_worst, check.max_error)
    assert net_worst < 1e-4
    report(2, "PASS", f"pointwise worst {worst:.2e}, whole-network worst {net_worst:.2e}")


# ---------------------------------------------------------------------------
# Criterion 3: flat-line invariants on a 10,001-point grid (1e-12).

def test_criterion_3_flat_lines():
    grid = np.linspace(-2.0, 2.0, 10001)
    assert np.max(np.abs(ops.gate_abs(1.0, -1.0, grid) + 1.0)) < 1e-12
    positive = grid[grid >= 0]
    assert np.max(np.abs(ops.gate_abs(1.0, 1.0, positive) - 1.0)) < 1e-12
    negative = grid[grid <= 0]
    assert np.max(np.abs(ops.gate_abs(-1.0, -1.0, negative) - 1.0)) < 1e-12
    report(3, "PASS", "three flat lines hold over 10,001 alphas in [-2, 2]")


# ---------------------------------------------------------------------------
# Criterion 4: gradient-behavior comparison of the three operator forms.

def test_criterion_4_operator_comparison():
    grid = np.linspace(-1.0, 1.0, 81)
    tt = training.compare_operators((1.0, 1.0, 1.0), grid)
    positive = grid > 0
    assert np.all(np.abs(tt["eq2_slope"][positive]) < 1e-12)
    at_half = np.isclose(grid, 0.5)
    assert np.all(np.abs(tt["eq1_slope"][at_half]) > 1e-3)

    tf = training.compare_operators((1.0, -1.0, -1.0), grid)
    assert np.all(np.abs(tf["eq2_slope"]) < 1e-12)
    assert np.any(np.abs(tf["eq1_slope"]) > 1e-3)
    assert np.any(np.abs(tf["eq3_slope"]) > 1e-3)
    report(4, "PASS", "production operator flat where patterns are uninformative; "
                      "alternatives are not")


# ---------------------------------------------------------------------------
# Criterion 5: gate learnability, production operator vs the smooth form.

def test_criterion_5_gate_learning():
    lr = 0.1
    eq2_by_gate = {}
    for gate in ops.GATES:
        runs = [training.train_gate(gate, seed, learning_rate=lr)[0]
                for seed in range(100)]
        eq2_by_gate[gate] = sum(r.converged for r in runs)
        assert eq2_by_gate[gate] >= 95, (gate, eq2_by_gate[gate])

    eq2_xor_family = eq2_by_gate["xor"] + eq2_by_gate["nxor"]
    eq1_xor_family = 0
    for gate in ("xor", "nxor"):
        runs = [training.train_gate(gate, seed, pair_op=ops.OP_EQ1, learning_rate=lr)[0]
                for seed in range(100)]
        eq1_xor_family += sum(r.converged for r in runs)
    assert eq1_xor_family < eq2_xor_family
    report(5, "PASS", f"eq2 converged {min(eq2_by_gate.values())}..100 per gate; "
                      f"xor-family aggregate eq2 {eq2_xor_family} vs eq1 {eq1_xor_family}")


# ---------------------------------------------------------------------------
# Criterion 6: dataset ballparks, mean error over five stratified splits.

@pytest.mark.parametrize("name", sorted(DATASET_RUNS))
def test_criterion_6_dataset_ballparks(name):
    threshold = DATASET_RUNS[name]["threshold"]
    errors = []
    for seed in SEEDS:
        network, _, val_set = trained_model(name, seed)
        errors.append(training.evaluate(network, val_set).misclassification_rate)
    mean = float(np.mean(errors))
    status = "PASS" if mean <= threshold else "FAIL"
    report(6, status, f"{name}: mean validation error {mean:.4f} (bound {threshold})")
    assert mean <= threshold, (name, errors)


# ---------------------------------------------------------------------------
# Criterion 7: snapping behavior.

def test_criterion_7_snapped_error_near_unsnapped_breast_cancer():
    network, _, val_set = trained_model("breast-cancer", 1)
    unsnapped = training.evaluate(network, val_set).misclassification_rate
    snapped = extraction.eval_snapped(extraction.snap_network(network), val_set)
    gap = abs(snapped.misclassification_rate - unsnapped)
    status = "PASS" if gap <= 0.05 else "FAIL"
    report(7, status, f"breast-cancer snapped gap {gap:.4f}")
    assert gap <= 0.05


def test_criterion_7_expressions_parse_and_dual_path_exact():
    rng = np.random.default_rng(70)
    checked = []
    for name in sorted(DATASET_RUNS):
        if name != "waveform" and not (DATA_DIR / DATASET_RUNS[name]["file"]).exists():
            continue
        network, train_set, _ = trained_model(name, 1)
        snapped = extraction.snap_network(network)
        logic = extraction.build_expressions(snapped)

        listing = extraction.render_listing(logic, flatten=True)
        parse_listing(listing)
        listing_blocks = extraction.render_listing(logic)
        parse_listing(listing_blocks, hidden_vars=True)

        mins, maxs = train_set.features.min(axis=0), train_set.features.max(axis=0)
        span = np.where(maxs > mins, maxs - mins, 1.0)
        raw = rng.uniform(mins - 0.1 * span, maxs + 0.1 * span,
                          size=(1000, train_set.n_features))
        normalized = snapped.layers[1].forward(raw)
        ast_scores = extraction.evaluate_blocks(logic, normalized)
        for row in range(raw.shape[0]):
            assert np.array_equal(snapped.scores(raw[row]), ast_scores[row]), (name, row)
        checked.append(name)

    # gate models give small human-readable expressions; check those too
    for gate in ("and", "or"):
        data = training.gate_dataset(gate)
        config = training.TrainConfig(learning_rate=0.1, epochs=1500, seed=7,
                                      hidden_width=1, logic_depth=1)
        network = layers.build_fuzzy_network(dataio.fit_normalizer(data), 2,
                                             hidden_width=1, logic_depth=1,
                                             rng=np.random.default_rng([2, 7]),
                                             class_names=data.class_names,
                                             feature_names=data.feature_names)
        training.train(network, data, config)
        snapped = extraction.snap_network(network)
        logic = extraction.build_expressions(snapped)
        parse_listing(extraction.render_listing(logic, flatten=True))
        corners = data.features
        ast_scores = extraction.evaluate_blocks(
            logic, snapped.layers[1].forward(corners))
        for row in range(corners.shape[0]):
            assert np.array_equal(snapped.scores(corners[row]), ast_scores[row])
        checked.append(f"{gate}-gate")
    report(7, "PASS", f"grammar + exact dual path on: {', '.join(checked)}")


# ---------------------------------------------------------------------------
# Criterion 8: byte-identical model files under identical flags and seed.

def test_criterion_8_cli_determinism(tmp_path, capsys):
    ensure_waveform()
    small = dataio.load_csv(DATA_DIR / "waveform.csv", "class")
    subset = small.take(np.arange(300))
    csv_path = tmp_path / "subset.csv"
    dataio.save_csv(subset, csv_path)
    blobs = []
    for name in ("one.flmodel", "two.flmodel"):
        out = tmp_path / name
        code = cli.main(["train", "--data", str(csv_path), "--epochs", "3",
                         "--model-out", str(out), "--seed", "42"])
        capsys.readouterr()
        assert code == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]
    report(8, "PASS", f"model files byte-identical ({len(blobs[0])} bytes)")


# ---------------------------------------------------------------------------
# Criterion 9: the DNN baseline harness.

def test_criterion_9_dnn_baseline_breast_cancer():
    path = DATA_DIR / "breast-cancer.csv"
    if not path.exists():
        report(9, "SKIP", "breast-cancer.csv absent; harness demonstrated on "
                          "waveform by test_dnn_harness_on_waveform instead")
        pytest.skip("breast-cancer.csv not present (no network to UCI here); "
                    "see test_dnn_harness_on_waveform for the harness check")
    data = dataio.load_csv(path, "class")
    errors = []
    for seed in SEEDS:
        train_set, val_set = dataio.split(data, dataio.SplitSpec(0.7, seed))
        network = layers.build_dnn(dataio.fit_normalizer(train_set), data.n_classes,
                                   hidden_width=32, rng=np.random.default_rng([2, seed]),
                                   class_names=data.class_names,
                                   feature_names=data.feature_names)
        config = training.TrainConfig(learning_rate=0.01, epochs=100, seed=seed)
        training.train(network, train_set, config)
        errors.append(training.evaluate(network, val_set).misclassification_rate)
    mean = float(np.mean(errors))
    status = "PASS" if mean <= 0.06 else "FAIL"
    report(9, status, f"DNN breast-cancer mean error {mean:.4f}")
    assert mean <= 0.06


def test_dnn_harness_on_waveform():
    # Not an acceptance criterion by itself: demonstrates the baseline
    # harness end to end on the always-available dataset.
    ensure_waveform()
    data = dataio.load_csv(DATA_DIR / "waveform.csv", "class")
    train_set, val_set = dataio.split(data, dataio.SplitSpec(0.7, 1))
    network = layers.build_dnn(dataio.fit_normalizer(train_set), data.n_classes,
                               hidden_width=32, rng=np.random.default_rng([2, 1]),
                               class_names=data.class_names,
                               feature_names=data.feature_names)
    config = training.TrainConfig(learning_rate=0.005, epochs=10, seed=1)
    training.train(network, train_set, config)
    error = training.evaluate(network, val_set).misclassification_rate
    report("9-aux", "PASS" if error <= 0.20 else "FAIL",
           f"DNN waveform validation error {error:.4f}")
    assert error <= 0.20
