"""Online gradient-descent training, evaluation, and gradient checking.

Training is plain online SGD: one forward/backward/update cycle per row,
squared error against a +-1 one-hot target at the final selector outputs.
The max head is inference-only. Row order is shuffled per epoch from a
deterministic seed sequence, so a (config, dataset, seed) triple always
produces the same parameter trajectory bit for bit.

An optional RMSProp mode rescales the data gradient by a running second
moment before the layer update rules (L1 and clamping are applied by the
layers exactly as in plain SGD). It is off by default.
"""

from dataclasses import dataclass, asdict, field

import numpy as np

from . import ops
from .dataio import DataError, Dataset, fit_normalizer
from .layers import (FeatureSelectorLayer, FuzzyLayer, LinearLayer,
                     NormalizerLayer, build_fuzzy_network)

RMSPROP_DECAY = 0.9
RMSPROP_FLOOR = 1e-8


@dataclass
class TrainConfig:
    """Hyperparameters for one training run."""

    learning_rate: float = 0.01
    l1_coefficient: float = 0.0001
    epsilon: float = 0.001
    epochs: int = 500
    seed: int = 0
    hidden_width: int = 16
    logic_depth: int = 2
    rmsprop: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.l1_coefficient < 0:
            raise ValueError("l1_coefficient must be non-negative")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.hidden_width < 1 or self.logic_depth < 1:
            raise ValueError("hidden_width and logic_depth must be positive")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")

    def to_dict(self):
        return asdict(self)


@dataclass
class EvalReport:
    """Misclassification rate with per-class confusion counts."""

    misclassification_rate: float
    confusion: np.ndarray  # [true class, predicted class]
    total: int

    def __post_init__(self):
        assert int(self.confusion.sum()) == self.total


def encode_targets(label, n_classes):
    """Logic-domain one-hot: +1 at the label position, -1 elsewhere."""
    if not 0 <= label < n_classes:
        raise ValueError(f"label {label} out of range for {n_classes} classes")
    target = np.full(n_classes, -1.0)
    target[label] = 1.0
    return target


def row_loss(network, features, target):
    """Squared error of the class scores against a +-1 target vector."""
    diff = network.scores(features) - target
    return float(diff @ diff)


def _rmsprop_scale(state, key, grad):
    acc = state.get(key)
    if acc is None:
        acc = np.zeros_like(grad)
    acc = RMSPROP_DECAY * acc + (1.0 - RMSPROP_DECAY) * grad * grad
    state[key] = acc
    return grad / np.sqrt(acc + RMSPROP_FLOOR)


def _apply_updates(network, grads, config, rms_state):
    for idx, layer in network.trainable_layers():
        grad = grads[idx]
        if isinstance(layer, FuzzyLayer):
            if rms_state is not None:
                grad = _rmsprop_scale(rms_state, (idx, "alphas"), grad)
            layer.update(grad, config.learning_rate, config.epsilon)
        elif isinstance(layer, FeatureSelectorLayer):
            if rms_state is not None:
                grad = _rmsprop_scale(rms_state, (idx, "weights"), grad)
            layer.update(grad, config.learning_rate, config.l1_coefficient)
        elif isinstance(layer, LinearLayer):
            if rms_state is not None:
                grad = (_rmsprop_scale(rms_state, (idx, "weights"), grad[0]),
                        _rmsprop_scale(rms_state, (idx, "bias"), grad[1]))
            layer.update(grad, config.learning_rate)


def train_epoch(network, dataset, config, rng, rms_state=None):
    """One pass over the dataset in shuffled order; returns the mean row loss.

    Every row is visited exactly once. The loss reported is the squared
    error measured at presentation time (before that row's update takes
    effect on later rows).
    """
    if dataset.n_rows == 0:
        raise DataError("cannot train on an empty dataset")
    k = dataset.n_classes
    total = 0.0
    if rms_state is None and config.rmsprop:
        rms_state = {}
    for row in rng.permutation(dataset.n_rows):
        x = dataset.features[row]
        target = encode_targets(int(dataset.labels[row]), k)
        scores, inputs = network.forward_trace(x)
        diff = scores - target
        total += float(diff @ diff)
        grads = network.backward_trace(inputs, 2.0 * diff)
        _apply_updates(network, grads, config, rms_state)
    return total / dataset.n_rows


def train(network, dataset, config, on_epoch=None):
    """Run the full training schedule; returns the per-epoch mean losses.

    ``on_epoch(index, loss)`` is invoked after each epoch; returning True
    stops early (used by convergence experiments). Epoch shuffles come
    from the deterministic stream (3, seed, epoch).
    """
    losses = []
    rms_state = {} if config.rmsprop else None
    for epoch in range(config.epochs):
        rng = np.random.default_rng([3, config.seed, epoch])
        loss = train_epoch(network, dataset, config, rng, rms_state)
        losses.append(loss)
        if on_epoch is not None and on_epoch(epoch, loss):
            break
    return losses


def evaluate(network, dataset):
    """Score a dataset with the max head; no parameters are touched.

    Row results are independent of evaluation order, so this is safe to
    parallelize over rows if ever needed.
    """
    if dataset.n_rows == 0:
        raise DataError("cannot evaluate an empty dataset")
    k = dataset.n_classes
    confusion = np.zeros((k, k), dtype=int)
    for x, label in zip(dataset.features, dataset.labels):
        confusion[int(label), network.predict(x)] += 1
    wrong = dataset.n_rows - int(np.trace(confusion))
    return EvalReport(wrong / dataset.n_rows, confusion, dataset.n_rows)


# ---------------------------------------------------------------------------
# Gradient checking.

@dataclass
class GradCheckEntry:
    layer_index: int
    param_name: str
    flat_index: int
    analytic: float
    numeric: float
    error: float


@dataclass
class GradCheckReport:
    entries: list
    tolerance: float

    @property
    def max_error(self):
        return max((e.error for e in self.entries), default=0.0)

    def failures(self):
        return [e for e in self.entries if e.error > self.tolerance]

    @property
    def passed(self):
        return not self.failures()


def _mixed_error(a, b):
    # Relative for large magnitudes, absolute near zero; the standard
    # guard against meaningless ratios of two vanishing gradients.
    return abs(a - b) / max(1.0, abs(a), abs(b))


def grad_check(network, features, label=0, tolerance=1e-4, fd_step=1e-5, target=None):
    """Compare analytic loss gradients to central finite differences.

    Checks every trainable parameter of the network on a single row.
    Requires |alpha| >= 2*fd_step everywhere so the difference stencil
    never straddles the discontinuity at zero. The loss target defaults to
    the encoded label; pass ``target`` to probe other error signals.
    """
    features = np.asarray(features, dtype=float)
    if target is None:
        target = encode_targets(label, len(network.class_names))
    for _, layer in network.trainable_layers():
        if isinstance(layer, FuzzyLayer) and np.any(np.abs(layer.alphas) < 2 * fd_step):
            raise ValueError("grad_check requires alphas away from zero")

    scores, inputs = network.forward_trace(features)
    grads = network.backward_trace(inputs, 2.0 * (scores - target))

    entries = []
    for idx, layer in network.trainable_layers():
        layer_grads = grads[idx]
        if isinstance(layer, LinearLayer):
            named = dict(zip(("weights", "bias"), layer_grads))
        else:
            named = {layer.param_items()[0][0]: layer_grads}
        for name, array in layer.param_items():
            flat = array.reshape(-1)
            analytic = np.asarray(named[name]).reshape(-1)
            for j in range(flat.size):
                saved = flat[j]
                flat[j] = saved + fd_step
                up = row_loss(network, features, target)
                flat[j] = saved - fd_step
                down = row_loss(network, features, target)
                flat[j] = saved
                numeric = (up - down) / (2.0 * fd_step)
                exact = float(analytic[j])
                entries.append(GradCheckEntry(idx, name, j, exact, numeric,
                                              _mixed_error(exact, numeric)))
    return GradCheckReport(entries, tolerance)


def build_reference_network(seed=0, n_inputs=3, n_classes=2, hidden_width=2):
    """Small fixed topology plus a data row, for gradient-check runs."""
    rng = np.random.default_rng([2, seed])
    stats = np.tile([[-1.0], [1.0]], (1, n_inputs))
    normalizer = NormalizerLayer(stats[0], stats[1])
    network = build_fuzzy_network(normalizer, n_classes, hidden_width=hidden_width,
                                  logic_depth=2, rng=rng)
    features = rng.uniform(-1.0, 1.0, size=n_inputs)
    label = int(rng.integers(0, n_classes))
    return network, features, label


# ---------------------------------------------------------------------------
# Operator comparison (gradient behavior of the three candidate forms).

def compare_operators(pattern, alpha_grid, fd_step=1e-5):
    """Outputs and squared-error slopes of all three pair operators.

    ``pattern`` is (x, y, target). For each grid alpha the slope is the
    central finite difference of (op(x, y, a) - target)^2 with respect to
    a, which is what a gradient step would act on. Returns a dict of
    columns keyed alpha / <op>_out / <op>_slope.
    """
    x, y, target = (float(v) for v in pattern)
    grid = np.asarray(alpha_grid, dtype=float)
    columns = {"alpha": grid}
    for name in (ops.OP_EQ1, ops.OP_EQ2, ops.OP_EQ3):
        fn = ops.PAIR_OPS[name][0]
        columns[f"{name}_out"] = np.array([float(fn(x, y, a)) for a in grid])

        def loss(a, fn=fn):
            diff = float(fn(x, y, a)) - target
            return diff * diff

        columns[f"{name}_slope"] = np.array(
            [(loss(a + fd_step) - loss(a - fd_step)) / (2.0 * fd_step) for a in grid])
    return columns


def compare_operators_tsv(columns):
    """Render compare_operators output as TSV with a header line."""
    keys = ["alpha"]
    for name in (ops.OP_EQ1, ops.OP_EQ2, ops.OP_EQ3):
        keys.append(f"{name}_out")
    for name in (ops.OP_EQ1, ops.OP_EQ2, ops.OP_EQ3):
        keys.append(f"{name}_slope")
    lines = ["\t".join(keys)]
    for i in range(len(columns["alpha"])):
        lines.append("\t".join(repr(float(columns[k][i])) for k in keys))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Gate-learning experiments: can a small network learn each boolean gate
# from its remapped truth table?

def gate_dataset(op):
    """Full remapped truth table of a gate as a two-class dataset."""
    table = ops.boolean_table(op, remapped=True)
    if op in ops.CONST_OPS:
        raise ValueError("constants are not learnable gates")
    rows = sorted(table.items())
    features = np.array([list(inputs) for inputs, _ in rows], dtype=float)
    labels = np.array([0 if out < 0 else 1 for _, out in rows])
    names = [f"x{i}" for i in range(features.shape[1])]
    return Dataset(features, labels, ["false", "true"], names)


@dataclass
class GateRun:
    gate: str
    seed: int
    converged: bool
    epochs_used: int
    losses: list = field(repr=False, default_factory=list)


def train_gate(op, seed, max_epochs=2000, pair_op=ops.OP_EQ2, learning_rate=0.01,
               l1_coefficient=0.0001, epsilon=0.001, keep_losses=False):
    """Train a depth-1 network on one gate's truth table.

    Convergence means zero classification error on the table; training
    stops at the first epoch that reaches it. Returns (GateRun, network).
    """
    data = gate_dataset(op)
    config = TrainConfig(learning_rate=learning_rate, l1_coefficient=l1_coefficient,
                         epsilon=epsilon, epochs=max_epochs, seed=seed,
                         hidden_width=1, logic_depth=1)
    network = build_fuzzy_network(fit_normalizer(data), data.n_classes,
                                  hidden_width=config.hidden_width, logic_depth=1,
                                  rng=np.random.default_rng([2, seed]),
                                  epsilon=epsilon, pair_op=pair_op,
                                  class_names=data.class_names,
                                  feature_names=data.feature_names)
    state = {"converged": False, "epochs": max_epochs}

    def check(epoch, loss):
        if evaluate(network, data).misclassification_rate == 0.0:
            state["converged"] = True
            state["epochs"] = epoch + 1
            return True
        return False

    # Divergence (overflowing scores) is an expected outcome for the
    # unstable operator variants; it simply counts as non-convergence.
    with np.errstate(over="ignore", invalid="ignore"):
        losses = train(network, data, config, on_epoch=check)
    run = GateRun(op, seed, state["converged"], state["epochs"],
                  losses if keep_losses else [])
    return run, network


def run_gate_convergence(gates=ops.GATES, seeds=range(100), max_epochs=2000,
                         pair_op=ops.OP_EQ2, learning_rate=0.01):
    """GateRun records for every (gate, seed) combination."""
    runs = []
    for gate in gates:
        for seed in seeds:
            run, _ = train_gate(gate, seed, max_epochs=max_epochs,
                                pair_op=pair_op, learning_rate=learning_rate)
            runs.append(run)
    return runs
