"""Network layers: pairing, fuzzy gates, feature selection, and support layers.

Layers are stateless with respect to activations: ``forward(x)`` computes an
output and ``backward(x, blame)`` recomputes what it needs from the same
input, returning ``(input_blame, grads)``. Parameters are only mutated by
the explicit ``update`` methods, so forward/backward may run concurrently
across rows while updates remain single-writer.

The fuzzy stack for ``logic_depth`` d is:

    identity, normalizer, [allpairings, fuzzy, featureselector] * d, max

with a tanh squash between consecutive logic blocks (10 layers at d = 2).
A pair stream between AllPairings and Fuzzy is a (2, P) array holding left
and right operands for P downstream gate units.
"""

import json

import numpy as np

from . import ops

MODEL_FORMAT = "flmodel/1"
TRUE_BIAS = 1.0
FALSE_BIAS = -1.0


class LayerError(ValueError):
    """Raised on width mismatches and malformed layer inputs."""


class IdentityLayer:
    """Pass-through layer (the input layer of every topology)."""

    def forward(self, x):
        return x

    def backward(self, x, blame):
        return blame, None


class NormalizerLayer:
    """Linear membership function mapping each column into [-1, 1].

    Fitted with per-column (min, max) from training data. Out-of-range
    inputs are clamped; constant columns map to 0.
    """

    def __init__(self, mins, maxs):
        self.mins = np.asarray(mins, dtype=float)
        self.maxs = np.asarray(maxs, dtype=float)
        if self.mins.shape != self.maxs.shape or self.mins.ndim != 1:
            raise LayerError("normalizer statistics must be matching vectors")
        if np.any(self.maxs < self.mins):
            raise LayerError("normalizer max below min")

    @classmethod
    def fit(cls, features):
        features = np.asarray(features, dtype=float)
        if features.ndim != 2 or features.shape[0] == 0:
            raise LayerError("fit expects a non-empty row matrix")
        return cls(features.min(axis=0), features.max(axis=0))

    @property
    def width(self):
        return self.mins.size

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.width:
            raise LayerError(f"expected width {self.width}, got {x.shape[-1]}")
        span = self.maxs - self.mins
        safe = np.where(span > 0, span, 1.0)
        # (x - min)/span is exactly 1 at the fitted max and 0 at the min,
        # so training rows reach the interval endpoints exactly.
        out = np.where(span > 0, 2.0 * ((x - self.mins) / safe) - 1.0, 0.0)
        return np.clip(out, -1.0, 1.0)

    def backward(self, x, blame):
        span = self.maxs - self.mins
        scale = np.where(span > 0, 2.0 / np.where(span > 0, span, 1.0), 0.0)
        return blame * scale, None


class AllPairingsLayer:
    """Emits every unordered input pair plus each input paired with true/false.

    For n inputs the pair stream has n(n-1)/2 + 2n slots, ordered as all
    (i, j) with i < j lexicographically, then (i, true) for each i, then
    (i, false) for each i. Parameter-free; backward sums slot blame back
    onto the inputs (bias slots contribute nothing upstream).
    """

    def __init__(self, input_width):
        if input_width < 1:
            raise LayerError("AllPairings needs at least one input")
        self.input_width = input_width
        left, right = [], []
        for i in range(input_width):
            for j in range(i + 1, input_width):
                left.append(i)
                right.append(j)
        true_slot, false_slot = input_width, input_width + 1
        for i in range(input_width):
            left.append(i)
            right.append(true_slot)
        for i in range(input_width):
            left.append(i)
            right.append(false_slot)
        self.left_index = np.array(left, dtype=np.intp)
        self.right_index = np.array(right, dtype=np.intp)

    @property
    def pair_count(self):
        n = self.input_width
        return n * (n - 1) // 2 + 2 * n

    def pairing_index(self):
        """Pair sources as (left, right) tuples; "T"/"F" mark bias slots."""
        n = self.input_width

        def name(k):
            if k == n:
                return "T"
            if k == n + 1:
                return "F"
            return int(k)

        return [(name(l), name(r)) for l, r in zip(self.left_index, self.right_index)]

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.input_width,):
            raise LayerError(f"expected {self.input_width} inputs, got {x.shape}")
        ext = np.concatenate([x, [TRUE_BIAS, FALSE_BIAS]])
        stream = np.empty((2, self.pair_count))
        stream[0] = ext[self.left_index]
        stream[1] = ext[self.right_index]
        return stream

    def backward(self, x, blame):
        if blame.shape != (2, self.pair_count):
            raise LayerError("pair blame shape mismatch")
        width = self.input_width + 2
        total = np.bincount(self.left_index, weights=blame[0], minlength=width)
        total += np.bincount(self.right_index, weights=blame[1], minlength=width)
        return total[: self.input_width], None


class FuzzyLayer:
    """One trainable gate per pair slot, applying the pair operator.

    Each unit u computes op(left_u, right_u, alpha_u). The update rule
    keeps every alpha out of (-epsilon, epsilon): a step that lands inside
    the exclusion zone is reflected across zero to the negated pre-update
    value, which lets alpha pass the gradient discontinuity at 0 instead
    of stalling there.
    """

    def __init__(self, alphas, pair_op=ops.OP_EQ2):
        if pair_op not in ops.TRAINABLE_PAIR_OPS:
            raise LayerError(f"pair operator {pair_op!r} does not support training")
        self.alphas = np.asarray(alphas, dtype=float).copy()
        if self.alphas.ndim != 1:
            raise LayerError("alphas must be a vector")
        self.pair_op = pair_op

    @classmethod
    def random_init(cls, count, rng, epsilon=1e-3, pair_op=ops.OP_EQ2):
        """Alphas uniform over [-1, -epsilon] u [epsilon, 1]."""
        magnitude = rng.uniform(epsilon, 1.0, size=count)
        sign = rng.integers(0, 2, size=count) * 2 - 1
        return cls(magnitude * sign, pair_op=pair_op)

    @property
    def unit_count(self):
        return self.alphas.size

    def forward(self, stream):
        if stream.shape != (2, self.unit_count):
            raise LayerError("pair stream does not match unit count")
        fn = ops.PAIR_OPS[self.pair_op][0]
        return fn(stream[0], stream[1], self.alphas)

    def backward(self, stream, blame):
        if blame.shape != (self.unit_count,):
            raise LayerError("blame does not match unit count")
        _, dx, dy, dalpha = ops.PAIR_OPS[self.pair_op]
        lefts, rights = stream
        pair_blame = np.empty_like(stream)
        pair_blame[0] = blame * dx(lefts, rights, self.alphas)
        pair_blame[1] = blame * dy(lefts, rights, self.alphas)
        alpha_grad = blame * dalpha(lefts, rights, self.alphas)
        return pair_blame, alpha_grad

    def update(self, alpha_grad, learning_rate, epsilon):
        """Gradient step followed by the zero-crossing reflection."""
        if learning_rate <= 0 or epsilon <= 0:
            raise LayerError("learning_rate and epsilon must be positive")
        previous = self.alphas
        stepped = previous - learning_rate * alpha_grad
        inside = np.abs(stepped) < epsilon
        if np.any(inside):
            reflected = np.where(inside, -previous, stepped)
            # A reflected value can only re-enter the zone if the previous
            # alpha was already transiently inside it; push it to the rim.
            stuck = inside & (np.abs(reflected) < epsilon)
            reflected = np.where(stuck, np.where(previous >= 0, -epsilon, epsilon), reflected)
            stepped = reflected
        self.alphas = stepped

    def param_items(self):
        return [("alphas", self.alphas)]


class FeatureSelectorLayer:
    """Bias-free linear layer with weights clamped to [-1, 1].

    Weighted sums select and negate gate outputs. With ``exact_sum`` the
    forward pass accumulates strictly left to right (matching scalar
    expression evaluation bit for bit); the default uses a BLAS dot.
    """

    def __init__(self, weights, exact_sum=False):
        self.weights = np.asarray(weights, dtype=float).copy()
        if self.weights.ndim != 2:
            raise LayerError("weights must be a matrix")
        self.exact_sum = exact_sum

    @classmethod
    def uniform_init(cls, output_width, input_width):
        """All weights start at the constant 1/input_width."""
        return cls(np.full((output_width, input_width), 1.0 / input_width))

    @property
    def input_width(self):
        return self.weights.shape[1]

    @property
    def output_width(self):
        return self.weights.shape[0]

    def forward(self, x):
        if x.shape != (self.input_width,):
            raise LayerError(f"expected {self.input_width} inputs, got {x.shape}")
        if self.exact_sum:
            return np.cumsum(self.weights * x, axis=1)[:, -1]
        return self.weights @ x

    def backward(self, x, blame):
        if blame.shape != (self.output_width,):
            raise LayerError("blame width mismatch")
        return self.weights.T @ blame, np.outer(blame, x)

    def update(self, weight_grad, learning_rate, l1_coefficient):
        """SGD step with an L1 push (sign(0) = 0), then clamp to [-1, 1]."""
        if learning_rate <= 0 or l1_coefficient < 0:
            raise LayerError("bad learning_rate or l1_coefficient")
        grad = weight_grad + l1_coefficient * np.sign(self.weights)
        self.weights = np.clip(self.weights - learning_rate * grad, -1.0, 1.0)

    def param_items(self):
        return [("weights", self.weights)]


class TanhLayer:
    """Elementwise tanh squash between logic blocks."""

    def forward(self, x):
        return np.tanh(x)

    def backward(self, x, blame):
        out = np.tanh(x)
        return blame * (1.0 - out * out), None


class LinearLayer:
    """Standard fully-connected layer with bias, for the DNN baseline."""

    def __init__(self, weights, bias):
        self.weights = np.asarray(weights, dtype=float).copy()
        self.bias = np.asarray(bias, dtype=float).copy()
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise LayerError("weights/bias shape mismatch")

    @classmethod
    def random_init(cls, output_width, input_width, rng):
        bound = 1.0 / np.sqrt(input_width)
        weights = rng.uniform(-bound, bound, size=(output_width, input_width))
        bias = rng.uniform(-bound, bound, size=output_width)
        return cls(weights, bias)

    @property
    def input_width(self):
        return self.weights.shape[1]

    def forward(self, x):
        if x.shape != (self.input_width,):
            raise LayerError(f"expected {self.input_width} inputs, got {x.shape}")
        return self.weights @ x + self.bias

    def backward(self, x, blame):
        return self.weights.T @ blame, (np.outer(blame, x), blame.copy())

    def update(self, grads, learning_rate):
        weight_grad, bias_grad = grads
        self.weights -= learning_rate * weight_grad
        self.bias -= learning_rate * bias_grad

    def param_items(self):
        return [("weights", self.weights), ("bias", self.bias)]


def max_predict(class_scores) -> int:
    """Index of the maximum score; ties go to the lowest index."""
    scores = np.asarray(class_scores)
    if scores.size == 0:
        raise LayerError("cannot predict from an empty score vector")
    return int(np.argmax(scores))


class MaxLayer:
    """Classification head. Carries scores through unchanged on the signal
    path; the class decision is ``predict`` and has no trainable state."""

    def forward(self, x):
        return x

    def backward(self, x, blame):
        return blame, None

    def predict(self, scores):
        return max_predict(scores)


TRAINABLE_TYPES = (FuzzyLayer, FeatureSelectorLayer, LinearLayer)


class Network:
    """An ordered layer stack plus the label/feature naming it was built for."""

    def __init__(self, layers, class_names, feature_names):
        self.layers = list(layers)
        self.class_names = list(class_names)
        self.feature_names = list(feature_names)

    def scores(self, x):
        """Class scores for one feature row (the max head is signal-neutral)."""
        value = np.asarray(x, dtype=float)
        for layer in self.layers:
            value = layer.forward(value)
        return value

    def predict(self, x) -> int:
        return max_predict(self.scores(x))

    def forward_trace(self, x):
        """Forward pass keeping every layer input; returns (scores, inputs)."""
        value = np.asarray(x, dtype=float)
        inputs = []
        for layer in self.layers:
            inputs.append(value)
            value = layer.forward(value)
        return value, inputs

    def backward_trace(self, inputs, blame):
        """Backpropagate output blame; returns per-layer grads (None slots
        for parameter-free layers)."""
        grads = [None] * len(self.layers)
        for idx in range(len(self.layers) - 1, -1, -1):
            blame, grads[idx] = self.layers[idx].backward(inputs[idx], blame)
        return grads

    def trainable_layers(self):
        return [(i, l) for i, l in enumerate(self.layers) if isinstance(l, TRAINABLE_TYPES)]


def build_fuzzy_network(normalizer, n_classes, hidden_width=16, logic_depth=2,
                        rng=None, epsilon=1e-3, pair_op=ops.OP_EQ2,
                        class_names=None, feature_names=None):
    """Assemble the fuzzy stack on top of a fitted normalizer.

    Depth d repeats the (allpairings, fuzzy, featureselector) block d
    times with tanh between blocks; the last selector is n_classes wide.
    """
    if n_classes < 2:
        raise LayerError("need at least two classes")
    if logic_depth < 1:
        raise LayerError("logic_depth must be positive")
    rng = rng if rng is not None else np.random.default_rng()
    layers = [IdentityLayer(), normalizer]
    width = normalizer.width
    for block in range(logic_depth):
        if block > 0:
            layers.append(TanhLayer())
        pairing = AllPairingsLayer(width)
        fuzzy = FuzzyLayer.random_init(pairing.pair_count, rng, epsilon, pair_op)
        out_width = n_classes if block == logic_depth - 1 else hidden_width
        selector = FeatureSelectorLayer.uniform_init(out_width, pairing.pair_count)
        layers.extend([pairing, fuzzy, selector])
        width = out_width
    layers.append(MaxLayer())
    return Network(layers,
                   class_names or [str(i) for i in range(n_classes)],
                   feature_names or [str(i) for i in range(normalizer.width)])


def build_dnn(normalizer, n_classes, hidden_width=32, rng=None,
              class_names=None, feature_names=None):
    """Tanh MLP baseline of comparable size: two hidden layers plus a
    linear class layer, same normalizer and max head as the fuzzy stack."""
    if n_classes < 2:
        raise LayerError("need at least two classes")
    rng = rng if rng is not None else np.random.default_rng()
    widths = [normalizer.width, hidden_width, hidden_width, n_classes]
    layers = [IdentityLayer(), normalizer]
    for i in range(3):
        layers.append(LinearLayer.random_init(widths[i + 1], widths[i], rng))
        if i < 2:
            layers.append(TanhLayer())
    layers.append(MaxLayer())
    return Network(layers,
                   class_names or [str(i) for i in range(n_classes)],
                   feature_names or [str(i) for i in range(normalizer.width)])


# ---------------------------------------------------------------------------
# Persistence. Models are a versioned JSON document; every float is stored
# as a C99 hex literal so save/load round-trips are bit-faithful.

class ModelFormatError(ValueError):
    """Raised for unreadable or version-mismatched model documents."""


def _hex_vec(values):
    return [float(v).hex() for v in np.asarray(values, dtype=float).ravel()]


def _unhex_vec(items):
    return np.array([float.fromhex(s) for s in items], dtype=float)


def _layer_doc(layer):
    if isinstance(layer, IdentityLayer):
        return {"type": "identity"}
    if isinstance(layer, NormalizerLayer):
        return {"type": "normalizer", "mins": _hex_vec(layer.mins), "maxs": _hex_vec(layer.maxs)}
    if isinstance(layer, AllPairingsLayer):
        return {"type": "allpairings", "input_width": layer.input_width}
    if isinstance(layer, FuzzyLayer):
        return {"type": "fuzzy", "pair_op": layer.pair_op, "alphas": _hex_vec(layer.alphas)}
    if isinstance(layer, FeatureSelectorLayer):
        return {"type": "featureselector", "exact_sum": layer.exact_sum,
                "shape": list(layer.weights.shape), "weights": _hex_vec(layer.weights)}
    if isinstance(layer, TanhLayer):
        return {"type": "tanh"}
    if isinstance(layer, LinearLayer):
        return {"type": "linear", "shape": list(layer.weights.shape),
                "weights": _hex_vec(layer.weights), "bias": _hex_vec(layer.bias)}
    if isinstance(layer, MaxLayer):
        return {"type": "max"}
    raise ModelFormatError(f"cannot serialize layer {type(layer).__name__}")


def _layer_from_doc(doc):
    kind = doc.get("type")
    if kind == "identity":
        return IdentityLayer()
    if kind == "normalizer":
        return NormalizerLayer(_unhex_vec(doc["mins"]), _unhex_vec(doc["maxs"]))
    if kind == "allpairings":
        return AllPairingsLayer(int(doc["input_width"]))
    if kind == "fuzzy":
        return FuzzyLayer(_unhex_vec(doc["alphas"]), pair_op=doc["pair_op"])
    if kind == "featureselector":
        weights = _unhex_vec(doc["weights"]).reshape(doc["shape"])
        return FeatureSelectorLayer(weights, exact_sum=bool(doc.get("exact_sum", False)))
    if kind == "tanh":
        return TanhLayer()
    if kind == "linear":
        weights = _unhex_vec(doc["weights"]).reshape(doc["shape"])
        return LinearLayer(weights, _unhex_vec(doc["bias"]))
    if kind == "max":
        return MaxLayer()
    raise ModelFormatError(f"unknown layer type {kind!r}")


def save_model_doc(network, arch, config):
    return {
        "format": MODEL_FORMAT,
        "arch": arch,
        "config": config,
        "class_names": network.class_names,
        "feature_names": network.feature_names,
        "layers": [_layer_doc(l) for l in network.layers],
    }


def load_model_doc(doc):
    if doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"unsupported model format {doc.get('format')!r}")
    layers = [_layer_from_doc(d) for d in doc["layers"]]
    network = Network(layers, doc["class_names"], doc["feature_names"])
    return network, {"arch": doc.get("arch", ""), "config": doc.get("config", {})}


def save_model(network, path, arch="fuzzy", config=None):
    """Write the network as a versioned UTF-8 JSON document."""
    doc = save_model_doc(network, arch, config or {})
    text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def load_model(path):
    """Read a model document; returns (network, metadata dict)."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    return load_model_doc(doc)
