"""Turn a trained network into readable boolean expressions.

Snapping rounds every gate parameter to the nearest of {-1, 0, +1} and
every selector weight likewise (dropping the tanh squashes), after which
the network computes a fixed composition of integer-parameter gates and
sums. That composition is mirrored as an expression AST: gate units become
binary operators chosen by their snapped alpha, selector rows become sums
of (possibly negated) unit expressions, and zero weights prune.

The raw AST is a literal image of the snapped network, so evaluating it
reproduces the snapped forward pass exactly, bit for bit. ``simplify``
then rewrites the raw image into the compact form meant for humans.
"""

from dataclasses import dataclass

import numpy as np

from . import ops
from .layers import (AllPairingsLayer, FeatureSelectorLayer, FuzzyLayer,
                     IdentityLayer, LinearLayer, MaxLayer, Network,
                     NormalizerLayer, TanhLayer)
from .training import evaluate


class ExtractionError(ValueError):
    """Raised when a network cannot be snapped or walked for extraction."""


# ---------------------------------------------------------------------------
# Expression nodes.

@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Not:
    child: object


@dataclass(frozen=True)
class BinOp:
    kind: str  # one of and, or, xor, nxor, nor, nand
    left: object
    right: object

    def __post_init__(self):
        if self.kind not in ops.BINARY_OPS:
            raise ExtractionError(f"bad operator kind {self.kind!r}")


@dataclass(frozen=True)
class Sum:
    children: tuple


TRUE = Const(True)
FALSE = Const(False)


def evaluate_node(node, inputs):
    """Evaluate an expression over a [rows, width] input matrix.

    Sums accumulate strictly left to right and binary operators evaluate
    through the gate compositions, which is exactly what the snapped
    network computes.
    """
    inputs = np.asarray(inputs, dtype=float)
    rows = inputs.shape[0]
    if isinstance(node, Const):
        return np.full(rows, 1.0 if node.value else -1.0)
    if isinstance(node, Var):
        return inputs[:, node.index]
    if isinstance(node, Not):
        return -evaluate_node(node.child, inputs)
    if isinstance(node, BinOp):
        return ops.op_via_gate(node.kind,
                               evaluate_node(node.left, inputs),
                               evaluate_node(node.right, inputs))
    if isinstance(node, Sum):
        total = np.zeros(rows)
        for child in node.children:
            total = total + evaluate_node(child, inputs)
        return total
    raise ExtractionError(f"unknown node {node!r}")


# ---------------------------------------------------------------------------
# Simplification.

_COMPLEMENT = {"and": "nand", "nand": "and", "or": "nor", "nor": "or",
               "xor": "nxor", "nxor": "xor"}

# How BinOp(kind, e, true/false) reduces: value is a function of e.
_CONST_REDUCTION = {
    ("and", True): lambda e: e,
    ("and", False): lambda e: FALSE,
    ("or", True): lambda e: TRUE,
    ("or", False): lambda e: e,
    ("xor", True): lambda e: Not(e),
    ("xor", False): lambda e: e,
    ("nxor", True): lambda e: e,
    ("nxor", False): lambda e: Not(e),
    ("nor", True): lambda e: FALSE,
    ("nor", False): lambda e: Not(e),
    ("nand", True): lambda e: Not(e),
    ("nand", False): lambda e: TRUE,
}


def _simplify_step(node):
    if isinstance(node, (Const, Var)):
        return node
    if isinstance(node, Not):
        child = _simplify_step(node.child)
        if isinstance(child, Not):
            return child.child
        if isinstance(child, Const):
            return Const(not child.value)
        if isinstance(child, BinOp):
            return BinOp(_COMPLEMENT[child.kind], child.left, child.right)
        return Not(child)
    if isinstance(node, BinOp):
        left = _simplify_step(node.left)
        right = _simplify_step(node.right)
        if isinstance(right, Const):
            return _simplify_step(_CONST_REDUCTION[node.kind, right.value](left))
        if isinstance(left, Const):
            return _simplify_step(_CONST_REDUCTION[node.kind, left.value](right))
        return BinOp(node.kind, left, right)
    if isinstance(node, Sum):
        children = tuple(_simplify_step(c) for c in node.children)
        if not children:
            return FALSE
        if len(children) == 1:
            return children[0]
        return Sum(children)
    raise ExtractionError(f"unknown node {node!r}")


def simplify(node):
    """Rewrite to a fixed point of the simplification rules.

    Rules: double negation removal, negation folding into operator
    complements (and<->nand, or<->nor, xor<->nxor), truth-table reduction
    of operators with a constant operand, unwrapping one-child sums, and
    replacing empty sums by false.
    """
    while True:
        rewritten = _simplify_step(node)
        if rewritten == node:
            return node
        node = rewritten


# ---------------------------------------------------------------------------
# Snapping.

def snap_parameter(values):
    """Round to the nearest of {-1, 0, +1}; ties move away from zero."""
    values = np.asarray(values, dtype=float)
    return np.where(values >= 0.5, 1.0, np.where(values <= -0.5, -1.0, 0.0))


def snap_network(network):
    """Integer-parameter copy of a trained fuzzy network.

    Alphas and selector weights are snapped, tanh layers are dropped to
    identity, and the input normalizer is kept. Selector sums switch to
    ordered accumulation so the forward pass matches expression
    evaluation exactly. Idempotent.
    """
    snapped = []
    for layer in network.layers:
        if isinstance(layer, IdentityLayer):
            snapped.append(IdentityLayer())
        elif isinstance(layer, NormalizerLayer):
            snapped.append(NormalizerLayer(layer.mins.copy(), layer.maxs.copy()))
        elif isinstance(layer, AllPairingsLayer):
            snapped.append(AllPairingsLayer(layer.input_width))
        elif isinstance(layer, FuzzyLayer):
            snapped.append(FuzzyLayer(snap_parameter(layer.alphas), pair_op=layer.pair_op))
        elif isinstance(layer, FeatureSelectorLayer):
            snapped.append(FeatureSelectorLayer(snap_parameter(layer.weights), exact_sum=True))
        elif isinstance(layer, TanhLayer):
            snapped.append(IdentityLayer())
        elif isinstance(layer, MaxLayer):
            snapped.append(MaxLayer())
        elif isinstance(layer, LinearLayer):
            raise ExtractionError("snapping is defined for fuzzy networks, not the DNN baseline")
        else:
            raise ExtractionError(f"cannot snap layer {type(layer).__name__}")
    return Network(snapped, list(network.class_names), list(network.feature_names))


# ---------------------------------------------------------------------------
# Building expressions from a snapped network.

@dataclass
class BlockLogic:
    """Raw expressions for one (allpairings, fuzzy, featureselector) block."""

    input_width: int
    raw_expressions: list

    def simplified(self):
        return [simplify(e) for e in self.raw_expressions]


@dataclass
class ExtractedLogic:
    """Per-block expression lists; the last block's outputs are the classes."""

    blocks: list
    class_names: list

    def class_expressions(self, flatten=False):
        """Simplified expressions, one per class.

        With ``flatten`` earlier blocks are substituted in, so variables
        refer to the original normalized inputs; otherwise variables are
        block-local and intermediate definitions are listed separately.
        """
        if not flatten or len(self.blocks) == 1:
            return self.blocks[-1].simplified()
        bindings = self.blocks[0].simplified()
        for block in self.blocks[1:]:
            bindings = [simplify(substitute(e, bindings)) for e in block.simplified()]
        return bindings


def substitute(node, bindings):
    """Replace Var(i) by bindings[i] throughout."""
    if isinstance(node, Var):
        return bindings[node.index]
    if isinstance(node, Const):
        return node
    if isinstance(node, Not):
        return Not(substitute(node.child, bindings))
    if isinstance(node, BinOp):
        return BinOp(node.kind, substitute(node.left, bindings),
                     substitute(node.right, bindings))
    if isinstance(node, Sum):
        return Sum(tuple(substitute(c, bindings) for c in node.children))
    raise ExtractionError(f"unknown node {node!r}")


def _check_snapped(values, what):
    if not np.all(np.isin(values, (-1.0, 0.0, 1.0))):
        raise ExtractionError(f"{what} are not snapped to whole values")


def build_expressions(snapped):
    """Extract the per-block expression lists from a snapped network.

    Gate units map to operators by alpha (-1 nor, 0 nxor, +1 and), bias
    pairings become constant operands, selector weights of -1 negate, 0
    prunes, and surviving terms join under a sum in unit order.
    """
    blocks = []
    layers = snapped.layers
    i = 0
    while i < len(layers):
        layer = layers[i]
        if isinstance(layer, AllPairingsLayer):
            if not (i + 2 < len(layers)
                    and isinstance(layers[i + 1], FuzzyLayer)
                    and isinstance(layers[i + 2], FeatureSelectorLayer)):
                raise ExtractionError("pairing layer without fuzzy/selector block")
            fuzzy, selector = layers[i + 1], layers[i + 2]
            _check_snapped(fuzzy.alphas, "alphas")
            _check_snapped(selector.weights, "selector weights")
            units = []
            for (left, right), alpha in zip(layer.pairing_index(), fuzzy.alphas):
                left_node = Var(left) if isinstance(left, int) else Const(left == "T")
                right_node = Var(right) if isinstance(right, int) else Const(right == "T")
                units.append(BinOp(ops.SNAP_OPS[int(alpha)], left_node, right_node))
            raw = []
            for out in range(selector.output_width):
                terms = []
                for u, unit in enumerate(units):
                    weight = int(selector.weights[out, u])
                    if weight == 1:
                        terms.append(unit)
                    elif weight == -1:
                        terms.append(Not(unit))
                raw.append(Sum(tuple(terms)))
            blocks.append(BlockLogic(layer.input_width, raw))
            i += 3
        elif isinstance(layer, (IdentityLayer, NormalizerLayer, MaxLayer)):
            i += 1
        else:
            raise ExtractionError(f"unexpected layer {type(layer).__name__} in snapped network")
    if not blocks:
        raise ExtractionError("no logic blocks found")
    return ExtractedLogic(blocks, list(snapped.class_names))


def evaluate_blocks(logic, normalized_inputs):
    """Class scores of the raw extracted logic over normalized inputs.

    Chains the raw per-block expressions; this is the expression-side half
    of the dual evaluation path and matches the snapped network's forward
    pass exactly.
    """
    values = np.asarray(normalized_inputs, dtype=float)
    for block in logic.blocks:
        if values.shape[1] != block.input_width:
            raise ExtractionError("input width does not match extracted block")
        values = np.stack([evaluate_node(e, values) for e in block.raw_expressions], axis=1)
    return values


def eval_snapped(snapped, dataset):
    """EvalReport of a snapped network on a dataset (max-head decisions)."""
    return evaluate(snapped, dataset)


# ---------------------------------------------------------------------------
# Rendering.

_RENDER_SYMBOL = {"and": "&", "or": "|", "xor": "⊕"}
_RENDER_VIA_NOT = {"nand": "and", "nor": "or", "nxor": "xor"}
NOT_SIGN = "¬"


def _render(node, names, root):
    if isinstance(node, Const):
        return "true" if node.value else "false"
    if isinstance(node, Var):
        return names(node.index)
    if isinstance(node, Not):
        inner = _render(node.child, names, root=False)
        if isinstance(node.child, (Var, Const, Not)):
            return NOT_SIGN + inner
        return NOT_SIGN + inner if inner.startswith("(") else f"{NOT_SIGN}({inner})"
    if isinstance(node, BinOp):
        if node.kind in _RENDER_VIA_NOT:
            return _render(Not(BinOp(_RENDER_VIA_NOT[node.kind], node.left, node.right)),
                           names, root)
        left = _render(node.left, names, root=False)
        right = _render(node.right, names, root=False)
        text = f"{left} {_RENDER_SYMBOL[node.kind]} {right}"
        return text if root else f"({text})"
    if isinstance(node, Sum):
        if not node.children:
            return "false"
        text = " + ".join(_render(c, names, root=False) for c in node.children)
        return text if root else f"({text})"
    raise ExtractionError(f"unknown node {node!r}")


def render(node, var_names=None):
    """Deterministic infix form: integers for variables, ¬ & | ⊕ and +.

    nxor, nand and nor print as negations of their complements. Operands
    are parenthesized; the outermost expression is left bare.
    """
    if var_names is None:
        names = str
    else:
        names = lambda i: var_names[i]
    return _render(node, names, root=True)


def node_sexpr(node):
    """Nested parenthesized dump for machine consumption."""
    if isinstance(node, Const):
        return "(const true)" if node.value else "(const false)"
    if isinstance(node, Var):
        return f"(var {node.index})"
    if isinstance(node, Not):
        return f"(not {node_sexpr(node.child)})"
    if isinstance(node, BinOp):
        return f"({node.kind} {node_sexpr(node.left)} {node_sexpr(node.right)})"
    if isinstance(node, Sum):
        inner = " ".join(node_sexpr(c) for c in node.children)
        return f"(sum {inner})" if inner else "(sum)"
    raise ExtractionError(f"unknown node {node!r}")


def _hidden_name(block_index, output, n_blocks):
    if n_blocks == 2:
        return f"h{output}"
    return f"h{block_index}_{output}"


def render_listing(logic, flatten=False, sexpr=False):
    """Text listing of the extracted logic, one definition per line.

    Default form prints intermediate block definitions (h0, h1, ...) and
    class lines c0, c1, ... with block-local variables; the flattened form
    substitutes everything down to input indices.
    """
    fmt = node_sexpr if sexpr else render
    lines = []
    n_blocks = len(logic.blocks)
    if flatten or n_blocks == 1:
        for i, expr in enumerate(logic.class_expressions(flatten=flatten)):
            lines.append(f"c{i} = {fmt(expr)}")
        return "\n".join(lines) + "\n"
    for b, block in enumerate(logic.blocks[:-1]):
        if sexpr:
            var_of = None
        elif b == 0:
            var_of = None
        else:
            var_of = [_hidden_name(b - 1, o, n_blocks)
                      for o in range(len(logic.blocks[b - 1].raw_expressions))]
        for o, expr in enumerate(block.simplified()):
            name = _hidden_name(b, o, n_blocks)
            text = node_sexpr(expr) if sexpr else render(expr, var_of)
            lines.append(f"{name} = {text}")
    final_vars = None if sexpr else [
        _hidden_name(n_blocks - 2, o, n_blocks)
        for o in range(len(logic.blocks[-2].raw_expressions))]
    for i, expr in enumerate(logic.blocks[-1].simplified()):
        text = node_sexpr(expr) if sexpr else render(expr, final_vars)
        lines.append(f"c{i} = {text}")
    return "\n".join(lines) + "\n"
