"""Shared test helpers: finite-difference oracles, expression grammar parser,
random tree generators, and small network fixtures."""

import numpy as np
import pytest

from fuzzynet import extraction, layers, ops


def central_diff(fn, value, h=1e-5):
    """Independent central finite-difference oracle."""
    return (fn(value + h) - fn(value - h)) / (2.0 * h)


def mixed_error(a, b):
    """Relative error for large magnitudes, absolute near zero."""
    return abs(a - b) / max(1.0, abs(a), abs(b))


def tiny_normalizer(n):
    """Normalizer that is the identity on [-1, 1]^n."""
    return layers.NormalizerLayer(-np.ones(n), np.ones(n))


def random_tiny_network(rng, n_inputs=3, hidden=2, n_classes=2, min_alpha=0.05):
    """Small depth-2 network with parameters drawn away from alpha = 0."""
    net = layers.build_fuzzy_network(tiny_normalizer(n_inputs), n_classes,
                                     hidden_width=hidden, logic_depth=2, rng=rng)
    for _, layer in net.trainable_layers():
        if isinstance(layer, layers.FuzzyLayer):
            mag = rng.uniform(min_alpha, 1.0, layer.alphas.shape)
            sign = rng.integers(0, 2, layer.alphas.shape) * 2 - 1
            layer.alphas = mag * sign
        else:
            layer.weights = rng.uniform(-1.0, 1.0, layer.weights.shape)
    return net


def random_snapped_network(rng, n_inputs=3, hidden=2, n_classes=2):
    """Random network pushed through snap_network (integer parameters)."""
    return extraction.snap_network(random_tiny_network(rng, n_inputs, hidden, n_classes))


def random_expression(rng, width, depth, allow_const=True):
    """Random expression tree over ``width`` variables."""
    if depth == 0 or rng.random() < 0.2:
        if allow_const and rng.random() < 0.25:
            return extraction.Const(bool(rng.integers(0, 2)))
        return extraction.Var(int(rng.integers(0, width)))
    roll = rng.random()
    if roll < 0.25:
        return extraction.Not(random_expression(rng, width, depth - 1, allow_const))
    if roll < 0.85:
        kind = ops.BINARY_OPS[rng.integers(0, len(ops.BINARY_OPS))]
        return extraction.BinOp(kind,
                                random_expression(rng, width, depth - 1, allow_const),
                                random_expression(rng, width, depth - 1, allow_const))
    children = tuple(random_expression(rng, width, depth - 1, allow_const)
                     for _ in range(rng.integers(1, 4)))
    return extraction.Sum(children)


# ---------------------------------------------------------------------------
# Recursive-descent parser for the rendered expression grammar:
#
#   line    := name " = " expr
#   expr    := sum
#   sum     := operand (" + " operand)*
#   operand := binop | unary
#   binop   := unary (" & " | " | " | " ⊕ ") unary     (at most one operator)
#   unary   := "¬" unary | "(" expr ")" | var | "true" | "false"
#
# Used to assert that every rendered expression stays inside the published
# notation.

class GrammarError(ValueError):
    pass


class _Parser:
    def __init__(self, text, var_pattern):
        self.text = text
        self.pos = 0
        self.var_pattern = var_pattern

    def error(self, message):
        raise GrammarError(f"{message} at {self.pos} in {self.text!r}")

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def eat(self, token):
        if self.text.startswith(token, self.pos):
            self.pos += len(token)
            return True
        return False

    def parse_expr(self):
        node = self.parse_operand()
        if self.eat(" + "):
            terms = [node, self.parse_operand()]
            while self.eat(" + "):
                terms.append(self.parse_operand())
            return ("sum", tuple(terms))
        return node

    def parse_operand(self):
        node = self.parse_unary()
        for sym, kind in ((" & ", "and"), (" | ", "or"), (" ⊕ ", "xor")):
            if self.eat(sym):
                return (kind, node, self.parse_unary())
        return node

    def parse_unary(self):
        if self.eat("¬"):
            return ("not", self.parse_unary())
        if self.eat("("):
            node = self.parse_expr()
            if not self.eat(")"):
                self.error("expected ')'")
            return node
        if self.eat("true"):
            return ("const", True)
        if self.eat("false"):
            return ("const", False)
        match = self.var_pattern.match(self.text, self.pos)
        if not match:
            self.error("expected a variable")
        self.pos = match.end()
        return ("var", match.group())


def parse_rendered(text, hidden_vars=False):
    """Parse one rendered expression; raises GrammarError if out of grammar."""
    import re

    pattern = re.compile(r"h?\d+(_\d+)?") if hidden_vars else re.compile(r"\d+")
    parser = _Parser(text, pattern)
    node = parser.parse_expr()
    if parser.pos != len(text):
        parser.error("trailing characters")
    return node


def parse_listing(listing, hidden_vars=False):
    """Parse a full rendered listing; returns {name: parse tree}."""
    parsed = {}
    for line in listing.strip().splitlines():
        name, _, body = line.partition(" = ")
        if not body:
            raise GrammarError(f"bad listing line {line!r}")
        parsed[name] = parse_rendered(body, hidden_vars=hidden_vars)
    return parsed


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
