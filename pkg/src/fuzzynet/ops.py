"""Parameterized fuzzy logic operators over the [-1, 1] truth domain.

Truth values are remapped so that false = -1 and true = +1. A single
parameterized pair operator interpolates continuously among three boolean
gates as its parameter alpha moves through {-1, 0, +1}:

    alpha = -1  ->  nor
    alpha =  0  ->  nxor
    alpha = +1  ->  and

The remaining gates (identity, not, or, xor, nand) are obtained by pairing
with the constants true/false and by negation; see ``op_via_gate``.

Three candidate forms of the operator are implemented. ``gate_abs`` is the
production form: its alpha-gradient is flat wherever a training pattern
carries no information about alpha, which is what makes it usable with
gradient descent. ``gate_sq`` (smooth but with misleading gradients) and
``gate_sqrt`` (correct shape but hostile to optimization) are kept for the
operator-comparison experiment. All functions accept scalars or numpy
arrays and broadcast elementwise.
"""

import numpy as np

# Wire identifiers for the three candidate operators, fixed by the CLI and
# TSV interfaces ("eq2" is the production operator).
OP_EQ1 = "eq1"
OP_EQ2 = "eq2"
OP_EQ3 = "eq3"

# The eight gates plus the two bias constants.
UNARY_OPS = ("identity", "not")
BINARY_OPS = ("or", "xor", "and", "nor", "nxor", "nand")
CONST_OPS = ("true_const", "false_const")
ALL_OPS = UNARY_OPS + BINARY_OPS + CONST_OPS
GATES = UNARY_OPS + BINARY_OPS

# Gates reachable by snapping alpha to a whole value.
SNAP_OPS = {-1: "nor", 0: "nxor", 1: "and"}
ALPHA_OF_OP = {"nor": -1.0, "nxor": 0.0, "and": 1.0}


def gate_abs(x, y, alpha):
    """Pair operator (x+a)(y+a)/(|a|+1) - |a|; the production form."""
    a = np.abs(alpha)
    return (x + alpha) * (y + alpha) / (a + 1.0) - a


def gate_sq(x, y, alpha):
    """Pair operator (x+a)(y+a)/(a^2+1) - a^2; smooth alternative."""
    sq = alpha * alpha
    return (x + alpha) * (y + alpha) / (sq + 1.0) - sq


def gate_sqrt(x, y, alpha):
    """Pair operator sign(t)*sqrt(|t|) - |a| with t = (x+a)(y+a).

    sign(0) is taken as 0, so the result at t = 0 is -|alpha|.
    """
    t = (x + alpha) * (y + alpha)
    return np.sign(t) * np.sqrt(np.abs(t)) - np.abs(alpha)


def gate_sqrt_nary(xs, alpha):
    """N-input generalization of ``gate_sqrt``: sign(t)*|t|^(1/n) - |a|.

    t is the product of (x_i + alpha) over all inputs. Forward evaluation
    only; this form resists gradient-based training and is not used in
    trained networks.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        raise ValueError("gate_sqrt_nary requires at least one input")
    t = np.prod(xs + alpha)
    return np.sign(t) * np.abs(t) ** (1.0 / xs.size) - abs(alpha)


def gate_abs_dx(x, y, alpha):
    """d(gate_abs)/dx = (y+a)/(|a|+1)."""
    del x
    return (y + alpha) / (np.abs(alpha) + 1.0)


def gate_abs_dy(x, y, alpha):
    """d(gate_abs)/dy = (x+a)/(|a|+1)."""
    del y
    return (x + alpha) / (np.abs(alpha) + 1.0)


def gate_abs_dalpha(x, y, alpha):
    """d(gate_abs)/dalpha = (|a|(x+y) - a(xy+1)) / (|a|(|a|+1)^2).

    Discontinuous at alpha = 0; callers must keep alpha away from zero
    (the training update rule guarantees |alpha| >= epsilon).

    Raises:
        ValueError: if any alpha is exactly 0.
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha == 0.0):
        raise ValueError("gate_abs_dalpha is undefined at alpha = 0")
    a = np.abs(alpha)
    return (a * (x + y) - alpha * (x * y + 1.0)) / (a * (a + 1.0) ** 2)


def gate_sq_dx(x, y, alpha):
    """d(gate_sq)/dx = (y+a)/(a^2+1)."""
    del x
    return (y + alpha) / (alpha * alpha + 1.0)


def gate_sq_dy(x, y, alpha):
    """d(gate_sq)/dy = (x+a)/(a^2+1)."""
    del y
    return (x + alpha) / (alpha * alpha + 1.0)


def gate_sq_dalpha(x, y, alpha):
    """Alpha-derivative of ``gate_sq``; continuous everywhere."""
    d = alpha * alpha + 1.0
    return ((x + y) * (1.0 - alpha * alpha) + 2.0 * alpha * (1.0 - x * y)) / (d * d) - 2.0 * alpha


# Registry keyed by the wire identifiers. Entries are
# (forward, dx, dy, dalpha); derivative slots are None for operators that
# do not support gradient training.
PAIR_OPS = {
    OP_EQ1: (gate_sq, gate_sq_dx, gate_sq_dy, gate_sq_dalpha),
    OP_EQ2: (gate_abs, gate_abs_dx, gate_abs_dy, gate_abs_dalpha),
    OP_EQ3: (gate_sqrt, None, None, None),
}

TRAINABLE_PAIR_OPS = (OP_EQ1, OP_EQ2)


def snap_alpha(alpha: float) -> str:
    """Round alpha to the nearest whole value and name the resulting gate.

    Returns "nor" (-1), "nxor" (0) or "and" (+1). Ties at |alpha| = 0.5
    round away from zero.
    """
    if not np.isfinite(alpha):
        raise ValueError(f"alpha must be finite, got {alpha}")
    if alpha >= 0.5:
        return "and"
    if alpha <= -0.5:
        return "nor"
    return "nxor"


def op_via_gate(op: str, *args):
    """Evaluate a named gate as a composition of ``gate_abs`` calls.

    identity(x) = true . x at alpha 0, not(x) = false . x at alpha 0,
    and/nor/nxor are direct applications, and or/xor/nand are negations
    of their complements. Accepts scalars or arrays.
    """
    if op == "true_const":
        return 1.0
    if op == "false_const":
        return -1.0
    if op == "identity":
        (x,) = args
        return gate_abs(1.0, x, 0.0)
    if op == "not":
        (x,) = args
        return gate_abs(-1.0, x, 0.0)
    x, y = args
    if op == "and":
        return gate_abs(x, y, 1.0)
    if op == "nor":
        return gate_abs(x, y, -1.0)
    if op == "nxor":
        return gate_abs(x, y, 0.0)
    if op == "or":
        return gate_abs(-1.0, gate_abs(x, y, -1.0), 0.0)
    if op == "xor":
        return gate_abs(-1.0, gate_abs(x, y, 0.0), 0.0)
    if op == "nand":
        return gate_abs(-1.0, gate_abs(x, y, 1.0), 0.0)
    raise ValueError(f"unknown operator {op!r}")


def _unit_table(op):
    # Classic [0, 1] definitions; these serve as the independent oracle
    # for everything built on the pair operator.
    fns = {
        "identity": lambda x: x,
        "not": lambda x: 1 - x,
        "or": lambda x, y: 1 - (1 - x) * (1 - y),
        "xor": lambda x, y: x + y - 2 * x * y,
        "and": lambda x, y: x * y,
        "nor": lambda x, y: (1 - x) * (1 - y),
        "nxor": lambda x, y: 1 - (x + y - 2 * x * y),
        "nand": lambda x, y: 1 - x * y,
    }
    if op == "true_const":
        return {(): 1}
    if op == "false_const":
        return {(): 0}
    fn = fns[op]
    if op in UNARY_OPS:
        return {(x,): fn(x) for x in (0, 1)}
    return {(x, y): fn(x, y) for x in (0, 1) for y in (0, 1)}


def boolean_table(op: str, remapped: bool = True) -> dict:
    """Truth table for a named operator, as {inputs tuple: output}.

    With ``remapped`` the table is over {-1, +1} (false = -1); otherwise
    over the classic {0, 1} domain. Constants yield a single entry with an
    empty input tuple.
    """
    if op not in ALL_OPS:
        raise ValueError(f"unknown operator {op!r}")
    table = _unit_table(op)
    if not remapped:
        return table
    return {tuple(2 * v - 1 for v in k): 2 * out - 1 for k, out in table.items()}
