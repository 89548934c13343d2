"""Compile a ReLU network into linear constraints.

Two encodings are supported. The classic big-M form introduces one
binary per hidden node and three constraints that switch the node
between "off" (output pinned to 0) and "on" (output pinned to the
pre-activation); it is exact for any objective direction. The
binary-free form keeps only the lower-bound constraints plus the output
equality: it has no binaries at all, but its output variable equals the
network value only at optima of models that push the output downward,
and it requires every weight to be non-negative.

Big-M constants come from interval bound propagation: per hidden node,
an interval [lo, hi] enclosing the pre-activation over the whole input
interval. The constant used for node (i, j) is max(hi, -lo, floor) so
that both the off-switch and the on-switch rows stay valid (hi alone
would cut feasible points at nodes whose pre-activation can be more
negative than it can ever be positive).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfiniteInputBounds, NegativeWeightRejected
from .model import BINARY, CONTINUOUS, EQ, GE, INF, LE, LinModel
from .relu_net import ReluNet, validate_relu_plus_compatible

CLASSIC = "classic"
RELU_PLUS = "reluplus"

M_FLOOR = 1e-6


@dataclass
class NodeBounds:
    """Per hidden node pre-activation intervals for a given input interval."""

    input_interval: tuple[float, float]
    pre_lo: list  # one array per hidden layer
    pre_hi: list

    def node_m(self, layer: int, node: int, floor: float = M_FLOOR) -> float:
        """Big-M constant for hidden layer ``layer`` (1-based), node ``node``."""
        hi = self.pre_hi[layer - 1][node]
        lo = self.pre_lo[layer - 1][node]
        return max(hi, -lo, floor)


def propagate_bounds(net: ReluNet, input_interval) -> NodeBounds:
    """Interval bound propagation over the hidden layers.

    Splits each weight by sign so the interval image of the affine map
    is exact per node; ReLU clamps the interval at zero before the next
    layer. The result encloses every true pre-activation for inputs in
    the interval.
    """
    lo, hi = float(input_interval[0]), float(input_interval[1])
    if not lo <= hi:
        raise ValueError(f"empty input interval [{lo}, {hi}]")
    cur_lo = np.array([lo])
    cur_hi = np.array([hi])
    pre_lo, pre_hi = [], []
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        wp = np.maximum(w, 0.0)
        wn = np.minimum(w, 0.0)
        p_lo = cur_lo @ wp + cur_hi @ wn + b
        p_hi = cur_hi @ wp + cur_lo @ wn + b
        pre_lo.append(p_lo)
        pre_hi.append(p_hi)
        cur_lo = np.maximum(p_lo, 0.0)
        cur_hi = np.maximum(p_hi, 0.0)
    return NodeBounds((lo, hi), pre_lo, pre_hi)


@dataclass
class EmbeddingHandle:
    kind: str
    class_tag: str
    input_var: int
    output_var: int
    sigma: dict = field(default_factory=dict)   # (layer, node) -> var handle
    y: dict = field(default_factory=dict)       # (layer, node) -> var handle, classic only
    constraints: list = field(default_factory=list)

    @property
    def sigma_count(self) -> int:
        return len(self.sigma)

    @property
    def constraint_count(self) -> int:
        return len(self.constraints)


def encode_classic(model: LinModel, net: ReluNet, input_var: int, class_tag,
                   bounds: NodeBounds | None = None, global_m: float | None = None) -> EmbeddingHandle:
    """Emit the big-M encoding: per hidden node a lower bound row, an
    off-switch row, an on-switch row and one binary; plus the output
    equality. Exact under both maximization and minimization of the
    output variable."""
    var = model.variables[input_var]
    if not (np.isfinite(var.lb) and np.isfinite(var.ub)):
        raise InfiniteInputBounds(f"input {var.name} needs finite bounds for big-M")
    if global_m is None:
        if bounds is None:
            raise ValueError("per-node big-M needs propagated bounds")
        if var.lb < bounds.input_interval[0] - 1e-12 or var.ub > bounds.input_interval[1] + 1e-12:
            raise ValueError("input bounds not covered by the propagated interval")

    tag = str(class_tag)
    h = EmbeddingHandle(CLASSIC, tag, input_var, -1)
    prev = {0: input_var}  # node index -> var handle in previous layer
    for layer in range(1, net.hidden_layer_count + 1):
        w = net.weights[layer - 1]
        b = net.biases[layer - 1]
        cur = {}
        for node in range(net.layer_sizes[layer]):
            s = model.add_var(f"sigma_{tag}_{layer}_{node}", CONTINUOUS, 0.0, INF)
            yv = model.add_var(f"y_{tag}_{layer}_{node}", BINARY)
            cur[node] = s
            h.sigma[(layer, node)] = s
            h.y[(layer, node)] = yv
            m_node = global_m if global_m is not None else bounds.node_m(layer, node)
            in_terms = [(prev[k], -w[k, node]) for k in prev]
            h.constraints.append(model.add_constraint(
                f"low_{tag}_{layer}_{node}", [(s, 1.0)] + in_terms, GE, b[node]))
            h.constraints.append(model.add_constraint(
                f"off_{tag}_{layer}_{node}", [(s, 1.0), (yv, -m_node)], LE, 0.0))
            h.constraints.append(model.add_constraint(
                f"on_{tag}_{layer}_{node}", [(s, 1.0), (yv, m_node)] + in_terms, LE,
                b[node] + m_node))
        prev = cur
    h.output_var = _emit_output(model, net, tag, prev, h)
    return h


def encode_relu_plus(model: LinModel, net: ReluNet, input_var: int, class_tag) -> EmbeddingHandle:
    """Emit the binary-free encoding: only the lower-bound rows and the
    output equality. The caller must guarantee downward pressure on the
    output variable; under maximization the polytope is unbounded above."""
    ok, diags = validate_relu_plus_compatible(net)
    if not ok:
        head = ", ".join(f"({j_hat},{i},{j})={w:g}" for j_hat, i, j, w in diags[:3])
        raise NegativeWeightRejected(
            f"{len(diags)} negative weight(s), first: {head}")
    tag = str(class_tag)
    h = EmbeddingHandle(RELU_PLUS, tag, input_var, -1)
    prev = {0: input_var}
    for layer in range(1, net.hidden_layer_count + 1):
        w = net.weights[layer - 1]
        b = net.biases[layer - 1]
        cur = {}
        for node in range(net.layer_sizes[layer]):
            s = model.add_var(f"sigma_{tag}_{layer}_{node}", CONTINUOUS, 0.0, INF)
            cur[node] = s
            h.sigma[(layer, node)] = s
            in_terms = [(prev[k], -w[k, node]) for k in prev]
            h.constraints.append(model.add_constraint(
                f"low_{tag}_{layer}_{node}", [(s, 1.0)] + in_terms, GE, b[node]))
        prev = cur
    h.output_var = _emit_output(model, net, tag, prev, h)
    return h


def _emit_output(model, net, tag, last_hidden, h):
    w_out = net.weights[-1][:, 0]
    b_out = net.biases[-1][0]
    theta = model.add_var(f"theta_{tag}", CONTINUOUS, -INF, INF)
    terms = [(theta, 1.0)] + [(last_hidden[k], -w_out[k]) for k in last_hidden]
    h.constraints.append(model.add_constraint(f"out_{tag}", terms, EQ, b_out))
    return theta


def embedding_counts(net: ReluNet, kind: str) -> dict:
    """Closed-form per-embedding sizes used by the size-formula checks."""
    hidden = sum(net.hidden_sizes)
    if kind == RELU_PLUS:
        return {"constraints": hidden + 1, "continuous": hidden + 1, "binary": 0}
    return {"constraints": 3 * hidden + 1, "continuous": hidden + 1, "binary": hidden}
