"""Single-input single-output dense ReLU feed-forward networks.

The network is a frozen parameter pack: hidden layers apply
``max(0, W x + B)``, the output node applies the affine map only.
Weight and bias tables are loaded from CSV files whose columns mirror
the (j_hat, i, j) nomenclature of the training export, with zero-based
node indices and layers numbered 1..I+1 (layer 0 is the input).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DuplicateCell, IndexOutOfRange, MissingCell


@dataclass(frozen=True)
class ReluNet:
    """Immutable ReLU network: ``layer_sizes`` has length I+2 with 1 at both ends."""

    layer_sizes: tuple[int, ...]
    weights: tuple[np.ndarray, ...]  # weights[i-1] has shape (J_{i-1}, J_i)
    biases: tuple[np.ndarray, ...]   # biases[i-1] has length J_i

    def __post_init__(self):
        if len(self.layer_sizes) < 3:
            raise ValueError("need at least one hidden layer")
        if self.layer_sizes[0] != 1 or self.layer_sizes[-1] != 1:
            raise ValueError("single-input single-output network required")
        if len(self.weights) != len(self.layer_sizes) - 1:
            raise ValueError("one weight matrix per non-input layer required")
        for i, (w, b) in enumerate(zip(self.weights, self.biases), start=1):
            expect = (self.layer_sizes[i - 1], self.layer_sizes[i])
            if w.shape != expect:
                raise ValueError(f"layer {i} weight shape {w.shape}, expected {expect}")
            if b.shape != (self.layer_sizes[i],):
                raise ValueError(f"layer {i} bias length {b.shape}, expected {expect[1]}")
            w.flags.writeable = False
            b.flags.writeable = False

    @property
    def hidden_layer_count(self) -> int:
        return len(self.layer_sizes) - 2

    @property
    def hidden_sizes(self) -> tuple[int, ...]:
        return self.layer_sizes[1:-1]

    @property
    def nonneg_certified(self) -> bool:
        return all(np.all(w >= 0.0) for w in self.weights)


def load_net(weight_records, bias_records, layer_sizes) -> ReluNet:
    """Assemble a network from (j_hat, i, j, w) and (i, j, b) records.

    Every cell implied by ``layer_sizes`` must be present exactly once;
    indices are validated against the declared shape before assembly.
    """
    sizes = tuple(int(s) for s in layer_sizes)
    depth = len(sizes) - 1
    weights = [np.full((sizes[i], sizes[i + 1]), np.nan) for i in range(depth)]
    biases = [np.full(sizes[i + 1], np.nan) for i in range(depth)]

    for j_hat, i, j, w in weight_records:
        j_hat, i, j = int(j_hat), int(i), int(j)
        if not (1 <= i <= depth) or not (0 <= j < sizes[i]) or not (0 <= j_hat < sizes[i - 1]):
            raise IndexOutOfRange(f"weight index ({j_hat}, {i}, {j}) outside layer sizes {sizes}")
        if not np.isnan(weights[i - 1][j_hat, j]):
            raise DuplicateCell(f"weight ({j_hat}, {i}, {j}) given twice")
        weights[i - 1][j_hat, j] = float(w)

    for i, j, b in bias_records:
        i, j = int(i), int(j)
        if not (1 <= i <= depth) or not (0 <= j < sizes[i]):
            raise IndexOutOfRange(f"bias index ({i}, {j}) outside layer sizes {sizes}")
        if not np.isnan(biases[i - 1][j]):
            raise DuplicateCell(f"bias ({i}, {j}) given twice")
        biases[i - 1][j] = float(b)

    for i in range(depth):
        miss = np.argwhere(np.isnan(weights[i]))
        if miss.size:
            j_hat, j = miss[0]
            raise MissingCell(f"weight ({j_hat}, {i + 1}, {j}) absent")
        miss = np.argwhere(np.isnan(biases[i]))
        if miss.size:
            raise MissingCell(f"bias ({i + 1}, {miss[0][0]}) absent")

    return ReluNet(sizes, tuple(weights), tuple(biases))


def load_net_files(weights_csv, biases_csv, layers_json) -> ReluNet:
    """Load a network from the two CSV tables plus the layer-size sidecar."""
    with open(layers_json) as fh:
        sizes = json.load(fh)["layer_sizes"]
    weight_records = _read_csv(weights_csv, ("j_hat", "i", "j", "w"))
    bias_records = _read_csv(biases_csv, ("i", "j", "b"))
    return load_net(weight_records, bias_records, sizes)


def _read_csv(path, columns):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        have = tuple(reader.fieldnames or ())
        if have != columns:
            raise ValueError(f"{path}: expected header {','.join(columns)}, got {','.join(have)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append(tuple(float(row[c]) for c in columns))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}: bad row {lineno}: {exc}") from None
    return rows


def forward(net: ReluNet, x):
    """Evaluate the network at scalar or array input.

    Hidden layers apply ReLU, the output layer is affine only. Array
    inputs are evaluated as a batch along the first axis.
    """
    arr = np.asarray(x, dtype=float)
    act = arr.reshape(-1, 1)
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        act = act @ w + b
        if i < last:
            np.maximum(act, 0.0, out=act)
    out = act[:, 0]
    return float(out[0]) if arr.ndim == 0 else out


def forward_trace(net: ReluNet, x: float):
    """Forward pass returning (output, [hidden activation vectors])."""
    act = np.array([float(x)])
    sigmas = []
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        act = np.maximum(act @ w + b, 0.0)
        sigmas.append(act.copy())
    out = float(act @ net.weights[-1][:, 0] + net.biases[-1][0])
    return out, sigmas


def validate_relu_plus_compatible(net: ReluNet):
    """Check the non-negative-weight condition for the binary-free encoding.

    Returns (ok, diagnostics) where diagnostics lists every violating
    (j_hat, i, j) index triple with its weight value.
    """
    diagnostics = []
    for i, w in enumerate(net.weights, start=1):
        for j_hat, j in np.argwhere(w < 0.0):
            diagnostics.append((int(j_hat), i, int(j), float(w[j_hat, j])))
    return not diagnostics, diagnostics


_DATA_DIR = Path(__file__).parent / "data"


def square_net_paths() -> tuple[Path, Path, Path]:
    """Paths of the bundled x^2 surrogate fixture (weights, biases, layers)."""
    return (
        _DATA_DIR / "square_net_weights.csv",
        _DATA_DIR / "square_net_biases.csv",
        _DATA_DIR / "square_net_layers.json",
    )


def square_net() -> ReluNet:
    """The bundled 1-3-10-1 network trained to approximate x^2 on 0..10."""
    return load_net_files(*square_net_paths())
