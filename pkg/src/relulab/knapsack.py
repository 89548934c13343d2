"""Knapsack-with-quadratic-penalty instances, model builders and oracles.

An instance has n item classes; class c carries a profit v_c, a size
s_c, a penalty coefficient p_c and a copy limit m_c. Selecting X_c
copies earns v_c X_c but pays p_c (X_c^2 - X_c), and total size is
capped by S. The squared term is what the network surrogate replaces:
the embedded models maximize

    sum_c (v_c + p_c) X_c - p_c theta_c

where theta_c is the per-class embedding output, so the penalty exerts
the downward pressure the binary-free encoding needs.

Instances are drawn with numpy's PCG64 generator; the generator name
and seed are stored in the instance so files are reproducible anywhere.
The capacity rule S = floor(0.5 * sum s_c m_c) makes the size
constraint binding without trivializing it and is recorded in the file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .embed import CLASSIC, RELU_PLUS, EmbeddingHandle, encode_classic, encode_relu_plus, propagate_bounds
from .errors import BudgetExceeded
from .model import INTEGER, LE, LinModel
from .relu_net import ReluNet, forward

RNG_NAME = "numpy-pcg64"
CAPACITY_RULE = "half-total-demand"
DEFAULT_BUDGET = 10_000_000

PROFIT_RANGE = (50, 150)
SIZE_RANGE = (10, 20)
PENALTY_RANGE = (5, 15)
COPIES_RANGE = (2, 10)


@dataclass
class KnapsackInstance:
    n: int
    v: np.ndarray
    s: np.ndarray
    p: np.ndarray
    m: np.ndarray
    S: int
    seed: int
    rng_name: str = RNG_NAME
    capacity_rule: str = CAPACITY_RULE

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "v": self.v.tolist(),
            "s": self.s.tolist(),
            "p": self.p.tolist(),
            "m": self.m.tolist(),
            "S": int(self.S),
            "seed": int(self.seed),
            "rng": self.rng_name,
            "capacity_rule": self.capacity_rule,
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "KnapsackInstance":
        d = json.loads(text)
        return cls(int(d["n"]), np.asarray(d["v"], dtype=np.int64),
                   np.asarray(d["s"], dtype=np.int64), np.asarray(d["p"], dtype=np.int64),
                   np.asarray(d["m"], dtype=np.int64), int(d["S"]), int(d["seed"]),
                   d.get("rng", RNG_NAME), d.get("capacity_rule", CAPACITY_RULE))

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "KnapsackInstance":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def __eq__(self, other):
        return (isinstance(other, KnapsackInstance) and self.n == other.n
                and self.S == other.S and self.seed == other.seed
                and np.array_equal(self.v, other.v) and np.array_equal(self.s, other.s)
                and np.array_equal(self.p, other.p) and np.array_equal(self.m, other.m))


def capacity_for(s: np.ndarray, m: np.ndarray) -> int:
    return int(np.sum(s * m)) // 2


def generate(n: int, seed: int) -> KnapsackInstance:
    """Draw an instance; deterministic in (n, seed)."""
    if n < 1:
        raise ValueError("need at least one item class")
    rng = np.random.Generator(np.random.PCG64(seed))
    v = rng.integers(PROFIT_RANGE[0], PROFIT_RANGE[1], endpoint=True, size=n)
    s = rng.integers(SIZE_RANGE[0], SIZE_RANGE[1], endpoint=True, size=n)
    p = rng.integers(PENALTY_RANGE[0], PENALTY_RANGE[1], endpoint=True, size=n)
    m = rng.integers(COPIES_RANGE[0], COPIES_RANGE[1], endpoint=True, size=n)
    return KnapsackInstance(n, v, s, p, m, capacity_for(s, m), seed)


@dataclass
class BuildHandles:
    x_vars: list
    embeddings: list[EmbeddingHandle] = field(default_factory=list)


def build_model(instance: KnapsackInstance, net: ReluNet, encoding: str,
                big_m: str | float = "pernode") -> tuple[LinModel, BuildHandles]:
    """Assemble the surrogate model: integer X_c with bounds [0, m_c]
    (the per-class limit is realized as bounds, not rows), the capacity
    row, and one embedding per class feeding theta_c into the objective.
    ``big_m`` is "pernode" or a number used as one global constant."""
    if instance.n < 1:
        raise ValueError("instance has no item classes")
    if encoding not in (CLASSIC, RELU_PLUS):
        raise ValueError(f"unknown encoding {encoding!r}")
    model = LinModel(f"knapsack_n{instance.n}_seed{instance.seed}_{encoding}")
    handles = BuildHandles(x_vars=[])
    for c in range(instance.n):
        handles.x_vars.append(model.add_var(f"X_{c}", INTEGER, 0.0, float(instance.m[c])))
    model.add_constraint(
        "capacity", [(x, float(sz)) for x, sz in zip(handles.x_vars, instance.s)],
        LE, float(instance.S))
    obj = []
    for c in range(instance.n):
        x = handles.x_vars[c]
        if encoding == RELU_PLUS:
            h = encode_relu_plus(model, net, x, c)
        elif big_m == "pernode":
            nb = propagate_bounds(net, (0.0, float(instance.m[c])))
            h = encode_classic(model, net, x, c, bounds=nb)
        else:
            h = encode_classic(model, net, x, c, global_m=float(big_m))
        handles.embeddings.append(h)
        obj.append((x, float(instance.v[c] + instance.p[c])))
        obj.append((h.output_var, -float(instance.p[c])))
    model.set_objective("max", obj)
    return model, handles


def _enumerate(instance: KnapsackInstance, per_class_value, budget: int):
    """Exhaustive scan of all copy vectors within the class limits.

    ``per_class_value[c]`` maps the copy count to that class's objective
    contribution. Ties resolve to the lexicographically smallest vector
    (class 0 varies slowest). Returns (X, objective)."""
    radix = instance.m.astype(np.int64) + 1
    total = int(np.prod(radix, dtype=np.float64)) if np.prod(radix, dtype=np.float64) < 2**62 else 2**62
    if np.prod(radix, dtype=np.float64) > budget:
        raise BudgetExceeded(f"{np.prod(radix, dtype=np.float64):.3g} assignments "
                             f"exceed the budget of {budget:.3g}")
    strides = np.empty(instance.n, dtype=np.int64)
    acc = 1
    for c in range(instance.n - 1, -1, -1):
        strides[c] = acc
        acc *= radix[c]
    value = np.zeros(total)
    size = np.zeros(total, dtype=np.int64)
    idx = np.arange(total, dtype=np.int64)
    for c in range(instance.n):
        counts = (idx // strides[c]) % radix[c]
        value += per_class_value[c][counts]
        size += instance.s[c] * counts
    value[size > instance.S] = -np.inf
    best = int(np.argmax(value))
    X = np.array([(best // strides[c]) % radix[c] for c in range(instance.n)], dtype=np.int64)
    return X, float(value[best])


def oracle_true(instance: KnapsackInstance, budget: int = DEFAULT_BUDGET):
    """Exhaustive optimum of the exact quadratic-penalty objective."""
    tables = [v * k - p * (k ** 2 - k)
              for v, p, k in ((instance.v[c], instance.p[c],
                               np.arange(instance.m[c] + 1, dtype=np.float64))
                              for c in range(instance.n))]
    return _enumerate(instance, tables, budget)


def oracle_nn(instance: KnapsackInstance, net: ReluNet, budget: int = DEFAULT_BUDGET):
    """Exhaustive optimum with the network output in place of the square:
    the ground truth for what the embedded models optimize."""
    tables = []
    for c in range(instance.n):
        k = np.arange(instance.m[c] + 1, dtype=np.float64)
        tables.append(instance.v[c] * k - instance.p[c] * (forward(net, k) - k))
    return _enumerate(instance, tables, budget)


def objective_true(instance: KnapsackInstance, X) -> float:
    X = np.asarray(X, dtype=np.float64)
    return float(np.sum(instance.v * X - instance.p * (X ** 2 - X)))


def objective_nn(instance: KnapsackInstance, net: ReluNet, X) -> float:
    X = np.asarray(X, dtype=np.float64)
    theta = forward(net, X)
    return float(np.sum(instance.v * X - instance.p * (theta - X)))
