"""Solver-agnostic linear-model IR with deterministic LP-format export.

Variables are continuous, integer, or binary (binary is integer with
bounds [0, 1]). Constraints hold sparse (handle, coefficient) terms.
The IR is built once, then handed read-only to encoders and solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DuplicateName, InvalidBounds, UnknownVariable

CONTINUOUS = "continuous"
INTEGER = "integer"
BINARY = "binary"

LE = "<="
GE = ">="
EQ = "="

INF = math.inf


@dataclass
class Variable:
    name: str
    kind: str
    lb: float
    ub: float


@dataclass
class Constraint:
    name: str
    terms: list  # [(var handle, coefficient)], exact zeros dropped
    relation: str
    rhs: float


class LinModel:
    """Mutable while building; treat as frozen once handed to a solver."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.sense = "max"
        self.obj_terms: list = []
        self.obj_offset = 0.0
        self._var_index: dict[str, int] = {}
        self._con_index: dict[str, int] = {}

    # --- construction ---

    def add_var(self, name, kind=CONTINUOUS, lb=0.0, ub=INF) -> int:
        if name in self._var_index:
            raise DuplicateName(f"variable {name!r} already declared")
        if kind not in (CONTINUOUS, INTEGER, BINARY):
            raise ValueError(f"unknown variable kind {kind!r}")
        if kind == BINARY:
            lb, ub = max(float(lb), 0.0), min(float(ub), 1.0)
        lb, ub = float(lb), float(ub)
        if lb > ub:
            raise InvalidBounds(f"{name}: lb {lb} > ub {ub}")
        handle = len(self.variables)
        self.variables.append(Variable(name, kind, lb, ub))
        self._var_index[name] = handle
        return handle

    def add_constraint(self, name, terms, relation, rhs) -> int:
        if name in self._con_index:
            raise DuplicateName(f"constraint {name!r} already declared")
        if relation not in (LE, GE, EQ):
            raise ValueError(f"unknown relation {relation!r}")
        handle = len(self.constraints)
        self.constraints.append(Constraint(name, self._check_terms(terms), relation, float(rhs)))
        self._con_index[name] = handle
        return handle

    def set_objective(self, sense, terms, offset=0.0):
        if sense not in ("max", "min"):
            raise ValueError(f"objective sense must be 'max' or 'min', got {sense!r}")
        self.sense = sense
        self.obj_terms = self._check_terms(terms)
        self.obj_offset = float(offset)

    def _check_terms(self, terms):
        out = []
        for var, coef in terms:
            var = int(var)
            if not (0 <= var < len(self.variables)):
                raise UnknownVariable(f"variable handle {var} not declared")
            coef = float(coef)
            if coef != 0.0:
                out.append((var, coef))
        return out

    # --- queries ---

    def var_handle(self, name) -> int:
        try:
            return self._var_index[name]
        except KeyError:
            raise UnknownVariable(f"no variable named {name!r}") from None

    def stats(self) -> dict:
        by_kind = {CONTINUOUS: 0, INTEGER: 0, BINARY: 0}
        for v in self.variables:
            by_kind[v.kind] += 1
        by_rel = {LE: 0, GE: 0, EQ: 0}
        nnz = 0
        for c in self.constraints:
            by_rel[c.relation] += 1
            nnz += len(c.terms)
        return {
            "variables": len(self.variables),
            "continuous": by_kind[CONTINUOUS],
            "integer": by_kind[INTEGER],
            "binary": by_kind[BINARY],
            "constraints": len(self.constraints),
            "rows_le": by_rel[LE],
            "rows_ge": by_rel[GE],
            "rows_eq": by_rel[EQ],
            "nonzeros": nnz,
        }

    # --- export ---

    def export_lp(self) -> str:
        """Industry-standard LP text; byte-identical across repeat calls."""
        lines = [f"\\ {self.name}"]
        lines.append("Maximize" if self.sense == "max" else "Minimize")
        obj = _expr_text(self.obj_terms, self.variables)
        if self.obj_offset:
            obj += f" {_signed(self.obj_offset)}"
        lines.append(f" obj:{obj or ' 0 ' + (self.variables[0].name if self.variables else '')}")
        lines.append("Subject To")
        for c in self.constraints:
            expr = _expr_text(c.terms, self.variables)
            if not expr and self.variables:
                expr = f" 0 {self.variables[0].name}"
            lines.append(f" {c.name}:{expr} {c.relation} {_num(c.rhs)}")
        lines.append("Bounds")
        for v in self.variables:
            lines.append(_bound_text(v))
        generals = [v.name for v in self.variables if v.kind == INTEGER]
        if generals:
            lines.append("Generals")
            lines.extend(f" {n}" for n in generals)
        binaries = [v.name for v in self.variables if v.kind == BINARY]
        if binaries:
            lines.append("Binaries")
            lines.extend(f" {n}" for n in binaries)
        lines.append("End")
        return "\n".join(lines) + "\n"


def _num(v: float) -> str:
    return f"{v:.12g}"


def _signed(v: float) -> str:
    return f"+ {_num(v)}" if v >= 0 else f"- {_num(-v)}"


def _expr_text(terms, variables) -> str:
    parts = []
    for var, coef in terms:
        parts.append(f"{_signed(coef)} {variables[var].name}")
    return (" " + " ".join(parts)) if parts else ""


def _bound_text(v: Variable) -> str:
    lo_inf, hi_inf = math.isinf(v.lb), math.isinf(v.ub)
    if lo_inf and hi_inf:
        return f" {v.name} free"
    if lo_inf:
        return f" -inf <= {v.name} <= {_num(v.ub)}"
    if hi_inf:
        return f" {v.name} >= {_num(v.lb)}"
    if v.lb == v.ub:
        return f" {v.name} = {_num(v.lb)}"
    return f" {_num(v.lb)} <= {v.name} <= {_num(v.ub)}"
