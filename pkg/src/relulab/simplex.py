"""Two-phase primal simplex for bounded-variable linear programs.

The solver works on the equality form ``A x + s = b`` where every
column (structural or slack) carries general bounds; nonbasic columns
rest at a finite bound (free columns park at zero). Phase 1 installs
signed artificial columns on rows whose slack basis point is infeasible
and drives their total infeasibility to zero; phase 2 maximizes the
internal objective. Pricing is Dantzig (most improving reduced cost,
lowest index on ties) and switches to Bland's rule after 5 x (rows +
cols) iterations to break degenerate cycling. The ratio test prefers a
bound flip over a basis change on ties, then the largest pivot.

Two interchangeable engines implement the linear algebra:

* dense: a full updated tableau ``B^-1 A`` with rank-1 pivot updates,
  kernel-accelerated (see _kernels). Right choice up to a few hundred
  thousand tableau entries.
* sparse: a revised method holding a SuperLU factorization of the basis
  plus product-form eta updates, refactorized periodically. Used for
  the big benchmark models where a dense tableau would not fit the
  time budget.

Selection is automatic by tableau size; ``RELULAB_ENGINE`` forces one.
Tolerances: feasibility 1e-7, reduced cost 1e-9, minimum pivot 1e-10.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import _kernels as K
from .errors import NumericalBreakdown
from .model import EQ, GE, LE, LinModel

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

TOL_FEAS = 1e-7
TOL_DJ = 1e-9
TOL_PIV = 1e-10

_REL_CODE = {LE: 0, GE: 1, EQ: 2}
DENSE_CELL_LIMIT = 2_500_000
_ETA_CAP = 64


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray | None
    objective: float | None
    iterations: int

    def value(self, model: LinModel, name: str) -> float:
        return float(self.x[model.var_handle(name)])

    def values(self, model: LinModel) -> dict:
        return {v.name: float(self.x[i]) for i, v in enumerate(model.variables)}


@dataclass
class NumericProblem:
    """Arrays extracted once from a LinModel; solvers never touch the IR."""

    n: int
    m: int
    A: sp.csc_matrix          # m x n structural coefficients
    rel: np.ndarray           # int8 row relations (0 <=, 1 >=, 2 =)
    b: np.ndarray
    c: np.ndarray             # internal maximize objective
    offset: float
    sense: str
    lb: np.ndarray
    ub: np.ndarray
    int_mask: np.ndarray
    bin_mask: np.ndarray
    names: tuple


def extract(model: LinModel) -> NumericProblem:
    n = len(model.variables)
    m = len(model.constraints)
    rows, cols, vals = [], [], []
    rel = np.empty(m, dtype=np.int8)
    b = np.empty(m)
    for i, con in enumerate(model.constraints):
        rel[i] = _REL_CODE[con.relation]
        b[i] = con.rhs
        for var, coef in con.terms:
            rows.append(i)
            cols.append(var)
            vals.append(coef)
    A = sp.csc_matrix((vals, (rows, cols)), shape=(m, n))
    c = np.zeros(n)
    for var, coef in model.obj_terms:
        c[var] += coef
    sign = 1.0 if model.sense == "max" else -1.0
    lb = np.array([v.lb for v in model.variables])
    ub = np.array([v.ub for v in model.variables])
    int_mask = np.array([v.kind in ("integer", "binary") for v in model.variables], dtype=bool)
    bin_mask = np.array([v.kind == "binary" for v in model.variables], dtype=bool)
    names = tuple(v.name for v in model.variables)
    return NumericProblem(n, m, A, rel, b, sign * c, model.obj_offset, model.sense,
                          lb, ub, int_mask, bin_mask, names)


def solve_lp(model: LinModel, relax_integrality: bool = False) -> SimplexResult:
    """Solve the continuous (or relaxed) model; see module docstring."""
    prob = extract(model)
    if prob.int_mask.any() and not relax_integrality:
        raise ValueError("model has integer variables; relax them or use solve_milp")
    status, x, iters = solve_numeric(prob)
    if status != OPTIMAL:
        return SimplexResult(status, None, None, iters)
    obj = objective_value(prob, x)
    return SimplexResult(status, x, obj, iters)


def objective_value(prob: NumericProblem, x: np.ndarray) -> float:
    internal = float(prob.c @ x)
    return (internal if prob.sense == "max" else -internal) + prob.offset


# --- engines ---


class _DenseEngine:
    def __init__(self, A_ext: np.ndarray, basis: np.ndarray):
        self.G = A_ext  # starts as A_ext; basis must be an identity selection
        self.basis = basis
        self.zrow = np.zeros(A_ext.shape[1])
        self.c = None

    def set_costs(self, c: np.ndarray):
        self.c = c
        self.zrow = c - c[self.basis] @ self.G

    def reduced_costs(self) -> np.ndarray:
        return self.zrow

    def column(self, j: int) -> np.ndarray:
        return self.G[:, j].copy()

    def row(self, r: int) -> np.ndarray:
        return self.G[r, :]

    def pivot(self, r: int, jq: int, w: np.ndarray):
        K.pivot_update(self.G, self.zrow, r, jq)

    def maybe_refresh(self, stat, lb, ub, b) -> np.ndarray | None:
        return None


class _SparseEngine:
    def __init__(self, A_ext: sp.csc_matrix, basis: np.ndarray):
        self.A = A_ext
        self.AT = A_ext.T.tocsr()
        self.basis = basis
        m = A_ext.shape[0]
        self.eta_w = np.empty((_ETA_CAP, m))
        self.eta_r = np.empty(_ETA_CAP, dtype=np.int64)
        self.eta_wr = np.empty(_ETA_CAP)
        self.cnt = 0
        self.c = None
        self._factor()

    def _factor(self):
        B = self.A[:, self.basis].tocsc()
        try:
            self.lu = splu(B)
        except RuntimeError as exc:
            raise NumericalBreakdown(f"basis factorization failed: {exc}") from None
        self.cnt = 0

    def set_costs(self, c: np.ndarray):
        self.c = c

    def ftran(self, v: np.ndarray) -> np.ndarray:
        out = self.lu.solve(v)
        if self.cnt:
            K.eta_ftran(out, self.eta_w, self.eta_r, self.eta_wr, self.cnt)
        return out

    def btran(self, v: np.ndarray) -> np.ndarray:
        out = v.copy()
        if self.cnt:
            K.eta_btran(out, self.eta_w, self.eta_r, self.eta_wr, self.cnt)
        return self.lu.solve(out, trans="T")

    def reduced_costs(self) -> np.ndarray:
        y = self.btran(self.c[self.basis])
        return self.c - self.AT.dot(y)

    def column(self, j: int) -> np.ndarray:
        a = np.zeros(self.A.shape[0])
        lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
        a[self.A.indices[lo:hi]] = self.A.data[lo:hi]
        return self.ftran(a)

    def row(self, r: int) -> np.ndarray:
        e = np.zeros(self.A.shape[0])
        e[r] = 1.0
        rho = self.btran(e)
        return self.AT.dot(rho)

    def pivot(self, r: int, jq: int, w: np.ndarray):
        self.eta_w[self.cnt] = w
        self.eta_r[self.cnt] = r
        self.eta_wr[self.cnt] = w[r]
        self.cnt += 1

    def maybe_refresh(self, stat, lb, ub, b) -> np.ndarray | None:
        if self.cnt < _ETA_CAP:
            return None
        self._factor()
        xn = _nonbasic_values(stat, lb, ub)
        resid = b - self.A.dot(xn)
        return self.lu.solve(resid)


def _nonbasic_values(stat, lb, ub) -> np.ndarray:
    xn = np.where(stat == K.NB_LB, lb, 0.0)
    xn = np.where(stat == K.NB_UB, ub, xn)
    xn[stat == K.BASIC] = 0.0
    xn[~np.isfinite(xn)] = 0.0
    return xn


# --- solve driver ---


def solve_numeric(prob: NumericProblem, lb_over=None, ub_over=None, engine=None):
    """Solve with optional bound overrides. Returns (status, x, iterations)."""
    n, m = prob.n, prob.m
    lb_s = prob.lb if lb_over is None else lb_over
    ub_s = prob.ub if ub_over is None else ub_over

    slack_lb = np.where(prob.rel == 0, 0.0, -np.inf)
    slack_lb[prob.rel == 2] = 0.0
    slack_ub = np.where(prob.rel == 1, 0.0, np.inf)
    slack_ub[prob.rel == 2] = 0.0

    lb = np.concatenate([lb_s, slack_lb])
    ub = np.concatenate([ub_s, slack_ub])
    stat = np.empty(n + m, dtype=np.int8)
    for j in range(n):
        if np.isfinite(lb[j]):
            stat[j] = K.NB_LB
        elif np.isfinite(ub[j]):
            stat[j] = K.NB_UB
        else:
            stat[j] = K.NB_FREE
    stat[n:] = K.BASIC
    basis = np.arange(n, n + m, dtype=np.int64)

    engine_kind = engine or os.environ.get("RELULAB_ENGINE", "auto")
    if engine_kind == "auto":
        engine_kind = "dense" if m * (n + m) <= DENSE_CELL_LIMIT else "sparse"

    # crash free single-occurrence columns into equality rows (sparse only:
    # dense starts from the identity basis so the tableau needs no solve)
    crash = {}
    if engine_kind == "sparse":
        col_nnz = np.diff(prob.A.indptr)
        free_mask = ~np.isfinite(lb_s) & ~np.isfinite(ub_s)
        cand = np.flatnonzero(free_mask & (col_nnz == 1))
        used = set()
        for j in cand:
            r = prob.A.indices[prob.A.indptr[j]]
            coef = prob.A.data[prob.A.indptr[j]]
            if prob.rel[r] == 2 and r not in crash and abs(coef) > 1e-8 and j not in used:
                crash[r] = (j, coef)
                used.add(j)

    xn = _nonbasic_values(stat, lb, ub)
    xB = prob.b - prob.A.dot(xn[:n])
    for r, (j, coef) in crash.items():
        basis[r] = j
        stat[j] = K.BASIC
        xB[r] = xB[r] / coef

    # artificial columns for rows violated at the crash point
    art_rows, art_sign = [], []
    for r in range(m):
        k = basis[r]
        v = xB[r]
        if v < lb[k] - TOL_FEAS:
            stat[k] = K.NB_LB
            art_rows.append(r)
            art_sign.append(v - lb[k])
            xB[r] = v - lb[k]
        elif v > ub[k] + TOL_FEAS:
            stat[k] = K.NB_UB
            art_rows.append(r)
            art_sign.append(v - ub[k])
            xB[r] = v - ub[k]
    n_art = len(art_rows)
    art0 = n + m
    if n_art:
        for i, r in enumerate(art_rows):
            basis[r] = art0 + i
        signs = np.sign(art_sign)
        lb = np.concatenate([lb, np.where(signs > 0, 0.0, -np.inf)])
        ub = np.concatenate([ub, np.where(signs > 0, np.inf, 0.0)])
        stat = np.concatenate([stat, np.full(n_art, K.BASIC, dtype=np.int8)])

    ntot = n + m + n_art
    if engine_kind == "dense":
        A_ext = np.zeros((m, ntot))
        A_ext[:, :n] = prob.A.toarray()
        A_ext[np.arange(m), np.arange(n, n + m)] = 1.0
        for i, r in enumerate(art_rows):
            A_ext[r, art0 + i] = 1.0
        eng = _DenseEngine(A_ext, basis)
    else:
        blocks = [prob.A, sp.identity(m, format="csc")]
        if n_art:
            art_cols = sp.csc_matrix(
                (np.ones(n_art), (art_rows, np.arange(n_art))), shape=(m, n_art))
            blocks.append(art_cols)
        A_sp = sp.hstack(blocks, format="csc")
        eng = _SparseEngine(A_sp, basis)

    gap = ub - lb
    iters = 0
    hard_cap = 50 * (m + ntot) + 5000

    if n_art:
        c1 = np.zeros(ntot)
        for i in range(n_art):
            c1[art0 + i] = -1.0 if art_sign[i] > 0 else 1.0
        eng.set_costs(c1)
        target = -TOL_FEAS * (1.0 + float(np.abs(prob.b).max(initial=0.0)))
        status, iters = _loop(eng, stat, xB, basis, lb, ub, gap, iters, hard_cap,
                              phase=1, stop_at=target, b=prob.b)
        if status == UNBOUNDED:
            raise NumericalBreakdown("phase 1 reported an unbounded ray")
        achieved = float(c1[basis] @ xB)
        if achieved < target:
            return INFEASIBLE, None, iters
        _drive_out_artificials(eng, stat, xB, basis, lb, ub, art0)
        lb[art0:] = 0.0
        ub[art0:] = 0.0
        gap = ub - lb

    c2 = np.zeros(ntot)
    c2[:n] = prob.c
    eng.set_costs(c2)
    status, iters = _loop(eng, stat, xB, basis, lb, ub, gap, iters, hard_cap,
                          phase=2, stop_at=None, b=prob.b)
    if status == UNBOUNDED:
        return UNBOUNDED, None, iters

    x = _nonbasic_values(stat, lb, ub)[:n]
    for r in range(m):
        if basis[r] < n:
            x[basis[r]] = xB[r]
    _audit(prob, lb_s, ub_s, x)
    return OPTIMAL, x, iters


def _loop(eng, stat, xB, basis, lb, ub, gap, iters, hard_cap, phase, stop_at, b):
    m = xB.shape[0]
    ntot = lb.shape[0]
    bland_after = 5 * (m + ntot)
    obj = None
    if stop_at is not None:
        obj = float(eng.c[basis] @ xB)
    while True:
        if stop_at is not None and obj >= stop_at:
            return OPTIMAL, iters
        d = eng.reduced_costs()
        if iters <= bland_after:
            j, dirn = K.price_dantzig(d, stat, gap, TOL_DJ)
        else:
            j, dirn = K.price_bland(d, stat, gap, TOL_DJ)
        if j < 0:
            return OPTIMAL, iters
        w = eng.column(j)
        gap_j = gap[j] if stat[j] != K.NB_FREE else np.inf
        kind, r, step = K.ratio_scan(w, dirn, xB, lb[basis], ub[basis], gap_j, TOL_PIV)
        iters += 1
        if iters > hard_cap:
            raise NumericalBreakdown("iteration cap exceeded; model needs rescaling")
        if kind == 2:
            if phase == 1:
                raise NumericalBreakdown("unbounded ray during feasibility phase")
            return UNBOUNDED, iters
        delta = dirn * step
        if obj is not None:
            obj += float(d[j]) * delta
        if kind == 1:
            if step != 0.0:
                xB -= delta * w
            stat[j] = K.NB_UB if stat[j] == K.NB_LB else K.NB_LB
            continue
        leaving = basis[r]
        if dirn * w[r] > 0:
            stat[leaving] = K.NB_LB
        else:
            stat[leaving] = K.NB_UB
        if stat[j] == K.NB_LB:
            enter_val = lb[j] + delta
        elif stat[j] == K.NB_UB:
            enter_val = ub[j] + delta
        else:
            enter_val = delta
        if step != 0.0:
            xB -= delta * w
        xB[r] = enter_val
        basis[r] = j
        stat[j] = K.BASIC
        eng.pivot(r, j, w)
        fresh = eng.maybe_refresh(stat, lb, ub, b)
        if fresh is not None:
            xB[:] = fresh
            if obj is not None:
                obj = float(eng.c[basis] @ xB)


def _drive_out_artificials(eng, stat, xB, basis, lb, ub, art0):
    for r in range(xB.shape[0]):
        if basis[r] < art0:
            continue
        row = eng.row(r)
        pick = -1
        for j in range(art0):
            if stat[j] != K.BASIC and lb[j] < ub[j] and abs(row[j]) > 1e-7:
                pick = j
                break
        if pick < 0:
            continue  # redundant row; artificial stays pinned at zero
        w = eng.column(pick)
        art = basis[r]
        stat[art] = K.NB_LB
        basis[r] = pick
        if np.isfinite(lb[pick]) and stat[pick] == K.NB_LB:
            val = lb[pick]
        elif np.isfinite(ub[pick]) and stat[pick] == K.NB_UB:
            val = ub[pick]
        else:
            val = 0.0
        stat[pick] = K.BASIC
        xB[r] = val
        eng.pivot(r, pick, w)


def _audit(prob: NumericProblem, lb_s, ub_s, x):
    if np.any(x < lb_s - TOL_FEAS * 10) or np.any(x > ub_s + TOL_FEAS * 10):
        raise NumericalBreakdown("optimal point violates variable bounds")
    act = prob.A.dot(x)
    scale = 1.0 + np.abs(prob.b)
    viol_le = (prob.rel != 1) & (act - prob.b > TOL_FEAS * 10 * scale)
    viol_ge = (prob.rel != 0) & (prob.b - act > TOL_FEAS * 10 * scale)
    if viol_le.any() or viol_ge.any():
        raise NumericalBreakdown("optimal point violates constraints; rescale the model")
