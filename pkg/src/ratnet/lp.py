"""Dense linear programs: ``minimize c @ y`` subject to ``A @ y <= b`` and box bounds.

Two interchangeable engines sit behind :func:`solve`:

* ``"highs"`` (default) -- scipy's HiGHS dual simplex, used for the large
  auxiliary problems of differential correction and bisection;
* ``"simplex"`` -- a small dense two-phase revised simplex written here,
  Dantzig pricing with a switch to Bland's rule once degenerate pivots pile up.
  Deterministic and dependency-free, practical up to a few hundred rows.
"""
from __future__ import annotations

import enum
import io
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from .errors import LpStructureError, SolverStalledError

log = logging.getLogger(__name__)

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PHASE1_TOL = 1e-8


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LinearProgram:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    bounds: np.ndarray | None = None  # (n, 2); +-inf for missing sides

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float).ravel()
        if A.size == 0:
            A = A.reshape(0, c.size)
        if A.ndim != 2 or A.shape[1] != c.size or A.shape[0] != b.size:
            raise LpStructureError(
                f"A has shape {A.shape}, expected ({b.size}, {c.size})")
        if self.bounds is None:
            bounds = np.tile([-np.inf, np.inf], (c.size, 1))
        else:
            bounds = np.array(self.bounds, dtype=float)
            if bounds.shape != (c.size, 2):
                raise LpStructureError(f"bounds have shape {bounds.shape}, expected ({c.size}, 2)")
        if not (np.isfinite(c).all() and np.isfinite(A).all() and np.isfinite(b).all()):
            raise LpStructureError("LP data must be finite")
        if np.isnan(bounds).any() or (bounds[:, 0] > bounds[:, 1]).any():
            raise LpStructureError("invalid variable bounds")
        for name, v in (("c", c), ("A", A), ("b", b), ("bounds", bounds)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def shape(self):
        return self.A.shape


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    y: np.ndarray | None
    objective_value: float

    @property
    def optimal(self):
        return self.status is LpStatus.OPTIMAL


def format_lp(lp: LinearProgram) -> str:
    """Plain fixed-format listing of an LP, for offline inspection."""
    out = io.StringIO()
    m, n = lp.shape
    out.write(f"LP {m} rows {n} cols\n")
    out.write("OBJ " + " ".join(f"{v: .17e}" for v in lp.c) + "\n")
    for i in range(m):
        out.write(f"ROW {i:6d} " + " ".join(f"{v: .17e}" for v in lp.A[i]) + f" <= {lp.b[i]: .17e}\n")
    for j, (lo, hi) in enumerate(lp.bounds):
        out.write(f"BND {j:6d} {lo: .17e} {hi: .17e}\n")
    return out.getvalue()


def solve(lp: LinearProgram, method="highs", *, feas_tol=FEAS_TOL, opt_tol=OPT_TOL,
          max_iter=None, dump=None) -> LpSolution:
    """Solve ``lp``; raise :class:`SolverStalledError` if the engine gives up."""
    if dump is not None:
        Path(dump).write_text(format_lp(lp))
    if method == "highs":
        return _solve_highs(lp, feas_tol, opt_tol, max_iter)
    if method == "simplex":
        return _solve_simplex(lp, feas_tol, opt_tol, max_iter)
    raise ValueError(f"unknown LP method {method!r}")


# -- HiGHS -----------------------------------------------------------------

# (method, tolerance factor, presolve) tried in turn while HiGHS reports status 4
_HIGHS_RETRIES = (("highs", 100.0, True), ("highs-ipm", 1.0, True), ("highs-ds", 1.0, False))


def _solve_highs(lp, feas_tol, opt_tol, max_iter):
    bounds = [(None if np.isinf(lo) else lo, None if np.isinf(hi) else hi) for lo, hi in lp.bounds]
    A = lp.A if lp.A.shape[0] else None
    b = lp.b if lp.A.shape[0] else None

    def attempt(method, factor, presolve):
        opts = {"primal_feasibility_tolerance": feas_tol * factor,
                "dual_feasibility_tolerance": opt_tol * factor, "presolve": presolve}
        if max_iter is not None:
            opts["maxiter"] = int(max_iter)
        return linprog(lp.c, A_ub=A, b_ub=b, bounds=bounds, method=method, options=opts)

    res = attempt("highs", 1.0, True)
    # HiGHS ends in an "unknown" model status when it cannot certify
    # infeasibility at very tight tolerances; the default ones usually can.
    for alt in _HIGHS_RETRIES:
        if res.status != 4:
            break
        log.debug("HiGHS status 4 (%s); retrying with %s", res.message, alt)
        res = attempt(*alt)
    if res.status == 0:
        return LpSolution(LpStatus.OPTIMAL, np.asarray(res.x), float(res.fun))
    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE, None, np.inf)
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED, None, -np.inf)
    raise SolverStalledError(f"HiGHS stopped without a verdict: {res.message}")


# -- dense revised simplex -------------------------------------------------

def _to_standard_form(lp):
    """Rewrite as ``min cs @ s, As @ s = bs, s >= 0`` with ``y = y0 + T @ s``."""
    m, n = lp.shape
    cols, y0 = [], np.zeros(n)
    extra_rows = []  # (std column, upper limit) for doubly bounded variables
    for j, (lo, hi) in enumerate(lp.bounds):
        e = np.zeros(n)
        e[j] = 1.0
        if np.isfinite(lo):
            y0[j] = lo
            cols.append(e)
            if np.isfinite(hi):
                extra_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            y0[j] = hi
            cols.append(-e)
        else:
            cols.append(e)
            cols.append(-e)
    T = np.array(cols).T.reshape(n, len(cols))
    k = T.shape[1]
    rows = [lp.A @ T] if m else []
    rhs = [lp.b - lp.A @ y0] if m else []
    for col, width in extra_rows:
        r = np.zeros((1, k))
        r[0, col] = 1.0
        rows.append(r)
        rhs.append(np.array([width]))
    G = np.vstack(rows) if rows else np.zeros((0, k))
    h = np.concatenate(rhs) if rhs else np.zeros(0)
    # slacks turn G s <= h into equalities
    As = np.hstack([G, np.eye(G.shape[0])])
    cs = np.concatenate([T.T @ lp.c, np.zeros(G.shape[0])])
    return As, h, cs, T, y0, k


class _Simplex:
    def __init__(self, A, b, feas_tol, opt_tol, max_iter):
        self.A, self.b = A, b
        self.feas_tol, self.opt_tol = feas_tol, opt_tol
        self.max_iter = max_iter
        self.iters = 0
        self.degenerate = 0
        self.bland = False

    def run(self, c, basis, allowed):
        """Primal simplex from a feasible ``basis``; returns ``(basis, status)``."""
        A, b = self.A, self.b
        m, n = A.shape
        basis = list(basis)
        while True:
            self.iters += 1
            if self.iters > self.max_iter:
                raise SolverStalledError(f"simplex iteration limit {self.max_iter} reached")
            AB = A[:, basis]
            xB = np.linalg.solve(AB, b) if m else np.zeros(0)
            duals = np.linalg.solve(AB.T, c[basis]) if m else np.zeros(0)
            reduced = c - A.T @ duals
            reduced[basis] = 0.0
            candidates = np.flatnonzero((reduced < -self.opt_tol) & allowed)
            if candidates.size == 0:
                return basis, LpStatus.OPTIMAL, xB
            if self.bland:
                enter = int(candidates[0])
            else:
                enter = int(candidates[np.argmin(reduced[candidates])])
            d = np.linalg.solve(AB, A[:, enter]) if m else np.zeros(0)
            pos = np.flatnonzero(d > self.feas_tol)
            if pos.size == 0:
                return basis, LpStatus.UNBOUNDED, xB
            ratios = np.maximum(xB[pos], 0.0) / d[pos]
            best = ratios.min()
            ties = pos[ratios <= best + 1e-12]
            leave = int(min(ties, key=lambda i: basis[i]))  # smallest variable index
            if best <= self.feas_tol:
                self.degenerate += 1
                if self.degenerate > 10 * n:
                    self.bland = True
            basis[leave] = enter


def _solve_simplex(lp, feas_tol, opt_tol, max_iter):
    As, bs, cs, T, y0, _ = _to_standard_form(lp)
    m, n = As.shape
    if max_iter is None:
        max_iter = 50 * (m + n)
    sign = np.where(bs < 0, -1.0, 1.0)
    As = As * sign[:, None]
    bs = bs * sign
    # slack columns already form an identity on rows with sign +1; others need artificials
    slack0 = n - m
    need_art = np.flatnonzero(sign < 0)
    art = np.zeros((m, need_art.size))
    art[need_art, np.arange(need_art.size)] = 1.0
    A1 = np.hstack([As, art])
    basis = [slack0 + i for i in range(m)]
    for k, row in enumerate(need_art):
        basis[row] = n + k
    c1 = np.zeros(A1.shape[1])
    c1[n:] = 1.0
    engine = _Simplex(A1, bs, feas_tol, opt_tol, max_iter)
    allowed = np.ones(A1.shape[1], dtype=bool)
    if need_art.size:
        basis, _, xB = engine.run(c1, basis, allowed)
        if c1[basis] @ xB > PHASE1_TOL:
            return LpSolution(LpStatus.INFEASIBLE, None, np.inf)
        basis, keep = _drive_out_artificials(A1, basis, n)
        A1, bs = A1[keep], bs[keep]
        engine.A, engine.b = A1, bs
    allowed[n:] = False
    c2 = np.concatenate([cs, np.zeros(A1.shape[1] - n)])
    basis, status, xB = engine.run(c2, basis, allowed)
    if status is LpStatus.UNBOUNDED:
        return LpSolution(status, None, -np.inf)
    s = np.zeros(A1.shape[1])
    s[basis] = xB
    y = y0 + T @ s[:T.shape[1]]
    return LpSolution(LpStatus.OPTIMAL, y, float(lp.c @ y))


def _drive_out_artificials(A, basis, n_real):
    """Pivot zero-level artificials out of the basis; drop rows that are redundant."""
    basis = list(basis)
    keep = list(range(A.shape[0]))
    for pos in range(len(basis)):
        if basis[pos] < n_real:
            continue
        AB = A[:, basis]
        row = np.linalg.solve(AB.T, np.eye(len(basis))[pos]) @ A[:, :n_real]
        row[[j for j in basis if j < n_real]] = 0.0
        cand = np.flatnonzero(np.abs(row) > 1e-9)
        if cand.size:
            basis[pos] = int(cand[0])
        else:
            keep.remove(pos)
    out = [basis[i] for i in keep]
    return out, keep
