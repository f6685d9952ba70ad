"""Bisection on the error level for the quasiconvex best-approximation problem.

For a level ``z`` the feasibility LP in ``(a, b, t)`` is::

    maximize t
    s.t.  f_i q(x_i) - p(x_i) <= z q(x_i)
          p(x_i) - f_i q(x_i) <= z q(x_i)
          q(x_i) >= den_lower + t,      -den_lower <= t <= 1
          q(x_i) <= den_upper           (optional)

``p = q = 0, t = -den_lower`` is always feasible, so the LP always has an
optimum and the level ``z`` is feasible exactly when the optimal ``t`` is
non-negative.  The solver never has to certify infeasibility, which it does
unreliably when ``z`` sits right at the best error.

Without ``den_upper`` the constraints are homogeneous apart from the lower
bound, so any feasible denominator can be rescaled until ``t = 1``.  The
upper bound caps the dynamic range of ``q`` on the samples, which keeps the
LP well conditioned at high degree at the price of a smaller feasible set.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, replace

import numpy as np

from . import lp as lpmod
from .basis import DegreeSpec, RationalApprox, basis_matrix
from .data import SampleSet
from .diffcorr import FitReport, _check_dims, uniform_error
from .errors import BracketError, SolverStalledError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BisectOptions:
    z_lo: float = 0.0
    z_hi: float | None = None
    z_tol: float = 1e-6
    den_lower: float = 1e-2
    den_upper: float | None = None
    max_outer: int = 60
    lp_method: str = "highs"

    def __post_init__(self):
        if self.z_lo < 0:
            raise ValueError("z_lo must be non-negative")
        if self.z_hi is not None and not self.z_lo < self.z_hi:
            raise BracketError(f"empty bracket [{self.z_lo}, {self.z_hi}]")
        if self.den_lower <= 0:
            raise ValueError("den_lower must be positive")
        if self.den_upper is not None and not self.den_lower < self.den_upper:
            raise ValueError("den_upper must exceed den_lower")
        if self.z_tol <= 0 or self.max_outer < 1:
            raise ValueError("z_tol must be positive and max_outer >= 1")


@dataclass
class BracketStep:
    iteration: int
    z_lo: float
    z_hi: float
    z: float
    feasible: bool


class _Problem:
    """Basis matrices for one (samples, spec) pair, reused across levels."""

    def __init__(self, samples, spec):
        _check_dims(samples, spec)
        self.samples = samples
        self.spec = spec
        unit = samples.unit_points
        self.P = basis_matrix(unit, spec.num_index)
        self.Q = basis_matrix(unit, spec.den_index)
        self.f = samples.values

    def lp(self, z, opts):
        P, Q, f = self.P, self.Q, self.f
        N, na = P.shape
        nb = Q.shape[1]
        zero = np.zeros((N, 1))
        blocks = [
            np.hstack([-P, (f - z)[:, None] * Q, zero]),
            np.hstack([P, (-f - z)[:, None] * Q, zero]),
            np.hstack([np.zeros((N, na)), -Q, np.ones((N, 1))]),
        ]
        rhs = [np.zeros(2 * N), np.full(N, -opts.den_lower)]
        if opts.den_upper is not None:
            blocks.append(np.hstack([np.zeros((N, na)), Q, zero]))
            rhs.append(np.full(N, opts.den_upper))
        c = np.zeros(na + nb + 1)
        c[-1] = -1.0
        bounds = np.vstack([np.tile([-np.inf, np.inf], (na + nb, 1)), [-opts.den_lower, 1.0]])
        return lpmod.LinearProgram(c, np.vstack(blocks), np.concatenate(rhs), bounds)

    def test(self, z, opts):
        try:
            sol = lpmod.solve(self.lp(z, opts), method=opts.lp_method)
        except SolverStalledError as exc:
            raise SolverStalledError(f"feasibility LP at z={z!r}: {exc}", z=z) from exc
        if not sol.optimal:
            raise SolverStalledError(f"feasibility LP at z={z!r} ended {sol.status.value}", z=z)
        if sol.y[-1] < -lpmod.FEAS_TOL:
            return False, None
        na = self.P.shape[1]
        nb = self.Q.shape[1]
        r = RationalApprox(sol.y[:na], sol.y[na:na + nb], self.spec, self.samples.box)
        return True, r


def feasible(samples: SampleSet, spec: DegreeSpec, z: float, opts: BisectOptions | None = None):
    """Is there a rational of degree ``spec`` within ``z`` of every sample?

    Returns ``(flag, witness)``; the witness is ``None`` when infeasible.
    """
    if z < 0:
        raise ValueError("z must be non-negative")
    return _Problem(samples, spec).test(z, opts or BisectOptions())


def condition_estimate(samples: SampleSet, spec: DegreeSpec, z: float,
                       opts: BisectOptions | None = None) -> float:
    """Largest over smallest column norm of the feasibility LP's constraint matrix.

    Only the level and lower-bound rows enter, so the value does not depend on
    ``den_upper``: the bound restricts the feasible set without rescaling columns.
    """
    core = replace(opts or BisectOptions(), den_upper=None)
    A = _Problem(samples, spec).lp(z, core).A
    norms = np.linalg.norm(A, axis=0)
    return float(norms.max() / norms.min())


def bisect_fit(samples: SampleSet, spec: DegreeSpec, opts: BisectOptions | None = None):
    """Bisection on ``z`` until the bracket is narrower than ``opts.z_tol``.

    Returns ``(RationalApprox, FitReport)``; the report's ``extras["trace"]``
    lists one :class:`BracketStep` per feasibility test.
    """
    opts = opts or BisectOptions()
    t0 = time.perf_counter()
    prob = _Problem(samples, spec)
    lo = opts.z_lo
    hi = opts.z_hi if opts.z_hi is not None else float(np.ptp(samples.values))
    trace = []
    ok, best = prob.test(hi, opts)
    trace.append(BracketStep(0, lo, hi, hi, ok))
    if not ok:
        raise BracketError(f"upper end z_hi={hi!r} is infeasible")
    it = 0
    while hi - lo >= opts.z_tol and it < opts.max_outer:
        it += 1
        z = 0.5 * (lo + hi)
        ok, witness = prob.test(z, opts)
        if ok:
            hi, best = z, witness
        else:
            lo = z
        trace.append(BracketStep(it, lo, hi, z, ok))
        log.debug("bisection %d: z=%.3e feasible=%s", it, z, ok)
    converged = hi - lo < opts.z_tol
    q = prob.Q @ best.den_coeffs
    report = FitReport(
        uniform_error(best, samples), it, time.perf_counter() - t0,
        history=[s.z_hi for s in trace], condition=None, converged=converged,
        extras={"z_lo": lo, "z_hi": hi, "trace": trace,
                "den_min": float(q.min()), "den_max": float(q.max()),
                "den_upper": opts.den_upper})
    return best, report
