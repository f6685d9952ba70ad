"""Differential correction for best uniform rational approximation on a finite set.

Each iteration solves one LP in the coefficients ``(a, b)`` of ``p`` and
``q`` plus a level ``u``::

    minimize u
    s.t.  |f_i q(x_i) - p(x_i)| - d_k q(x_i) <= u q_k(x_i)    for every sample i
          |a_j|, |b_j| <= 1

where ``q_k`` and ``d_k`` are the previous denominator and its uniform error.
A negative optimum certifies a strictly better approximant with ``q > 0`` on
the samples; the iteration stops once the error no longer improves by ``tol``.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import lp as lpmod
from .basis import Box, DegreeSpec, RationalApprox, basis_matrix, constant_rational
from .data import SampleSet, relu
from .errors import DegenerateFitError, InvariantViolation

log = logging.getLogger(__name__)

ILL_CONDITIONED = 1e12


@dataclass
class FitReport:
    error: float
    iterations: int
    wall_time: float
    history: list = field(default_factory=list)
    condition: float | None = None
    converged: bool = True
    extras: dict = field(default_factory=dict)

    @property
    def ill_conditioned(self):
        return self.condition is not None and self.condition > ILL_CONDITIONED

    def to_dict(self):
        return {
            "error": self.error,
            "iterations": self.iterations,
            "wall_time": self.wall_time,
            "history": [float(h) for h in self.history],
            "condition": self.condition,
            "ill_conditioned": self.ill_conditioned,
            "converged": self.converged,
            **self.extras,
        }


def uniform_error(r, samples: SampleSet) -> float:
    """``max_i |f_i - r(x_i)|`` over the sample set (pole errors propagate)."""
    return float(np.max(np.abs(samples.values - r(samples.points))))


def _check_dims(samples, spec):
    if spec.dim != samples.dim:
        raise ValueError(f"degree spec is {spec.dim}-dimensional, samples are {samples.dim}-dimensional")


def fit(samples: SampleSet, spec: DegreeSpec, *, max_iters=100, tol=1e-10,
        lp_method="highs", feas_tol=lpmod.FEAS_TOL):
    """Best uniform rational approximation of ``samples`` with degrees ``spec``.

    Returns ``(RationalApprox, FitReport)``.  ``FitReport.condition`` is the
    2-norm condition number of the last LP constraint matrix.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    _check_dims(samples, spec)
    t0 = time.perf_counter()
    f = samples.values
    unit = samples.unit_points
    P = basis_matrix(unit, spec.num_index)
    Q = basis_matrix(unit, spec.den_index)
    na, nb = P.shape[1], Q.shape[1]

    if np.ptp(f) == 0.0:
        r = constant_rational(f[0], spec, samples.box)
        return r, FitReport(0.0, 0, time.perf_counter() - t0, [0.0], None)

    a = np.zeros(na)
    b = np.zeros(nb)
    b[0] = 1.0
    delta = float(np.max(np.abs(f)))
    history = [delta]
    cond = None
    c = np.zeros(na + nb + 1)
    c[-1] = 1.0
    bounds = np.vstack([np.tile([-1.0, 1.0], (na + nb, 1)), [-np.inf, np.inf]])
    it = 0
    for it in range(1, max_iters + 1):
        qk = Q @ b
        A = np.vstack([
            np.hstack([-P, (f - delta)[:, None] * Q, -qk[:, None]]),
            np.hstack([P, (-f - delta)[:, None] * Q, -qk[:, None]]),
        ])
        sol = lpmod.solve(lpmod.LinearProgram(c, A, np.zeros(A.shape[0]), bounds),
                          method=lp_method, feas_tol=feas_tol, opt_tol=feas_tol)
        if not sol.optimal:
            raise InvariantViolation(
                f"differential correction LP {sol.status.value} at iteration {it}; "
                "the previous iterate is always feasible")
        cond = float(np.linalg.cond(A))
        a_new, b_new = sol.y[:na], sol.y[na:na + nb]
        q_new = Q @ b_new
        if q_new.min() <= 0.0:
            log.debug("iteration %d: non-positive denominator, stopping", it)
            break
        err = float(np.max(np.abs(f - (P @ a_new) / q_new)))
        if err >= delta:
            break
        improvement = delta - err
        a, b, delta = a_new, b_new, err
        history.append(err)
        if improvement < tol:
            break
    q = Q @ b
    if q.min() <= 0.0:
        raise DegenerateFitError(f"denominator reaches {q.min():.3e} on the samples")
    r = RationalApprox(a, b, spec, samples.box)
    report = FitReport(uniform_error(r, samples), it, time.perf_counter() - t0, history, cond,
                       converged=it < max_iters)
    return r, report


def fit_relu_rational(degrees: DegreeSpec | None = None, interval: Box | None = None,
                      n_points=2001):
    """Best uniform rational approximation to ``max(0, x)`` on a uniform grid."""
    degrees = degrees or DegreeSpec.univariate(3, 2)
    interval = interval or Box.interval(-1.0, 1.0)
    if interval.dim != 1 or degrees.dim != 1:
        raise ValueError("the ReLU fit is univariate")
    x = np.linspace(interval.lower[0], interval.upper[0], n_points)
    return fit(SampleSet(x, relu(x), interval), degrees)
