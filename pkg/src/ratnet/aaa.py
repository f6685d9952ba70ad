"""AAA: greedy barycentric rational approximation on a univariate sample set.

With support points ``z_j``, values ``f_j`` and weights ``w_j``::

    r(x) = sum_j w_j f_j / (x - z_j)  /  sum_j w_j / (x - z_j)

which is a rational of type ``(m-1, m-1)`` that interpolates ``f_j`` at
``z_j`` whenever ``w_j != 0``.  Supports are added one at a time at the
sample of largest residual; the weights minimise the linearised residual on
the remaining samples (smallest right singular vector of the Loewner matrix).
No cleanup of spurious poles is attempted.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import SampleSet
from .diffcorr import FitReport
from .errors import NumericalError, PoleError

SUPPORT_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class BarycentricRational:
    support: np.ndarray
    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        z = np.array(self.support, dtype=float).ravel()
        f = np.array(self.values, dtype=float).ravel()
        w = np.array(self.weights, dtype=float).ravel()
        if not (z.size == f.size == w.size) or z.size < 1:
            raise ValueError("support, values and weights need the same length m >= 1")
        if np.unique(z).size != z.size:
            raise ValueError("support points must be distinct")
        if not np.any(w != 0.0):
            raise ValueError("at least one weight must be nonzero")
        for name, v in (("support", z), ("values", f), ("weights", w)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def m(self):
        return self.support.size

    @property
    def degree(self):
        return (self.m - 1, self.m - 1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        diff = flat[:, None] - self.support[None, :]
        hit = np.abs(diff) <= SUPPORT_TOL
        on_support = hit.any(axis=1)
        out = np.empty(flat.size)
        if on_support.any():
            out[on_support] = self.values[np.argmax(hit[on_support], axis=1)]
        off = ~on_support
        if off.any():
            C = 1.0 / diff[off]
            den = C @ self.weights
            num = C @ (self.weights * self.values)
            scale = np.abs(C) @ np.abs(self.weights)
            bad = np.abs(den) <= 1e-14 * scale
            if bad.any():
                pt = float(flat[off][np.argmax(bad)])
                raise PoleError(f"barycentric denominator vanishes at x={pt!r}", point=pt)
            out[off] = num / den
        return out.reshape(x.shape)

    def poles(self):
        """Zeros of the denominator, from the ``(m+1) x (m+1)`` generalized eigenproblem."""
        m = self.m
        E = np.zeros((m + 1, m + 1))
        E[0, 1:] = self.weights
        E[1:, 0] = 1.0
        E[1:, 1:] = np.diag(self.support)
        B = np.eye(m + 1)
        B[0, 0] = 0.0
        ev = scipy.linalg.eigvals(E, B)
        return ev[np.isfinite(ev)]

    def to_dict(self):
        return {"support": self.support.tolist(), "values": self.values.tolist(),
                "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["support"], d["values"], d["weights"])


def bary_eval(r: BarycentricRational, x) -> float:
    return float(r(np.asarray([x], dtype=float))[0])


def mse(r, samples: SampleSet) -> float:
    res = samples.values - r(samples.x if samples.dim == 1 else samples.points)
    return float(np.mean(res ** 2))


def _real_poles_in(r, lo, hi, imag_tol=1e-8):
    p = r.poles()
    real = p[np.abs(p.imag) <= imag_tol * np.maximum(1.0, np.abs(p.real))].real
    return np.sort(real[(real >= lo) & (real <= hi)])


def aaa_fit(samples: SampleSet, m_max: int, rel_tol: float = 1e-13):
    """Greedy AAA with at most ``m_max`` support points.

    Returns ``(BarycentricRational, FitReport)``.  ``extras`` carries the
    residual after each support addition, real poles inside the sampled
    interval, and ``unstable`` (error above ten times the range of ``f``,
    or a real pole in the interval).
    """
    if samples.dim != 1:
        raise ValueError("AAA is univariate")
    m_max = int(m_max)
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    if 2 * m_max > len(samples):
        raise ValueError(f"m_max={m_max} needs at least {2 * m_max} samples, got {len(samples)}")
    t0 = time.perf_counter()
    Z = samples.x
    F = samples.values
    fmax = float(np.max(np.abs(F)))
    free = np.ones(Z.size, dtype=bool)
    R = np.full(F.size, F.mean())
    chosen = []
    w = None
    trace = []
    exact = False
    while len(chosen) < m_max:
        res = np.where(free, np.abs(F - R), -1.0)
        j = int(np.argmax(res))  # lowest index on ties
        if res[j] == 0.0 and chosen:
            exact = True
            break
        free[j] = False
        chosen.append(j)
        zj, fj = Z[chosen], F[chosen]
        C = 1.0 / (Z[free, None] - zj[None, :])
        L = (F[free, None] - fj[None, :]) * C
        try:
            _, s, Vh = np.linalg.svd(L, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            cond = float(np.linalg.cond(L)) if np.isfinite(L).all() else np.inf
            raise NumericalError(f"SVD of the {L.shape} Loewner matrix failed ({exc}); "
                                 f"condition {cond:.3e}", condition=cond) from exc
        w = Vh[-1]
        R = F.copy()
        R[free] = (C @ (w * fj)) / (C @ w)
        err = float(np.max(np.abs(F - R)))
        trace.append(err)
        if err <= rel_tol * fmax:
            break
    r = BarycentricRational(Z[chosen], F[chosen], w)
    lo, hi = samples.box.lower[0], samples.box.upper[0]
    try:
        error = float(np.max(np.abs(F - r(Z))))
    except PoleError:
        error = np.inf
    poles = _real_poles_in(r, lo, hi)
    unstable = bool(error > 10.0 * np.ptp(F) or poles.size > 0)
    report = FitReport(error, len(chosen), time.perf_counter() - t0, history=trace,
                       converged=exact or error <= rel_tol * fmax,
                       extras={"m": r.m, "degree": list(r.degree),
                               "real_poles": poles.tolist(), "unstable": unstable})
    return r, report
