"""Chebyshev bases on boxes and the rational approximant built on them.

Every polynomial here is a linear combination of products of first-kind
Chebyshev polynomials, ``T_a1(x1) * ... * T_ad(xd)``, evaluated on points
mapped affinely from their box onto ``[-1, 1]^d``.  Multi-indices are kept
in graded lexicographic order: by total degree, then lexicographically.
"""
from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PoleError

BOX_SLACK = 1e-12
UNIT_SLACK = 1e-9
POLE_THRESHOLD = 1e-12


class Scheme(str, enum.Enum):
    TENSOR = "tensor"
    TOTAL = "total"


@dataclass(frozen=True)
class Box:
    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or not lo:
            raise ValueError("box bounds must have the same, non-zero length")
        for i, (a, b) in enumerate(zip(lo, hi)):
            if not a < b:
                raise ValueError(f"box dimension {i}: lower {a} is not below upper {b}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def interval(cls, a, b):
        return cls((a,), (b,))

    @property
    def dim(self):
        return len(self.lower)

    def to_dict(self):
        return {"lower": list(self.lower), "upper": list(self.upper)}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["lower"]), tuple(d["upper"]))


UNIT_INTERVAL = Box.interval(-1.0, 1.0)


def index_set(degree, scheme=Scheme.TOTAL):
    """Multi-indices of a Chebyshev basis, in graded lexicographic order.

    ``TENSOR`` keeps every ``alpha`` with ``alpha_i <= degree_i``; ``TOTAL``
    keeps every ``alpha`` with ``sum(alpha) <= max(degree)``.
    """
    degree = tuple(int(n) for n in np.atleast_1d(degree))
    if any(n < 0 for n in degree):
        raise ValueError(f"degrees must be non-negative, got {degree}")
    scheme = Scheme(scheme)
    if scheme is Scheme.TENSOR:
        alphas = itertools.product(*(range(n + 1) for n in degree))
    else:
        top = max(degree)
        alphas = (a for a in itertools.product(range(top + 1), repeat=len(degree))
                  if sum(a) <= top)
    return tuple(sorted(alphas, key=lambda a: (sum(a), a)))


def n_terms(degree, scheme=Scheme.TOTAL):
    return len(index_set(degree, scheme))


@dataclass(frozen=True)
class DegreeSpec:
    """Numerator/denominator degrees of a (possibly multivariate) rational.

    For univariate problems the two degrees are the polynomial degrees
    ``(n, m)``: numerator with ``n + 1`` coefficients, denominator with ``m + 1``.
    """

    num_degree: tuple
    den_degree: tuple
    scheme: Scheme = Scheme.TOTAL

    def __post_init__(self):
        num = tuple(int(v) for v in np.atleast_1d(self.num_degree))
        den = tuple(int(v) for v in np.atleast_1d(self.den_degree))
        if len(num) != len(den) or not num:
            raise ValueError("numerator and denominator degrees need the same dimension d >= 1")
        if min(num + den) < 0:
            raise ValueError("degrees must be non-negative")
        object.__setattr__(self, "num_degree", num)
        object.__setattr__(self, "den_degree", den)
        object.__setattr__(self, "scheme", Scheme(self.scheme))

    @classmethod
    def univariate(cls, n, m):
        return cls((n,), (m,))

    @classmethod
    def uniform(cls, n, m, dim=2, scheme=Scheme.TOTAL):
        """Degree ``n`` (numerator) and ``m`` (denominator) in every one of ``dim`` variables."""
        return cls((n,) * dim, (m,) * dim, scheme)

    @property
    def dim(self):
        return len(self.num_degree)

    @property
    def num_index(self):
        return index_set(self.num_degree, self.scheme)

    @property
    def den_index(self):
        return index_set(self.den_degree, self.scheme)

    @property
    def n_params(self):
        return len(self.num_index) + len(self.den_index)

    def label(self):
        if self.dim == 1:
            return f"({self.num_degree[0]},{self.den_degree[0]})"
        return f"({max(self.num_degree)},{max(self.den_degree)})/{self.scheme.value}"


def normalize_to_unit_box(points, box: Box):
    """Map ``points`` (shape ``(N, d)`` or ``(N,)`` for d=1) affinely onto ``[-1,1]^d``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim <= 1 and box.dim == 1:
        pts = pts.reshape(-1, 1)
    pts = np.atleast_2d(pts)
    if pts.shape[1] != box.dim:
        raise DomainError(f"points have dimension {pts.shape[1]}, box has {box.dim}")
    lo = np.asarray(box.lower)
    hi = np.asarray(box.upper)
    slack = BOX_SLACK * np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
    below = pts < lo - slack
    above = pts > hi + slack
    if below.any() or above.any():
        row, col = np.argwhere(below | above)[0]
        raise DomainError(
            f"coordinate {col} of point {row} is {pts[row, col]!r}, "
            f"outside [{lo[col]}, {hi[col]}]")
    unit = 2.0 * (pts - lo) / (hi - lo) - 1.0
    return np.clip(unit, -1.0, 1.0)


def chebyshev_table(x, kmax):
    """``T_0(x) .. T_kmax(x)`` stacked on a new last axis (three-term recurrence).

    Valid for any real ``x``; callers that need boundedness check the range.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (kmax + 1,))
    out[..., 0] = 1.0
    if kmax >= 1:
        out[..., 1] = x
    for k in range(2, kmax + 1):
        out[..., k] = 2.0 * x * out[..., k - 1] - out[..., k - 2]
    return out


def _check_unit(pts):
    bad = np.abs(pts) > 1.0 + UNIT_SLACK
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise DomainError(f"coordinate {col} of point {row} is {pts[row, col]!r}, outside [-1, 1]")


def basis_matrix(points, idx):
    """Rows are points (already in ``[-1,1]^d``), columns are the basis terms of ``idx``."""
    idx = np.asarray(idx, dtype=int)
    pts = np.asarray(points, dtype=float)
    if pts.ndim <= 1:
        pts = pts.reshape(-1, idx.shape[1]) if idx.shape[1] > 1 else pts.reshape(-1, 1)
    if pts.shape[1] != idx.shape[1]:
        raise DomainError(f"points have dimension {pts.shape[1]}, basis has {idx.shape[1]}")
    _check_unit(pts)
    pts = np.clip(pts, -1.0, 1.0)
    out = np.ones((pts.shape[0], idx.shape[0]))
    for i in range(idx.shape[1]):
        table = chebyshev_table(pts[:, i], int(idx[:, i].max()))
        out *= table[:, idx[:, i]]
    return out


def eval_basis(point, idx):
    return basis_matrix(np.atleast_1d(np.asarray(point, dtype=float))[None, :], idx)[0]


@dataclass(frozen=True, eq=False)
class RationalApprox:
    """``p(x) / q(x)`` with ``p``, ``q`` in the Chebyshev basis of ``spec`` on ``box``."""

    num_coeffs: np.ndarray
    den_coeffs: np.ndarray
    spec: DegreeSpec
    box: Box
    idx_num: tuple = field(init=False, repr=False)
    idx_den: tuple = field(init=False, repr=False)

    def __post_init__(self):
        a = np.array(self.num_coeffs, dtype=float)
        b = np.array(self.den_coeffs, dtype=float)
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "num_coeffs", a)
        object.__setattr__(self, "den_coeffs", b)
        object.__setattr__(self, "idx_num", self.spec.num_index)
        object.__setattr__(self, "idx_den", self.spec.den_index)
        if self.spec.dim != self.box.dim:
            raise ValueError("degree spec and box disagree on dimension")
        if a.shape != (len(self.idx_num),) or b.shape != (len(self.idx_den),):
            raise ValueError(
                f"coefficient lengths {a.shape[0]}/{b.shape[0]} do not match "
                f"basis sizes {len(self.idx_num)}/{len(self.idx_den)}")

    def numerator(self, points):
        return basis_matrix(normalize_to_unit_box(points, self.box), self.idx_num) @ self.num_coeffs

    def denominator(self, points):
        return basis_matrix(normalize_to_unit_box(points, self.box), self.idx_den) @ self.den_coeffs

    def __call__(self, points):
        unit = normalize_to_unit_box(points, self.box)
        p = basis_matrix(unit, self.idx_num) @ self.num_coeffs
        q = basis_matrix(unit, self.idx_den) @ self.den_coeffs
        small = np.abs(q) < POLE_THRESHOLD
        if small.any():
            i = int(np.argmax(small))
            pt = np.atleast_2d(np.asarray(points, dtype=float).reshape(len(q), -1))[i]
            raise PoleError(f"denominator {q[i]:.3e} at point {pt.tolist()}", point=pt)
        return p / q

    def to_dict(self):
        return {
            "box": self.box.to_dict(),
            "scheme": self.spec.scheme.value,
            "num_degree": list(self.spec.num_degree),
            "den_degree": list(self.spec.den_degree),
            "num_coeffs": self.num_coeffs.tolist(),
            "den_coeffs": self.den_coeffs.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        spec = DegreeSpec(tuple(d["num_degree"]), tuple(d["den_degree"]), Scheme(d["scheme"]))
        return cls(np.array(d["num_coeffs"], dtype=float), np.array(d["den_coeffs"], dtype=float),
                   spec, Box.from_dict(d["box"]))

    def to_json(self, **kw):
        # json writes floats with repr(), i.e. the shortest round-tripping form (<= 17 digits)
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def eval_rational(r: RationalApprox, point) -> float:
    """Value of ``r`` at a single raw-domain point."""
    pt = np.atleast_1d(np.asarray(point, dtype=float))
    return float(r(pt[None, :])[0])


def constant_rational(value, spec: DegreeSpec, box: Box) -> RationalApprox:
    a = np.zeros(len(spec.num_index))
    b = np.zeros(len(spec.den_index))
    a[0] = value
    b[0] = 1.0
    return RationalApprox(a, b, spec, box)

