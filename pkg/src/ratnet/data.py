"""Target functions, sample sets and gridded datasets.

Grid file format (plain text)::

    d
    <axis 0 coordinates, whitespace separated>
    ...
    <axis d-1 coordinates>
    <values in row-major order, any number per line>

Numbers are written with ``repr`` so a save/load round trip is bit-exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .basis import Box, normalize_to_unit_box
from .errors import DomainError, GridParseError


@dataclass(frozen=True, eq=False)
class SampleSet:
    points: np.ndarray  # (N, d), raw domain
    values: np.ndarray  # (N,)
    box: Box

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        vals = np.asarray(self.values, dtype=float).ravel()
        if pts.shape[0] != vals.size:
            raise ValueError(f"{pts.shape[0]} points but {vals.size} values")
        if pts.shape[1] != self.box.dim:
            raise ValueError(f"points are {pts.shape[1]}-dimensional, box is {self.box.dim}-dimensional")
        if not np.isfinite(vals).all():
            raise ValueError("sample values must be finite")
        if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise ValueError("sample points must be distinct")
        normalize_to_unit_box(pts, self.box)  # raises DomainError
        pts.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def unit_points(self):
        return normalize_to_unit_box(self.points, self.box)

    @property
    def x(self):
        """Coordinates of a univariate sample set as a flat array."""
        if self.dim != 1:
            raise ValueError("x is only defined for univariate samples")
        return self.points[:, 0]


# -- target functions --------------------------------------------------------

KDV_BOX = Box((0.0, -20.0), (40.0, 19.84375))
KDV_SHAPE = (512, 201)


def sqrt_abs_shift(x):
    """``sqrt(|x - 0.25|)``: continuous, not Lipschitz at 0.25."""
    return np.sqrt(np.abs(np.asarray(x, dtype=float) - 0.25))


def relu(x):
    return np.maximum(np.asarray(x, dtype=float), 0.0)


def kdv_like(x, t):
    """Soliton-shaped stand-in for the KdV observation field."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    return -np.sin(np.pi * x / 20.0) / np.cosh((x - 20.0 - t) / 4.0) ** 2


TARGETS = {
    "sqrt_abs_shift": (sqrt_abs_shift, Box.interval(-1.0, 1.0), (2001,)),
    "relu": (relu, Box.interval(-1.0, 1.0), (2001,)),
    "kdv_like": (kdv_like, KDV_BOX, KDV_SHAPE),
}


def _target(name):
    try:
        return TARGETS[name]
    except KeyError:
        raise ValueError(f"unknown target {name!r}; choose from {sorted(TARGETS)}") from None


def evaluate_target(name, points, box=None):
    """Evaluate a builtin target at raw-domain points, rejecting points outside ``box``."""
    fn, default_box, _ = _target(name)
    box = box or default_box
    pts = np.asarray(points, dtype=float).reshape(-1, box.dim)
    normalize_to_unit_box(pts, box)
    return fn(*pts.T)


def grid_function(name, box=None, n_per_dim=None) -> GridDataset:
    fn, default_box, default_n = _target(name)
    box = box or default_box
    n_per_dim = tuple(np.atleast_1d(n_per_dim if n_per_dim is not None else default_n))
    if len(n_per_dim) != box.dim:
        raise ValueError(f"need {box.dim} grid sizes, got {len(n_per_dim)}")
    if box.dim != len(default_box.lower):
        raise DomainError(f"target {name!r} is {len(default_box.lower)}-dimensional")
    axes = tuple(np.linspace(lo, hi, int(n)) for lo, hi, n in zip(box.lower, box.upper, n_per_dim))
    mesh = np.meshgrid(*axes, indexing="ij")
    return GridDataset(axes, fn(*mesh), box)


def sample_function(name, box=None, n_per_dim=None) -> SampleSet:
    """Uniform-grid samples of a builtin target (see :data:`TARGETS`)."""
    return to_sample_set(grid_function(name, box, n_per_dim))


# -- gridded data ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridDataset:
    axes: tuple
    values: np.ndarray  # shape (len(axes[0]), ..., len(axes[d-1]))
    box: Box

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float).ravel() for a in self.axes)
        shape = tuple(a.size for a in axes)
        vals = np.asarray(self.values, dtype=float)
        if vals.size != math.prod(shape):
            raise ValueError(f"{vals.size} values for a grid of shape {shape}")
        vals = vals.reshape(shape)
        if not np.isfinite(vals).all():
            raise ValueError("grid values must be finite")
        for i, a in enumerate(axes):
            if a.size > 1 and not (np.diff(a) > 0).all():
                raise ValueError(f"axis {i} is not strictly increasing")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", vals)

    @property
    def shape(self):
        return self.values.shape

    def __eq__(self, other):
        if not isinstance(other, GridDataset):
            return NotImplemented
        return (self.box == other.box and len(self.axes) == len(other.axes)
                and all(np.array_equal(a, b) for a, b in zip(self.axes, other.axes))
                and np.array_equal(self.values, other.values))

    @classmethod
    def from_axes(cls, axes, values):
        """Grid whose box is the bounding box of its axes."""
        axes = [np.asarray(a, dtype=float) for a in axes]
        return cls(tuple(axes), values, Box(tuple(a[0] for a in axes), tuple(a[-1] for a in axes)))


def to_sample_set(g: GridDataset) -> SampleSet:
    mesh = np.meshgrid(*g.axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    return SampleSet(points, g.values.ravel(), g.box)


def subsample_every_k(g: GridDataset, k: int) -> GridDataset:
    """Keep indices ``0, k, 2k, ...`` along every axis; the box is unchanged."""
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    for i, a in enumerate(g.axes):
        if len(range(0, a.size, k)) < 2:
            raise ValueError(f"k={k} leaves fewer than 2 points on axis {i} (length {a.size})")
    sl = tuple(slice(None, None, k) for _ in g.axes)
    return GridDataset(tuple(a[::k] for a in g.axes), g.values[sl], g.box)


def save_grid(g: GridDataset, path):
    lines = [str(len(g.axes))]
    lines += [" ".join(repr(float(v)) for v in a) for a in g.axes]
    flat = g.values.ravel()
    width = g.shape[-1]
    lines += [" ".join(repr(float(v)) for v in flat[i:i + width]) for i in range(0, flat.size, width)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_grid(path, box: Box | None = None) -> GridDataset:
    """Read a grid file; ``box`` defaults to the bounding box of the axes."""
    text = Path(path).read_text().splitlines()
    lines = [(i + 1, ln) for i, ln in enumerate(text) if ln.strip()]
    if not lines:
        raise GridParseError("empty file", line=1)

    def numbers(lineno, ln):
        try:
            return [float(tok) for tok in ln.split()]
        except ValueError as exc:
            raise GridParseError(str(exc), line=lineno) from None

    lineno, head = lines[0]
    try:
        d = int(head.strip())
    except ValueError:
        raise GridParseError(f"expected the dimension count, got {head.strip()!r}", line=lineno) from None
    if d < 1 or len(lines) < d + 1:
        raise GridParseError(f"header declares {d} axes but the file is too short", line=lineno)
    axes = []
    for lineno, ln in lines[1:d + 1]:
        axis = numbers(lineno, ln)
        if not axis:
            raise GridParseError("empty axis line", line=lineno)
        axes.append(np.array(axis))
    expected = math.prod(a.size for a in axes)
    values = []
    for lineno, ln in lines[d + 1:]:
        values.extend(numbers(lineno, ln))
        if len(values) > expected:
            raise GridParseError(f"more than the {expected} values declared by the axes", line=lineno)
    if len(values) != expected:
        last = lines[-1][0]
        raise GridParseError(f"found {len(values)} values, axes declare {expected}", line=last)
    try:
        if box is None:
            return GridDataset.from_axes(axes, np.array(values))
        return GridDataset(tuple(axes), np.array(values), box)
    except ValueError as exc:
        raise GridParseError(str(exc)) from None
