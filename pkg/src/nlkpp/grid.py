"""Cell-centred uniform grids on boxes, node fields and discrete norms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .exceptions import ConfigurationError, ShapeError

__all__ = ["Grid", "Field", "build_grid", "sample", "norm", "as_values"]


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform cell-centred grid on ``[0, L_1] x ... x [0, L_N]``.

    Nodes are ordered C-style (last axis fastest).  Every node carries the
    same midpoint quadrature weight ``prod(h)``.
    """

    extent: tuple
    n: tuple

    @property
    def dim(self) -> int:
        return len(self.extent)

    @cached_property
    def h(self) -> tuple:
        return tuple(L / k for L, k in zip(self.extent, self.n))

    @property
    def size(self) -> int:
        return math.prod(self.n)

    @property
    def weight(self) -> float:
        return math.prod(self.h)

    @property
    def volume(self) -> float:
        return math.prod(self.extent)

    @cached_property
    def axes(self) -> tuple:
        return tuple((np.arange(k) + 0.5) * hk for k, hk in zip(self.n, self.h))

    @cached_property
    def nodes(self) -> np.ndarray:
        """Node coordinates, shape ``(size,)`` in 1D and ``(size, dim)`` otherwise."""
        if self.dim == 1:
            return self.axes[0].copy()
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @property
    def hmin(self) -> float:
        return min(self.h)

    def same_as(self, other: "Grid") -> bool:
        return self is other or (
            tuple(self.n) == tuple(other.n)
            and np.allclose(self.extent, other.extent, rtol=1e-14, atol=0.0)
        )

    def check_resolution(self, sigma: float, ratio: float = 4.0) -> None:
        """Raise :class:`ResolutionError` unless ``sigma / h >= ratio`` on every axis."""
        from .exceptions import ResolutionError

        hmax = max(self.h)
        if sigma / hmax < ratio * (1 - 1e-12):
            need = max(math.ceil(ratio * L / sigma) for L in self.extent)
            raise ResolutionError(
                f"sigma={sigma:g} is under-resolved on a grid with h={hmax:g} "
                f"(sigma/h={sigma / hmax:.3g} < {ratio:g}); use n >= {need} per axis",
                required_n=need,
            )

    def __repr__(self):
        return f"Grid(extent={self.extent}, n={self.n})"


@dataclass(frozen=True, eq=False)
class Field:
    """Node values attached to a grid."""

    grid: Grid
    values: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if vals.size != self.grid.size:
            raise ShapeError(f"field has {vals.size} values but grid has {self.grid.size} nodes")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return self.values.size

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    def __mul__(self, c):
        return Field(self.grid, self.values * c)

    __rmul__ = __mul__

    def __add__(self, other):
        return Field(self.grid, self.values + as_values(self.grid, other))

    def __sub__(self, other):
        return Field(self.grid, self.values - as_values(self.grid, other))

    def __neg__(self):
        return Field(self.grid, -self.values)


def _tuple(x):
    if np.ndim(x) == 0:
        return (x,)
    return tuple(x)


def build_grid(extent, n) -> Grid:
    """Build a grid on ``prod [0, L]``.

    ``extent`` is a length (1D) or a sequence of lengths; intervals ``(0, L)``
    are also accepted, and a flat ``(0, L)`` means the 1D interval.  ``n`` is a node count or one count per axis.
    """
    ext = _tuple(extent)
    if len(ext) == 2 and all(np.ndim(e) == 0 for e in ext) and float(ext[0]) == 0.0:
        # a flat pair (0, L) is a single interval, never a degenerate 2D box
        ext = ((ext[0], ext[1]),)
    if ext and all(np.ndim(e) == 1 for e in ext):
        lengths = []
        for lo_hi in ext:
            lo, hi = map(float, lo_hi)
            if lo != 0.0:
                raise ConfigurationError(f"axis intervals must start at 0, got [{lo}, {hi}]")
            lengths.append(hi)
        ext = tuple(lengths)
    ext = tuple(float(e) for e in ext)
    counts = _tuple(n)
    if len(counts) == 1 and len(ext) > 1:
        counts = counts * len(ext)
    if len(counts) != len(ext):
        raise ConfigurationError(f"got {len(ext)} extents but {len(counts)} node counts")
    if not 1 <= len(ext) <= 2:
        raise ConfigurationError(f"only 1D and 2D boxes are supported, got dim={len(ext)}")
    if any(not (L > 0 and math.isfinite(L)) for L in ext):
        raise ConfigurationError(f"extents must be positive, got {ext}")
    if any(int(k) != k or k < 2 for k in counts):
        raise ConfigurationError(f"node counts must be integers >= 2, got {counts}")
    return Grid(extent=ext, n=tuple(int(k) for k in counts))


def sample(grid: Grid, f: Callable) -> Field:
    """Evaluate ``f`` at every node.

    ``f`` receives the coordinate arrays (``f(x)`` in 1D, ``f(x, y)`` in 2D) and
    may return a scalar, which is broadcast.
    """
    if grid.dim == 1:
        vals = f(grid.nodes)
    else:
        vals = f(*grid.nodes.T)
    vals = np.broadcast_to(np.asarray(vals, dtype=float), (grid.size,))
    return Field(grid, np.array(vals))


def as_values(grid: Grid, f) -> np.ndarray:
    """Coerce a Field, scalar or array to a node-value vector on ``grid``."""
    if isinstance(f, Field):
        if not f.grid.same_as(grid):
            raise ShapeError("field lives on a different grid")
        return f.values
    arr = np.asarray(f, dtype=float)
    if arr.ndim == 0:
        return np.full(grid.size, float(arr))
    arr = arr.reshape(-1)
    if arr.size != grid.size:
        raise ShapeError(f"expected {grid.size} node values, got {arr.size}")
    return arr


def norm(field: Field, kind: str = "L2") -> float:
    """Discrete L1, L2 or Linf norm using the midpoint weights."""
    v = field.values if isinstance(field, Field) else np.asarray(field, dtype=float)
    if v.size == 0:
        raise ShapeError("norm of an empty field")
    w = field.grid.weight if isinstance(field, Field) else 1.0
    key = kind.lower()
    if key == "l1":
        return float(w * np.sum(np.abs(v)))
    if key == "l2":
        return float(math.sqrt(w * np.dot(v, v)))
    if key in ("linf", "inf", "max"):
        return float(np.max(np.abs(v)))
    raise ConfigurationError(f"unknown norm kind {kind!r}")
