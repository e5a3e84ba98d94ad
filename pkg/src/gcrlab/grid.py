"""Uniform structured grids and periodic finite differences.

Axes are numbered 1..d in every user-facing call. Arrays carry the grid as
their trailing ``d`` axes, so a scalar field has shape ``grid.shape`` and a
field with component indices ``(i, j)`` has shape ``(d, d) + grid.shape``.
"""

from dataclasses import dataclass
from functools import cached_property
from math import gcd, prod

import numpy as np

from . import kernels
from .errors import ConfigurationError, ShapeMismatchError, UnsupportedBoundaryError

MIN_RESOLUTION = 8


@dataclass(frozen=True)
class Grid:
    """Box ``[0, L_1) x ... x [0, L_d)`` sampled at ``n_i`` nodes per axis."""

    lengths: tuple
    resolution: tuple
    periodic: tuple

    @property
    def d(self):
        return len(self.resolution)

    @property
    def shape(self):
        return tuple(self.resolution)

    @property
    def n_nodes(self):
        return prod(self.resolution)

    @cached_property
    def spacing(self):
        return tuple(L / n for L, n in zip(self.lengths, self.resolution))

    @property
    def cell_volume(self):
        return prod(self.spacing)

    @property
    def volume(self):
        return prod(self.lengths)

    def axis_coords(self, axis):
        """Node coordinates ``k * dx`` along 1-based ``axis``."""
        n = self.resolution[axis - 1]
        return np.arange(n) * self.spacing[axis - 1]

    @cached_property
    def coords(self):
        """Tuple of ``d`` arrays of shape ``grid.shape`` (``ij`` indexing)."""
        axes = [self.axis_coords(i + 1) for i in range(self.d)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def node_coords(self, index):
        return tuple(float(k * h) for k, h in zip(index, self.spacing))

    def phase(self, wave):
        """Angle ``sum_i 2*pi*wave_i*x_i/L_i`` for an integer wave vector.

        The angle is reduced exactly in integer arithmetic before the single
        float conversion, so nodes that are translates of each other along
        ``wave`` get bitwise-identical phases.
        """
        wave = [int(w) for w in wave]
        if len(wave) != self.d:
            raise ShapeMismatchError(f"wave vector has {len(wave)} entries, grid has d={self.d}")
        denom = 1
        for n in self.resolution:
            denom = denom * n // gcd(denom, n)
        ticks = np.zeros(self.shape, dtype=np.int64)
        for axis, (w, n) in enumerate(zip(wave, self.resolution)):
            if w == 0:
                continue
            idx = np.arange(n, dtype=np.int64) * (w * (denom // n))
            shape = [1] * self.d
            shape[axis] = n
            ticks = ticks + idx.reshape(shape)
        ticks = np.mod(ticks, denom)
        return (2.0 * np.pi / denom) * ticks.astype(float)

    def check_same(self, other):
        if self != other:
            raise ShapeMismatchError("operands live on different grids")


def build_grid(d, lengths, resolution, periodic=True):
    """Validate a scene's geometry block and return a :class:`Grid`.

    ``lengths`` and ``resolution`` may be scalars (broadcast to every axis)
    or length-``d`` sequences; ``periodic`` likewise.
    """
    d = int(d)
    if d < 2:
        raise ConfigurationError(f"intrinsic dimension must be at least 2, got {d}")

    def per_axis(value, name):
        if np.isscalar(value):
            return (value,) * d
        value = tuple(value)
        if len(value) != d:
            raise ConfigurationError(f"{name} has {len(value)} entries, expected d={d}")
        return value

    lengths = tuple(float(L) for L in per_axis(lengths, "box"))
    resolution = per_axis(resolution, "resolution")
    periodic = tuple(bool(p) for p in per_axis(periodic, "periodic"))
    for axis, L in enumerate(lengths, start=1):
        if not np.isfinite(L) or L <= 0:
            raise ConfigurationError(f"box length must be positive on axis {axis}, got {L}")
    checked = []
    for axis, n in enumerate(resolution, start=1):
        if int(n) != n or n <= 0:
            raise ConfigurationError(f"resolution must be a positive integer on axis {axis}, got {n}")
        if n < MIN_RESOLUTION:
            raise ConfigurationError(
                f"resolution below minimum on axis {axis} ({int(n)} < {MIN_RESOLUTION})"
            )
        checked.append(int(n))
    return Grid(lengths, tuple(checked), periodic)


def diff(values, grid, axis):
    """Central difference of a raw array along 1-based grid ``axis``.

    The grid occupies the trailing ``d`` axes of ``values``.
    """
    if not 1 <= axis <= grid.d:
        raise ConfigurationError(f"axis must be in 1..{grid.d}, got {axis}")
    if not grid.periodic[axis - 1]:
        raise UnsupportedBoundaryError(
            f"axis {axis} is not periodic; only periodic central differences are supported"
        )
    values = np.asarray(values, dtype=float)
    if values.shape[values.ndim - grid.d:] != grid.shape:
        raise ShapeMismatchError(f"array shape {values.shape} does not end with grid shape {grid.shape}")
    return kernels.central_diff(values, values.ndim - grid.d + axis - 1, grid.spacing[axis - 1])


def gradient(values, grid):
    """Stack of ``diff`` over all axes; the new axis 0 is the derivative index."""
    return np.stack([diff(values, grid, k) for k in range(1, grid.d + 1)])


def partial_derivative(field, axis):
    """``d/dx_axis`` of a :class:`~gcrlab.tensor.TensorField` (or raw array + grid).

    Differentiation acts on the canonical storage, so the declared
    symmetries of the input carry over to the result unchanged.
    """
    from .tensor import TensorField

    if isinstance(field, TensorField):
        return field.with_data(diff(field.data, field.grid, axis))
    raise TypeError("partial_derivative expects a TensorField; use grid.diff for raw arrays")
