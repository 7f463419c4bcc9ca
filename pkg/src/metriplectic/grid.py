"""Periodic uniform grids, centred differences and quadrature.

The centred periodic difference ``D`` is an exactly antisymmetric matrix and
the quadrature weight is a constant, so ``integrate(f * D g) == -integrate(g * D f)``
holds up to rounding. Every degeneracy identity downstream relies on that.

Scalar fields are arrays of shape ``grid.dims``; vector fields carry a leading
axis of length 3 (x, y, z components), whatever the number of active axes.
"""

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import kernels


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    dims: tuple
    lengths: tuple
    spacing: tuple = field(init=False, compare=False)

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        lengths = tuple(float(x) for x in self.lengths)
        if not 1 <= len(dims) <= 3:
            raise GridError("grid must have 1 to 3 axes")
        if len(lengths) != len(dims):
            raise GridError("dims and lengths must have the same number of axes")
        if any(n < 4 for n in dims):
            raise GridError(f"every active axis needs at least 4 nodes, got {dims}")
        if any(not (x > 0.0 and math.isfinite(x)) for x in lengths):
            raise GridError(f"lengths must be positive and finite, got {lengths}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "spacing", tuple(x / n for x, n in zip(lengths, dims)))

    @property
    def ndim(self):
        return len(self.dims)

    @property
    def shape3(self):
        return self.dims + (1,) * (3 - self.ndim)

    @property
    def size(self):
        return math.prod(self.dims)

    @property
    def cell_volume(self):
        return math.prod(self.spacing)

    @property
    def volume(self):
        return math.prod(self.lengths)

    @property
    def h_min(self):
        return min(self.spacing)

    def is_active(self, axis):
        return 0 <= axis < self.ndim

    def coords(self):
        """Node coordinates, one array of shape ``dims`` per active axis."""
        axes = [np.arange(n) * h for n, h in zip(self.dims, self.spacing)]
        return np.meshgrid(*axes, indexing="ij")

    def zeros(self):
        return np.zeros(self.dims)

    def zeros_vector(self):
        return np.zeros((3,) + self.dims)

    def check_scalar(self, f):
        if np.shape(f) != self.dims:
            raise GridError(f"field shape {np.shape(f)} does not match grid {self.dims}")

    def check_vector(self, u):
        if np.shape(u) != (3,) + self.dims:
            raise GridError(
                f"vector field shape {np.shape(u)} does not match grid (3,)+{self.dims}"
            )


def central_diff(grid, f, axis):
    """Second-order centred periodic difference of ``f`` along ``axis``."""
    if not grid.is_active(axis):
        raise GridError(f"axis not active: {axis} (grid has {grid.ndim} axes)")
    grid.check_scalar(f)
    c = 0.5 / grid.spacing[axis]
    f3 = np.ascontiguousarray(f, dtype=np.float64).reshape(grid.shape3)
    return kernels.diff3(f3, axis, c).reshape(grid.dims)


def _d(grid, f, axis):
    # derivative along an inactive axis of a field uniform in that direction
    if axis >= grid.ndim:
        return np.zeros(grid.dims)
    return central_diff(grid, f, axis)


def gradient(grid, f):
    grid.check_scalar(f)
    return np.stack([_d(grid, f, a) for a in range(3)])


def divergence(grid, u):
    grid.check_vector(u)
    out = central_diff(grid, u[0], 0)
    for a in range(1, grid.ndim):
        out = out + central_diff(grid, u[a], a)
    return out


def curl(grid, u):
    grid.check_vector(u)
    d = lambda comp, axis: _d(grid, u[comp], axis)  # noqa: E731
    return np.stack(
        [
            d(2, 1) - d(1, 2),
            d(0, 2) - d(2, 0),
            d(1, 0) - d(0, 1),
        ]
    )


def tensor_gradient(grid, u):
    """``out[i, k] = D_k u_i`` for a vector field ``u``."""
    grid.check_vector(u)
    return np.stack([np.stack([_d(grid, u[i], k) for k in range(3)]) for i in range(3)])


def integrate(grid, f):
    """Quadrature with a correctly rounded sum, so results do not depend on order."""
    grid.check_scalar(f)
    return grid.cell_volume * math.fsum(np.ravel(f).tolist())


def inner(grid, a, b):
    """Quadrature of the pointwise product (vector fields contract over components)."""
    prod_ab = np.asarray(a) * np.asarray(b)
    if prod_ab.shape == (3,) + grid.dims:
        return grid.cell_volume * math.fsum(np.ravel(prod_ab).tolist())
    return integrate(grid, prod_ab)


@dataclass(frozen=True)
class SmoothField:
    """Band-limited trigonometric field, defined independently of resolution.

    ``evaluate`` samples the same continuum function on any grid with the
    right number of axes; values are bounded by 1 in absolute value.
    """

    modes: tuple
    cos_coef: tuple
    sin_coef: tuple

    @classmethod
    def random(cls, rng, ndim, kmax=2):
        if isinstance(rng, (int, np.integer)):
            rng = np.random.default_rng(rng)
        modes = []
        for k in product(range(-kmax, kmax + 1), repeat=ndim):
            nz = [c for c in k if c != 0]
            if nz and nz[0] > 0:
                modes.append(k)
        damp = np.array([1.0 / (1.0 + sum(c * c for c in k)) for k in modes])
        a = rng.standard_normal(len(modes)) * damp
        b = rng.standard_normal(len(modes)) * damp
        norm = np.sum(np.abs(a)) + np.sum(np.abs(b))
        return cls(tuple(modes), tuple(a / norm), tuple(b / norm))

    def evaluate(self, grid):
        if self.modes and len(self.modes[0]) != grid.ndim:
            raise GridError("smooth field and grid disagree on the number of axes")
        xs = grid.coords()
        out = np.zeros(grid.dims)
        for k, a, b in zip(self.modes, self.cos_coef, self.sin_coef):
            phase = sum(2.0 * np.pi * c * x / L for c, x, L in zip(k, xs, grid.lengths))
            out += a * np.cos(phase) + b * np.sin(phase)
        return out
