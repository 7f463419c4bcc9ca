"""Fluid state container and tendencies."""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, SmoothField

_versions = itertools.count()


class StateError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FluidState:
    """Velocity ``v`` (3, *dims), density ``rho`` and specific entropy ``s``.

    Arrays are made read-only on construction; ``version`` is unique per
    instance and keys derived-field caches.
    """

    grid: Grid
    v: np.ndarray
    rho: np.ndarray
    s: np.ndarray
    version: int = field(init=False, default=-1)

    def __post_init__(self):
        v = np.array(self.v, dtype=np.float64)
        rho = np.array(self.rho, dtype=np.float64)
        s = np.array(self.s, dtype=np.float64)
        self.grid.check_vector(v)
        self.grid.check_scalar(rho)
        self.grid.check_scalar(s)
        for name, arr in (("v", v), ("rho", rho), ("s", s)):
            if not np.all(np.isfinite(arr)):
                raise StateError(f"non-finite values in {name}")
            arr.flags.writeable = False
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "version", next(_versions))

    def check_density(self):
        bad = np.argwhere(~(self.rho > 0.0))
        if bad.size:
            idx = tuple(int(i) for i in bad[0])
            raise StateError(f"nonpositive density {self.rho[idx]!r} at node {idx}")

    def axpy(self, a, tendency):
        """State ``self + a * tendency``."""
        return FluidState(
            self.grid, self.v + a * tendency.v, self.rho + a * tendency.rho, self.s + a * tendency.s
        )

    @classmethod
    def uniform(cls, grid, rho0, s0, v0=(0.0, 0.0, 0.0)):
        v = np.stack([np.full(grid.dims, float(c)) for c in v0])
        return cls(grid, v, np.full(grid.dims, float(rho0)), np.full(grid.dims, float(s0)))

    @classmethod
    def random_smooth(cls, grid, seed, rho0=1.0, s0=1.0, v_amp=0.3, rho_amp=0.2, s_amp=0.3, kmax=2):
        """Band-limited random state; the same seed gives the same continuum fields on any grid."""
        rng = np.random.default_rng(seed)
        fields = [SmoothField.random(rng, grid.ndim, kmax) for _ in range(5)]
        v = np.stack([v_amp * f.evaluate(grid) for f in fields[:3]])
        rho = rho0 * (1.0 + rho_amp * fields[3].evaluate(grid))
        s = s0 + s_amp * fields[4].evaluate(grid)
        return cls(grid, v, rho, s)


@dataclass
class Tendency:
    """Time derivative of each state field (also used for functional derivatives)."""

    v: np.ndarray
    rho: np.ndarray
    s: np.ndarray

    def __add__(self, other):
        return Tendency(self.v + other.v, self.rho + other.rho, self.s + other.s)

    def __sub__(self, other):
        return Tendency(self.v - other.v, self.rho - other.rho, self.s - other.s)

    def scaled(self, a):
        return Tendency(a * self.v, a * self.rho, a * self.s)

    def max_abs(self):
        return max(float(np.max(np.abs(x))) for x in (self.v, self.rho, self.s))

    def fields(self):
        return {"v": self.v, "rho": self.rho, "s": self.s}

    @classmethod
    def zeros(cls, grid):
        return cls(grid.zeros_vector(), grid.zeros(), grid.zeros())
