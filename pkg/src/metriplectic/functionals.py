"""Functionals of the fluid state with exact discrete functional derivatives.

A discrete functional derivative is the gradient of the quadrature sum with
respect to node values, divided by the cell volume. With that convention

    F[psi + eps dpsi] - F[psi] = eps * inner(dF/dpsi, dpsi) + O(eps**2)

holds for the discrete ``inner`` exactly as in the continuum.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import SmoothField, central_diff, integrate, inner
from .state import FluidState, Tendency


@dataclass(frozen=True)
class Functional:
    label: str
    evaluate: Callable
    derivative: Callable

    def __call__(self, state):
        return self.evaluate(state)

    def __add__(self, other):
        return Functional(
            f"({self.label} + {other.label})",
            lambda st: self.evaluate(st) + other.evaluate(st),
            lambda st: self.derivative(st) + other.derivative(st),
        )

    def __mul__(self, a):
        a = float(a)
        return Functional(
            f"{a:g}*{self.label}",
            lambda st: a * self.evaluate(st),
            lambda st: self.derivative(st).scaled(a),
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)


# --- entropy profiles --------------------------------------------------------


@dataclass(frozen=True)
class EntropyProfile:
    """A function ``f(s)`` and its derivative, for the functional ``int rho f(s)``."""

    f: Callable
    f_prime: Callable
    description: str
    coefficients: tuple = field(default=(), compare=False)

    def __post_init__(self):
        s = np.linspace(-2.0, 2.0, 9)
        h = 1e-5
        fd = (np.asarray(self.f(s + h)) - np.asarray(self.f(s - h))) / (2 * h)
        exact = np.asarray(self.f_prime(s))
        tol = 1e-6 * (1.0 + np.max(np.abs(exact)))
        if not np.all(np.abs(fd - exact) <= tol):
            raise ValueError(f"f_prime is not the derivative of f for profile {self.description!r}")

    @property
    def is_affine(self):
        c = self.coefficients
        return bool(c) and all(x == 0.0 for x in c[2:])

    @classmethod
    def linear(cls, lam=1.0):
        lam = float(lam)
        return cls.polynomial([0.0, lam], description=f"linear {lam:g}*s")

    @classmethod
    def polynomial(cls, coefficients, description=None):
        """``f(s) = sum_k c[k] s**k`` with coefficients in increasing degree."""
        c = tuple(float(x) for x in coefficients)
        if not c:
            c = (0.0,)
        dc = tuple(k * c[k] for k in range(1, len(c))) or (0.0,)
        f = np.polynomial.Polynomial(c)
        fp = np.polynomial.Polynomial(dc)
        if description is None:
            description = "polynomial " + ", ".join(f"{x:g}" for x in c)
        return cls(
            lambda s: f(np.asarray(s, dtype=float)),
            lambda s: fp(np.asarray(s, dtype=float)),
            description,
            c,
        )


# --- built-in functionals -----------------------------------------------------


def _kinetic_sq(v):
    return (v[0] * v[0] + v[1] * v[1]) + v[2] * v[2]


def hamiltonian(eos):
    """Total energy: kinetic plus internal."""

    def value(st):
        st.check_density()
        U = eos.internal_energy(st.rho, st.s)
        return integrate(st.grid, 0.5 * st.rho * _kinetic_sq(st.v) + st.rho * U)

    def deriv(st):
        st.check_density()
        U = eos.internal_energy(st.rho, st.s)
        p = eos.pressure(st.rho, st.s)
        T = eos.temperature(st.rho, st.s)
        return Tendency(
            st.rho * st.v,
            0.5 * _kinetic_sq(st.v) + U + p / st.rho,
            st.rho * T,
        )

    return Functional("H", value, deriv)


def mass():
    def deriv(st):
        return Tendency(st.grid.zeros_vector(), np.ones(st.grid.dims), st.grid.zeros())

    return Functional("M", lambda st: integrate(st.grid, st.rho), deriv)


def momentum():
    """The three Cartesian momentum components, as separate functionals."""
    out = []
    for j, name in enumerate("xyz"):

        def value(st, j=j):
            return integrate(st.grid, st.rho * st.v[j])

        def deriv(st, j=j):
            dv = st.grid.zeros_vector()
            dv[j] = st.rho
            return Tendency(dv, st.v[j].copy(), st.grid.zeros())

        out.append(Functional(f"P{name}", value, deriv))
    return out


def generalized_entropy(profile):
    def value(st):
        return integrate(st.grid, st.rho * profile.f(st.s))

    def deriv(st):
        return Tendency(
            st.grid.zeros_vector(),
            np.asarray(profile.f(st.s), dtype=float) * np.ones(st.grid.dims),
            st.rho * profile.f_prime(st.s),
        )

    return Functional(f"S[{profile.description}]", value, deriv)


def free_energy(eos, profile):
    H = hamiltonian(eos)
    S = generalized_entropy(profile)
    return Functional(
        "F",
        lambda st: H.evaluate(st) + S.evaluate(st),
        lambda st: H.derivative(st) + S.derivative(st),
    )


# --- random polynomial functionals -------------------------------------------

_POINT_NAMES = ("vx", "vy", "vz", "rho", "s")


def _features(st):
    """Node values then their centred differences, ``(5 + 5*ndim, *dims)``."""
    base = [st.v[0], st.v[1], st.v[2], st.rho, st.s]
    grads = [central_diff(st.grid, f, a) for a in range(st.grid.ndim) for f in base]
    return base + grads


@dataclass
class _RandomPoly:
    const: SmoothField
    linear: list  # (scale, SmoothField) per feature
    quadratic: list  # (j, k, scale, SmoothField)


def random_test_functional(seed, amplitude=1.0, n_quadratic=8, kmax=1):
    """Quadrature of a random polynomial of degree <= 2 in the node values and
    their first differences, with smooth random coefficient fields.

    The coefficient fields are band-limited functions of position, so the same
    seed denotes the same continuum functional on every grid.
    """
    amplitude = float(amplitude)
    cache = {}

    def poly(ndim):
        if ndim not in cache:
            rng = np.random.default_rng([int(seed), ndim])
            nf = 5 + 5 * ndim
            const = SmoothField.random(rng, ndim, kmax)
            linear = [(rng.standard_normal(), SmoothField.random(rng, ndim, kmax)) for _ in range(nf)]
            quad = []
            for _ in range(n_quadratic):
                j, k = sorted(int(x) for x in rng.integers(0, nf, size=2))
                quad.append((j, k, rng.standard_normal(), SmoothField.random(rng, ndim, kmax)))
            cache[ndim] = _RandomPoly(const, linear, quad)
        return cache[ndim]

    def coefficient_fields(grid):
        key = (grid.dims, grid.lengths)
        if key not in cache:
            p = poly(grid.ndim)
            cache[key] = (
                amplitude * p.const.evaluate(grid),
                [amplitude * c * f.evaluate(grid) for c, f in p.linear],
                [(j, k, amplitude * c * f.evaluate(grid)) for j, k, c, f in p.quadratic],
            )
        return cache[key]

    def value(st):
        z = _features(st)
        c0, lin, quad = coefficient_fields(st.grid)
        dens = c0.copy()
        for b, zj in zip(lin, z):
            dens += b * zj
        for j, k, q in quad:
            dens += q * z[j] * z[k]
        return integrate(st.grid, dens)

    def deriv(st):
        grid = st.grid
        z = _features(st)
        _, lin, quad = coefficient_fields(grid)
        dz = [b.copy() for b in lin]
        for j, k, q in quad:
            dz[j] += q * z[k]
            dz[k] += q * z[j]
        point = dz[:5]
        # adjoint of D is -D under the constant-weight inner product
        for a in range(grid.ndim):
            for c in range(5):
                point[c] = point[c] - central_diff(grid, dz[5 + 5 * a + c], a)
        return Tendency(np.stack(point[:3]), point[3], point[4])

    return Functional(f"G[{seed}]", value, deriv)


# --- directional derivative audit ----------------------------------------------


def random_direction(grid, seed, rho_scale=1.0, kmax=2):
    """Smooth perturbation direction; its density part is bounded by ``0.5 * rho_scale``."""
    rng = np.random.default_rng(seed)
    f = [SmoothField.random(rng, grid.ndim, kmax).evaluate(grid) for _ in range(5)]
    return Tendency(np.stack(f[:3]), 0.5 * rho_scale * f[3], f[4])


@dataclass
class AuditResult:
    label: str
    eps: np.ndarray
    errors: np.ndarray
    order: float = None
    exact: bool = False

    @property
    def floor(self):
        return float(np.min(self.errors))

    @property
    def quadratic_regime(self):
        return self.exact or (self.order is not None and abs(self.order - 2.0) <= 0.3)

    def passed(self, floor_tol=1e-9):
        return self.floor <= floor_tol and self.quadratic_regime


def derivative_audit(functional, state, direction=None, eps=None, seed=0):
    """Compare centred differences of ``functional`` along ``direction`` with the
    pairing of its derivative against that direction, over a sweep of step sizes.

    Errors are relative to ``inner(|dF|, |dpsi|)``. ``order`` is the median local
    convergence order over steps whose errors sit well above the rounding floor;
    when even the largest step shows only rounding error (polynomials of degree
    two or less have no truncation error) the result is flagged ``exact``.
    """
    grid = state.grid
    if direction is None:
        direction = random_direction(grid, seed, rho_scale=float(np.min(state.rho)))
    if eps is None:
        eps = 10.0 ** -np.arange(1.0, 7.01, 0.5)
    eps = np.asarray(eps, dtype=float)
    d = functional.derivative(state)
    lin = inner(grid, d.v, direction.v) + inner(grid, d.rho, direction.rho) + inner(grid, d.s, direction.s)
    scale = (
        inner(grid, np.sqrt(_kinetic_sq(d.v)), np.sqrt(_kinetic_sq(direction.v)))
        + inner(grid, np.abs(d.rho), np.abs(direction.rho))
        + inner(grid, np.abs(d.s), np.abs(direction.s))
    )
    scale = max(scale, abs(lin), np.finfo(float).tiny)
    errors = []
    for e in eps:
        fp = functional.evaluate(state.axpy(e, direction))
        fm = functional.evaluate(state.axpy(-e, direction))
        errors.append(abs((fp - fm) / (2.0 * e) - lin) / scale)
    errors = np.array(errors)
    result = AuditResult(functional.label, eps, errors)
    if errors[0] <= 1e-12:
        result.exact = True
        return result
    floor = float(np.min(errors))
    orders = []
    for i in range(len(eps) - 1):
        if errors[i] > 100.0 * floor and errors[i + 1] > 100.0 * floor:
            orders.append(math.log(errors[i] / errors[i + 1]) / math.log(eps[i] / eps[i + 1]))
    if orders:
        result.order = float(np.median(orders))
    return result
