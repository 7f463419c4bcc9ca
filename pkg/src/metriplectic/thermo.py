"""Thermodynamic closure and constitutive relations."""

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .grid import tensor_gradient, gradient


class ThermoError(ValueError):
    pass


def _check_positive_density(rho):
    rho = np.asarray(rho)
    bad = np.argwhere(~(rho > 0.0))
    if bad.size:
        idx = tuple(int(i) for i in bad[0])
        raise ThermoError(f"nonpositive density {rho[idx]!r} at node {idx}")


@dataclass(frozen=True)
class EquationOfState:
    """Ideal-gas-type closure ``U(rho, s) = c_v T_ref (rho/rho_ref)**(gamma-1) exp((s-s_ref)/c_v)``.

    Any object providing ``internal_energy``, ``pressure``, ``temperature`` and
    ``sound_speed`` with the same signatures can stand in for this one.
    """

    gamma: float = 1.4
    c_v: float = 1.0
    rho_ref: float = 1.0
    T_ref: float = 1.0
    s_ref: float = 1.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ThermoError(f"gamma must exceed 1, got {self.gamma}")
        for name in ("c_v", "rho_ref", "T_ref", "s_ref"):
            val = getattr(self, name)
            if not (val > 0.0 and math.isfinite(val)):
                raise ThermoError(f"{name} must be positive, got {val}")

    def internal_energy(self, rho, s):
        _check_positive_density(rho)
        return (
            self.c_v
            * self.T_ref
            * (np.asarray(rho) / self.rho_ref) ** (self.gamma - 1.0)
            * np.exp((np.asarray(s) - self.s_ref) / self.c_v)
        )

    def pressure(self, rho, s):
        return (self.gamma - 1.0) * np.asarray(rho) * self.internal_energy(rho, s)

    def temperature(self, rho, s):
        return self.internal_energy(rho, s) / self.c_v

    def enthalpy(self, rho, s):
        return self.gamma * self.internal_energy(rho, s)

    def sound_speed(self, rho, s):
        return np.sqrt(self.gamma * self.pressure(rho, s) / np.asarray(rho))


def pressure(rho, s, eos):
    return eos.pressure(rho, s)


def temperature(rho, s, eos):
    return eos.temperature(rho, s)


Coefficient = Union[float, Callable]


def _symmetric_part_ok(k):
    return all(k[i][j] == k[j][i] for i in range(3) for j in range(3))


@dataclass(frozen=True)
class TransportCoefficients:
    """Viscosities, conductivity and the bracket constant.

    ``eta`` and ``zeta`` are constants or callables ``f(p, T)``; ``kappa`` is a
    constant, a callable ``f(T)``, or a constant symmetric 3x3 tensor.
    """

    eta: Coefficient = 0.0
    zeta: Coefficient = 0.0
    kappa: Union[float, Callable, tuple] = 0.0
    lam: float = 1.0
    kappa_is_tensor: bool = field(init=False, default=False)

    def __post_init__(self):
        kappa = self.kappa
        if isinstance(kappa, (list, tuple, np.ndarray)):
            arr = np.asarray(kappa, dtype=float)
            if arr.shape != (3, 3):
                raise ThermoError(f"tensor kappa must be 3x3, got shape {arr.shape}")
            kappa = tuple(tuple(float(x) for x in row) for row in arr)
            if not _symmetric_part_ok(kappa):
                raise ThermoError("kappa tensor must be symmetric (Onsager): kappa_ij != kappa_ji")
            if np.linalg.eigvalsh(np.array(kappa)).min() < -1e-14 * max(1.0, np.abs(arr).max()):
                raise ThermoError("kappa tensor must be positive semidefinite")
            object.__setattr__(self, "kappa", kappa)
            object.__setattr__(self, "kappa_is_tensor", True)
        elif not callable(kappa) and not float(kappa) >= 0.0:
            raise ThermoError(f"kappa must be nonnegative, got {kappa}")
        for name in ("eta", "zeta"):
            val = getattr(self, name)
            if not callable(val) and not float(val) >= 0.0:
                raise ThermoError(f"{name} must be nonnegative, got {val}")
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise ThermoError(f"bracket constant lambda must be positive, got {self.lam}")

    @classmethod
    def with_unchecked_kappa(cls, base, kappa):
        """Copy of ``base`` carrying an arbitrary (possibly asymmetric) kappa tensor.

        Bypasses validation; only meant for probing what symmetry buys.
        """
        obj = object.__new__(cls)
        for name in ("eta", "zeta", "lam"):
            object.__setattr__(obj, name, getattr(base, name))
        arr = np.asarray(kappa, dtype=float)
        object.__setattr__(obj, "kappa", tuple(tuple(float(x) for x in row) for row in arr))
        object.__setattr__(obj, "kappa_is_tensor", True)
        return obj

    @property
    def dissipative(self):
        if callable(self.eta) or callable(self.zeta) or callable(self.kappa):
            return True
        if self.kappa_is_tensor:
            return bool(self.eta or self.zeta or any(any(r) for r in self.kappa))
        return bool(self.eta or self.zeta or self.kappa)

    def eta_field(self, p, T):
        return _eval_pT(self.eta, p, T, "eta")

    def zeta_field(self, p, T):
        return _eval_pT(self.zeta, p, T, "zeta")

    def kappa_field(self, T):
        """Scalar conductivity sampled on ``T`` (tensor kappa is handled separately)."""
        if self.kappa_is_tensor:
            raise ThermoError("kappa is a tensor")
        if callable(self.kappa):
            val = np.asarray(self.kappa(T), dtype=float) * np.ones_like(T)
            if np.any(val < 0.0):
                raise ThermoError("kappa(T) evaluated negative")
            return val
        return np.full(np.shape(T), float(self.kappa))

    def kappa_max(self, T=None):
        if self.kappa_is_tensor:
            return float(np.abs(np.linalg.eigvalsh(np.array(self.kappa))).max())
        if callable(self.kappa):
            return float(np.max(self.kappa_field(T)))
        return float(self.kappa)


def _eval_pT(coef, p, T, name):
    if callable(coef):
        val = np.asarray(coef(p, T), dtype=float) * np.ones_like(T)
        if np.any(val < 0.0):
            raise ThermoError(f"{name}(p, T) evaluated negative")
        return val
    return np.full(np.shape(T), float(coef))


def viscosity_tensor(eta, zeta):
    """Rank-4 viscosity tensor ``Lambda[i, k, m, n]`` (shape 3x3x3x3)."""
    if eta < 0.0 or zeta < 0.0:
        raise ThermoError("viscosity coefficients must be nonnegative")
    d = np.eye(3)
    return (
        eta
        * (
            np.einsum("ni,mk->ikmn", d, d)
            + np.einsum("nk,mi->ikmn", d, d)
            - (2.0 / 3.0) * np.einsum("ik,mn->ikmn", d, d)
        )
        + zeta * np.einsum("ik,mn->ikmn", d, d)
    )


def stress(grid, v, coeffs, p, T, grad_v=None):
    """Viscous stress ``sigma[i, k]`` from the Newtonian constitutive law.

    Built so that ``sigma[i, k]`` and ``sigma[k, i]`` are the same float.
    """
    if grad_v is None:
        grad_v = tensor_gradient(grid, v)
    eta = coeffs.eta_field(p, T)
    zeta = coeffs.zeta_field(p, T)
    div = (grad_v[0, 0] + grad_v[1, 1]) + grad_v[2, 2]
    sigma = np.empty_like(grad_v)
    for i in range(3):
        for k in range(i, 3):
            val = eta * (grad_v[i, k] + grad_v[k, i])
            if i == k:
                val = val - eta * ((2.0 / 3.0) * div) + zeta * div
            sigma[i, k] = val
            sigma[k, i] = val
    return sigma


def heat_flux(grid, T, coeffs):
    """Fourier heat flux ``q_k = -kappa_kj D_j T`` (scalar kappa: ``-kappa D_k T``)."""
    if np.any(~(np.asarray(T) > 0.0)):
        raise ThermoError("temperature must be positive")
    dT = gradient(grid, T)
    if coeffs.kappa_is_tensor:
        K = coeffs.kappa
        return -np.stack([K[k][0] * dT[0] + K[k][1] * dT[1] + K[k][2] * dT[2] for k in range(3)])
    return -coeffs.kappa_field(T) * dT
