"""Time evolution, the direct Navier-Stokes oracle and run diagnostics."""

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .brackets import BracketError, full_rhs, sym_scalar
from .functionals import free_energy, generalized_entropy, hamiltonian, mass, momentum
from .grid import central_diff, curl, divergence, gradient, integrate, tensor_gradient
from .state import FluidState, StateError, Tendency
from .thermo import heat_flux, stress

HEAT_MODES = ("bracket-consistent", "eq14")
MOMENTUM_FORMS = ("lamb", "advective")


class NumericalAbort(RuntimeError):
    """Raised when the state leaves the admissible set; carries the last good state."""

    def __init__(self, message, state=None, t=None):
        super().__init__(message)
        self.state = state
        self.t = t


@dataclass(frozen=True)
class Model:
    eos: object
    transport: object
    profile: object
    heat_mode: str = "bracket-consistent"

    def __post_init__(self):
        if self.heat_mode not in HEAT_MODES:
            raise ValueError(f"heat_mode must be one of {HEAT_MODES}, got {self.heat_mode!r}")

    def rhs(self, state):
        return metriplectic_rhs(state, self)


def metriplectic_rhs(state, model, path="entropy"):
    return full_rhs(state, model.eos, model.transport, model.profile, path=path)


def _check_thermo(state, T):
    state.check_density()
    bad = np.argwhere(~(T > 0.0))
    if bad.size:
        idx = tuple(int(i) for i in bad[0])
        raise StateError(f"nonpositive temperature {T[idx]!r} at node {idx}")


def direct_ns_rhs(state, eos, coeffs, heat_mode="bracket-consistent", momentum_form="lamb"):
    """Compressible Navier-Stokes tendency written directly from the PDE.

    ``momentum_form="lamb"`` writes advection and pressure as
    ``v x curl v - D(|v|^2/2 + h) + T D s``, the discrete form the Poisson
    bracket produces; ``"advective"`` uses ``-(v.D)v - Dp/rho``. The two agree
    as h -> 0 (Gibbs relation ``dh = T ds + dp/rho``).

    ``heat_mode="eq14"`` uses Fourier's law ``q = -kappa D T``;
    ``"bracket-consistent"`` uses ``q = kappa T^2 D(1/T)``, equal in the
    continuum and exactly what the dissipative bracket produces on the grid.
    """
    if heat_mode not in HEAT_MODES:
        raise ValueError(f"heat_mode must be one of {HEAT_MODES}, got {heat_mode!r}")
    if momentum_form not in MOMENTUM_FORMS:
        raise ValueError(f"momentum_form must be one of {MOMENTUM_FORMS}, got {momentum_form!r}")
    grid = state.grid
    v, rho, s = state.v, state.rho, state.s
    p = eos.pressure(rho, s)
    T = eos.temperature(rho, s)
    _check_thermo(state, T)

    grad_v = tensor_gradient(grid, v)
    sigma = stress(grid, v, coeffs, p, T, grad_v=grad_v)
    div_sigma = np.stack([sum(central_diff(grid, sigma[i, k], k) for k in range(grid.ndim)) for i in range(3)])
    ds = gradient(grid, s)

    if momentum_form == "lamb":
        w = curl(grid, v)
        lamb = np.stack([v[1] * w[2] - v[2] * w[1], v[2] * w[0] - v[0] * w[2], v[0] * w[1] - v[1] * w[0]])
        ke = 0.5 * ((v[0] * v[0] + v[1] * v[1]) + v[2] * v[2])
        h = eos.internal_energy(rho, s) + p / rho
        vdot = lamb - gradient(grid, ke) - gradient(grid, h) + T * ds
    else:
        adv = np.stack([sum(v[k] * grad_v[i, k] for k in range(3)) for i in range(3)])
        vdot = -adv - gradient(grid, p) / rho
    vdot = vdot + div_sigma / rho

    if heat_mode == "eq14":
        q = heat_flux(grid, T, coeffs)
    else:
        d_inv_T = gradient(grid, 1.0 / T)
        if coeffs.kappa_is_tensor:
            K = coeffs.kappa
            q = np.stack([T * T * (K[k][0] * d_inv_T[0] + K[k][1] * d_inv_T[1] + K[k][2] * d_inv_T[2]) for k in range(3)])
        else:
            q = coeffs.kappa_field(T) * T * T * d_inv_T
    heating = np.einsum("ik...,ik...->...", sigma, grad_v)
    sdot = -(v[0] * ds[0] + v[1] * ds[1] + v[2] * ds[2]) + heating / (rho * T) - divergence(grid, q) / (rho * T)
    rhodot = -divergence(grid, rho * v)
    return Tendency(vdot, rhodot, sdot)


# --- integration ---------------------------------------------------------------


def _advance(state, a, k, t=None):
    try:
        new = state.axpy(a, k)
        new.check_density()
    except StateError as exc:
        raise NumericalAbort(f"state left admissible set: {exc}", state=state, t=t) from None
    return new


def rk4_step(state, dt, rhs, t=None):
    """One classical fourth-order Runge-Kutta step of ``d psi/dt = rhs(psi)``."""
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    try:
        k1 = rhs(state)
        k2 = rhs(_advance(state, 0.5 * dt, k1, t))
        k3 = rhs(_advance(state, 0.5 * dt, k2, t))
        k4 = rhs(_advance(state, dt, k3, t))
    except (StateError, BracketError) as exc:
        raise NumericalAbort(f"tendency evaluation failed: {exc}", state=state, t=t) from None
    incr = Tendency(
        k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v,
        k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho,
        k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s,
    )
    new = _advance(state, dt / 6.0, incr, t)
    return new


def stable_dt(state, eos, coeffs, cfl=0.4, dfl=0.25):
    """Largest step allowed by the advective (CFL) and diffusive limits."""
    h = state.grid.h_min
    speed = np.sqrt((state.v[0] ** 2 + state.v[1] ** 2) + state.v[2] ** 2)
    cs = eos.sound_speed(state.rho, state.s)
    dt_adv = cfl * h / float(np.max(speed + cs))
    T = eos.temperature(state.rho, state.s)
    p = eos.pressure(state.rho, state.s)
    nu = max(
        float(np.max(coeffs.eta_field(p, T))),
        float(np.max(coeffs.zeta_field(p, T))),
        coeffs.kappa_max(T),
    )
    if nu <= 0.0:
        return dt_adv
    c_v = getattr(eos, "c_v", 1.0)
    dt_diff = dfl * h * h * float(np.min(state.rho)) * c_v / nu
    return min(dt_adv, dt_diff)


# --- diagnostics ------------------------------------------------------------------

DIAGNOSTIC_COLUMNS = (
    "t",
    "H",
    "M",
    "Px",
    "Py",
    "Pz",
    "S_f",
    "dSdt_bracket",
    "dSdt_observed",
    "H_drift_rel",
    "max_abs_v",
    "min_rho",
    "min_T",
)


def state_diagnostics(state, model, t, H0=None, dSdt_observed=float("nan")):
    """One diagnostics record; every entry except ``dSdt_observed`` and the drift
    reference ``H0`` follows from ``state`` alone."""
    H = hamiltonian(model.eos).evaluate(state)
    S = generalized_entropy(model.profile)
    P = [Pj.evaluate(state) for Pj in momentum()]
    if H0 is None:
        H0 = H
    if model.transport.dissipative:
        dsdt = sym_scalar(S, S, state, model.eos, model.transport)
    else:
        dsdt = 0.0
    T = model.eos.temperature(state.rho, state.s)
    speed = np.sqrt((state.v[0] ** 2 + state.v[1] ** 2) + state.v[2] ** 2)
    return {
        "t": float(t),
        "H": H,
        "M": mass().evaluate(state),
        "Px": P[0],
        "Py": P[1],
        "Pz": P[2],
        "S_f": S.evaluate(state),
        "dSdt_bracket": dsdt,
        "dSdt_observed": float(dSdt_observed),
        "H_drift_rel": (H - H0) / abs(H0) if H0 != 0.0 else H - H0,
        "max_abs_v": float(np.max(speed)),
        "min_rho": float(np.min(state.rho)),
        "min_T": float(np.min(T)),
    }


# fourth-order one-sided difference on the five latest samples
_BACKWARD5 = (25.0, -48.0, 36.0, -16.0, 3.0)


@dataclass
class Trajectory:
    records: list = field(default_factory=list)
    final_state: FluidState = None
    steps: int = 0

    def column(self, name):
        return np.array([r[name] for r in self.records])


def run(state, model, dt, t_end, output_every=1, on_record=None, snapshot_every=0, on_snapshot=None):
    """Integrate from ``t=0`` to ``t_end`` with fixed RK4 steps of size ``dt``.

    ``output_every``/``snapshot_every`` count steps (0 disables snapshots). The
    step count is ``round(t_end/dt)``; the last step is always recorded.
    ``dSdt_observed`` is a fourth-order backward difference of ``S_f`` over the
    five latest steps, NaN for the first four.
    """
    nsteps = int(round(t_end / dt))
    if nsteps < 1:
        raise ValueError("t_end/dt must allow at least one step")
    S = generalized_entropy(model.profile)
    history = deque(maxlen=5)
    history.append(S.evaluate(state))
    traj = Trajectory()
    H0 = hamiltonian(model.eos).evaluate(state)

    def emit(st, n):
        obs = float("nan")
        if len(history) == 5:
            obs = sum(c * x for c, x in zip(_BACKWARD5, reversed(history))) / (12.0 * dt)
        rec = state_diagnostics(st, model, n * dt, H0=H0, dSdt_observed=obs)
        traj.records.append(rec)
        if on_record is not None:
            on_record(rec)

    emit(state, 0)
    if on_snapshot is not None and snapshot_every:
        on_snapshot(state, 0, 0.0)
    for n in range(1, nsteps + 1):
        state = rk4_step(state, dt, model.rhs, t=(n - 1) * dt)
        history.append(S.evaluate(state))
        if n % output_every == 0 or n == nsteps:
            emit(state, n)
        if on_snapshot is not None and snapshot_every and (n % snapshot_every == 0 or n == nsteps):
            on_snapshot(state, n, n * dt)
    traj.final_state = state
    traj.steps = nsteps
    return traj


# --- equilibria ----------------------------------------------------------------------


@dataclass
class EquilibriumResult:
    critical_residual: float
    tendency_residual: float
    tol: float

    @property
    def is_critical(self):
        return self.critical_residual <= self.tol

    @property
    def is_stationary(self):
        return self.tendency_residual <= self.tol


def equilibrium_residual(state, model, tol=1e-12):
    """Max-norms of the free-energy derivative and of the metriplectic tendency.

    The density slot is measured about its mean: a constant there is the
    derivative of the mass Casimir, which leaves the dynamics unchanged.
    Residuals are relative to ``max(rho T)`` and ``max |psi|`` respectively.
    """
    d = free_energy(model.eos, model.profile).derivative(state)
    T = model.eos.temperature(state.rho, state.s)
    drho = d.rho - np.mean(d.rho)
    crit = max(float(np.max(np.abs(d.v))), float(np.max(np.abs(drho))), float(np.max(np.abs(d.s))))
    crit /= max(1.0, float(np.max(state.rho * T)))
    rhs = model.rhs(state)
    mag = max(1.0, float(np.max(np.abs(state.rho))), float(np.max(np.abs(state.s))), float(np.max(np.abs(state.v))))
    return EquilibriumResult(crit, rhs.max_abs() / mag, tol)


def find_uniform_critical_state(grid, eos, profile, rho0=1.0, s_range=(-20.0, 20.0), n_scan=4001):
    """Uniform state at rest whose entropy solves ``T(rho0, s) + f'(s) = 0``."""
    ss = np.linspace(*s_range, n_scan)
    g = eos.temperature(np.full_like(ss, rho0), ss) + profile.f_prime(ss)
    idx = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) <= 0)[0]
    if idx.size == 0:
        raise ValueError(f"no critical entropy in {s_range} for profile {profile.description!r}")
    i = int(idx[0])

    def resid(s):
        return float(eos.temperature(np.array(rho0), np.array(s)) + profile.f_prime(np.array(s)))

    s0 = brentq(resid, ss[i], ss[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return FluidState.uniform(grid, rho0, s0)


# --- initial conditions -----------------------------------------------------------


def initial_state(grid, eos, preset, amplitude=0.1, seed=0):
    """Initial-condition presets: uniform, shear, entropy_bump, random."""
    rho0, s0 = eos.rho_ref, eos.s_ref
    if preset == "uniform":
        return FluidState.uniform(grid, rho0, s0)
    xs = grid.coords()
    if preset == "shear":
        v = grid.zeros_vector()
        if grid.ndim >= 2:
            v[0] = amplitude * np.sin(2.0 * np.pi * xs[1] / grid.lengths[1])
        else:
            v[1] = amplitude * np.sin(2.0 * np.pi * xs[0] / grid.lengths[0])
        return FluidState(grid, v, np.full(grid.dims, rho0), np.full(grid.dims, s0))
    if preset == "entropy_bump":
        bump = np.ones(grid.dims)
        for x, L in zip(xs, grid.lengths):
            bump = bump * 0.5 * (1.0 + np.cos(2.0 * np.pi * x / L))
        return FluidState(grid, grid.zeros_vector(), np.full(grid.dims, rho0), s0 + amplitude * bump)
    if preset == "random":
        return FluidState.random_smooth(grid, seed, rho0=rho0, s0=s0, v_amp=amplitude, rho_amp=0.1, s_amp=amplitude)
    raise ValueError(f"unknown initial condition preset {preset!r}")
