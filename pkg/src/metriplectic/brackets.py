"""The antisymmetric (Poisson) and symmetric (dissipative) brackets.

Each bracket is available as a scalar ``(F, G) -> float`` and as a tendency
generator ``G -> psi_dot``, the latter defined so that

    inner(dF/dpsi, rhs(G)) == bracket(F, G)

for every functional ``F``. Because the centred difference is exactly
antisymmetric, this pairing identity and the degeneracies (energy, momentum,
mass, linear entropy) hold to rounding on the grid, not only as h -> 0.
"""

import csv
import io
import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from . import kernels
from .functionals import (
    Functional,
    generalized_entropy,
    hamiltonian,
    mass,
    momentum,
    random_test_functional,
)
from .grid import central_diff, curl, divergence, gradient, integrate, tensor_gradient
from .state import FluidState, Tendency
from .thermo import stress

DEGENERACY_TOL = 1e-11


class BracketError(ValueError):
    pass


def _dot(a, b):
    return (a[0] * b[0] + a[1] * b[1]) + a[2] * b[2]


def _cross(a, b):
    return np.stack(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def _norm(a):
    return np.sqrt(_dot(a, a))


def _deriv(F, state):
    if isinstance(F, Functional):
        return F.derivative(state)
    return F


@dataclass
class BracketContext:
    """Derived fields of one state, shared by all bracket evaluations on it."""

    state: FluidState
    eos: object
    coeffs: object
    p: np.ndarray
    T: np.ndarray
    grad_v: np.ndarray  # grad_v[i, k] = D_k v_i
    sigma: np.ndarray
    vorticity: np.ndarray
    grad_s: np.ndarray
    eta: np.ndarray
    bulk: np.ndarray  # zeta - 2/3 eta
    kappa: np.ndarray  # scalar field, or None for tensor conductivity

    @classmethod
    def build(cls, state, eos, coeffs):
        grid = state.grid
        bad = np.argwhere(~(state.rho > 0.0))
        if bad.size:
            idx = tuple(int(i) for i in bad[0])
            raise BracketError(f"nonpositive density {state.rho[idx]!r} at node {idx}")
        p = eos.pressure(state.rho, state.s)
        T = eos.temperature(state.rho, state.s)
        bad = np.argwhere(~(T > 0.0))
        if bad.size:
            idx = tuple(int(i) for i in bad[0])
            raise BracketError(f"nonpositive temperature {T[idx]!r} at node {idx}")
        grad_v = tensor_gradient(grid, state.v)
        sigma = stress(grid, state.v, coeffs, p, T, grad_v=grad_v)
        eta = coeffs.eta_field(p, T)
        zeta = coeffs.zeta_field(p, T)
        kappa = None if coeffs.kappa_is_tensor else coeffs.kappa_field(T)
        return cls(
            state,
            eos,
            coeffs,
            p,
            T,
            grad_v,
            sigma,
            curl(grid, state.v),
            gradient(grid, state.s),
            eta,
            zeta - (2.0 / 3.0) * eta,
            kappa,
        )


_CACHE = OrderedDict()
_CACHE_SIZE = 16


def context(state, eos, coeffs):
    """Cached ``BracketContext`` keyed by the state's version."""
    key = (state.version, id(eos), id(coeffs))
    ctx = _CACHE.get(key)
    if ctx is None or ctx.state is not state or ctx.eos is not eos or ctx.coeffs is not coeffs:
        ctx = BracketContext.build(state, eos, coeffs)
        _CACHE[key] = ctx
        while len(_CACHE) > _CACHE_SIZE:
            _CACHE.popitem(last=False)
    else:
        _CACHE.move_to_end(key)
    return ctx


# --- generalized Poisson bracket ---------------------------------------------------


def _check_rho(state):
    try:
        state.check_density()
    except ValueError as exc:
        raise BracketError(str(exc)) from None


def _gpb_density(dF, dG, state, vort_over_rho, ds_over_rho):
    grid = state.grid
    return (
        dF.rho * divergence(grid, dG.v)
        + _dot(dF.v, gradient(grid, dG.rho))
        + _dot(dF.v, _cross(vort_over_rho, dG.v))
        + _dot(ds_over_rho, dF.s * dG.v - dF.v * dG.s)
    )


def _gpb_fields(state):
    _check_rho(state)
    grid = state.grid
    return curl(grid, state.v) / state.rho, gradient(grid, state.s) / state.rho


def gpb_scalar(F, G, state):
    """Poisson bracket ``{F, G}`` of the ideal (Euler) fluid."""
    dF, dG = _deriv(F, state), _deriv(G, state)
    w, g = _gpb_fields(state)
    return -integrate(state.grid, _gpb_density(dF, dG, state, w, g))


def gpb_scale(F, G, state):
    """Magnitude scale of ``{F, G}``: the quadrature of the absolute value of every
    product entering the integrand, symmetrised over ``F <-> G``."""
    dF, dG = _deriv(F, state), _deriv(G, state)
    grid = state.grid
    w, g = _gpb_fields(state)
    aw, ag = _norm(w), _norm(g)

    def one(a, b):
        return integrate(
            grid,
            np.abs(a.rho) * np.abs(divergence(grid, b.v))
            + _norm(a.v) * _norm(gradient(grid, b.rho))
            + _norm(a.v) * aw * _norm(b.v)
            + ag * (np.abs(a.s) * _norm(b.v) + _norm(a.v) * np.abs(b.s)),
        )

    return max(one(dF, dG), one(dG, dF))


def gpb_rhs(state, G):
    """Tendency ``psi_dot`` with ``inner(dF, psi_dot) == {F, G}`` for all ``F``."""
    dG = _deriv(G, state)
    grid = state.grid
    w, g = _gpb_fields(state)
    return Tendency(
        -gradient(grid, dG.rho) - _cross(w, dG.v) + g * dG.s,
        -divergence(grid, dG.v),
        -_dot(g, dG.v),
    )


# --- symmetric dissipative bracket ---------------------------------------------------


def _flat(a, grid):
    return np.ascontiguousarray(a).reshape(a.shape[: a.ndim - grid.ndim] + (grid.size,))


def _sym_operands(dF, ctx):
    """``A[i, k] = D_i(F_vk / rho) - D_k v_i * F_s/(rho T)`` and ``D(F_s/(rho T))``."""
    st = ctx.state
    grid = st.grid
    rhoT = st.rho * ctx.T
    a = dF.s / rhoT
    jac = tensor_gradient(grid, dF.v / st.rho)  # jac[k, i] = D_i w_k
    A = np.swapaxes(jac, 0, 1) - a * ctx.grad_v
    return A, gradient(grid, a)


def _heat_pair(dFa, dGa, ctx):
    T2 = ctx.T * ctx.T
    if ctx.kappa is not None:
        return (ctx.kappa * T2) * _dot(dFa, dGa)
    K = np.asarray(ctx.coeffs.kappa)
    acc = K[0, 0] * (dFa[0] * dGa[0])
    acc = acc + K[1, 1] * (dFa[1] * dGa[1])
    acc = acc + K[2, 2] * (dFa[2] * dGa[2])
    for i, j in ((0, 1), (0, 2), (1, 2)):
        ks = 0.5 * (K[i, j] + K[j, i])
        acc = acc + ks * (dFa[i] * dGa[j] + dFa[j] * dGa[i])
    for i, j in ((0, 1), (0, 2), (1, 2)):
        ka = 0.5 * (K[i, j] - K[j, i])
        if ka != 0.0:
            acc = acc + ka * (dFa[i] * dGa[j] - dFa[j] * dGa[i])
    return T2 * acc


def _viscous_pair(AF, AG, ctx):
    grid = ctx.state.grid
    dens = kernels.strain_pair(_flat(AF, grid), _flat(AG, grid), _flat(ctx.eta, grid), _flat(ctx.bulk, grid))
    return ctx.T * dens.reshape(grid.dims)


def sym_scalar(F, G, state, eos, coeffs):
    """Dissipative bracket ``(F, G)`` in its manifestly symmetric, definite form.

    The integrand is evaluated with operations that commute exactly under
    ``F <-> G``, so ``sym_scalar(F, G) == sym_scalar(G, F)`` bit for bit.
    """
    ctx = context(state, eos, coeffs)
    AF, dFa = _sym_operands(_deriv(F, state), ctx)
    AG, dGa = _sym_operands(_deriv(G, state), ctx)
    dens = _viscous_pair(AF, AG, ctx) + _heat_pair(dFa, dGa, ctx)
    return integrate(state.grid, dens) / coeffs.lam


def sym_scale(F, G, state, eos, coeffs):
    """Cauchy-Schwarz style magnitude: ``|Lambda| |A_F| |A_G| T + |kappa| T^2 |DaF| |DaG|``."""
    ctx = context(state, eos, coeffs)
    AF, dFa = _sym_operands(_deriv(F, state), ctx)
    AG, dGa = _sym_operands(_deriv(G, state), ctx)
    lam_norm = np.maximum(2.0 * ctx.eta, 3.0 * (ctx.bulk + (2.0 / 3.0) * ctx.eta))
    if ctx.kappa is not None:
        k_norm = ctx.kappa
    else:
        k_norm = np.abs(np.linalg.eigvals(np.asarray(coeffs.kappa))).max()
    fro = lambda A: np.sqrt(np.sum(A * A, axis=(0, 1)))  # noqa: E731
    dens = ctx.T * lam_norm * fro(AF) * fro(AG) + k_norm * ctx.T**2 * _norm(dFa) * _norm(dGa)
    return integrate(state.grid, dens) / coeffs.lam


def sym_scalar_expanded(F, G, state, eos, coeffs):
    """Same bracket written as the five separate terms: two stress-entropy
    couplings, viscous heating, conduction and the full rank-4 viscous term.

    Agrees with :func:`sym_scalar` up to rounding, since the two forms differ
    only by summation by parts and pointwise algebra.
    """
    ctx = context(state, eos, coeffs)
    grid = state.grid
    dF, dG = _deriv(F, state), _deriv(G, state)
    rho, T, sigma = state.rho, ctx.T, ctx.sigma

    def coupling(a, b):
        # (1/rho) a_vi D_k[sigma_ik b_s / rho]
        out = grid.zeros()
        for i in range(3):
            for k in range(grid.ndim):
                out = out + a.v[i] / rho * central_diff(grid, sigma[i, k] * b.s / rho, k)
        return out

    heating = np.einsum("ik...,ik...->...", sigma, ctx.grad_v) / T * (dF.s * dG.s / rho**2)
    dFa = gradient(grid, dF.s / (rho * T))
    dGa = gradient(grid, dG.s / (rho * T))
    if ctx.kappa is not None:
        conduction = T**2 * ctx.kappa * _dot(dFa, dGa)
    else:
        conduction = T**2 * np.einsum("ij,i...,j...->...", np.asarray(coeffs.kappa), dFa, dGa)
    d = np.eye(3)
    shear = (
        np.einsum("ni,mk->ikmn", d, d) + np.einsum("nk,mi->ikmn", d, d) - (2.0 / 3.0) * np.einsum("ik,mn->ikmn", d, d)
    )
    bulk = np.einsum("ik,mn->ikmn", d, d)
    JF = tensor_gradient(grid, dF.v / rho)  # JF[n, m] = D_m(F_vn / rho)
    JG = tensor_gradient(grid, dG.v / rho)  # JG[i, k] = D_k(G_vi / rho)
    zeta = ctx.bulk + (2.0 / 3.0) * ctx.eta
    visc = T * (
        ctx.eta * np.einsum("ikmn,nm...,ik...->...", shear, JF, JG)
        + zeta * np.einsum("ikmn,nm...,ik...->...", bulk, JF, JG)
    )
    dens = coupling(dF, dG) + coupling(dG, dF) + heating + conduction + visc
    return integrate(grid, dens) / coeffs.lam


def sym_rhs(state, G, eos, coeffs):
    """Tendency ``psi_dot`` with ``inner(dF, psi_dot) == (F, G)`` for all ``F``."""
    ctx = context(state, eos, coeffs)
    grid = state.grid
    rho, T = state.rho, ctx.T
    AG, dGa = _sym_operands(_deriv(G, state), ctx)
    scale = T / coeffs.lam
    Sig = kernels.lambda_apply(_flat(AG, grid), _flat(ctx.eta, grid), _flat(ctx.bulk, grid), _flat(scale, grid))
    Sig = Sig.reshape((3, 3) + grid.dims)
    vdot = grid.zeros_vector()
    for k in range(3):
        acc = grid.zeros()
        for i in range(grid.ndim):
            acc = acc + central_diff(grid, Sig[i, k], i)
        vdot[k] = -acc / rho
    T2 = T * T / coeffs.lam
    if ctx.kappa is not None:
        Q = (ctx.kappa * T2) * dGa
    else:
        K = np.asarray(coeffs.kappa)
        Q = np.stack([T2 * (K[i, 0] * dGa[0] + K[i, 1] * dGa[1] + K[i, 2] * dGa[2]) for i in range(3)])
    work = np.einsum("ik...,ik...->...", Sig, ctx.grad_v)
    sdot = -(work + divergence(grid, Q)) / (rho * T)
    return Tendency(vdot, grid.zeros(), sdot)


# --- full bracket -----------------------------------------------------------------


def full_bracket_scalar(F, G, state, eos, coeffs):
    return gpb_scalar(F, G, state) + sym_scalar(F, G, state, eos, coeffs)


def full_rhs(state, eos, coeffs, profile, path="entropy"):
    """Metriplectic tendency ``{psi, H} + (psi, S_f)``.

    ``path="free_energy"`` uses ``(psi, H + S_f)`` in the symmetric slot
    instead; energy degeneracy makes the two identical up to rounding.
    """
    H = hamiltonian(eos)
    S = generalized_entropy(profile)
    if path == "entropy":
        gen = S
    elif path == "free_energy":
        gen = H.derivative(state) + S.derivative(state)
    else:
        raise ValueError(f"unknown path {path!r}")
    ideal = gpb_rhs(state, H)
    if not coeffs.dissipative:
        return ideal
    return ideal + sym_rhs(state, gen, eos, coeffs)


def pairing(dF, tendency, grid):
    """``inner(dF/dpsi, psi_dot)`` summed over all fields."""
    vals = np.concatenate(
        [
            np.ravel(dF.v * tendency.v),
            np.ravel(dF.rho * tendency.rho),
            np.ravel(dF.s * tendency.s),
        ]
    )
    return grid.cell_volume * math.fsum(vals.tolist())


# --- degeneracy ledger ----------------------------------------------------------------


@dataclass
class DegeneracyRow:
    identity: str
    n_samples: int
    max_defect: float
    tol: float = DEGENERACY_TOL

    @property
    def passed(self):
        return self.max_defect <= self.tol


@dataclass
class DegeneracyReport:
    rows: list

    @property
    def passed(self):
        return all(r.passed for r in self.rows)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["identity", "n_samples", "max_normalized_defect", "pass"])
        for r in self.rows:
            w.writerow([r.identity, r.n_samples, f"{r.max_defect:.6e}", "pass" if r.passed else "fail"])
        return buf.getvalue()


def _normalized(value, scale):
    if scale == 0.0:
        return abs(value)
    return abs(value) / scale


def degeneracy_report(state, eos, coeffs, profile, n_samples=50, seed=0):
    """Worst normalized defect of each exact degeneracy over random functionals ``G``.

    Rows: energy and momentum in the symmetric bracket, mass and ``S_f`` as
    Casimirs of the Poisson bracket. The ``S_f`` row is exact only for affine ``f``.
    """
    H = hamiltonian(eos)
    P = momentum()
    M = mass()
    S = generalized_entropy(profile)
    worst = {"sym(H,G)": 0.0, "sym(P,G)": 0.0, "gpb(M,G)": 0.0, "gpb(S_f,G)": 0.0}
    for n in range(n_samples):
        G = random_test_functional(seed + n).derivative(state)
        worst["sym(H,G)"] = max(
            worst["sym(H,G)"],
            _normalized(sym_scalar(H, G, state, eos, coeffs), sym_scale(H, G, state, eos, coeffs)),
        )
        for Pj in P:
            worst["sym(P,G)"] = max(
                worst["sym(P,G)"],
                _normalized(sym_scalar(Pj, G, state, eos, coeffs), sym_scale(Pj, G, state, eos, coeffs)),
            )
        worst["gpb(M,G)"] = max(worst["gpb(M,G)"], _normalized(gpb_scalar(M, G, state), gpb_scale(M, G, state)))
        worst["gpb(S_f,G)"] = max(
            worst["gpb(S_f,G)"], _normalized(gpb_scalar(S, G, state), gpb_scale(S, G, state))
        )
    return DegeneracyReport([DegeneracyRow(k, n_samples, v) for k, v in worst.items()])


def fit_order(ns, values):
    """Least-squares slope of ``-log(value)`` against ``log(n)``."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    return float(-np.polyfit(x, y, 1)[0])


def casimir_defect_norm(S, state):
    """``sup_G |{S, G}| / ||dG||``: the L2 norm of the flow ``{psi, S}``.

    Zero exactly when ``S`` is a Casimir on this grid. Being a supremum over
    all ``G``, it measures the defect without depending on a chosen ``G``.
    """
    r = gpb_rhs(state, S)
    grid = state.grid
    return math.sqrt(pairing(r, r, grid))


def casimir_defect_refinement(profile, ns=(8, 16, 32), ndim=2, state_seed=0, length=1.0):
    """Casimir defect norm of ``S_f`` for one continuum state sampled on refined
    grids, and its least-squares convergence order."""
    from .grid import Grid

    S = generalized_entropy(profile)
    defects = []
    for n in ns:
        grid = Grid((n,) * ndim, (length,) * ndim)
        st = FluidState.random_smooth(grid, state_seed, kmax=1)
        defects.append(casimir_defect_norm(S, st))
    return defects, fit_order(ns, defects)
