"""The invariant-verification suite run by ``metriplectic check`` and friends.

Each check returns one or more :class:`CheckRow`; a suite passes when every
row does. Values are normalized defects unless the row says otherwise.
"""

import csv
import io
from dataclasses import dataclass

import numpy as np

from .brackets import (
    DEGENERACY_TOL,
    casimir_defect_refinement,
    degeneracy_report,
    fit_order,
    full_rhs,
    gpb_rhs,
    gpb_scalar,
    gpb_scale,
    pairing,
    sym_rhs,
    sym_scalar,
    sym_scalar_expanded,
    sym_scale,
)
from .dynamics import direct_ns_rhs, metriplectic_rhs, Model
from .functionals import (
    EntropyProfile,
    derivative_audit,
    free_energy,
    generalized_entropy,
    hamiltonian,
    mass,
    momentum,
    random_test_functional,
)
from .grid import Grid
from .state import FluidState

ROUNDOFF_TOL = 1e-12
DEFINITE_TOL = 1e-13
AUDIT_FLOOR = 1e-9


@dataclass
class CheckRow:
    name: str
    value: float
    tol: float
    passed: bool
    detail: str = ""


def _row(name, value, tol, detail=""):
    return CheckRow(name, float(value), tol, bool(value <= tol), detail)


def format_table(rows):
    width = max(len(r.name) for r in rows)
    lines = [f"{'check':<{width}}  {'value':>12}  {'tol':>9}  result"]
    for r in rows:
        if np.isnan(r.tol):
            line = f"{r.name:<{width}}  {r.value:12.4e}  {'-':>9}  info"
        else:
            line = f"{r.name:<{width}}  {r.value:12.4e}  {r.tol:9.1e}  {'pass' if r.passed else 'FAIL'}"
        if r.detail:
            line += f"  ({r.detail})"
        lines.append(line)
    return "\n".join(lines)


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "value", "tol", "pass", "detail"])
    for r in rows:
        w.writerow([r.name, repr(r.value), repr(r.tol), "pass" if r.passed else "fail", r.detail])
    return buf.getvalue()


def _rel(value, scale):
    return abs(value) if scale == 0.0 else abs(value) / scale


def _tendency_gap(a, b):
    """Worst per-field ``max|a - b| / max|a|``; a field that is zero in ``a`` is
    compared absolutely."""
    worst = 0.0
    for x, y in ((a.v, b.v), (a.rho, b.rho), (a.s, b.s)):
        ref = float(np.max(np.abs(x)))
        diff = float(np.max(np.abs(x - y)))
        worst = max(worst, diff / ref if ref > 0.0 else diff)
    return worst


# --- individual checks ---------------------------------------------------------------


def check_antisymmetry(state, n, seed=0):
    worst = 0.0
    for i in range(n):
        F = random_test_functional(seed + 2 * i).derivative(state)
        G = random_test_functional(seed + 2 * i + 1).derivative(state)
        defect = gpb_scalar(F, G, state) + gpb_scalar(G, F, state)
        worst = max(worst, _rel(defect, gpb_scale(F, G, state)))
    return _row("gpb antisymmetry", worst, ROUNDOFF_TOL, f"{n} pairs")


def check_symmetry(state, eos, coeffs, n, seed=0):
    mismatches = 0
    for i in range(n):
        F = random_test_functional(seed + 2 * i).derivative(state)
        G = random_test_functional(seed + 2 * i + 1).derivative(state)
        if sym_scalar(F, G, state, eos, coeffs) != sym_scalar(G, F, state, eos, coeffs):
            mismatches += 1
    return CheckRow("sym symmetry (bitwise)", mismatches, 0.0, mismatches == 0, f"{n} pairs, mismatches counted")


def check_sym_zero(state, eos, coeffs, n, seed=0):
    """With every transport coefficient zero the symmetric bracket must vanish identically."""
    worst = 0.0
    for i in range(n):
        F = random_test_functional(seed + 2 * i).derivative(state)
        G = random_test_functional(seed + 2 * i + 1).derivative(state)
        worst = max(worst, abs(sym_scalar(F, G, state, eos, coeffs)))
    return _row("sym bracket identically zero", worst, 0.0, "dissipation off")


def check_degeneracies(state, eos, coeffs, profile, n, seed=0):
    report = degeneracy_report(state, eos, coeffs, EntropyProfile.linear(coeffs.lam), n_samples=n, seed=seed)
    rows = []
    for r in report.rows:
        if r.identity.startswith("sym") and not coeffs.dissipative:
            continue
        name = "gpb(S_lin,G)" if r.identity == "gpb(S_f,G)" else r.identity
        rows.append(_row(f"degeneracy {name}", r.max_defect, DEGENERACY_TOL, f"{n} samples"))
    if profile.is_affine:
        worst = 0.0
        S = generalized_entropy(profile)
        for i in range(n):
            G = random_test_functional(seed + i).derivative(state)
            worst = max(worst, _rel(gpb_scalar(S, G, state), gpb_scale(S, G, state)))
        rows.append(_row("degeneracy gpb(S_f,G)", worst, DEGENERACY_TOL, profile.description))
    return rows


def check_casimir_refinement(profile, ns, ndim, seed=0):
    """Order of the ``S_f`` Casimir defect under refinement (nonlinear ``f`` only)."""
    defects, order = casimir_defect_refinement(profile, ns=ns, ndim=ndim, state_seed=seed)
    detail = "N=" + ",".join(str(n) for n in ns) + " defects " + ", ".join(f"{d:.3e}" for d in defects)
    return CheckRow(
        f"Casimir S_f defect order [{profile.description}]",
        order,
        0.3,
        abs(order - 2.0) <= 0.3,
        detail + "; pass if |order - 2| <= tol",
    )


def definiteness_functionals(lam, seed, n_random):
    profiles = [
        EntropyProfile.linear(lam),
        EntropyProfile.polynomial([0.0, 0.0, 1.0]),
        EntropyProfile.polynomial([0.0, -1.0, 0.0, 1.0]),
    ]
    out = [generalized_entropy(p) for p in profiles]
    out += [random_test_functional(10_000 + seed + i) for i in range(n_random)]
    return out


def check_definiteness(state, eos, coeffs, profile, n, seed=0):
    """Most negative ``lambda (F, F) / scale`` over entropy functionals and random ``F``."""
    funcs = definiteness_functionals(coeffs.lam, seed, n)
    funcs.append(generalized_entropy(profile))
    worst = np.inf
    for F in funcs:
        dF = F.derivative(state)
        val = coeffs.lam * sym_scalar(dF, dF, state, eos, coeffs)
        scale = coeffs.lam * sym_scale(dF, dF, state, eos, coeffs)
        worst = min(worst, val / scale if scale > 0.0 else val)
    return CheckRow(
        "sym definiteness min lambda(F,F)", worst, -DEFINITE_TOL, worst >= -DEFINITE_TOL, f"{len(funcs)} functionals"
    )


def check_expanded_form(state, eos, coeffs, n, seed=0):
    worst = 0.0
    for i in range(n):
        F = random_test_functional(seed + 2 * i).derivative(state)
        G = random_test_functional(seed + 2 * i + 1).derivative(state)
        a = sym_scalar(F, G, state, eos, coeffs)
        b = sym_scalar_expanded(F, G, state, eos, coeffs)
        worst = max(worst, _rel(a - b, sym_scale(F, G, state, eos, coeffs)))
    return _row("sym rewritten vs expanded form", worst, ROUNDOFF_TOL, f"{n} pairs")


def check_weak_forms(state, eos, coeffs, n, seed=0):
    grid = state.grid
    worst_gpb = worst_sym = 0.0
    for i in range(n):
        F = random_test_functional(seed + 2 * i).derivative(state)
        G = random_test_functional(seed + 2 * i + 1).derivative(state)
        d = pairing(F, gpb_rhs(state, G), grid) - gpb_scalar(F, G, state)
        worst_gpb = max(worst_gpb, _rel(d, gpb_scale(F, G, state)))
        if coeffs.dissipative:
            d = pairing(F, sym_rhs(state, G, eos, coeffs), grid) - sym_scalar(F, G, state, eos, coeffs)
            worst_sym = max(worst_sym, _rel(d, sym_scale(F, G, state, eos, coeffs)))
    rows = [_row("gpb weak form <dF, rhs(G)> = {F,G}", worst_gpb, ROUNDOFF_TOL, f"{n} pairs")]
    if coeffs.dissipative:
        rows.append(_row("sym weak form <dF, rhs(G)> = (F,G)", worst_sym, ROUNDOFF_TOL, f"{n} pairs"))
    return rows


def check_paths(state, eos, coeffs, profile):
    a = full_rhs(state, eos, coeffs, profile, path="entropy")
    b = full_rhs(state, eos, coeffs, profile, path="free_energy")
    return _row("entropy vs free-energy generator", _tendency_gap(a, b), ROUNDOFF_TOL)


def oracle_gap(state, eos, coeffs, heat_mode="bracket-consistent"):
    """Relative max-norm gap between the bracket RHS (``f = lambda s``) and the direct PDE."""
    model = Model(eos, coeffs, EntropyProfile.linear(coeffs.lam), heat_mode)
    return _tendency_gap(metriplectic_rhs(state, model), direct_ns_rhs(state, eos, coeffs, heat_mode=heat_mode))


def check_oracle(grid, eos, coeffs, n_states=10, seed=0):
    worst = max(oracle_gap(FluidState.random_smooth(grid, seed + i), eos, coeffs) for i in range(n_states))
    return _row("oracle: bracket RHS vs direct NS", worst, ROUNDOFF_TOL, f"{n_states} states, bracket-consistent")


def fourier_refinement(eos, coeffs, ns, ndim, seed=0, length=1.0):
    """Max-norm gap to the Fourier-law oracle on one continuum state over refined grids."""
    gaps = []
    for n in ns:
        grid = Grid((n,) * ndim, (length,) * ndim)
        st = FluidState.random_smooth(grid, seed, kmax=1)
        model = Model(eos, coeffs, EntropyProfile.linear(coeffs.lam))
        a = metriplectic_rhs(st, model)
        b = direct_ns_rhs(st, eos, coeffs, heat_mode="eq14")
        gaps.append(max(float(np.max(np.abs(x - y))) for x, y in ((a.v, b.v), (a.rho, b.rho), (a.s, b.s))))
    return gaps, fit_order(ns, gaps)


def builtin_functionals(eos, profile):
    return [hamiltonian(eos), mass(), *momentum(), generalized_entropy(profile), free_energy(eos, profile)]


def audit_rows(state, functionals, seed=0):
    """One derivative audit per functional; returns ``(row, results)``."""
    results = [derivative_audit(F, state, seed=seed + i) for i, F in enumerate(functionals)]
    worst = max(r.floor for r in results)
    failing = [r.label for r in results if not r.passed(AUDIT_FLOOR)]
    detail = f"{len(results)} functionals"
    if failing:
        detail += "; failing: " + ", ".join(failing)
    return CheckRow("derivative audit worst floor", worst, AUDIT_FLOOR, not failing, detail), results


# --- suites --------------------------------------------------------------------------


def check_suite(cfg, log=None):
    """Full invariant suite for a validated :class:`RunConfig`."""
    grid = cfg.build_grid()
    eos = cfg.build_eos()
    coeffs = cfg.build_transport()
    profile = cfg.build_profile()
    n = cfg.check.n_samples
    seed = cfg.seed
    state = FluidState.random_smooth(grid, seed)
    rows = []

    def add(r):
        for row in r if isinstance(r, list) else [r]:
            rows.append(row)
            if log is not None:
                log(f"{row.name}: {row.value:.4e} {'pass' if row.passed else 'FAIL'}")

    add(check_antisymmetry(state, n, seed))
    if coeffs.dissipative:
        add(check_symmetry(state, eos, coeffs, n, seed))
    else:
        add(check_sym_zero(state, eos, coeffs, n, seed))
    add(check_degeneracies(state, eos, coeffs, profile, n, seed))
    if not profile.is_affine:
        add(check_casimir_refinement(profile, cfg.check.refine, grid.ndim, seed))
    if coeffs.dissipative:
        add(check_definiteness(state, eos, coeffs, profile, n, seed))
        add(check_expanded_form(state, eos, coeffs, min(n, 5), seed))
    add(check_weak_forms(state, eos, coeffs, min(n, 10), seed))
    add(check_paths(state, eos, coeffs, profile))
    add(check_oracle(grid, eos, coeffs, 10, seed))
    add(audit_rows(state, builtin_functionals(eos, profile), seed)[0])
    return rows


def rhs_compare_suite(cfg, n_states=10):
    """Bracket-consistent oracle gap on the config grid and the Fourier-law
    refinement order. Per-field gaps are reported for the first state."""
    grid = cfg.build_grid()
    eos = cfg.build_eos()
    coeffs = cfg.build_transport()
    rows = []
    st = FluidState.random_smooth(grid, cfg.seed)
    model = Model(eos, coeffs, EntropyProfile.linear(coeffs.lam))
    a = metriplectic_rhs(st, model)
    for mode in ("bracket-consistent", "eq14"):
        b = direct_ns_rhs(st, eos, coeffs, heat_mode=mode)
        for name, x, y in (("v", a.v, b.v), ("rho", a.rho, b.rho), ("s", a.s, b.s)):
            diff = float(np.max(np.abs(x - y)))
            ref = float(np.max(np.abs(x)))
            rows.append(CheckRow(f"{mode} max|diff| {name}", diff, np.nan, True, f"max|rhs| {ref:.3e}"))
    rows.append(check_oracle(grid, eos, coeffs, n_states, cfg.seed))
    if coeffs.dissipative and not coeffs.kappa_is_tensor:
        ns = cfg.check.refine
        gaps, order = fourier_refinement(eos, coeffs, ns, grid.ndim, cfg.seed)
        detail = "N=" + ",".join(map(str, ns)) + " gaps " + ", ".join(f"{g:.3e}" for g in gaps)
        rows.append(CheckRow("eq14 gap convergence order", order, 0.2, abs(order - 2.0) <= 0.2, detail))
    return rows


def derivative_audit_suite(cfg, n_random=20):
    grid = cfg.build_grid()
    eos = cfg.build_eos()
    profile = cfg.build_profile()
    state = FluidState.random_smooth(grid, cfg.seed)
    funcs = builtin_functionals(eos, profile) + [random_test_functional(cfg.seed + 500 + i) for i in range(n_random)]
    row, results = audit_rows(state, funcs, cfg.seed)
    rows = []
    for r in results:
        regime = "exact" if r.exact else f"order {r.order:.2f}" if r.order is not None else "no order"
        rows.append(CheckRow(f"audit {r.label}", r.floor, AUDIT_FLOOR, r.passed(AUDIT_FLOOR), regime))
    rows.append(row)
    return rows
