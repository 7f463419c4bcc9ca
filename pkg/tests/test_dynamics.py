import numpy as np
import pytest

from metriplectic import (
    EntropyProfile,
    FluidState,
    Grid,
    Model,
    NumericalAbort,
    TransportCoefficients,
    direct_ns_rhs,
    rk4_step,
    run,
)
from metriplectic.checks import oracle_gap
from metriplectic.dynamics import (
    DIAGNOSTIC_COLUMNS,
    equilibrium_residual,
    find_uniform_critical_state,
    initial_state,
    metriplectic_rhs,
    stable_dt,
    state_diagnostics,
)
from metriplectic.state import Tendency


def test_oracle_equivalence(state, eos, coeffs):
    assert oracle_gap(state, eos, coeffs) <= 1e-12


def test_oracle_equivalence_tensor_kappa(state, eos):
    c = TransportCoefficients(eta=0.1, zeta=0.0, kappa=np.diag([0.1, 0.2, 0.05]))
    assert oracle_gap(state, eos, c) <= 1e-12


def test_advective_form_differs_only_at_truncation(eos, coeffs):
    gaps = []
    for n in (16, 32):
        st = FluidState.random_smooth(Grid((n, n), (1.0, 1.0)), 0, kmax=1)
        a = direct_ns_rhs(st, eos, coeffs)
        b = direct_ns_rhs(st, eos, coeffs, momentum_form="advective")
        gaps.append(np.max(np.abs(a.v - b.v)))
    assert 0 < gaps[1] < gaps[0] / 3.0


def test_oracle_rejects_unknown_modes(state, eos, coeffs):
    with pytest.raises(ValueError):
        direct_ns_rhs(state, eos, coeffs, heat_mode="fourier")
    with pytest.raises(ValueError):
        direct_ns_rhs(state, eos, coeffs, momentum_form="conservative")
    with pytest.raises(ValueError):
        Model(eos, coeffs, EntropyProfile.linear(1.0), heat_mode="x")


def test_rk4_is_fourth_order():
    g = Grid((4,), (1.0,))
    st = FluidState.uniform(g, 1.0, 0.0)

    def rhs(s):
        # ds/dt = s + 1 componentwise, exact solution e^t - 1
        return Tendency(g.zeros_vector(), g.zeros(), s.s + 1.0)

    errs = []
    for n in (10, 20, 40):
        x = st
        for _ in range(n):
            x = rk4_step(x, 1.0 / n, rhs)
        errs.append(abs(x.s[0] - (np.e - 1.0)))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(4.0, abs=0.15)
    assert np.log2(errs[1] / errs[2]) == pytest.approx(4.0, abs=0.15)


def test_rk4_aborts_on_negative_density(eos):
    g = Grid((8,), (1.0,))
    st = FluidState.uniform(g, 1.0, 1.0)

    def rhs(s):
        return Tendency(g.zeros_vector(), -10.0 * np.ones(8), g.zeros())

    with pytest.raises(NumericalAbort) as exc:
        rk4_step(st, 1.0, rhs, t=0.5)
    assert exc.value.state is st and exc.value.t == 0.5
    with pytest.raises(ValueError):
        rk4_step(st, 0.0, rhs)


def test_uniform_state_is_stationary(eos, coeffs, grid):
    model = Model(eos, coeffs, EntropyProfile.linear(1.0))
    st = FluidState.uniform(grid, 1.0, 1.0, v0=(0.3, 0.0, 0.0))
    assert metriplectic_rhs(st, model).max_abs() <= 1e-15


def test_stable_dt_respects_both_limits(eos, coeffs):
    g = Grid((16, 16), (1.0, 1.0))
    st = initial_state(g, eos, "shear", 0.5)
    adv = stable_dt(st, eos, TransportCoefficients())
    both = stable_dt(st, eos, TransportCoefficients(kappa=10.0))
    assert both < adv
    assert adv == pytest.approx(0.4 * g.h_min / np.max(0.5 * 1 + eos.sound_speed(st.rho, st.s)), rel=0.05)


@pytest.mark.parametrize("preset", ["uniform", "shear", "entropy_bump", "random"])
def test_initial_presets(preset, eos):
    g = Grid((8, 8), (1.0, 2.0))
    st = initial_state(g, eos, preset, amplitude=0.2, seed=1)
    assert np.all(st.rho > 0)
    if preset == "shear":
        (x, y) = g.coords()
        assert np.allclose(st.v[0], 0.2 * np.sin(2 * np.pi * y / 2.0))
    with pytest.raises(ValueError):
        initial_state(g, eos, "vortex")


def test_shear_1d_uses_transverse_velocity(eos):
    st = initial_state(Grid((8,), (1.0,)), eos, "shear", 0.1)
    assert np.all(st.v[0] == 0) and np.max(np.abs(st.v[1])) > 0


def test_short_run_records_and_invariants(eos, coeffs):
    g = Grid((12, 12), (1.0, 1.0))
    model = Model(eos, coeffs, EntropyProfile.linear(1.0))
    st = initial_state(g, eos, "random", 0.1, seed=4)
    seen = []
    traj = run(st, model, 2e-3, 0.02, output_every=2, on_record=seen.append)
    assert traj.steps == 10 and len(traj.records) == 6 and seen == traj.records
    assert set(traj.records[0]) == set(DIAGNOSTIC_COLUMNS)
    H = traj.column("H")
    assert np.max(np.abs(H - H[0])) <= 1e-10 * H[0]
    assert np.all(np.diff(traj.column("S_f")) > 0)
    assert np.isnan(traj.records[0]["dSdt_observed"])
    assert not np.isnan(traj.records[-1]["dSdt_observed"])


def test_run_aborts_when_unstable(eos):
    g = Grid((8, 8), (1.0, 1.0))
    model = Model(eos, TransportCoefficients(eta=1.0, kappa=1.0), EntropyProfile.linear(1.0))
    st = initial_state(g, eos, "random", 0.5, seed=0)
    with pytest.raises(NumericalAbort):
        run(st, model, 0.5, 50.0)


def test_diagnostics_from_state_alone(eos, coeffs):
    st = initial_state(Grid((8, 8), (1.0, 1.0)), eos, "entropy_bump", 0.3)
    model = Model(eos, coeffs, EntropyProfile.linear(1.0))
    rec = state_diagnostics(st, model, 0.0)
    assert rec["H_drift_rel"] == 0.0 and rec["dSdt_bracket"] > 0.0
    assert rec["min_T"] == pytest.approx(float(np.min(eos.temperature(st.rho, st.s))))


def test_critical_state(eos, coeffs):
    g = Grid((8, 8), (1.0, 1.0))
    prof = EntropyProfile.polynomial([0.0, 0.0, -1.0])
    st = find_uniform_critical_state(g, eos, prof)
    T = eos.temperature(st.rho, st.s)
    assert np.allclose(T + prof.f_prime(st.s), 0.0, atol=1e-14)
    res = equilibrium_residual(st, Model(eos, coeffs, prof))
    assert res.is_critical and res.is_stationary
    with pytest.raises(ValueError, match="no critical"):
        find_uniform_critical_state(g, eos, EntropyProfile.linear(1.0))


def test_stationary_without_criticality(eos, coeffs, grid):
    # f = 0: dF/ds = rho T is nonzero, yet a uniform state does not move
    st = FluidState.uniform(grid, 1.0, 1.0)
    res = equilibrium_residual(st, Model(eos, coeffs, EntropyProfile.polynomial([0.0])))
    assert res.is_stationary and not res.is_critical


def test_perturbed_state_is_not_equilibrium(eos, coeffs, state):
    res = equilibrium_residual(state, Model(eos, coeffs, EntropyProfile.linear(1.0)))
    assert not res.is_stationary
