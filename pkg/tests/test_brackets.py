import numpy as np
import pytest

from metriplectic import (
    EntropyProfile,
    FluidState,
    Grid,
    TransportCoefficients,
    generalized_entropy,
    hamiltonian,
    mass,
    momentum,
    random_test_functional,
)
from metriplectic.brackets import (
    BracketError,
    casimir_defect_norm,
    casimir_defect_refinement,
    context,
    degeneracy_report,
    fit_order,
    full_bracket_scalar,
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


def _pair(state, i):
    return random_test_functional(2 * i).derivative(state), random_test_functional(2 * i + 1).derivative(state)


@pytest.mark.parametrize("i", range(3))
def test_gpb_antisymmetry(state, i):
    F, G = _pair(state, i)
    assert abs(gpb_scalar(F, G, state) + gpb_scalar(G, F, state)) <= 1e-13 * gpb_scale(F, G, state)
    assert gpb_scalar(F, F, state) == pytest.approx(0.0, abs=1e-13 * gpb_scale(F, F, state))


@pytest.mark.parametrize("i", range(3))
def test_sym_bitwise_symmetry(state, eos, coeffs, i):
    F, G = _pair(state, i)
    assert sym_scalar(F, G, state, eos, coeffs) == sym_scalar(G, F, state, eos, coeffs)


def test_sym_matches_expanded_form(state, eos, coeffs):
    F, G = _pair(state, 0)
    a = sym_scalar(F, G, state, eos, coeffs)
    b = sym_scalar_expanded(F, G, state, eos, coeffs)
    assert abs(a - b) <= 1e-12 * sym_scale(F, G, state, eos, coeffs)


def test_sym_expanded_with_tensor_kappa(state, eos):
    c = TransportCoefficients(eta=0.05, zeta=0.0, kappa=((0.2, 0.05, 0.0), (0.05, 0.1, 0.0), (0.0, 0.0, 0.1)))
    F, G = _pair(state, 1)
    a = sym_scalar(F, G, state, eos, c)
    assert a == sym_scalar(G, F, state, eos, c)
    assert abs(a - sym_scalar_expanded(F, G, state, eos, c)) <= 1e-12 * sym_scale(F, G, state, eos, c)


def test_weak_forms(state, eos, coeffs):
    F, G = _pair(state, 2)
    grid = state.grid
    g = pairing(F, gpb_rhs(state, G), grid)
    assert g == pytest.approx(gpb_scalar(F, G, state), abs=1e-13 * gpb_scale(F, G, state))
    s = pairing(F, sym_rhs(state, G, eos, coeffs), grid)
    assert s == pytest.approx(sym_scalar(F, G, state, eos, coeffs), abs=1e-13 * sym_scale(F, G, state, eos, coeffs))


def test_full_bracket_is_sum(state, eos, coeffs):
    F, G = _pair(state, 0)
    total = full_bracket_scalar(F, G, state, eos, coeffs)
    assert total == gpb_scalar(F, G, state) + sym_scalar(F, G, state, eos, coeffs)


def test_degeneracy_report(state, eos, coeffs):
    rep = degeneracy_report(state, eos, coeffs, EntropyProfile.linear(1.0), n_samples=5)
    assert rep.passed
    csv = rep.to_csv().splitlines()
    assert csv[0] == "identity,n_samples,max_normalized_defect,pass"
    assert len(csv) == 5 and all(line.endswith("pass") for line in csv[1:])


def test_energy_conserved_semidiscretely(state, eos, coeffs):
    H = hamiltonian(eos)
    dH = H.derivative(state)
    rhs = full_rhs(state, eos, coeffs, EntropyProfile.linear(1.0))
    assert abs(pairing(dH, rhs, state.grid)) <= 1e-11 * abs(H.evaluate(state))


def test_mass_tendency_vanishes(state, eos, coeffs):
    rhs = full_rhs(state, eos, coeffs, EntropyProfile.linear(1.0))
    assert abs(pairing(mass().derivative(state), rhs, state.grid)) <= 1e-12 * state.grid.volume


def test_dissipation_conserves_momentum_exactly(state, eos, coeffs):
    S = generalized_entropy(EntropyProfile.linear(1.0))
    rhs = sym_rhs(state, S, eos, coeffs)
    for P in momentum():
        assert abs(pairing(P.derivative(state), rhs, state.grid)) <= 1e-13


def test_ideal_momentum_defect_is_second_order(eos):
    # the centred chain rule fails pointwise, so {P, H} vanishes only as h -> 0
    ns = (16, 32, 64)
    defects = []
    for n in ns:
        st = FluidState.random_smooth(Grid((n, n), (1.0, 1.0)), 3, kmax=2)
        r = gpb_rhs(st, hamiltonian(eos))
        defects.append(max(abs(pairing(P.derivative(st), r, st.grid)) for P in momentum()))
    assert fit_order(ns, defects) == pytest.approx(2.0, abs=0.1)


def test_entropy_production_nonnegative(state, eos, coeffs):
    S = generalized_entropy(EntropyProfile.linear(1.0))
    rhs = full_rhs(state, eos, coeffs, EntropyProfile.linear(1.0))
    dS = pairing(S.derivative(state), rhs, state.grid)
    assert dS > 0.0
    assert dS == pytest.approx(sym_scalar(S, S, state, eos, coeffs), rel=1e-10)


def test_entropy_and_free_energy_paths_agree(state, eos, coeffs):
    prof = EntropyProfile.polynomial([0.0, 0.5, 0.3])
    a = full_rhs(state, eos, coeffs, prof, path="entropy")
    b = full_rhs(state, eos, coeffs, prof, path="free_energy")
    assert (a - b).max_abs() <= 1e-12 * a.max_abs()
    with pytest.raises(ValueError):
        full_rhs(state, eos, coeffs, prof, path="bogus")


def test_dissipation_off_is_pure_euler(state, eos):
    off = TransportCoefficients()
    F, G = _pair(state, 0)
    assert sym_scalar(F, G, state, eos, off) == 0.0
    a = full_rhs(state, eos, off, EntropyProfile.linear(1.0))
    b = gpb_rhs(state, hamiltonian(eos))
    assert np.array_equal(a.v, b.v) and np.array_equal(a.s, b.s)


def test_casimir_defect_zero_for_linear_profile(state):
    S = generalized_entropy(EntropyProfile.linear(2.0))
    # linear f: exact Casimir up to rounding
    assert casimir_defect_norm(S, state) <= 1e-12
    assert casimir_defect_norm(mass(), state) == 0.0


def test_casimir_defect_converges_for_nonlinear_profile():
    defects, order = casimir_defect_refinement(EntropyProfile.polynomial([0, -1, 0, 1]), ns=(8, 16, 32), ndim=2)
    assert defects[0] > defects[1] > defects[2] > 0.0
    assert order == pytest.approx(2.0, abs=0.3)


def test_fit_order_exact_power():
    assert fit_order([8, 16, 32], [1.0, 0.25, 0.0625]) == pytest.approx(2.0)


def test_context_cache_tracks_state(eos, coeffs):
    g = Grid((8, 8), (1.0, 1.0))
    a = FluidState.random_smooth(g, 0)
    b = FluidState.random_smooth(g, 0)
    ca, cb = context(a, eos, coeffs), context(b, eos, coeffs)
    assert ca is context(a, eos, coeffs)
    assert ca is not cb and ca.state is a


def test_nonpositive_density_raises(eos, coeffs):
    g = Grid((8,), (1.0,))
    rho = np.ones(8)
    rho[3] = 0.0
    st = FluidState(g, g.zeros_vector(), rho, np.ones(8))
    with pytest.raises(BracketError, match="node"):
        sym_scalar(mass(), mass(), st, eos, coeffs)
    with pytest.raises(BracketError):
        gpb_rhs(st, mass())
