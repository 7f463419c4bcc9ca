"""Property-based tests: the discrete identities hold for arbitrary states and
parameters, not just the hand-picked ones."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from metriplectic import (
    EntropyProfile,
    EquationOfState,
    FluidState,
    Grid,
    TransportCoefficients,
    generalized_entropy,
    hamiltonian,
    random_test_functional,
)
from metriplectic.brackets import gpb_scalar, gpb_scale, pairing, sym_rhs, sym_scalar, sym_scale
from metriplectic.grid import central_diff, inner

dims = st.sampled_from([(8,), (6, 9), (5, 4, 6)])
seeds = st.integers(0, 2**31 - 1)
coef = st.floats(0.0, 2.0)
settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


def _state(d, seed, amp):
    return FluidState.random_smooth(Grid(d, (1.0,) * len(d)), seed, v_amp=amp, s_amp=amp)


@given(d=dims, seed=seeds)
def test_difference_operator_summation_by_parts(d, seed):
    g = Grid(d, (1.0,) * len(d))
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal(d), rng.standard_normal(d)
    for ax in range(len(d)):
        x = inner(g, a, central_diff(g, b, ax))
        y = inner(g, central_diff(g, a, ax), b)
        assert abs(x + y) <= 1e-12 * (1.0 + abs(x))


@given(d=dims, seed=seeds, fs=seeds, gs=seeds, amp=st.floats(0.0, 1.0))
def test_poisson_antisymmetry_any_state(d, seed, fs, gs, amp):
    s = _state(d, seed, amp)
    F, G = random_test_functional(fs).derivative(s), random_test_functional(gs).derivative(s)
    scale = gpb_scale(F, G, s)
    assert abs(gpb_scalar(F, G, s) + gpb_scalar(G, F, s)) <= 1e-12 * scale + 1e-300


@given(d=dims, seed=seeds, fs=seeds, gs=seeds, eta=coef, zeta=coef, kappa=coef, lam=st.floats(0.1, 10.0))
def test_symmetric_bracket_properties(d, seed, fs, gs, eta, zeta, kappa, lam):
    s = _state(d, seed, 0.3)
    eos = EquationOfState()
    c = TransportCoefficients(eta=eta, zeta=zeta, kappa=kappa, lam=lam)
    F, G = random_test_functional(fs).derivative(s), random_test_functional(gs).derivative(s)
    assert sym_scalar(F, G, s, eos, c) == sym_scalar(G, F, s, eos, c)
    ff = sym_scalar(F, F, s, eos, c)
    assert ff >= -1e-13 * sym_scale(F, F, s, eos, c)
    H = hamiltonian(eos)
    assert abs(sym_scalar(H, G, s, eos, c)) <= 1e-11 * sym_scale(H, G, s, eos, c) + 1e-300
    w = pairing(F, sym_rhs(s, G, eos, c), s.grid)
    assert abs(w - sym_scalar(F, G, s, eos, c)) <= 1e-12 * sym_scale(F, G, s, eos, c) + 1e-300


@given(d=dims, seed=seeds, gs=seeds, lam=st.floats(-5.0, 5.0), c0=st.floats(-5.0, 5.0))
def test_affine_entropy_is_casimir(d, seed, gs, lam, c0):
    s = _state(d, seed, 0.5)
    S = generalized_entropy(EntropyProfile.polynomial([c0, lam]))
    G = random_test_functional(gs).derivative(s)
    assert abs(gpb_scalar(S, G, s)) <= 1e-11 * gpb_scale(S, G, s) + 1e-300


@given(
    d=dims,
    seed=seeds,
    gs=seeds,
    k=st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3),
    off=st.lists(st.floats(-0.3, 0.3), min_size=3, max_size=3),
)
def test_tensor_kappa_bracket_is_symmetric(d, seed, gs, k, off):
    K = np.diag(k) + np.diag(np.ones(3))
    K[0, 1] = K[1, 0] = off[0]
    K[0, 2] = K[2, 0] = off[1]
    K[1, 2] = K[2, 1] = off[2]
    s = _state(d, seed, 0.3)
    eos = EquationOfState()
    c = TransportCoefficients(kappa=K)
    F, G = random_test_functional(gs).derivative(s), random_test_functional(gs + 1).derivative(s)
    assert sym_scalar(F, G, s, eos, c) == sym_scalar(G, F, s, eos, c)
