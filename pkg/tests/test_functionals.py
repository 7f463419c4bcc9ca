import numpy as np
import pytest

from metriplectic import (
    EntropyProfile,
    FluidState,
    Grid,
    derivative_audit,
    free_energy,
    generalized_entropy,
    hamiltonian,
    mass,
    momentum,
    random_test_functional,
)
from metriplectic.grid import integrate


def test_profile_rejects_wrong_derivative():
    with pytest.raises(ValueError, match="not the derivative"):
        EntropyProfile(lambda s: s**2, lambda s: s, "bad")


def test_profile_polynomial():
    p = EntropyProfile.polynomial([1.0, -1.0, 0.0, 1.0])
    s = np.array([0.0, 2.0])
    assert np.allclose(p.f(s), [1.0, 7.0])
    assert np.allclose(p.f_prime(s), [-1.0, 11.0])
    assert not p.is_affine
    assert EntropyProfile.linear(2.0).is_affine


def test_builtin_values(grid):
    st = FluidState.uniform(grid, 2.0, 1.0, v0=(0.5, 0.0, -1.0))
    vol = grid.volume
    assert mass().evaluate(st) == pytest.approx(2.0 * vol)
    P = [Pj.evaluate(st) for Pj in momentum()]
    assert P == pytest.approx([1.0 * vol, 0.0, -2.0 * vol])
    S = generalized_entropy(EntropyProfile.linear(3.0))
    assert S.evaluate(st) == pytest.approx(6.0 * vol)


def test_functional_algebra(state, eos):
    H, M = hamiltonian(eos), mass()
    F = 2.0 * H - M
    assert F.evaluate(state) == pytest.approx(2 * H.evaluate(state) - M.evaluate(state))
    d = F.derivative(state)
    assert np.allclose(d.rho, 2 * H.derivative(state).rho - 1.0)
    FE = free_energy(eos, EntropyProfile.linear(1.0))
    assert FE.evaluate(state) == pytest.approx(H.evaluate(state) + integrate(state.grid, state.rho * state.s))


@pytest.mark.parametrize(
    "make",
    [
        lambda eos: hamiltonian(eos),
        lambda eos: mass(),
        lambda eos: momentum()[0],
        lambda eos: momentum()[2],
        lambda eos: generalized_entropy(EntropyProfile.polynomial([0, -1, 0, 1])),
        lambda eos: free_energy(eos, EntropyProfile.polynomial([0, 0, 1])),
    ],
    ids=["H", "M", "Px", "Pz", "S_cubic", "F_quad"],
)
def test_builtin_derivative_audit(make, eos, state):
    res = derivative_audit(make(eos), state, seed=1)
    assert res.passed(1e-9), (res.floor, res.order)


@pytest.mark.parametrize("seed", range(5))
def test_random_functional_audit(seed, state):
    res = derivative_audit(random_test_functional(seed), state, seed=seed)
    assert res.passed(1e-9)


def test_nonquadratic_audit_reports_order_two(eos):
    st = FluidState.random_smooth(Grid((12, 12), (1.0, 1.0)), seed=3)
    res = derivative_audit(hamiltonian(eos), st, seed=0)
    assert not res.exact
    assert res.order == pytest.approx(2.0, abs=0.1)


def test_audit_detects_wrong_derivative(state):
    G = random_test_functional(0)
    broken = type(G)("broken", G.evaluate, lambda st: G.derivative(st).scaled(1.01))
    assert not derivative_audit(broken, state).passed(1e-9)


def test_random_functional_is_grid_independent():
    G = random_test_functional(4)
    coarse = FluidState.random_smooth(Grid((16, 16), (1.0, 1.0)), 1, kmax=1)
    fine = FluidState.random_smooth(Grid((32, 32), (1.0, 1.0)), 1, kmax=1)
    # same continuum functional on the same continuum state
    assert G.evaluate(coarse) == pytest.approx(G.evaluate(fine), rel=0.05)
