"""Metriplectic compressible Navier-Stokes on periodic grids.

Ideal dynamics come from a Poisson bracket, dissipation from a symmetric
bracket; both are discretized so that their algebraic identities hold to
rounding on the grid.
"""

from .brackets import (
    full_bracket_scalar,
    full_rhs,
    gpb_rhs,
    gpb_scalar,
    sym_rhs,
    sym_scalar,
    sym_scalar_expanded,
)
from .dynamics import Model, NumericalAbort, direct_ns_rhs, rk4_step, run
from .functionals import (
    EntropyProfile,
    Functional,
    derivative_audit,
    free_energy,
    generalized_entropy,
    hamiltonian,
    mass,
    momentum,
    random_test_functional,
)
from .grid import Grid
from .state import FluidState, Tendency
from .thermo import EquationOfState, TransportCoefficients

__version__ = "0.1.0"

__all__ = [
    "EntropyProfile",
    "EquationOfState",
    "FluidState",
    "Functional",
    "Grid",
    "Model",
    "NumericalAbort",
    "Tendency",
    "TransportCoefficients",
    "derivative_audit",
    "direct_ns_rhs",
    "free_energy",
    "full_bracket_scalar",
    "full_rhs",
    "generalized_entropy",
    "gpb_rhs",
    "gpb_scalar",
    "hamiltonian",
    "mass",
    "momentum",
    "random_test_functional",
    "rk4_step",
    "run",
    "sym_rhs",
    "sym_scalar",
    "sym_scalar_expanded",
]
