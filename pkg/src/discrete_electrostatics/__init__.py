"""Discrete electrostatics: charges with an exclusion radius in rational-log
external fields, their equilibria, and the lattice polynomials whose zeros
they are."""

from .core import (
    ChargeConfiguration,
    DensePolynomial,
    DomainError,
    InfeasibleError,
    Interval,
    IntervalSystem,
    NotGConvexError,
    RationalFieldSpec,
    ValidityReport,
    capacity,
    validate_configuration,
)
from .diffeq import NotASolutionError, delta, infer_C, nabla, verify_critical
from .electrostatics import (
    energy,
    energy_gradient,
    energy_hessian,
    external_force,
    external_potential,
    pair_force,
    pair_potential,
    total_force,
)
from .families import FamilySpec, field_of, hyp_eval, lattice_root_oracle, make_family
from .gconvex import check_gconvex, enumerate_gconvex_windows, is_symmetric, max_charges
from .solver import (
    SolverOptions,
    SolverResult,
    gradient_flow_check,
    place_single,
    solve_equilibrium,
    solve_equilibrium_symmetric_pairs,
)

__version__ = "0.1.0"
