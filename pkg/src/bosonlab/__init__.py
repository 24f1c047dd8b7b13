"""Bosonic mean-field laboratory.

Exact N-particle dynamics on the permutation-symmetric sector, the
nonlinear one-body mean-field flow it converges to, the finite-N hierarchy
for reduced density matrices, and the explicit error/locality bounds that
tie the three together — all small and dense, built for correctness checks
rather than scale.
"""

from ._kernels import HAS_NUMBA, USE_NUMBA
from .bounds import (
    BoundCurve,
    commutator_growth_bound,
    correlation_gap_bound,
    mean_field_error_bound,
    telescoping_residual,
    trace_distance,
)
from .exact_dynamics import (
    FULL_SPACE_GUARD,
    FullSpaceState,
    ObservableOnSubset,
    bbgky_rhs,
    commutator_growth,
    correlation_gap,
    evolve_exact,
    fullspace_build,
    fullspace_evolve,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    config_from_dict,
    load_config,
    run_bbgky,
    run_bounds,
    run_convergence,
    run_corr,
    run_lr,
    write_plot_data,
    write_rows,
)
from .hartree import (
    DensityMatrix,
    HartreeTrajectory,
    hartree_evolve,
    hartree_rhs,
    mean_field_energy,
    mean_field_hamiltonian,
    pure_state_density,
)
from .operators import (
    BoundConstants,
    HamiltonianSpec,
    PotentialTerm,
    bound_constants,
    operator_norm,
    permute_slots,
    slot_symmetrize,
    validate_potential,
    vtilde,
)
from .symmetric_space import (
    MAX_BASIS_SIZE,
    OccupationBasis,
    SymmetricState,
    build_hamiltonian,
    build_symmetric_operator,
    embed_product_state,
    enumerate_basis,
    rdm,
)

__version__ = "0.1.0"

__all__ = [
    "BoundConstants",
    "BoundCurve",
    "ConfigError",
    "DensityMatrix",
    "ExperimentConfig",
    "FULL_SPACE_GUARD",
    "FullSpaceState",
    "HAS_NUMBA",
    "HamiltonianSpec",
    "HartreeTrajectory",
    "MAX_BASIS_SIZE",
    "ObservableOnSubset",
    "OccupationBasis",
    "PotentialTerm",
    "SymmetricState",
    "USE_NUMBA",
    "bbgky_rhs",
    "bound_constants",
    "build_hamiltonian",
    "build_symmetric_operator",
    "commutator_growth",
    "commutator_growth_bound",
    "config_from_dict",
    "correlation_gap",
    "correlation_gap_bound",
    "embed_product_state",
    "enumerate_basis",
    "evolve_exact",
    "fullspace_build",
    "fullspace_evolve",
    "hartree_evolve",
    "hartree_rhs",
    "load_config",
    "mean_field_energy",
    "mean_field_error_bound",
    "mean_field_hamiltonian",
    "operator_norm",
    "permute_slots",
    "pure_state_density",
    "rdm",
    "run_bbgky",
    "run_bounds",
    "run_convergence",
    "run_corr",
    "run_lr",
    "slot_symmetrize",
    "telescoping_residual",
    "trace_distance",
    "validate_potential",
    "vtilde",
    "write_plot_data",
    "write_rows",
]
