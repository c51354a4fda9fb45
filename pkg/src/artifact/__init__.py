"""Classical simulation toolkit for finding a common element of two sets with two phase oracles."""
from .algorithms import (
    ALGORITHMS,
    RunTrace,
    TraceSample,
    find_common_element,
    plan_schedule,
    q_opt,
    run_algorithm,
    run_algorithm1,
    run_algorithm2,
    run_grover_reference,
    run_variant,
)
from .bench import ComparisonRow, ExperimentConfig, emit_curves, generate_instance, read_curves, run_comparison
from .invariants import InvariantReport, verify_invariants
from .statevector import (
    MembershipSets,
    QueryLedger,
    StateVector,
    apply_diffusion,
    apply_phase_oracle,
    pairwise_sum,
    sample_measurement,
    success_probability,
    verify_ancilla_intersection_oracle,
)
from .subspace import (
    AmplitudeVector,
    EigenSystem,
    SetProfile,
    SubspaceOperator,
    amplitudes_from_profile,
    analyze,
    asymptotic_eigenphase,
    build_reflection_matrices,
    build_search_operator,
    eigen_decomposition_numeric,
    eigenphases_closed_form,
    initial_state_coefficients,
    optimal_iteration_count,
    overlap_after_iterations_analytic,
    overlap_after_iterations_exact,
)
from .tolerances import DEFAULT as DEFAULT_TOLERANCES, Tolerances

__version__ = "0.1.0"
