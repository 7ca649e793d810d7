"""Adaptive-ansatz QAOA and Goemans-Williamson solvers for weighted Max-Cut."""

__version__ = "0.1.0"

from .adapt import (
    AdaptConfig,
    IterationRecord,
    PoolGradient,
    RunRecord,
    SkipCoefficients,
    VARIANTS,
    energy_variation,
    gradient_at,
    mixer_pool,
    optimize_parameters,
    run_adapt,
    run_dynamic,
    run_standard,
    select_mixer_offset,
    select_mixer_zero,
    skip_coefficients,
    skip_condition,
    tune_delta2,
)
from .bench import (
    CriticalErrorResult,
    DEFAULT_NOISE_GRID,
    GammaHistogram,
    NOISE_ANCHORS,
    NoiseCurve,
    build_noise_curve,
    critical_error_probability,
    gamma_histogram,
    mitigated_curve,
    noisy_growth,
    replay_with_noise,
    richardson_mitigate,
    variant_comparison,
    write_convergence_csv,
    write_critical_csv,
    write_histogram_csv,
    write_variant_csv,
)
from .estimators import AdaptiveCutSolver, GoemansWilliamsonSolver
from .exceptions import (
    AdaptcutError,
    DimensionError,
    InvalidInstanceError,
    InvalidParameterError,
    ResourceLimitError,
    UnsupportedMixerError,
)
from .gw import (
    EmbeddingSolution,
    RoundingResult,
    expected_cut,
    gw_ratio,
    hyperplane_round,
    solve_relaxation,
)
from .instances import (
    Cut,
    MaxCutInstance,
    brute_force_max_cut,
    cut_value,
    energy_to_cut,
    generate_instance,
    load_instance,
    save_instance,
)
from .operators import (
    IsingHamiltonian,
    Mixer,
    PauliString,
    build_hamiltonian,
    pauli_matrix,
    split_hamiltonian,
)
from .seeding import derive_seed
from .validation import check_weight_matrix
from .simulator import (
    Ansatz,
    AnsatzLayer,
    DensityBackend,
    Gate,
    QuantumState,
    ansatz_cnot_count,
    cnot_count,
    compile_ansatz,
    dump_gates,
    evolve_ansatz_vec,
    expectation,
    fidelity_with_pure,
    parse_gates,
    simulate_noisy,
    simulate_pure,
)
