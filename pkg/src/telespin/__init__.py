"""Collective-spin teleportation simulator.

Entangles finite ensembles, measures the coupled pair in entangled bases,
learns per-outcome correction rotations by bounded local optimization, and
benchmarks the resulting fidelities against closed-form classical limits.
"""

from .classical import (
    BenchmarkCurve,
    classical_fidelity_coherent,
    dicke_classical_fidelity,
    dicke_conditional_prob,
    qubit_classical_limit,
    vmf_beta_for_mean_occupation,
    vmf_mean_occupation,
)
from .dynamics import (
    CorrelationSnapshot,
    LinearCoefficients,
    QuadraticCoefficient,
    build_linear_hamiltonian,
    build_quadratic_hamiltonian,
    entanglement_entropy,
    evolve,
    mean_occupation,
    variance_bounds,
)
from .measurement import (
    MeasurementBasis,
    OutcomeLabel,
    OutcomeRecord,
    ac_measurement_basis,
    bell_basis,
    enumerate_outcomes,
    observable_eigenbasis,
    project_outcome,
)
from .optimize import (
    CorrectionResult,
    ObjectiveSpec,
    OptimizerSettings,
    minimize_bounded,
    objective_gradient,
    objective_value,
    optimize_correction,
)
from .protocol import (
    AngleLibrary,
    BuildResult,
    FidelityReport,
    InputState,
    Prior,
    SamplingGrid,
    Scenario,
    antipode,
    average_library,
    build_library,
    classical_benchmark,
    coherent_inputs,
    couple_and_measure,
    dicke_inputs,
    evaluate_teleportation,
    prepare_entangled_pair,
    prior_weight,
    retarget_state,
    rotated_dicke,
    sample_bloch_grid,
    sweep_prior,
    weighted_circular_mean,
)
from .spins import (
    BlochPoint,
    CompositeState,
    EulerAngles,
    HermitianOperator,
    SpinState,
    TwoAxisAngles,
    UnitaryOperator,
    angular_momentum_ops,
    apply_unitary,
    coherent_state,
    dicke_state,
    embed_local,
    expectation,
    fidelity,
    partial_trace,
    rotation_unitary,
    tensor_product,
)
from .storage import LibraryFormatError, emit_csv, load_library, save_library

__version__ = "0.1.0"
