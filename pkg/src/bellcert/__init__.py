"""Purification and fidelity estimation of Bell-diagonal pairs with a four-pair parity circuit."""

from .circuit import (
    CircuitModel,
    JointParityDistribution,
    MeasurementTally,
    build_circuit,
    joint_parity_distribution,
    output_state_on_success,
    pauli_frame_oracle,
    sample_shots,
)
from .errors import (
    BellCertError,
    CircuitSelfCheckError,
    DegeneratePostSelectionError,
    DomainError,
    InfeasibleProportionsError,
    LowParityError,
    SingularGradientError,
    UnreachableThresholdError,
)
from .estimate import ParityProportions, ReconstructionResult, estimate_from_tally, invert, invert_general, invert_ideal
from .plan import ResourcePlan, pairs_for_certification, purify_and_certify_plan, runs_for_halfwidth
from .purify import (
    PurificationOutcome,
    Trajectory,
    find_lambda_threshold,
    iterate,
    purify_once_ideal,
    success_probability_ideal,
)
from .states import (
    IDEAL,
    BellDiagonalState,
    NoiseModel,
    make_werner,
    project_to_simplex,
    state_fidelity,
    trace_distance,
)
from .stats import ShotCovariance, SigmaCurve, confidence_interval, estimator_gradient, marginal_parity_probs, shot_covariance, sigma_one
