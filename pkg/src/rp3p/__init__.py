"""Indoor visible-light positioning from three LEDs of arbitrary orientation.

The estimator joins the camera's view of the LEDs (bearing angles) with the
photodiode's received signal strength: the law-of-cosines system gives up to
four range candidates, the Lambertian channel inversion selects the
physically consistent one, and linear least squares fixes the 3D position.
A four-LED visual-only baseline and a Monte Carlo simulation harness with a
CLI round out the package.
"""

from .baseline import estimate_position_pnp, pnp_position
from .channel import (
    LedSource,
    NoiseParams,
    PdParams,
    channel_gain,
    concentrator_gain,
    lambertian_order,
    received_power,
    rss_constant,
    sample_measured_power,
    snr_db,
)
from .config import ScenarioConfig, TiltPolicy, load_scenario, scenario_from_dict, table1_scenario
from .errors import (
    BaselineFailureError,
    ConfigError,
    DegenerateGeometryError,
    DisambiguationError,
    EstimationError,
    InconsistentDistanceError,
    InvalidBearingError,
    InvalidIncidenceError,
    InvalidParameterError,
    InvalidProblemError,
    NoCandidateError,
    PointBehindCameraError,
    PositioningError,
    SingularGeometryError,
)
from .estimator import (
    CandidateEvaluation,
    KnownLed,
    LedObservation,
    MeasurementFrame,
    PositionEstimate,
    estimate_position,
    filter_candidates,
    irradiance_cosines,
    lls_xy,
    z_from_distance,
)
from .geometry import (
    CameraIntrinsics,
    RigidPose,
    back_project_bearing,
    incidence_angle,
    inter_bearing_angle,
    look_at_rotation,
    project_world_to_pixel,
)
from .p3p import (
    DistanceCandidate,
    DistanceCandidateSet,
    NormalizedP3P,
    P3PProblem,
    law_of_cosines_residual,
    normalize,
    solve_candidates,
    solve_problem,
)
from .report import MetricsReport, TrialResult, export_report
from .simulate import (
    SweepCell,
    SynthesizedTrial,
    coverage_sweep,
    grid_points,
    min_enclosing_cone,
    run_campaign,
    run_trial,
    synthesize_trial,
    trial_rng,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineFailureError",
    "CameraIntrinsics",
    "CandidateEvaluation",
    "ConfigError",
    "DegenerateGeometryError",
    "DisambiguationError",
    "DistanceCandidate",
    "DistanceCandidateSet",
    "EstimationError",
    "InconsistentDistanceError",
    "InvalidBearingError",
    "InvalidIncidenceError",
    "InvalidParameterError",
    "InvalidProblemError",
    "KnownLed",
    "LedObservation",
    "LedSource",
    "MeasurementFrame",
    "MetricsReport",
    "NoCandidateError",
    "NoiseParams",
    "NormalizedP3P",
    "P3PProblem",
    "PdParams",
    "PointBehindCameraError",
    "PositionEstimate",
    "PositioningError",
    "RigidPose",
    "ScenarioConfig",
    "SingularGeometryError",
    "SweepCell",
    "SynthesizedTrial",
    "TiltPolicy",
    "TrialResult",
    "back_project_bearing",
    "channel_gain",
    "concentrator_gain",
    "coverage_sweep",
    "estimate_position",
    "estimate_position_pnp",
    "export_report",
    "filter_candidates",
    "grid_points",
    "incidence_angle",
    "inter_bearing_angle",
    "irradiance_cosines",
    "lambertian_order",
    "law_of_cosines_residual",
    "lls_xy",
    "load_scenario",
    "look_at_rotation",
    "min_enclosing_cone",
    "normalize",
    "pnp_position",
    "project_world_to_pixel",
    "received_power",
    "rss_constant",
    "run_campaign",
    "run_trial",
    "sample_measured_power",
    "scenario_from_dict",
    "snr_db",
    "solve_candidates",
    "solve_problem",
    "synthesize_trial",
    "table1_scenario",
    "trial_rng",
    "z_from_distance",
]
