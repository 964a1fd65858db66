"""attractor_scout: continuous-time echo state networks that infer unseen
attractors of the 4-D Li-Sprott system from a single noisy trajectory."""

from .autonomous import DIVERGENCE_GUARD, InferenceRun, predict_next, \
    run_autonomous
from .errors import AttractorScoutError, BasinEscapeError, \
    DegenerateSpectrumError, EmptySeriesError, LengthMismatchError, \
    NonFiniteError, SingularSystemError, ZeroNormalizerError
from .esn import EchoStateNetwork
from .experiment import ExperimentConfig, Histogram, RunRecord, histogram, \
    run_ensemble, run_single, scenario_config, write_report
from .io import load_model, load_weights, read_trajectory, save_model, \
    save_weights, write_trajectory
from .lisprott import SCENARIOS, AttractorSite, LiSprottParams, \
    SampledTrajectory, ScenarioSpec, drift, integrate_em, make_reference, \
    make_training_series
from .metrics import AttractorError, AttractorStats, RunOutcome, \
    attractor_error, classify, stats, total_error
from .reservoir import ReservoirConfig, ReservoirState, ReservoirWeights, \
    build_reservoir, drive, largest_real_eigenpart, relax, rk4_step
from .training import RidgeConfig, TrainedModel, assemble_state_matrix, \
    ridge_solve, train

__version__ = "0.1.0"

__all__ = [
    "AttractorError", "AttractorScoutError", "AttractorSite",
    "AttractorStats", "BasinEscapeError", "DIVERGENCE_GUARD",
    "DegenerateSpectrumError", "EchoStateNetwork", "EmptySeriesError",
    "ExperimentConfig", "Histogram", "InferenceRun", "LengthMismatchError",
    "LiSprottParams", "NonFiniteError", "ReservoirConfig", "ReservoirState",
    "ReservoirWeights", "RidgeConfig", "RunOutcome", "RunRecord",
    "SCENARIOS", "SampledTrajectory", "ScenarioSpec", "SingularSystemError",
    "TrainedModel", "ZeroNormalizerError", "assemble_state_matrix",
    "attractor_error", "build_reservoir", "classify", "drift", "drive",
    "histogram", "integrate_em", "largest_real_eigenpart", "load_model",
    "load_weights", "make_reference", "make_training_series", "predict_next",
    "read_trajectory", "relax", "ridge_solve", "rk4_step", "run_autonomous",
    "run_ensemble", "run_single", "save_model", "save_weights",
    "scenario_config", "stats", "total_error", "train", "write_report",
    "write_trajectory",
]
