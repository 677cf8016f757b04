"""Online particle smoothing of additive functionals with adaptive backward sampling."""
from .functional import FUNCTIONALS, AdditiveFunctional, StateSumFunctional, SvTripleFunctional, evaluate_path
from .model import (
    LinearGaussianHmm,
    ObservationsExhausted,
    PathModel,
    SimulatedTrajectory,
    StochasticVolatilityModel,
    read_observations,
    write_observations,
)
from .oracle import dense_joint_oracle, kalman_filter, rts_smoother, smoothed_additive_expectation
from .sampling import AllWeightsZero, backward_probabilities, ess, log_normalize
from .schedule_analysis import SelectionSchedule, periodic_limit, periodic_schedule, schedule_factor
from .smoother import BackwardSchedule, RunRecord, SmootherConfig, Variant, run_smoother

__all__ = [
    "AdditiveFunctional", "AllWeightsZero", "BackwardSchedule", "FUNCTIONALS", "LinearGaussianHmm",
    "ObservationsExhausted", "PathModel", "RunRecord", "SelectionSchedule", "SimulatedTrajectory",
    "SmootherConfig", "StateSumFunctional", "StochasticVolatilityModel", "SvTripleFunctional", "Variant",
    "backward_probabilities", "dense_joint_oracle", "ess", "evaluate_path", "kalman_filter", "log_normalize",
    "periodic_limit", "periodic_schedule", "read_observations", "rts_smoother", "run_smoother",
    "schedule_factor", "smoothed_additive_expectation", "write_observations",
]
