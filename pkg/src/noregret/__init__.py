"""No-regret learning through score averaging and regularized choice maps."""
from ._backend import BACKEND
from .errors import (ConfigError, ConvergenceError, DomainError, InvalidInputError,
                     NoRegretError, ScheduleError, UnsupportedError)
from .geometry import (ConvexBody, Regularizer, bregman_conjugate, choice_map, conjugate_value,
                       entropy, euclidean, generic, min_enclosing_ball, minimal_depth_regularizer,
                       project_simplex)
from .schedules import ParameterSchedule
from .strategies import NAMES, init, make_named, play_sequence, step
from .environments import LossOracle, NoisyOracle, PayoffStream, SplitMix64
from .regret import RegretLedger, max_regret

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConfigError", "ConvergenceError", "DomainError", "InvalidInputError",
    "NoRegretError", "ScheduleError", "UnsupportedError", "ConvexBody", "Regularizer",
    "bregman_conjugate", "choice_map", "conjugate_value", "entropy", "euclidean", "generic",
    "min_enclosing_ball", "minimal_depth_regularizer", "project_simplex", "ParameterSchedule",
    "NAMES", "init", "make_named", "play_sequence", "step", "LossOracle", "NoisyOracle",
    "PayoffStream", "SplitMix64", "RegretLedger", "max_regret",
]
