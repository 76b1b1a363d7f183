"""Distribution-free goodness-of-fit testing for parametric point-process
intensity models, via a unitary reflection-chain transform of the compensated
path and a Monte-Carlo-calibrated target null."""

from .families import (
    Family,
    ModelSpec,
    aalen_gompertz,
    aalen_weibull,
    aalen_weibull_censored,
    jelinski_moranda,
    littlewood,
    mixture_cure,
    poisson_legendre,
)
from .gof import StatTriple, TestReport, compensated_process, run_test, statistics, transform
from .mle import FitResult, fit, fit_target, loglik
from .nulldist import NullTable, calibrate, get_or_calibrate
from .simulate import ObservedPath, PiecewiseHazard, simulate_path, simulate_piecewise

__version__ = "0.1.0"

__all__ = [
    "Family",
    "ModelSpec",
    "ObservedPath",
    "PiecewiseHazard",
    "FitResult",
    "NullTable",
    "StatTriple",
    "TestReport",
    "aalen_weibull",
    "aalen_gompertz",
    "aalen_weibull_censored",
    "mixture_cure",
    "jelinski_moranda",
    "littlewood",
    "poisson_legendre",
    "simulate_path",
    "simulate_piecewise",
    "fit",
    "fit_target",
    "loglik",
    "compensated_process",
    "transform",
    "statistics",
    "run_test",
    "calibrate",
    "get_or_calibrate",
    "__version__",
]
