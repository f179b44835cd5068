"""Streaming multiple-output regression with dynamically learned metric
structure, plus online baselines, synthetic stream generators and a
prequential evaluation harness."""

from .baselines import PaLearner, SomorLearner
from .core import HyperParams, MoresLearner, RegressionState
from .suffstats import Sample, SufficientStats

__all__ = [
    "HyperParams",
    "MoresLearner",
    "RegressionState",
    "Sample",
    "SufficientStats",
    "SomorLearner",
    "PaLearner",
]

__version__ = "0.1.0"
