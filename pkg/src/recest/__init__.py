"""Recursive estimation of parameters in general statistical models.

The recursion ``theta_t = theta_{t-1} + Gamma_t^{-1} psi_t`` is driven by
:mod:`recest.core`; model families live in :mod:`recest.models`, numerical
hypothesis checks in :mod:`recest.diagnostics` and Monte Carlo rate
experiments in :mod:`recest.harness`.
"""

from recest.core import (
    EstimatingScheme,
    EstimatorState,
    History,
    IllConditionedWarning,
    MissingDrift,
    NonFiniteUpdate,
    Singular,
    StepRecord,
    initial_state,
    invert,
    iterate,
    run_trajectory,
    step,
)
from recest.models import (
    AdditiveExpFamily,
    AdditiveScheme,
    CauchyLocation,
    IIDScheme,
    UnknownModel,
    gaussian_ar1,
    get_model,
    iid_scheme,
    model_names,
    register_model,
)
from recest.rng import SplitMix64, derive_seed

__version__ = "0.1.0"

__all__ = [
    "AdditiveExpFamily",
    "AdditiveScheme",
    "CauchyLocation",
    "EstimatingScheme",
    "EstimatorState",
    "History",
    "IIDScheme",
    "IllConditionedWarning",
    "MissingDrift",
    "NonFiniteUpdate",
    "Singular",
    "SplitMix64",
    "StepRecord",
    "UnknownModel",
    "derive_seed",
    "gaussian_ar1",
    "get_model",
    "iid_scheme",
    "initial_state",
    "invert",
    "iterate",
    "model_names",
    "register_model",
    "run_trajectory",
    "step",
]
