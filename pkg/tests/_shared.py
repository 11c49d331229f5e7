"""Expensive ensembles shared by the unit tests and the acceptance suite."""

from functools import lru_cache

from recest import get_model
from recest.harness import MonteCarloConfig, run_monte_carlo

# fixed before any pilot run; never tuned
MASTER_SEED = 20261016
RATE_CHECKPOINTS = (100, 316, 1000, 3162, 10_000)


@lru_cache(maxsize=None)
def cauchy_ensemble():
    cfg = MonteCarloConfig(500, 10_000, RATE_CHECKPOINTS, MASTER_SEED, (1.0,), (0.0,), 0.4, "t")
    return run_monte_carlo(get_model("cauchy"), cfg)


@lru_cache(maxsize=None)
def ar1_ensemble():
    # a_t = I_t, the normalizer of the AR(1) rate statement
    cfg = MonteCarloConfig(500, 10_000, RATE_CHECKPOINTS, MASTER_SEED, (0.5,), (0.0,), 0.4, "model")
    return run_monte_carlo(get_model("ar1"), cfg)


@lru_cache(maxsize=None)
def explosive_ensemble():
    cfg = MonteCarloConfig(100, 200, (150, 200), MASTER_SEED, (1.2,), (0.0,), 0.4, "model")
    return run_monte_carlo(get_model("ar1"), cfg)
