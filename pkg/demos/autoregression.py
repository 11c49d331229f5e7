"""
Gaussian AR(1): recursion, least squares and Fisher information
===============================================================

``X_t = theta X_{t-1} + Z_t`` is an additive exponential family with
``h(x) = x^2``.  The likelihood recursion uses ``Gamma_t = I_t``, the sum of
``X_{s-1}^2``.  The first step is skipped because ``I_1 = X_0^2 = 0``.
"""

import numpy as np

from recest import get_model, run_trajectory
from recest.harness import (
    MonteCarloConfig,
    ar1_batch_ols,
    ergodic_ratio_series,
    log_info_ratio,
    ols_discrepancy,
    run_monte_carlo,
)
from recest.models import fisher_rate_kappa

ar1 = get_model("ar1")
recs = run_trajectory(ar1, theta_true=0.5, theta0=0.0, t_max=1000, seed=3)
print("first step skipped:", recs[0].skipped)

# after the first informative step the recursion reproduces least squares
ols = ar1_batch_ols([r.x for r in recs])
print("theta_hat vs OLS at t=1000:", recs[-1].theta_hat[0], ols[-1])
print(ols_discrepancy(recs))

# %%
# Fisher information grows like t / (1 - theta^2) in the stationary case
cfg = MonteCarloConfig(reps=40, t_max=5000, checkpoints=(500, 2000, 5000), master_seed=2,
                       theta_true=(0.5,), theta0=(0.0,))
ens = run_monte_carlo(ar1, cfg)
print("median I_t / t:", ergodic_ratio_series(ens, 0.5), "limit", 1 / (1 - 0.25))

# and geometrically when |theta| > 1; the ratio is taken in log space
cfg = MonteCarloConfig(reps=40, t_max=200, checkpoints=(50, 100, 150, 200), master_seed=2,
                       theta_true=(1.2,), theta0=(0.0,))
lr = log_info_ratio(run_monte_carlo(ar1, cfg), 1.2)
print("I_t / kappa_t for three paths:\n", np.exp(lr[:3]).round(4))
print("kappa regimes:", fisher_rate_kappa(0.5, 3), fisher_rate_kappa(1.0, 4), fisher_rate_kappa(2.0, 3))
