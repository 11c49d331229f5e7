"""
Recursive location estimation for Cauchy data
=============================================

The Cauchy location model has no mean, yet the likelihood recursion

    theta_t = theta_{t-1} + (2 / t) * psi(theta_{t-1}, X_t)

with ``psi(theta, x) = 2 (x - theta) / (1 + (x - theta)^2)`` settles on the
true location.  This script follows one trajectory and then a small
ensemble.
"""

import numpy as np

from recest import get_model, run_trajectory
from recest.harness import MonteCarloConfig, estimate_rate, run_monte_carlo

scheme = get_model("cauchy")

# one path from theta_0 = 0 towards theta = 1
records = run_trajectory(scheme, theta_true=1.0, theta0=0.0, t_max=5000, seed=42)
for t in (1, 10, 100, 1000, 5000):
    r = records[t - 1]
    print(f"t={t:5d}  x={r.x: .3f}  theta_hat={r.theta_hat[0]: .5f}  Gamma={r.gamma[0, 0]:.1f}")

# the score is bounded, so single outliers barely move the estimate
big = max(records, key=lambda r: abs(r.x))
print(f"largest |x| = {abs(big.x):.1f} at t={big.t}, increment {big.increment[0]: .2e}")

# %%
# Error across replications.  Medians, because early errors are heavy tailed.
cfg = MonteCarloConfig(reps=100, t_max=2000, checkpoints=(100, 300, 1000, 2000),
                       master_seed=1, theta_true=(1.0,), theta0=(0.0,), delta=0.4)
report = estimate_rate(run_monte_carlo(scheme, cfg))
for t, med, sc in zip(report.checkpoints, report.median_abs, report.scaled_medians):
    print(f"t={t:5d}  median|err|={med:.4f}  t^0.4*median={sc:.4f}")
print(f"log-log slope {report.slope:.3f} (root-t rate gives -0.5)")
