"""
Reproducible Monte Carlo ensembles
==================================

Replication ``r`` draws from its own SplitMix64 stream seeded with
``derive_seed(master, r)``, so results do not depend on how replications are
spread over worker processes.
"""

import numpy as np

from recest import SplitMix64, derive_seed, get_model
from recest.harness import MonteCarloConfig, run_monte_carlo

print("seeds of replications 0..2:", [derive_seed(2026, r) for r in range(3)])
g = SplitMix64(1234567)
print("reference stream:", [g.next_uint64() for _ in range(3)])

cfg = MonteCarloConfig(reps=32, t_max=1000, checkpoints=(100, 500, 1000), master_seed=2026,
                       theta_true=(1.0,), theta0=(0.0,))
serial = run_monte_carlo(get_model("cauchy"), cfg, workers=1)
pooled = run_monte_carlo(get_model("cauchy"), cfg, workers=4)
print("identical across worker counts:", np.array_equal(serial.theta_hat, pooled.theta_hat))
print(serial.to_csv().splitlines()[:4])

# From the shell (RECEST_WORKERS sets the default worker count):
#   recest rate --model cauchy --reps 200 --t-max 10000 --threads 4 -o cauchy_rate.json
