"""
Tracking the almost-supermartingale along a trajectory
======================================================

Convergence proofs for the recursion follow ``V_t = a_t^(2 delta) Delta_t^2``
and its expected one-step change ``K_t``.  If the positive parts of ``K_t``
are summable then ``V_t`` converges.  On a finite horizon "summable" becomes
"the partial sums plateau".
"""

import numpy as np

from recest import get_model, run_trajectory
from recest.diagnostics import (
    k_trace,
    plateaus,
    prop_A2_bound,
    prop_A2_sums,
    robbins_siegmund_monitor,
    script_n_trace,
)

cauchy = get_model("cauchy")
recs = run_trajectory(cauchy, 1.0, 0.0, 1000, seed=0)
for delta in (0.0, 0.4):
    kt = k_trace(cauchy, recs, 1.0, 0.0, C=1.0, delta=delta)
    rs = robbins_siegmund_monitor(kt.V, np.zeros(len(kt.t)), kt.premise_terms, kt.zeta)
    s = kt.premise_partial_sum
    print(f"delta={delta}: premise total {s[-1]:.4f}, last-quartile share "
          f"{(s[-1] - s[749]) / s[-1]:.2%}, premise plateaus {rs.premise_holds}, "
          f"V tail range / max {rs.x_tail_range / rs.x_running_max:.3f}")

# %%
# For additive families the statistic N_t gives a check that does not need
# the rate weights.  G3 sums should plateau while G2 sums keep growing.
ar1 = get_model("ar1")
recs = run_trajectory(ar1, 0.5, 0.0, 3000, seed=0)
nt = script_n_trace(ar1, recs, 0.5, 0.0, epsilon=0.1)
print("G3 plateaus:", plateaus(nt.g3_partial_sum), " G2 plateaus:", plateaus(nt.g2_partial_sum))

# %%
# The series behind the rate argument: sum of Delta d / d diverges while
# sum of Delta d / d^(1+eps) stays below 1 / (eps d_0^eps)
d = np.arange(1, 100_002, dtype=float)
s1, s2 = prop_A2_sums(d, 1.0)
print(f"sum1 {s1[-1]:.3f}  sum2 {s2[-1]:.6f}  bound {prop_A2_bound(1.0, 1.0)}  pi^2/6-1 {np.pi**2 / 6 - 1:.6f}")
