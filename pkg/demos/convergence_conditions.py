"""
Where do the convergence conditions hold?
=========================================

For i.i.d. models two checks matter: a sign condition on the normalized
drift near the truth (B1) and a bound on the normalized second moment (B2).
The drift's Jacobian at zero decides whether the root-t rate is available.
"""

import numpy as np

from recest import get_model
from recest.diagnostics import GridSpec, check_B1, check_B2, estimate_B_matrix

cauchy = get_model("cauchy")

# B1 holds exactly on u^2 <= 4; a grid out to 3 shows the boundary
rep = check_B1(cauchy, np.eye(1), GridSpec.symmetric(3.0, 25))
print("B1 holds on the whole grid:", rep.holds)
print("largest symmetric region:", rep.region["holds_for_abs_u_le"])
for u, lhs, rhs, ok in zip(rep.witnesses["u"], rep.witnesses["lhs"], rep.witnesses["rhs"], rep.verdicts):
    if u >= 0:
        print(f"  u={u:4.2f}  lhs={lhs: .4f}  rhs={rhs: .4f}  {'ok' if ok else 'violated'}")

b2 = check_B2(cauchy, GridSpec.symmetric(1.0, 21))
print(f"B2 sup {b2.witnesses['sup']:.4f} at u={b2.witnesses['argsup']}")

B, stab = estimate_B_matrix(cauchy)
print(f"B = {B[0, 0]:.6f}; B + 1/2 stable: {stab.stable} ({stab.method})")

# JSON reports for scripts:
print(rep.to_json()[:120], "...")
