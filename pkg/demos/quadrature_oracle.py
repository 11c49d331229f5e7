"""
Closed forms against quadrature
===============================

The drift ``b(u)`` and the second moment of the Cauchy score are integrals
over the whole line.  After ``x = tan v`` they become integrals over a finite
interval, handled by adaptive Simpson.
"""

import numpy as np

from recest.diagnostics import quadrature
from recest.models import cauchy_b, cauchy_density, cauchy_psi, cauchy_second_moment

print("density mass:", quadrature(lambda x: cauchy_density(0.0, x)))

print(f"{'u':>6} {'b closed':>12} {'b quad':>12} {'m2 closed':>12} {'m2 quad':>12}")
for u in np.linspace(-4, 4, 9):
    qb = quadrature(lambda x: cauchy_psi(u, x) * cauchy_density(0.0, x))
    qm = quadrature(lambda x: cauchy_psi(u, x) ** 2 * cauchy_density(0.0, x))
    print(f"{u:6.1f} {cauchy_b(u):12.8f} {qb:12.8f} {cauchy_second_moment(u):12.8f} {qm:12.8f}")

# The same comparison is available from the command line:
#   recest oracle --model cauchy --quantity m2 --u 1
