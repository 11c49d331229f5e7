"""Per-step statistics of a recorded trajectory.

``k_trace`` follows the expected one-step change of the weighted squared
error ``V_t(u) = a_t^(2 delta) (C u, u)``; ``script_n_trace`` follows the
statistic built from ``V(u) = u^2`` for additive families.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from recest.core import History, Singular, as_param, invert
from recest.diagnostics.conditions import conditional_moments

__all__ = ["KTrace", "NTrace", "k_trace", "script_N", "script_n_trace"]


@dataclass
class KTrace:
    t: np.ndarray
    V_prev: np.ndarray      # V_{t-1}(Delta_{t-1})
    dV: np.ndarray          # V_t(Delta_{t-1}) - V_{t-1}(Delta_{t-1})
    drift: np.ndarray
    moment: np.ndarray
    K: np.ndarray
    premise_terms: np.ndarray
    premise_partial_sum: np.ndarray
    V: np.ndarray           # V_t(Delta_t)
    zeta: np.ndarray        # [K_t]^-

    COLUMNS = ("t", "V", "dV", "drift", "moment", "K", "premise_partial_sum")

    def rows(self):
        for i in range(len(self.t)):
            yield (int(self.t[i]), self.V[i], self.dV[i], self.drift[i], self.moment[i],
                   self.K[i], self.premise_partial_sum[i])


def _a_series(scheme, records, a_series):
    if a_series is not None:
        a = np.asarray(a_series, dtype=np.float64)
        if a.shape[0] == len(records):
            a = np.concatenate([[0.0], a])
        return a
    return np.array([0.0] + [scheme.rate_normalizer(r.t, r.acc) for r in records])


def k_trace(scheme, records, theta_true, theta0, C=1.0, delta=0.4, a_series=None) -> KTrace:
    """Robbins-Siegmund quantities along a trajectory.

    With ``C_t = C a_t^(2 delta)`` and ``Delta_t = theta_t - theta``::

        K_t = Delta V_t(Delta_{t-1})
              + 2 (C_t Delta_{t-1}, Gamma_t^{-1} b_t(theta, Delta_{t-1}))
              + E[(Gamma_t^{-1} psi_t)^T C_t Gamma_t^{-1} psi_t | F_{t-1}]

    where ``Gamma_t`` and ``psi_t`` are evaluated at ``theta + Delta_{t-1}``.
    Conditional moments come from closed forms, never from simulation.
    Skipped (singular) steps contribute no drift or moment.  ``a_series``
    defaults to the scheme's rate normalizer with ``a_0 = 0``.
    """
    if not 0 <= delta < 0.5:
        raise ValueError("delta must lie in [0, 1/2)")
    theta = as_param(theta_true)
    C = np.atleast_2d(np.asarray(C, dtype=np.float64))
    a = _a_series(scheme, records, a_series)
    w = a ** (2.0 * delta)
    n = len(records)
    cols = {k: np.zeros(n) for k in ("V_prev", "dV", "drift", "moment", "K", "V")}
    hist = History(scheme.x0)
    prev = as_param(theta0)
    for i, rec in enumerate(records):
        d = prev - theta
        cdd = float(d @ C @ d)
        Ct = w[i + 1] * C
        cols["V_prev"][i] = w[i] * cdd
        cols["dV"][i] = (w[i + 1] - w[i]) * cdd
        if not rec.skipped:
            try:
                g = invert(rec.gamma)
            except Singular:
                g = None
            if g is not None:
                b, M, _ = conditional_moments(scheme, theta, d, hist)
                cols["drift"][i] = 2.0 * float((Ct @ d) @ (g @ b))
                cols["moment"][i] = float(np.trace(g.T @ Ct @ g @ M))
        cols["K"][i] = cols["dV"][i] + cols["drift"][i] + cols["moment"][i]
        dn = rec.theta_hat - theta
        cols["V"][i] = w[i + 1] * float(dn @ C @ dn)
        hist.append(rec.x)
        prev = rec.theta_hat
    K = cols["K"]
    terms = np.maximum(K, 0.0) / (1.0 + cols["V_prev"])
    return KTrace(t=np.array([r.t for r in records], dtype=np.int64), premise_terms=terms,
                  premise_partial_sum=np.cumsum(terms), zeta=np.maximum(-K, 0.0), **cols)


def script_N(fam, theta, u, h_prev, H_t):
    """Lyapunov drift statistic for an additive family with ``V(u) = u^2``.

    Written as ``2 r d u / g + r^2 d^2 / g^2 + (h / H_t^2) gddot(theta) / g^2``
    with ``r = h / H_t``, ``d = gdot(theta) - gdot(theta + u)`` and
    ``g = gddot(theta + u)``, which is the defining expression with the
    ``0/0 = 0`` convention at ``u = 0`` built in.
    """
    if H_t <= 0:
        raise ValueError("H_t must be positive")
    r = h_prev / H_t
    d = fam.gdot(theta) - fam.gdot(theta + u)
    g = fam.gddot(theta + u)
    n1 = 2.0 * r * d * u / g + (r * d / g) ** 2
    n2 = h_prev / H_t**2 * fam.gddot(theta) / g**2
    return n1 + n2


@dataclass
class NTrace:
    t: np.ndarray
    N: np.ndarray               # N_t(Delta_{t-1})
    g3_partial_sum: np.ndarray  # sum (1 + Delta^2)^-1 [N_t(Delta_{t-1})]^+
    g2_partial_sum: np.ndarray  # sum inf_{eps <= |u| <= 1/eps} [N_t(u)]^-
    epsilon: float


def script_n_trace(scheme, records, theta_true, theta0, epsilon=0.1, n_u=41) -> NTrace:
    """Statistic ``N_t`` along a trajectory of an additive scheme.

    Steps with ``H_t = 0`` contribute zero.  The infimum over the annulus
    ``epsilon <= |u| <= 1/epsilon`` is taken over ``n_u`` points per sign,
    endpoints included.
    """
    fam = scheme.fam
    theta = float(as_param(theta_true)[0])
    ring = np.linspace(epsilon, 1.0 / epsilon, n_u)
    ring = np.concatenate([-ring[::-1], ring])
    n = len(records)
    N = np.zeros(n)
    g3 = np.zeros(n)
    g2 = np.zeros(n)
    prev_x = scheme.x0
    prev = float(as_param(theta0)[0])
    for i, rec in enumerate(records):
        H = float(rec.acc)
        if H > 0:
            hv = fam.h(prev_x)
            d = prev - theta
            N[i] = script_N(fam, theta, d, hv, H)
            g3[i] = max(N[i], 0.0) / (1.0 + d * d)
            g2[i] = min(max(-script_N(fam, theta, v, hv, H), 0.0) for v in ring)
        prev_x = rec.x
        prev = float(rec.theta_hat[0])
    return NTrace(np.array([r.t for r in records], dtype=np.int64), N, np.cumsum(g3),
                  np.cumsum(g2), epsilon)


def ktrace_csv(trace: KTrace, ntrace: NTrace | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = list(KTrace.COLUMNS) + (["scriptN"] if ntrace is not None else [])
    w.writerow(header)
    for i, row in enumerate(trace.rows()):
        vals = [row[0]] + [format(float(v), ".17g") for v in row[1:]]
        if ntrace is not None:
            vals.append(format(float(ntrace.N[i]), ".17g"))
        w.writerow(vals)
    return buf.getvalue()
