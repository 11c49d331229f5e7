"""Finite-horizon monitors for almost-supermartingale convergence and for
the two series ``sum Delta d_n / d_n`` and ``sum Delta d_n / d_n^(1+eps)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from recest.diagnostics.reports import plateaus

__all__ = ["SupermartingaleReport", "prop_A2_bound", "prop_A2_sums", "robbins_siegmund_monitor"]


@dataclass
class SupermartingaleReport:
    beta_sums: np.ndarray
    xi_sums: np.ndarray
    zeta_sums: np.ndarray
    premise_holds: bool      # sum beta and sum xi plateau
    x_converges: bool        # last-quartile range of X small against its running max
    zeta_plateaus: bool
    x_tail_range: float
    x_running_max: float

    @property
    def conclusion_holds(self) -> bool:
        return self.x_converges and self.zeta_plateaus


def robbins_siegmund_monitor(X, beta, xi, zeta, plateau_tol=0.01, x_rel_tol=0.1) -> SupermartingaleReport:
    """Empirical check of premise and conclusion of the Robbins-Siegmund lemma.

    The premise (summable ``beta`` and ``xi``) and the summability of
    ``zeta`` are judged by :func:`~recest.diagnostics.reports.plateaus`;
    convergence of ``X`` by its last-quartile range being at most
    ``x_rel_tol`` times its running maximum.
    """
    arrs = [np.asarray(v, dtype=np.float64) for v in (X, beta, xi, zeta)]
    if len({a.shape for a in arrs}) != 1:
        raise ValueError("series must have equal lengths")
    if any(np.any(a < 0) for a in arrs):
        raise ValueError("series must be non-negative")
    X, beta, xi, zeta = arrs
    bs, xs, zs = np.cumsum(beta), np.cumsum(xi), np.cumsum(zeta)
    tail = X[(3 * X.size) // 4:] if X.size else X
    rng = float(np.ptp(tail)) if tail.size else 0.0
    top = float(X.max()) if X.size else 0.0
    return SupermartingaleReport(
        beta_sums=bs, xi_sums=xs, zeta_sums=zs,
        premise_holds=plateaus(bs, plateau_tol) and plateaus(xs, plateau_tol),
        x_converges=rng <= x_rel_tol * top,
        zeta_plateaus=plateaus(zs, plateau_tol),
        x_tail_range=rng, x_running_max=top,
    )


def prop_A2_sums(d, epsilon):
    """Partial sums of ``Delta d_n / d_n`` and ``Delta d_n / d_n^(1 + epsilon)`` for ``n = 1..N``.

    ``d`` holds ``d_0..d_N``, positive and non-decreasing.  The second sum
    never exceeds :func:`prop_A2_bound` ``(d_0, epsilon)``.
    """
    d = np.asarray(d, dtype=np.float64)
    if d.size == 0 or d[0] <= 0:
        raise ValueError("d_0 must be positive")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    dd = np.diff(d)
    if np.any(dd < 0):
        raise ValueError("d must be non-decreasing")
    tail = d[1:]
    return np.cumsum(dd / tail), np.cumsum(dd / tail ** (1.0 + epsilon))


def prop_A2_bound(d0, epsilon):
    return 1.0 / (epsilon * d0**epsilon)
