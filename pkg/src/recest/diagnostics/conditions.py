"""Grid and trajectory checks of the convergence-rate hypotheses.

Inequalities are tested with a relative slack of ``1e-12`` so that exact
equalities at region boundaries survive rounding.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from recest.core import History, MissingDrift, Singular, as_param, invert
from recest.diagnostics.quadrature import quadrature
from recest.diagnostics.reports import ConditionReport, GridSpec, plateaus

__all__ = [
    "Stability",
    "additive_lambda",
    "check_B1",
    "check_B2",
    "check_M_conditions",
    "check_R_conditions",
    "conditional_moments",
    "drift_function",
    "estimate_B_matrix",
    "neg_term",
    "r_condition_inputs",
]

SLACK = 1e-12


def _leq(lhs, rhs):
    lhs = np.asarray(lhs, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    return lhs <= rhs + SLACK * np.maximum(np.abs(lhs), np.abs(rhs))


def _unit_gamma(scheme, theta):
    """``gamma(theta)`` of an i.i.d. scheme, i.e. its normalizer at ``t = 1``."""
    return np.asarray(scheme.gamma(1, as_param(theta), History(scheme.x0), 1.0), dtype=np.float64)


def conditional_moments(scheme, theta, u, history=None, tol=1e-10):
    """Drift ``b(theta, u)`` and second-moment matrix of ``psi(theta + u)``.

    Uses the scheme's closed forms; scalar i.i.d. schemes exposing a
    ``density`` fall back to quadrature.

    Returns
    -------
    b, M, source
        ``source`` is ``"closed-form"`` or ``"quadrature"``.
    """
    theta = as_param(theta)
    u = as_param(u)
    if history is None:
        history = History(scheme.x0)
    if scheme.has_drift:
        b = scheme.drift(1, theta, u, history)
        m = scheme.psi_second_moment(1, theta, u, history)
        return np.asarray(b).reshape(-1), np.atleast_2d(m), "closed-form"
    density = getattr(scheme, "density", None)
    if density is None or scheme.dim != 1:
        raise MissingDrift(f"{getattr(scheme, 'name', scheme)!r}: no closed-form drift and no density")
    th = float(theta[0])
    shifted = theta + u

    def psi(x):
        return float(np.asarray(scheme.psi(1, shifted, x, history)).reshape(-1)[0])

    b = quadrature(lambda x: psi(x) * density(th, x), tol)
    m2 = quadrature(lambda x: psi(x) ** 2 * density(th, x), tol)
    return np.array([b]), np.array([[m2]]), "quadrature"


def _grid_offsets(dim, grid, directions):
    s = grid.points()
    if directions is None:
        directions = np.eye(dim)
    directions = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    return s, directions


def _symmetric_region(s_all, ok):
    """Largest ``r`` with every grid offset ``|s| <= r`` satisfying the check."""
    a = np.abs(s_all)
    if ok.all():
        return float(a.max())
    first_bad = a[~ok].min()
    good = a[ok & (a < first_bad)]
    return float(good.max()) if good.size else 0.0


def check_B1(scheme, C, grid: GridSpec, theta=0.0, directions=None) -> ConditionReport:
    """Check ``(C u, gamma^{-1}(theta+u) b(theta, u)) <= -(C u, u) / 2`` on a grid.

    For ``m > 1`` the offsets are ``s * d`` for each row ``d`` of
    ``directions`` (coordinate axes by default).  The report's region is the
    largest symmetric interval of ``|s|`` around zero on which the
    inequality holds everywhere.
    """
    theta = as_param(theta)
    C = np.atleast_2d(np.asarray(C, dtype=np.float64))
    s, dirs = _grid_offsets(scheme.dim, grid, directions)
    lhs, rhs, s_all, sources = [], [], [], set()
    for d in dirs:
        for si in s:
            u = si * d
            b, _, src = conditional_moments(scheme, theta, u)
            sources.add(src)
            g = invert(_unit_gamma(scheme, theta + u))
            cu = C @ u
            lhs.append(float(cu @ (g @ b)))
            rhs.append(-0.5 * float(cu @ u))
            s_all.append(si)
    lhs, rhs, s_all = np.array(lhs), np.array(rhs), np.array(s_all)
    ok = _leq(lhs, rhs)
    notes = []
    if "quadrature" in sources:
        notes.append("drift evaluated by quadrature (no closed form)")
    return ConditionReport(
        condition="B1",
        region={"lo": grid.lo, "hi": grid.hi, "n_points": grid.n_points,
                "holds_for_abs_u_le": _symmetric_region(s_all, ok)},
        verdicts=ok,
        witnesses={"u": s_all, "lhs": lhs, "rhs": rhs},
        holds=bool(ok.all()),
        parameters={"C": C, "theta": theta, "drift_source": sorted(sources)},
        notes=notes,
    )


def check_B2(scheme, grid: GridSpec, theta=0.0, threshold=1e6, directions=None) -> ConditionReport:
    """Normalized second moment ``E||gamma^{-1}(theta+u) psi(theta+u)||^2`` on a grid.

    The verdict requires every value to be finite and the supremum to stay
    below ``threshold``.
    """
    theta = as_param(theta)
    s, dirs = _grid_offsets(scheme.dim, grid, directions)
    vals, s_all, sources = [], [], set()
    for d in dirs:
        for si in s:
            u = si * d
            _, m, src = conditional_moments(scheme, theta, u)
            sources.add(src)
            g = invert(_unit_gamma(scheme, theta + u))
            vals.append(float(np.trace(g @ m @ g.T)))
            s_all.append(si)
    vals, s_all = np.array(vals), np.array(s_all)
    ok = np.isfinite(vals) & (vals <= threshold)
    k = int(np.nanargmax(vals)) if np.isfinite(vals).any() else 0
    return ConditionReport(
        condition="B2",
        region={"lo": grid.lo, "hi": grid.hi, "n_points": grid.n_points},
        verdicts=ok,
        witnesses={"u": s_all, "normalized_moment": vals, "sup": float(np.nanmax(vals)),
                   "argsup": float(s_all[k])},
        holds=bool(ok.all()),
        parameters={"theta": theta, "threshold": threshold, "drift_source": sorted(sources)},
    )


def drift_function(scheme, theta=0.0):
    """``R(u) = gamma^{-1}(theta + u) b(theta, u)`` as a callable on offsets."""
    theta = as_param(theta)

    def R(u):
        u = as_param(u)
        b, _, _ = conditional_moments(scheme, theta, u)
        return invert(_unit_gamma(scheme, theta + u)) @ b

    return R


class Stability(NamedTuple):
    stable: bool
    method: str
    spectral_abscissa: float | None
    S: np.ndarray


def _stability(S):
    m = S.shape[0]
    if m == 1:
        a = float(S[0, 0])
        return Stability(a < 0, "exact", a, S)
    if m == 2:
        tr = S[0, 0] + S[1, 1]
        det = S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]
        disc = tr * tr - 4.0 * det
        a = 0.5 * tr if disc < 0 else 0.5 * (tr + math.sqrt(disc))
        return Stability(bool(a < 0), "exact", float(a), S)
    # Gershgorin: every disc strictly in the left half-plane
    radii = np.sum(np.abs(S), axis=1) - np.abs(np.diag(S))
    right = float(np.max(np.diag(S) + radii))
    return Stability(right < 0, "gershgorin (sufficient only)", None, S)


def estimate_B_matrix(scheme_or_R, fd_step=1e-5, theta=0.0, dim=None):
    """Central-difference Jacobian ``B`` of ``R(u)`` at ``u = 0`` and stability of ``B + I/2``.

    ``scheme_or_R`` is either a scheme (``R`` built by :func:`drift_function`)
    or a callable ``R(u)`` with ``dim`` given.
    """
    if fd_step <= 0:
        raise ValueError("fd_step must be positive")
    if callable(scheme_or_R) and not hasattr(scheme_or_R, "psi"):
        R = scheme_or_R
        m = 1 if dim is None else dim
    else:
        R = drift_function(scheme_or_R, theta)
        m = scheme_or_R.dim
    B = np.empty((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = fd_step
        B[:, j] = (as_param(R(e)) - as_param(R(-e))) / (2.0 * fd_step)
    return B, _stability(B + 0.5 * np.eye(m))


def check_M_conditions(fam, grid: GridSpec, observations=None, m1_threshold=0.01) -> ConditionReport:
    """Consistency conditions for an additive family.

    M1 uses the last quartile of ``h(X_{t-1}) / H_t`` along ``observations``
    (``X_1..X_T``, with ``fam.x0`` prepended).  M2 reports the infimum and
    supremum of ``gddot`` on the grid, M3 the smallest constant ``B`` with
    ``(1 + gdot^2) / gddot^2 <= B (1 + u^2)`` on the grid.  When ``gdot`` is
    linear (constant ``gddot`` on the grid) the M-conditions are not needed
    and are reported for information only.
    """
    u = grid.points()
    gdd = np.array([fam.gddot(v) for v in u])
    gd = np.array([fam.gdot(v) for v in u])
    linear = bool(np.ptp(gdd) <= 1e-12 * max(1.0, float(np.max(np.abs(gdd)))))

    m2_inf, m2_sup = float(gdd.min()), float(gdd.max())
    m2_ok = bool(m2_inf > 0 and math.isfinite(m2_sup))

    with np.errstate(divide="ignore", invalid="ignore"):
        m3_ratio = (1.0 + gd**2) / (gdd**2 * (1.0 + u**2))
    m3_B = float(np.max(m3_ratio))
    m3_ok = bool(math.isfinite(m3_B))

    witnesses = {"m2_inf": m2_inf, "m2_sup": m2_sup, "m3_B": m3_B, "linear_gdot": linear}
    if observations is not None and len(observations) > 0:
        xs = [fam.x0] + list(observations)
        hv = np.array([fam.h(x) for x in xs[:-1]])
        H = np.cumsum(hv)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(H > 0, hv / np.where(H > 0, H, 1.0), 0.0)
        tail = ratio[(3 * len(ratio)) // 4:]
        m1_tail = float(tail.max())
        m1_ok = m1_tail < m1_threshold
        witnesses["m1_tail_max"] = m1_tail
    else:
        m1_ok = None
    verdicts = np.array([bool(m1_ok) if m1_ok is not None else True, m2_ok, m3_ok])
    holds = linear or bool(verdicts.all() and m1_ok is not None)
    notes = []
    if linear:
        notes.append("gdot is linear: consistency holds without M1-M3; values are informational")
    if m1_ok is None:
        notes.append("M1 not evaluated (no trajectory)")
    return ConditionReport(
        condition="M",
        region={"lo": grid.lo, "hi": grid.hi, "n_points": grid.n_points},
        verdicts=verdicts,
        witnesses=witnesses,
        holds=holds,
        parameters={"m1_threshold": m1_threshold, "sub_conditions": ["M1", "M2", "M3"]},
        notes=notes,
    )


def additive_lambda(h_prev, H_t, eps_tilde=0.05):
    """``2(1 - e) h / H - (1 + e)^2 h^2 / H^2`` for additive families."""
    r = np.asarray(h_prev, dtype=np.float64) / np.asarray(H_t, dtype=np.float64)
    return 2.0 * (1.0 - eps_tilde) * r - (1.0 + eps_tilde) ** 2 * r * r


def neg_term(h_prev, H_t, eps_tilde=0.05):
    """``h/H - lambda``, which is negative once ``h/H`` is small."""
    r = np.asarray(h_prev, dtype=np.float64) / np.asarray(H_t, dtype=np.float64)
    return r * (-1.0 + 2.0 * eps_tilde + (1.0 + eps_tilde) ** 2 * r)


def _pos(x):
    return np.maximum(x, 0.0)


def check_R_conditions(a_series, lambda_series, P_series, moment_series, epsilon=0.5,
                       a0=0.0, r1_threshold=0.01, plateau_tol=0.01) -> ConditionReport:
    """Rate conditions along one trajectory.

    All series are indexed by ``t = 1..T``.  ``moment_series`` holds
    ``E||Gamma_t^{-1} psi_t||^2`` at the current offset and ``P_series`` the
    predictable part subtracted from it.

    R1 reports the last-quartile maximum of ``Delta a_t / a_{t-1}``; R2 and R3
    report partial sums of ``[Delta a_t / a_t - lambda_t]^+`` and
    ``a_t^eps [moment_t - P_t]^+`` and whether they plateau.  Ratios with a
    zero denominator count as zero.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    a = np.asarray(a_series, dtype=np.float64)
    if np.any(a < 0) or np.any(np.diff(np.concatenate([[a0], a])) < 0):
        raise ValueError("a_series must be non-negative and non-decreasing")
    lam = np.asarray(lambda_series, dtype=np.float64)
    P = np.asarray(P_series, dtype=np.float64)
    mom = np.asarray(moment_series, dtype=np.float64)
    prev = np.concatenate([[a0], a[:-1]])
    da = a - prev
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(prev > 0, da / np.where(prev > 0, prev, 1.0), 0.0)
        r1[prev == 0] = np.nan
        rel = np.where(a > 0, da / np.where(a > 0, a, 1.0), 0.0)
    n = len(a)
    tail = r1[(3 * n) // 4:]
    r1_tail = float(np.nanmax(tail)) if np.isfinite(tail).any() else float("nan")
    r2_sums = np.cumsum(_pos(rel - lam))
    r3_sums = np.cumsum(a**epsilon * _pos(mom - P))
    verdicts = np.array([bool(r1_tail < r1_threshold), plateaus(r2_sums, plateau_tol),
                         plateaus(r3_sums, plateau_tol)])
    return ConditionReport(
        condition="R",
        region={"t_max": n},
        verdicts=verdicts,
        witnesses={"r1_tail_max": r1_tail, "r1_ratio": r1, "r2_partial_sums": r2_sums,
                   "r3_partial_sums": r3_sums},
        holds=bool(verdicts.all()),
        parameters={"epsilon": epsilon, "r1_threshold": r1_threshold, "plateau_tol": plateau_tol,
                    "sub_conditions": ["R1", "R2", "R3"]},
        notes=["'eventually' and a.s. limits are judged on the finite horizon"],
    )


def r_condition_inputs(scheme, records, theta_true, theta0, eps_tilde=0.05, P_choice="drift"):
    """Series for :func:`check_R_conditions` along a recorded trajectory.

    ``a_t`` is the scheme's rate normalizer (``t`` or ``H_t``).  ``lambda_t``
    is ``1/t`` for i.i.d. schemes and :func:`additive_lambda` for additive
    families.  ``P_choice="drift"`` takes ``P_t = ||Gamma_t^{-1} b_t||^2``;
    ``"zero"`` takes ``P_t = 0``.
    """
    theta = as_param(theta_true)
    prev_theta = as_param(theta0)
    hist = History(scheme.x0)
    n = len(records)
    a, lam, P, mom = (np.zeros(n) for _ in range(4))
    additive = hasattr(scheme, "fam")
    for i, rec in enumerate(records):
        t = rec.t
        a[i] = scheme.rate_normalizer(t, rec.acc)
        if additive:
            hv = scheme.fam.h(hist.prev())
            lam[i] = additive_lambda(hv, rec.acc, eps_tilde) if rec.acc > 0 else 0.0
        else:
            lam[i] = 1.0 / t
        if not rec.skipped:
            u = prev_theta - theta
            b, M, _ = conditional_moments(scheme, theta, u, hist)
            try:
                g = invert(rec.gamma)
            except Singular:
                g = None
            if g is not None:
                mom[i] = float(np.trace(g @ M @ g.T))
                gb = g @ b
                P[i] = float(gb @ gb) if P_choice == "drift" else 0.0
        hist.append(rec.x)
        prev_theta = rec.theta_hat
    return {"a": a, "lambda": lam, "P": P, "moment": mom}
