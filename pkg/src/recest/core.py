"""Recursion engine for estimators of the form

    theta_t = theta_{t-1} + Gamma_t(theta_{t-1})^{-1} psi_t(theta_{t-1}),

with a small dense inverse, the estimating-scheme interface and trajectory
recording.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from recest.rng import SplitMix64

__all__ = [
    "EstimatingScheme",
    "EstimatorState",
    "History",
    "IllConditionedWarning",
    "MissingDrift",
    "NonFiniteUpdate",
    "Singular",
    "StepRecord",
    "as_param",
    "initial_state",
    "invert",
    "iterate",
    "run_trajectory",
    "step",
]

MAX_DIM = 8
PIVOT_RTOL = 1e-14
COND_WARN = 1e12


class Singular(ArithmeticError):
    """Raised when a normalizing matrix has a (numerically) zero pivot."""


class IllConditionedWarning(RuntimeWarning):
    pass


class NonFiniteUpdate(ArithmeticError):
    """Raised when an estimating function or increment is NaN or infinite."""

    def __init__(self, msg, t=None):
        super().__init__(msg)
        self.t = t


class MissingDrift(NotImplementedError):
    """The scheme has no closed-form conditional drift or second moment."""


def as_param(x) -> np.ndarray:
    """Coerce a scalar or sequence to a finite 1-d float array."""
    a = np.atleast_1d(np.asarray(x, dtype=np.float64)).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"parameter must be finite, got {a}")
    return a


def _finite(a: np.ndarray) -> bool:
    if a.size == 1:
        return math.isfinite(a.item())
    return bool(np.isfinite(a).all())


def _inf_norm(a: np.ndarray) -> float:
    return float(np.max(np.sum(np.abs(a), axis=1))) if a.size else 0.0


def invert(a) -> np.ndarray:
    """Inverse of a small square matrix by Gauss-Jordan elimination with partial pivoting.

    Parameters
    ----------
    a : array_like
        ``m x m`` matrix with ``m <= 8``.

    Raises
    ------
    Singular
        If a pivot is within ``1e-14 * ||a||_inf`` of zero.

    Warns
    -----
    IllConditionedWarning
        If ``||a||_inf * ||a^{-1}||_inf`` exceeds ``1e12``.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    m = a.shape[0]
    if m == 1:
        # the pivot is the scale, so only an exact zero is singular
        p = a.item()
        if p == 0.0:
            raise Singular("zero pivot")
        return np.array([[1.0 / p]])
    if m > MAX_DIM:
        raise ValueError(f"dimension {m} exceeds {MAX_DIM}")
    scale = _inf_norm(a)
    tol = PIVOT_RTOL * scale

    w = np.hstack([a.copy(), np.eye(m)])
    for k in range(m):
        piv = k + int(np.argmax(np.abs(w[k:, k])))
        if scale == 0.0 or abs(w[piv, k]) <= tol:
            raise Singular(f"zero pivot in column {k}")
        if piv != k:
            w[[k, piv]] = w[[piv, k]]
        w[k] /= w[k, k]
        for i in range(m):
            if i != k and w[i, k] != 0.0:
                w[i] -= w[i, k] * w[k]
    inv = w[:, m:]
    cond = scale * _inf_norm(inv)
    if cond > COND_WARN:
        warnings.warn(f"condition estimate {cond:.3g} exceeds {COND_WARN:g}",
                      IllConditionedWarning, stacklevel=2)
    return inv


class History:
    """Observations ``X_1, ..., X_{t-1}`` preceded by a known ``X_0`` (or None)."""

    __slots__ = ("x0", "values")

    def __init__(self, x0=None, values=None):
        self.x0 = x0
        self.values = [] if values is None else list(values)

    def prev(self):
        return self.values[-1] if self.values else self.x0

    def append(self, x):
        self.values.append(x)

    def __len__(self):
        return len(self.values)

    def copy(self):
        return History(self.x0, self.values)


class EstimatingScheme:
    """A model/procedure pair: estimating function, normalizer and sampler.

    Subclasses implement ``psi``, ``gamma`` and ``sample``.  ``gamma`` never
    sees the current observation, which keeps the normalizer predictable.
    The accumulator carried in :class:`EstimatorState` lets factorized
    normalizers (``t * gamma(theta)``, ``H_t * gddot(theta)``) be formed in
    O(1) per step.
    """

    dim = 1
    x0 = None

    def initial_acc(self):
        return 0.0

    def accumulate(self, acc, t, history):
        """Accumulator for step ``t`` from its value at ``t - 1`` and ``X_0..X_{t-1}``."""
        return acc

    def gamma(self, t, theta, history, acc) -> np.ndarray:
        raise NotImplementedError

    def psi(self, t, theta, x, history) -> np.ndarray:
        raise NotImplementedError

    def sample(self, t, theta_true, history, rng):
        raise NotImplementedError

    def sample_path(self, theta_true, t_max, rng):
        """Draw ``X_1..X_{t_max}``; observations under the true law ignore the estimates."""
        hist = History(self.x0)
        for t in range(1, t_max + 1):
            hist.append(self.sample(t, theta_true, hist, rng))
        return hist.values

    def rate_normalizer(self, t, acc) -> float:
        """Default ``a_t`` for rate statements (step count)."""
        return float(t)

    def fisher_information(self, theta, t, acc) -> float | None:
        return None

    # closed-form conditional moments, when known
    has_drift = False

    def drift(self, t, theta, u, history) -> np.ndarray:
        """``E_theta[psi_t(theta + u) | F_{t-1}]``."""
        raise MissingDrift(f"{type(self).__name__} has no closed-form drift")

    def psi_second_moment(self, t, theta, u, history) -> np.ndarray:
        """``E_theta[psi_t(theta + u) psi_t(theta + u)^T | F_{t-1}]`` as an ``m x m`` matrix."""
        raise MissingDrift(f"{type(self).__name__} has no closed-form second moment")


@dataclass
class EstimatorState:
    t: int
    theta_hat: np.ndarray
    normalizer_acc: Any = 0.0
    stalled: int = 0


@dataclass
class StepRecord:
    t: int
    x: Any
    theta_hat: np.ndarray
    psi: np.ndarray
    gamma: np.ndarray
    increment: np.ndarray
    skipped: bool
    acc: Any = field(default=0.0, repr=False)


def initial_state(scheme: EstimatingScheme, theta0) -> EstimatorState:
    theta0 = as_param(theta0)
    if theta0.shape[0] != scheme.dim:
        raise ValueError(f"theta0 has dimension {theta0.shape[0]}, scheme expects {scheme.dim}")
    return EstimatorState(0, theta0, scheme.initial_acc(), 0)


def step(scheme: EstimatingScheme, state: EstimatorState, x_t, history: History):
    """Advance the estimator by one observation.

    ``history`` holds the observations before ``x_t``.  When the normalizer
    is singular the estimate is left unchanged and the record is flagged
    as skipped.

    Returns
    -------
    (EstimatorState, StepRecord)
    """
    t = state.t + 1
    theta = state.theta_hat
    acc = scheme.accumulate(state.normalizer_acc, t, history)
    g = np.asarray(scheme.gamma(t, theta, history, acc), dtype=np.float64)
    psi = np.asarray(scheme.psi(t, theta, x_t, history), dtype=np.float64).reshape(-1)
    if not _finite(psi):
        raise NonFiniteUpdate(f"psi is not finite at t={t}: {psi}", t)
    try:
        ginv = invert(g)
    except Singular:
        inc = np.zeros_like(theta)
        new = EstimatorState(t, theta, acc, state.stalled + 1)
        return new, StepRecord(t, x_t, theta, psi, g, inc, True, acc)
    inc = ginv @ psi
    if not _finite(inc):
        raise NonFiniteUpdate(f"increment is not finite at t={t}: {inc}", t)
    theta_new = theta + inc
    if not _finite(theta_new):
        raise NonFiniteUpdate(f"estimate is not finite at t={t}", t)
    new = EstimatorState(t, theta_new, acc, state.stalled)
    return new, StepRecord(t, x_t, theta_new, psi, g, inc, False, acc)


def iterate(scheme, theta0, observations, checkpoints=None):
    """Run the recursion over given observations.

    Yields ``(state, record)`` for every step, or only at ``checkpoints``
    when given (records are still built for the yielded steps).
    """
    state = initial_state(scheme, theta0)
    hist = History(scheme.x0)
    wanted = None if checkpoints is None else set(int(c) for c in checkpoints)
    for x in observations:
        state, rec = step(scheme, state, x, hist)
        hist.append(x)
        if wanted is None or state.t in wanted:
            yield state, rec


def run_trajectory(scheme, theta_true, theta0, t_max: int, seed: int) -> list[StepRecord]:
    """Sample ``X_1..X_{t_max}`` at ``theta_true`` and apply the recursion from ``theta0``.

    The result depends only on the arguments; the same seed gives
    bit-identical records.
    """
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    if t_max == 0:
        return []
    theta_true = as_param(theta_true)
    rng = SplitMix64(seed)
    xs = scheme.sample_path(theta_true, t_max, rng)
    return [rec for _, rec in iterate(scheme, theta0, xs)]
