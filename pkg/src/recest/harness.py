"""Monte Carlo ensembles of recursive estimates, rate summaries and the
AR(1) least-squares oracle.

Replication ``r`` draws from ``SplitMix64(derive_seed(master_seed, r))``,
so an ensemble does not depend on how replications are scheduled.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from recest.core import NonFiniteUpdate, as_param, iterate
from recest.diagnostics.reports import REPORT_VERSION, to_jsonable
from recest.models import log_fisher_rate_kappa
from recest.rng import SplitMix64, derive_seed

__all__ = [
    "Ensemble",
    "EXPLOSIVE_T_CAP",
    "InsufficientData",
    "MonteCarloConfig",
    "RateReport",
    "ReplicationError",
    "ar1_batch_ols",
    "default_workers",
    "ergodic_ratio_series",
    "estimate_rate",
    "log_info_ratio",
    "loglog_slope",
    "ols_discrepancy",
    "run_monte_carlo",
]

EXPLOSIVE_T_CAP = 500
WORKERS_ENV = "RECEST_WORKERS"


class InsufficientData(ValueError):
    pass


class ReplicationError(ArithmeticError):
    def __init__(self, rep, t, msg):
        super().__init__(f"replication {rep} failed at t={t}: {msg}")
        self.rep = rep
        self.t = t


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class MonteCarloConfig:
    reps: int
    t_max: int
    checkpoints: tuple
    master_seed: int
    theta_true: tuple
    theta0: tuple
    delta: float = 0.4
    a_choice: str = "model"  # "t" (step count) or "model" (scheme's rate normalizer)

    def __post_init__(self):
        object.__setattr__(self, "checkpoints", tuple(int(c) for c in self.checkpoints))
        object.__setattr__(self, "theta_true", tuple(as_param(self.theta_true).tolist()))
        object.__setattr__(self, "theta0", tuple(as_param(self.theta0).tolist()))
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")
        cp = self.checkpoints
        if not cp or any(b <= a for a, b in zip(cp, cp[1:])):
            raise ValueError("checkpoints must be strictly increasing")
        if cp[0] < 1 or cp[-1] > self.t_max:
            raise ValueError("checkpoints must lie in [1, t_max]")
        if not 0 < self.delta < 0.5:
            raise ValueError("delta must lie in the open interval (0, 1/2)")
        if self.a_choice not in ("t", "model"):
            raise ValueError("a_choice must be 't' or 'model'")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned value")


@dataclass
class Ensemble:
    config: MonteCarloConfig
    model: str
    seeds: np.ndarray        # (reps,) uint64
    checkpoints: np.ndarray  # (K,)
    theta_hat: np.ndarray    # (reps, K, m)
    a: np.ndarray            # (reps, K) rate normalizer a_t
    info: np.ndarray         # (reps, K) Fisher information at the true value (trace)

    @property
    def errors(self) -> np.ndarray:
        """``||theta_hat_t - theta||`` at each checkpoint, shape ``(reps, K)``."""
        d = self.theta_hat - np.asarray(self.config.theta_true)[None, None, :]
        return np.sqrt(np.sum(d * d, axis=2))

    def scaled_errors(self, delta=None) -> np.ndarray:
        delta = self.config.delta if delta is None else delta
        return self.a**delta * self.errors

    def first(self, n: int) -> "Ensemble":
        """The first ``n`` replications; identical to a run with ``reps=n``."""
        cfg = replace(self.config, reps=n)
        return Ensemble(cfg, self.model, self.seeds[:n], self.checkpoints, self.theta_hat[:n],
                        self.a[:n], self.info[:n])

    def to_csv(self, delta=None, ratio=None) -> str:
        """Rows ``rep, t, delta_abs, scaled, ratio``; ``ratio`` defaults to ``I_t / t``."""
        err = self.errors
        sc = self.scaled_errors(delta)
        if ratio is None:
            ratio = self.info / self.checkpoints[None, :]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rep", "t", "delta_abs", "scaled", "ratio"])
        for r in range(err.shape[0]):
            for k, t in enumerate(self.checkpoints):
                w.writerow([r, int(t)] + [format(float(v), ".17g")
                                          for v in (err[r, k], sc[r, k], ratio[r, k])])
        return buf.getvalue()


def _replicate(args):
    scheme, cfg, rep = args
    seed = derive_seed(cfg.master_seed, rep)
    rng = SplitMix64(seed)
    theta_true = np.asarray(cfg.theta_true)
    xs = scheme.sample_path(theta_true, cfg.t_max, rng)
    K = len(cfg.checkpoints)
    th = np.empty((K, scheme.dim))
    a = np.empty(K)
    info = np.empty(K)
    k = 0
    try:
        for state, _ in iterate(scheme, cfg.theta0, xs, cfg.checkpoints):
            th[k] = state.theta_hat
            t = state.t
            a[k] = float(t) if cfg.a_choice == "t" else scheme.rate_normalizer(t, state.normalizer_acc)
            fi = scheme.fisher_information(theta_true, t, state.normalizer_acc)
            info[k] = float(np.trace(np.atleast_2d(fi))) if fi is not None else math.nan
            k += 1
    except NonFiniteUpdate as exc:
        raise ReplicationError(rep, exc.t, str(exc)) from exc
    return seed, th, a, info


def run_monte_carlo(scheme, cfg: MonteCarloConfig, workers: int | None = None) -> Ensemble:
    """Run ``cfg.reps`` independent trajectories and keep the checkpointed states.

    ``workers > 1`` spreads replications over processes; results are
    gathered in replication order, so the ensemble is identical for any
    worker count.  The default comes from ``RECEST_WORKERS`` (else 1).
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    jobs = [(scheme, cfg, r) for r in range(cfg.reps)]
    if workers == 1 or cfg.reps == 1:
        out = [_replicate(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_replicate, jobs, chunksize=max(1, cfg.reps // (4 * workers))))
    return Ensemble(
        config=cfg,
        model=getattr(scheme, "name", type(scheme).__name__),
        seeds=np.array([o[0] for o in out], dtype=np.uint64),
        checkpoints=np.array(cfg.checkpoints, dtype=np.int64),
        theta_hat=np.stack([o[1] for o in out]),
        a=np.stack([o[2] for o in out]),
        info=np.stack([o[3] for o in out]),
    )


def loglog_slope(t, y):
    """Least-squares slope of ``log y`` on ``log t`` and its standard error."""
    x = np.log(np.asarray(t, dtype=np.float64))
    z = np.log(np.asarray(y, dtype=np.float64))
    n = x.size
    if n < 2:
        raise InsufficientData("need at least two points for a slope")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (z - z.mean())) / sxx
    if n < 3:
        return slope, math.nan
    resid = z - z.mean() - slope * xc
    return slope, math.sqrt(float(resid @ resid) / (n - 2) / sxx)


@dataclass
class RateReport:
    model: str
    checkpoints: np.ndarray
    delta: float
    abs_quantiles: np.ndarray      # (K, 3): 25/50/75 %
    scaled_quantiles: np.ndarray   # (K, 3)
    slope: float
    slope_se: float
    ratio_kind: str
    ratio_medians: np.ndarray
    reps: int
    notes: list = field(default_factory=list)

    @property
    def median_abs(self):
        return self.abs_quantiles[:, 1]

    @property
    def scaled_medians(self):
        return self.scaled_quantiles[:, 1]

    def to_dict(self) -> dict:
        return to_jsonable({
            "spec_version": REPORT_VERSION,
            "model": self.model,
            "reps": self.reps,
            "delta": self.delta,
            "checkpoints": self.checkpoints,
            "quantile_levels": [0.25, 0.5, 0.75],
            "abs_error_quantiles": self.abs_quantiles,
            "scaled_error_quantiles": self.scaled_quantiles,
            "slope": self.slope,
            "slope_se": self.slope_se,
            "ratio_kind": self.ratio_kind,
            "ratio": self.ratio_medians,
            "notes": self.notes,
        })


def estimate_rate(ens: Ensemble, delta: float | None = None, min_reps: int = 30) -> RateReport:
    """Quantiles of ``||Delta_t||`` and ``a_t^delta ||Delta_t||`` and the log-log slope of the median error.

    Medians rather than means: early Cauchy errors are heavy tailed.
    """
    cp = ens.checkpoints
    if cp.size < 3:
        raise InsufficientData("at least 3 checkpoints are needed")
    if ens.theta_hat.shape[0] < min_reps:
        raise InsufficientData(f"at least {min_reps} replications are needed")
    delta = ens.config.delta if delta is None else delta
    levels = [25, 50, 75]
    qa = np.percentile(ens.errors, levels, axis=0).T
    qs = np.percentile(ens.scaled_errors(delta), levels, axis=0).T
    slope, se = loglog_slope(cp, qa[:, 1])
    kind, ratio = _ratio_medians(ens)
    return RateReport(ens.model, cp, delta, qa, qs, slope, se, kind, ratio, ens.theta_hat.shape[0],
                      notes=["slope bands are calibration values; the asymptotic claim is "
                             "a_t^delta ||Delta_t|| -> 0 for every delta < 1/2"])


def _ratio_medians(ens):
    theta = ens.config.theta_true
    if ens.model == "ar1" and len(theta) == 1 and abs(theta[0]) != 1.0:
        kind = "I_t/t" if abs(theta[0]) < 1 else "I_t/kappa_t"
        return kind, ergodic_ratio_series(ens, theta[0])
    return "I_t/t", np.median(ens.info / ens.checkpoints[None, :], axis=0)


def ar1_batch_ols(observations, x0=0.0) -> np.ndarray:
    """Least-squares estimates ``sum X_s X_{s-1} / sum X_{s-1}^2`` for ``t = 1..T``.

    Entries are NaN while the denominator is zero.
    """
    x = np.asarray(observations, dtype=np.float64)
    prev = np.concatenate([[x0], x[:-1]])
    num = np.cumsum(x * prev)
    den = np.cumsum(prev * prev)
    out = np.full(x.shape, np.nan)
    pos = den > 0
    out[pos] = num[pos] / den[pos]
    return out


def ols_discrepancy(records, x0=0.0, rtol=1e-10):
    """Check ``theta_t - theta*_t = (I_t0 / I_t)(theta_t0 - theta*_t0)`` for ``t >= t0``.

    ``t0`` is the first step with ``I_t > 0``.  Deviations are measured
    relative to ``max(|theta_t|, |theta*_t|)``.

    Returns
    -------
    dict with ``t0``, ``max_rel_dev`` and ``ok``
    """
    xs = np.array([r.x for r in records], dtype=np.float64)
    th = np.array([r.theta_hat[0] for r in records])
    star = ar1_batch_ols(xs, x0)
    prev = np.concatenate([[x0], xs[:-1]])
    info = np.cumsum(prev * prev)
    idx = np.flatnonzero(info > 0)
    if idx.size == 0:
        return {"t0": None, "max_rel_dev": 0.0, "ok": True}
    i0 = idx[0]
    lhs = np.abs(th[i0:] - star[i0:])
    rhs = info[i0] / info[i0:] * abs(th[i0] - star[i0])
    scale = np.maximum(np.maximum(np.abs(th[i0:]), np.abs(star[i0:])), np.finfo(float).tiny)
    dev = float(np.max(np.abs(lhs - rhs) / scale))
    return {"t0": int(i0 + 1), "max_rel_dev": dev, "ok": dev <= rtol}


def log_info_ratio(ens: Ensemble, theta: float) -> np.ndarray:
    """``log(I_t / kappa_t)`` per replication and checkpoint."""
    lk = np.array([log_fisher_rate_kappa(theta, int(t)) for t in ens.checkpoints])
    with np.errstate(divide="ignore"):
        return np.log(ens.info) - lk[None, :]


def ergodic_ratio_series(ens: Ensemble, theta: float) -> np.ndarray:
    """Median ``I_t / t`` for ``|theta| < 1``; median ``I_t / kappa_t`` (via logs) for ``|theta| > 1``."""
    if abs(theta) == 1.0:
        raise ValueError("the ratio is not defined for |theta| = 1")
    if abs(theta) < 1:
        return np.median(ens.info / ens.checkpoints[None, :], axis=0)
    return np.median(np.exp(log_info_ratio(ens, theta)), axis=0)
