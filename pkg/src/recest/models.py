"""Built-in models: i.i.d. schemes, Cauchy location, conditionally additive
exponential Markov families and the Gaussian AR(1) process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from recest.core import EstimatingScheme, MissingDrift, as_param

__all__ = [
    "AdditiveExpFamily",
    "AdditiveScheme",
    "CauchyLocation",
    "IIDScheme",
    "UnknownModel",
    "additive_b",
    "additive_score",
    "additive_second_moment",
    "ar1_sample",
    "cauchy_b",
    "cauchy_density",
    "cauchy_psi",
    "cauchy_quantile",
    "cauchy_sample",
    "cauchy_second_moment",
    "fisher_rate_kappa",
    "gaussian_ar1",
    "get_model",
    "iid_scheme",
    "log_fisher_rate_kappa",
    "model_names",
    "register_model",
]


# --- Cauchy location family -------------------------------------------------

CAUCHY_INFO = 0.5


def cauchy_density(theta, x):
    return 1.0 / (math.pi * (1.0 + (x - theta) ** 2))


def cauchy_psi(theta, x):
    """Score of the Cauchy location family, ``2(x - theta) / (1 + (x - theta)^2)``."""
    d = x - theta
    return 2.0 * d / (1.0 + d * d)


def cauchy_b(u):
    """Mean of the score at ``theta + u`` under the law at ``theta``."""
    return -2.0 * u / (4.0 + u * u)


def cauchy_second_moment(u):
    """Second moment of the score at ``theta + u`` under the law at ``theta``."""
    uu = u * u
    return 2.0 * (4.0 + 3.0 * uu) / (4.0 + uu) ** 2


def cauchy_quantile(theta, p):
    return theta + math.tan(math.pi * (p - 0.5))


def cauchy_sample(theta, rng):
    return cauchy_quantile(theta, rng.random())


# --- i.i.d. schemes ---------------------------------------------------------


class IIDScheme(EstimatingScheme):
    """i.i.d. observations with ``Gamma_t(theta) = t * gamma(theta)``.

    Parameters
    ----------
    psi_fn : callable
        ``psi_fn(theta, x)`` returning an ``m`` vector.
    gamma_fn : callable
        ``gamma_fn(theta)`` returning an invertible ``m x m`` matrix.
    sampler : callable, optional
        ``sampler(theta, rng)`` drawing one observation.
    drift_fn, moment_fn : callable, optional
        Closed forms ``b(theta, u)`` and ``E[psi psi^T](theta, u)``.
    density : callable, optional
        ``density(theta, x)``; enables quadrature fallbacks for scalar models.
    """

    x0 = None

    def __init__(self, psi_fn, gamma_fn, sampler=None, drift_fn=None, moment_fn=None,
                 density=None, dim=1, name="iid"):
        self.psi_fn = psi_fn
        self.gamma_fn = gamma_fn
        self.sampler = sampler
        self.drift_fn = drift_fn
        self.moment_fn = moment_fn
        self.density = density
        self.dim = dim
        self.name = name

    @property
    def has_drift(self):
        return self.drift_fn is not None and self.moment_fn is not None

    def accumulate(self, acc, t, history):
        return float(t)

    def gamma(self, t, theta, history, acc):
        return acc * np.asarray(self.gamma_fn(theta), dtype=np.float64).reshape(self.dim, self.dim)

    def psi(self, t, theta, x, history):
        return self.psi_fn(theta, x)

    def sample(self, t, theta_true, history, rng):
        if self.sampler is None:
            raise NotImplementedError(f"scheme {self.name!r} has no sampler")
        return self.sampler(theta_true, rng)

    def fisher_information(self, theta, t, acc):
        return acc * np.asarray(self.gamma_fn(as_param(theta))).reshape(self.dim, self.dim)

    def drift(self, t, theta, u, history):
        if self.drift_fn is None:
            raise MissingDrift(f"scheme {self.name!r} has no closed-form drift")
        return np.asarray(self.drift_fn(theta, u), dtype=np.float64).reshape(self.dim)

    def psi_second_moment(self, t, theta, u, history):
        if self.moment_fn is None:
            raise MissingDrift(f"scheme {self.name!r} has no closed-form second moment")
        return np.asarray(self.moment_fn(theta, u), dtype=np.float64).reshape(self.dim, self.dim)


def iid_scheme(psi, gamma_matrix_fn, **kwargs) -> IIDScheme:
    """Wrap an i.i.d. estimating function into a scheme with ``Gamma_t = t * gamma``."""
    return IIDScheme(psi, gamma_matrix_fn, **kwargs)


class CauchyLocation(IIDScheme):
    """Cauchy location model with the ML recursion ``theta += (2/t) psi``."""

    has_drift = True

    def __init__(self):
        self.dim = 1
        self.name = "cauchy"

    def gamma(self, t, theta, history, acc):
        return np.array([[acc * CAUCHY_INFO]])

    def psi(self, t, theta, x, history):
        return np.array([cauchy_psi(theta[0], x)])

    def sample(self, t, theta_true, history, rng):
        return cauchy_sample(float(theta_true[0]), rng)

    def sample_path(self, theta_true, t_max, rng):
        u = rng.random(t_max)
        return (float(theta_true[0]) + np.tan(np.pi * (u - 0.5))).tolist()

    def fisher_information(self, theta, t, acc):
        return np.array([[acc * CAUCHY_INFO]])

    def drift(self, t, theta, u, history):
        # location family: depends on the offset only
        return np.array([cauchy_b(float(np.asarray(u).reshape(-1)[0]))])

    def psi_second_moment(self, t, theta, u, history):
        return np.array([[cauchy_second_moment(float(np.asarray(u).reshape(-1)[0]))]])

    def density(self, theta, x):
        return cauchy_density(theta, x)

    def psi_fn(self, theta, x):
        return np.array([cauchy_psi(float(np.asarray(theta).reshape(-1)[0]), x)])

    def gamma_fn(self, theta):
        return np.array([[CAUCHY_INFO]])

    def drift_fn(self, theta, u):
        return self.drift(None, theta, u, None)

    def moment_fn(self, theta, u):
        return self.psi_second_moment(None, theta, u, None)


# --- conditionally additive exponential families ---------------------------

FD_STEP = 1e-4
FD_RTOL = 1e-6


@dataclass(frozen=True)
class AdditiveExpFamily:
    """Markov transition density ``h(x, y) exp(theta m(y, x) - gamma(theta) h(x))``.

    ``gdot`` and ``gddot`` are checked against central differences of
    ``gamma_fn`` and ``gdot`` on ``check_grid`` at construction.
    """

    gamma_fn: Callable[[float], float]
    gdot: Callable[[float], float]
    gddot: Callable[[float], float]
    h: Callable[[float], float]
    m_fn: Callable[[float, float], float]
    sampler: Callable | None = None
    x0: float = 0.0
    name: str = "additive"
    check_grid: tuple = field(default=tuple(np.linspace(-3.0, 3.0, 13)))

    def __post_init__(self):
        for v in self.check_grid:
            v = float(v)
            for f, df, label in ((self.gamma_fn, self.gdot, "gdot"),
                                 (self.gdot, self.gddot, "gddot")):
                fd = (f(v + FD_STEP) - f(v - FD_STEP)) / (2 * FD_STEP)
                exact = df(v)
                if abs(fd - exact) > FD_RTOL * max(1.0, abs(exact)):
                    raise ValueError(f"{label}({v}) = {exact} disagrees with finite difference {fd}")
            if self.gddot(v) < 0:
                raise ValueError(f"gddot({v}) is negative")


def additive_score(fam: AdditiveExpFamily, theta, x_t, x_prev):
    """``m(x_t, x_prev) - gdot(theta) h(x_prev)``."""
    return fam.m_fn(x_t, x_prev) - fam.gdot(theta) * fam.h(x_prev)


def additive_b(fam: AdditiveExpFamily, theta, u, x_prev):
    """Conditional mean of the score at ``theta + u``: ``h(x_prev) (gdot(theta) - gdot(theta + u))``."""
    return fam.h(x_prev) * (fam.gdot(theta) - fam.gdot(theta + u))


def additive_second_moment(fam: AdditiveExpFamily, theta, u, x_prev):
    b = additive_b(fam, theta, u, x_prev)
    return fam.gddot(theta) * fam.h(x_prev) + b * b


class AdditiveScheme(EstimatingScheme):
    """Likelihood recursion for an additive family, ``Gamma_t = gddot(theta) H_t``.

    The accumulator is ``H_t = sum_{s<=t} h(X_{s-1})``.
    """

    dim = 1
    has_drift = True

    def __init__(self, fam: AdditiveExpFamily):
        self.fam = fam
        self.x0 = fam.x0
        self.name = fam.name

    def accumulate(self, acc, t, history):
        hv = self.fam.h(history.prev())
        if hv < 0:
            raise ValueError(f"h is negative at x={history.prev()}")
        return acc + hv

    def gamma(self, t, theta, history, acc):
        return np.array([[self.fam.gddot(theta[0]) * acc]])

    def psi(self, t, theta, x, history):
        return np.array([additive_score(self.fam, theta[0], x, history.prev())])

    def sample(self, t, theta_true, history, rng):
        if self.fam.sampler is None:
            raise NotImplementedError(f"family {self.name!r} has no sampler")
        return self.fam.sampler(float(theta_true[0]), history.prev(), rng)

    def rate_normalizer(self, t, acc):
        return float(acc)

    def fisher_information(self, theta, t, acc):
        return np.array([[self.fam.gddot(float(as_param(theta)[0])) * acc]])

    def drift(self, t, theta, u, history):
        th = float(as_param(theta)[0])
        return np.array([additive_b(self.fam, th, float(np.asarray(u).reshape(-1)[0]), history.prev())])

    def psi_second_moment(self, t, theta, u, history):
        th = float(as_param(theta)[0])
        uu = float(np.asarray(u).reshape(-1)[0])
        return np.array([[additive_second_moment(self.fam, th, uu, history.prev())]])


# Gaussian AR(1): gamma = theta^2 / 2, h = x^2, m = x y

def _ar1_gamma(v):
    return 0.5 * v * v


def _ar1_gdot(v):
    return v


def _ar1_gddot(v):
    return 1.0


def _ar1_h(x):
    return x * x


def _ar1_m(y, x):
    return x * y


def ar1_sample(theta, x_prev, rng):
    return theta * x_prev + rng.standard_normal()


class _AR1Scheme(AdditiveScheme):
    def sample_path(self, theta_true, t_max, rng):
        th = float(theta_true[0])
        z = rng.standard_normal(t_max).tolist()
        x = self.x0
        out = []
        for zt in z:
            x = th * x + zt
            out.append(x)
        return out


def gaussian_ar1() -> AdditiveExpFamily:
    """``X_t = theta X_{t-1} + Z_t`` with ``X_0 = 0`` and standard normal ``Z_t``."""
    return AdditiveExpFamily(_ar1_gamma, _ar1_gdot, _ar1_gddot, _ar1_h, _ar1_m,
                             sampler=ar1_sample, x0=0.0, name="ar1")


def _ar1_scheme():
    return _AR1Scheme(gaussian_ar1())


def fisher_rate_kappa(theta: float, t: int) -> float:
    """Growth rate of the AR(1) Fisher information.

    ``t / (1 - theta^2)`` if ``|theta| < 1``, ``t^2 / 2`` if ``|theta| = 1`` and
    ``theta^(2t) / (theta^2 - 1)^2`` otherwise.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    a = abs(theta)
    if a < 1.0:
        return t / (1.0 - theta * theta)
    if a == 1.0:
        return 0.5 * t * t
    return a ** (2 * t) / (theta * theta - 1.0) ** 2


def log_fisher_rate_kappa(theta: float, t: int) -> float:
    if t < 1:
        raise ValueError("t must be >= 1")
    a = abs(theta)
    if a < 1.0:
        return math.log(t) - math.log1p(-theta * theta)
    if a == 1.0:
        return 2.0 * math.log(t) - math.log(2.0)
    return 2 * t * math.log(a) - 2.0 * math.log(theta * theta - 1.0)


# --- registry ---------------------------------------------------------------


class UnknownModel(KeyError):
    pass


_REGISTRY: dict[str, Callable[[], EstimatingScheme]] = {
    "cauchy": CauchyLocation,
    "ar1": _ar1_scheme,
}


def register_model(name: str, factory: Callable[[], EstimatingScheme]) -> None:
    _REGISTRY[name] = factory


def get_model(name: str) -> EstimatingScheme:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise UnknownModel(name) from None


def model_names() -> list[str]:
    return sorted(_REGISTRY)
