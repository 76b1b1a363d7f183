"""Parametric conditional-intensity families.

Each family couples a waiting-time law (hazard, cdf, cumulative hazard) with
the population-level conditional intensity lambda(t) = hazard(t) * at_risk(t-)
and its large-population limits: the score direction alpha(t) (limit of the
parameter gradient of log lambda) and the limit density beta(t) (limit of
lambda/n).  All evaluations are vectorized over t.

Parameter vectors are plain 1-D float arrays in the family's printing order;
for the fault/cure families the last coordinate is the susceptible proportion
p, which enters the model only through the product n*p.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _legendre
from .errors import DomainError, RangeError, UnsupportedFamilyError


class Family(str, Enum):
    AALEN_WEIBULL = "aalen_weibull"
    AALEN_GOMPERTZ = "aalen_gompertz"
    AALEN_WEIBULL_CENSORED = "aalen_weibull_censored"
    MIXTURE_CURE = "mixture_cure"
    JELINSKI_MORANDA = "jelinski_moranda"
    LITTLEWOOD = "littlewood"
    POISSON_LEGENDRE = "poisson_legendre"


# Families whose intensity multiplies the hazard by (n*p - N(t-)) with the
# susceptible proportion p as the last parameter coordinate.
FAULT_FAMILIES = (Family.MIXTURE_CURE, Family.JELINSKI_MORANDA, Family.LITTLEWOOD)

_FAMILY_DIM = {
    Family.AALEN_WEIBULL: 2,
    Family.AALEN_GOMPERTZ: 2,
    Family.AALEN_WEIBULL_CENSORED: 2,
    Family.MIXTURE_CURE: 3,
    Family.JELINSKI_MORANDA: 2,
    Family.LITTLEWOOD: 3,
}


@dataclass(frozen=True)
class ModelSpec:
    """A member family of the intensity model zoo plus its fixed constants.

    t0 is the cohort's baseline age (Aalen-type families only), horizon is
    the window length T (required for the Poisson-Legendre target family,
    whose intensity depends on T explicitly), and censor_prob/censor_rate
    are the emigration mechanism constants used only when simulating the
    censored family.
    """

    family: Family
    m: int
    t0: float = 0.0
    horizon: float | None = None
    censor_prob: float | None = None
    censor_rate: float | None = None

    def __post_init__(self):
        if self.family is Family.POISSON_LEGENDRE:
            if self.m < 1:
                raise ValueError("poisson_legendre needs m >= 1")
            if self.horizon is None or self.horizon <= 0:
                raise ValueError("poisson_legendre needs a positive horizon")
        else:
            expected = _FAMILY_DIM[self.family]
            if self.m != expected:
                raise ValueError(
                    f"{self.family.value} has parameter dimension {expected}, got m={self.m}"
                )
        if self.t0 < 0:
            raise ValueError("t0 must be nonnegative")

    @property
    def is_fault(self) -> bool:
        return self.family in FAULT_FAMILIES

    @property
    def is_censored(self) -> bool:
        return self.family is Family.AALEN_WEIBULL_CENSORED


def aalen_weibull(t0=0.0) -> ModelSpec:
    return ModelSpec(Family.AALEN_WEIBULL, 2, t0=t0)


def aalen_gompertz(t0=0.0) -> ModelSpec:
    return ModelSpec(Family.AALEN_GOMPERTZ, 2, t0=t0)


def aalen_weibull_censored(t0=0.0, censor_prob=None, censor_rate=None) -> ModelSpec:
    return ModelSpec(
        Family.AALEN_WEIBULL_CENSORED, 2, t0=t0,
        censor_prob=censor_prob, censor_rate=censor_rate,
    )


def mixture_cure() -> ModelSpec:
    return ModelSpec(Family.MIXTURE_CURE, 3)


def jelinski_moranda() -> ModelSpec:
    return ModelSpec(Family.JELINSKI_MORANDA, 2)


def littlewood() -> ModelSpec:
    return ModelSpec(Family.LITTLEWOOD, 3)


def poisson_legendre(m, horizon) -> ModelSpec:
    return ModelSpec(Family.POISSON_LEGENDRE, m, horizon=horizon)


FAMILY_ALIASES = {
    "weibull": Family.AALEN_WEIBULL,
    "gompertz": Family.AALEN_GOMPERTZ,
    "weibull-censored": Family.AALEN_WEIBULL_CENSORED,
    "cure": Family.MIXTURE_CURE,
    "jm": Family.JELINSKI_MORANDA,
    "littlewood": Family.LITTLEWOOD,
    "poisson": Family.POISSON_LEGENDRE,
}


def spec_from_name(name, t0=0.0, m=None, horizon=None,
                   censor_prob=None, censor_rate=None) -> ModelSpec:
    """Build a ModelSpec from a user-facing family name or alias."""
    key = str(name).strip().lower().replace("_", "-")
    family = FAMILY_ALIASES.get(key)
    if family is None:
        try:
            family = Family(str(name))
        except ValueError:
            raise ValueError(
                f"unknown model family {name!r}; expected one of {sorted(FAMILY_ALIASES)}"
            ) from None
    if family is Family.POISSON_LEGENDRE:
        return ModelSpec(family, m if m is not None else 2, horizon=horizon)
    return ModelSpec(
        family, _FAMILY_DIM[family], t0=t0,
        censor_prob=censor_prob, censor_rate=censor_rate,
    )


def validate_params(spec: ModelSpec, theta) -> np.ndarray:
    """Check admissibility of a parameter vector; returns it as a float array.

    For poisson_legendre, positivity of the intensity is checked on a uniform
    grid over [0, T] rather than analytically.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.m,):
        raise DomainError(f"expected parameter vector of length {spec.m}, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise DomainError("parameter vector has non-finite entries")
    if spec.family is Family.POISSON_LEGENDRE:
        s = np.linspace(0.0, 1.0, 1025)
        mu = theta @ _legendre.basis(spec.m, s)
        if np.min(mu) <= 0:
            raise DomainError("poisson_legendre intensity not positive on [0, T]")
        return theta
    if np.any(theta[:2] <= 0):
        raise DomainError("scale/shape parameters must be positive")
    if spec.is_fault:
        p = theta[-1]
        if not 0.0 < p < 1.0:
            raise DomainError(f"susceptible proportion must lie in (0, 1), got {p}")
    return theta


# ---------------------------------------------------------------------------
# Waiting-time laws: hazard rate, cumulative hazard, cdf, density.
# ---------------------------------------------------------------------------

def hazard(spec: ModelSpec, theta, t):
    """Individual hazard rate of the family's waiting-time law at t >= 0."""
    t = np.asarray(t, dtype=float)
    fam = spec.family
    if fam in (Family.AALEN_WEIBULL, Family.AALEN_WEIBULL_CENSORED):
        th1, th2 = theta[0], theta[1]
        return (th2 / th1) * ((spec.t0 + t) / th1) ** (th2 - 1.0)
    if fam is Family.MIXTURE_CURE:
        th1, th2 = theta[0], theta[1]
        return (th2 / th1) * (t / th1) ** (th2 - 1.0)
    if fam is Family.AALEN_GOMPERTZ:
        th1, th2 = theta[0], theta[1]
        return th1 * th2 * np.exp(th2 * (spec.t0 + t))
    if fam is Family.JELINSKI_MORANDA:
        return np.broadcast_to(np.asarray(theta[0], dtype=float), t.shape).copy()
    if fam is Family.LITTLEWOOD:
        th1, th2 = theta[0], theta[1]
        return th1 / (1.0 + th2 * t)
    raise UnsupportedFamilyError(f"{fam.value} has no individual waiting-time law")


def cumulative_hazard(spec: ModelSpec, theta, t):
    """Integrated hazard S(t) = int_0^t hazard; closed form for every family."""
    t = np.asarray(t, dtype=float)
    fam = spec.family
    if fam in (Family.AALEN_WEIBULL, Family.AALEN_WEIBULL_CENSORED):
        th1, th2 = theta[0], theta[1]
        return ((spec.t0 + t) / th1) ** th2 - (spec.t0 / th1) ** th2
    if fam is Family.MIXTURE_CURE:
        th1, th2 = theta[0], theta[1]
        return (t / th1) ** th2
    if fam is Family.AALEN_GOMPERTZ:
        th1, th2 = theta[0], theta[1]
        return th1 * np.exp(th2 * spec.t0) * np.expm1(th2 * t)
    if fam is Family.JELINSKI_MORANDA:
        return theta[0] * t
    if fam is Family.LITTLEWOOD:
        th1, th2 = theta[0], theta[1]
        return (th1 / th2) * np.log1p(th2 * t)
    raise UnsupportedFamilyError(f"{fam.value} has no individual waiting-time law")


def cdf(spec: ModelSpec, theta, t):
    return -np.expm1(-cumulative_hazard(spec, theta, t))


def density(spec: ModelSpec, theta, t):
    return hazard(spec, theta, t) * np.exp(-cumulative_hazard(spec, theta, t))


def hazard_cdf(spec: ModelSpec, theta, t):
    """Return (hazard rate, cdf) of the waiting-time law at t.

    Raises UnsupportedFamilyError for poisson_legendre, which models the
    population intensity directly and has no individual-lifetime law.
    """
    theta = validate_params(spec, theta)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise RangeError("t must be nonnegative")
    return hazard(spec, theta, t), cdf(spec, theta, t)


# ---------------------------------------------------------------------------
# Population-level conditional intensity.
# ---------------------------------------------------------------------------

def initial_at_risk(spec: ModelSpec, theta, n) -> float:
    """Size of the initially susceptible pool: n, or n*p for fault/cure models."""
    if spec.is_fault:
        return float(n) * float(theta[-1])
    return float(n)


def at_risk(spec: ModelSpec, theta, path, t):
    """Left-limit at-risk count A - #{path times < t}.

    For the censored family the path times include emigrations, so the count
    removes both deaths and censorings; elsewhere every path entry is an event.
    """
    t = np.asarray(t, dtype=float)
    removed = np.searchsorted(path.times, t, side="left")
    return initial_at_risk(spec, theta, path.n) - removed


def conditional_intensity(spec: ModelSpec, theta, path, t):
    """Population conditional intensity at t given the strict past of the path."""
    theta = validate_params(spec, theta)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > path.T):
        raise RangeError(f"t must lie in [0, {path.T}]")
    if spec.family is Family.POISSON_LEGENDRE:
        T = spec.horizon
        vals = theta @ _legendre.basis(spec.m, t / T)
        return (path.n / T) * vals
    return hazard(spec, theta, t) * at_risk(spec, theta, path, t)


# ---------------------------------------------------------------------------
# Large-population limits alpha and beta.
# ---------------------------------------------------------------------------

def alpha(spec: ModelSpec, theta, t):
    """Limiting score direction, shape (m, len(t)).

    Coordinates follow the parameter printing order.  For fault/cure families
    the p-coordinate is exp(S(t))/p, the limit of n/(n*p - N(t-)); it can grow
    large near the horizon and raises OverflowError only when it leaves the
    floating-point range.
    """
    theta = validate_params(spec, theta)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    fam = spec.family
    if fam is Family.POISSON_LEGENDRE:
        P = _legendre.basis(spec.m, t / spec.horizon)
        return P / (theta @ P)
    th1, th2 = theta[0], theta[1]
    if fam in (Family.AALEN_WEIBULL, Family.AALEN_WEIBULL_CENSORED):
        a1 = np.full(t.shape, -th2 / th1)
        a2 = 1.0 / th2 + np.log((spec.t0 + t) / th1)
        rows = [a1, a2]
    elif fam is Family.AALEN_GOMPERTZ:
        rows = [np.full(t.shape, 1.0 / th1), 1.0 / th2 + spec.t0 + t]
    elif fam is Family.MIXTURE_CURE:
        rows = [np.full(t.shape, -th2 / th1), 1.0 / th2 + np.log(t / th1)]
    elif fam is Family.JELINSKI_MORANDA:
        rows = [np.full(t.shape, 1.0 / th1)]
    elif fam is Family.LITTLEWOOD:
        rows = [np.full(t.shape, 1.0 / th1), -t / (1.0 + th2 * t)]
    else:  # pragma: no cover
        raise UnsupportedFamilyError(fam.value)
    if spec.is_fault:
        with np.errstate(over="raise"):
            try:
                last = np.exp(cumulative_hazard(spec, theta, t)) / theta[-1]
            except FloatingPointError:
                raise OverflowError(
                    "p-coordinate of the score direction overflows: cdf numerically 1"
                ) from None
        rows.append(last)
    return np.vstack(rows)


def beta(spec: ModelSpec, theta, t, path=None):
    """Limit density of lambda/n.

    Closed form for every family except the censored one, which uses the
    empirical plug-in hazard(t) * (n - removed(t-)) / n and therefore needs
    the observed path.
    """
    theta = validate_params(spec, theta)
    t = np.asarray(t, dtype=float)
    fam = spec.family
    if fam is Family.AALEN_WEIBULL_CENSORED:
        if path is None:
            raise ValueError("censored family evaluates beta empirically and needs the path")
        return hazard(spec, theta, t) * at_risk(spec, theta, path, t) / path.n
    if fam is Family.POISSON_LEGENDRE:
        T = spec.horizon
        return (theta @ _legendre.basis(spec.m, t / T)) / T
    base = density(spec, theta, t)
    if spec.is_fault:
        return theta[-1] * base
    return base
