"""Path generation for every family, plus piecewise-constant-hazard cohorts.

All draws go through a counter-based Philox generator keyed by (seed, subkeys),
so replication r of a study is reproducible independently of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import families
from .errors import CoverageError, DomainError, UnsupportedFamilyError
from .families import Family, ModelSpec


def make_rng(seed, *subkeys) -> np.random.Generator:
    """Deterministic generator for a (seed, subkeys) address in a study.

    `seed` may itself be a tuple, in which case its tail extends the subkeys;
    this lets replication workers derive independent streams from one study
    seed without coordinating.
    """
    if isinstance(seed, tuple):
        seed, *head = seed
        subkeys = tuple(head) + subkeys
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in subkeys))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class ObservedPath:
    """One observed counting-process path on [0, T].

    times are the strictly increasing removal times in (0, T]; status marks
    events (1) versus censorings (0); n is the initial population size.  Only
    the censored Aalen family produces status-0 entries.
    """

    times: np.ndarray
    status: np.ndarray
    n: int
    T: float
    meta: str = ""

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        status = np.asarray(self.status, dtype=np.int8)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "status", status)
        if times.ndim != 1 or status.shape != times.shape:
            raise ValueError("times and status must be 1-D arrays of equal length")
        if times.size and (times[0] <= 0 or times[-1] > self.T):
            raise ValueError("times must lie in (0, T]")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        # events <= n is structural for population families (one event per
        # individual) but not for the Poisson target, whose count is
        # Poisson(n); population samplers guarantee it by construction.
        if np.any((status != 0) & (status != 1)):
            raise ValueError("status entries must be 0 or 1")

    @property
    def event_times(self) -> np.ndarray:
        return self.times[self.status == 1]

    @property
    def n_events(self) -> int:
        return int(np.sum(self.status == 1))

    def count_events(self, t):
        """N(t): number of status-1 times <= t."""
        return np.searchsorted(self.event_times, t, side="right")


@dataclass(frozen=True)
class PiecewiseHazard:
    """Piecewise-constant hazard: rates[i] applies on [breakpoints[i], breakpoints[i+1])."""

    breakpoints: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        r = np.asarray(self.rates, dtype=float)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "rates", r)
        if bp.size != r.size + 1:
            raise ValueError("need len(breakpoints) == len(rates) + 1")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(r < 0):
            raise ValueError("rates must be nonnegative")

    def cumulative(self):
        """Integrated hazard at each breakpoint."""
        widths = np.diff(self.breakpoints)
        return np.concatenate([[0.0], np.cumsum(self.rates * widths)])


def _separate_ties(times: np.ndarray, upper: float) -> np.ndarray:
    """Separate exactly tied sorted draws by the smallest representable step.

    Works downward from the top so that a tied block at the horizon (the
    piecewise sampler puts an atom at the last breakpoint) stays within
    (0, upper].
    """
    if times.size == 0:
        return times
    if times[-1] > upper:
        times[-1] = upper
    for i in range(times.size - 2, -1, -1):
        if times[i] >= times[i + 1]:
            times[i] = np.nextafter(times[i + 1], -np.inf)
    return times


def _invert_cumulative_hazard(spec: ModelSpec, theta, e):
    """Solve S(t) = e for the family's waiting-time law (e ~ Exp(1) draws)."""
    th1, th2 = theta[0], theta[1]
    fam = spec.family
    if fam in (Family.AALEN_WEIBULL, Family.AALEN_WEIBULL_CENSORED):
        s0 = (spec.t0 / th1) ** th2
        return th1 * (e + s0) ** (1.0 / th2) - spec.t0
    if fam is Family.MIXTURE_CURE:
        return th1 * e ** (1.0 / th2)
    if fam is Family.AALEN_GOMPERTZ:
        return np.log1p(e / (th1 * np.exp(th2 * spec.t0))) / th2
    if fam is Family.JELINSKI_MORANDA:
        return e / th1
    if fam is Family.LITTLEWOOD:
        return np.expm1(e * th2 / th1) / th2
    raise UnsupportedFamilyError(fam.value)


def simulate_path(spec: ModelSpec, theta, n, T, seed, susceptibles="fixed") -> ObservedPath:
    """Generate one observed path of length-T from the family at theta.

    Aalen families draw n i.i.d. lifetimes and keep those in (0, T]. The
    censored family additionally draws emigration times Exp(rate) with
    probability censor_prob (else never) and records min plus indicator.
    Fault/cure families use floor(n*p) susceptibles by default; pass
    susceptibles="binomial" for a Binomial(n, p) count instead.  The
    Poisson-Legendre family is simulated only at tau0 (homogeneous rate n/T).
    """
    theta = families.validate_params(spec, theta)
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = make_rng(seed)
    meta = f"{spec.family.value} seed={seed} n={n} T={T}"

    if spec.family is Family.POISSON_LEGENDRE:
        tau0 = np.zeros(spec.m)
        tau0[0] = 1.0
        if not np.array_equal(theta, tau0):
            raise UnsupportedFamilyError(
                "poisson_legendre paths are generated only at tau0 = (1, 0, ..., 0)"
            )
        k = rng.poisson(n)
        times = _separate_ties(np.sort(T * (1.0 - rng.random(k))), T)
        return ObservedPath(times, np.ones(k, dtype=np.int8), n, T, meta)

    if spec.is_fault:
        p = theta[-1]
        if susceptibles == "fixed":
            k = int(np.floor(n * p))
        elif susceptibles == "binomial":
            k = int(rng.binomial(n, p))
        else:
            raise ValueError("susceptibles must be 'fixed' or 'binomial'")
        lifetimes = _invert_cumulative_hazard(spec, theta, rng.exponential(size=k))
        keep = (lifetimes > 0) & (lifetimes <= T)
        times = _separate_ties(np.sort(lifetimes[keep]), T)
        return ObservedPath(times, np.ones(times.size, dtype=np.int8), n, T, meta)

    lifetimes = _invert_cumulative_hazard(spec, theta, rng.exponential(size=n))
    if spec.is_censored:
        if spec.censor_prob is None or spec.censor_rate is None:
            raise DomainError("censored simulation needs censor_prob and censor_rate")
        decides = rng.random(n) < spec.censor_prob
        waits = rng.exponential(scale=1.0 / spec.censor_rate, size=n)
        censor = np.where(decides, waits, np.inf)
        observed = np.minimum(lifetimes, censor)
        status = (lifetimes <= censor).astype(np.int8)
        keep = (observed > 0) & (observed <= T)
        order = np.argsort(observed[keep], kind="stable")
        times = _separate_ties(observed[keep][order], T)
        return ObservedPath(times, status[keep][order], n, T, meta)

    keep = (lifetimes > 0) & (lifetimes <= T)
    times = _separate_ties(np.sort(lifetimes[keep]), T)
    return ObservedPath(times, np.ones(times.size, dtype=np.int8), n, T, meta)


def simulate_piecewise(hazard: PiecewiseHazard, n, T, seed) -> ObservedPath:
    """n i.i.d. lifetimes by exact inversion of a piecewise-exponential cdf.

    Draws whose cumulative-hazard budget exceeds the table are set to the last
    breakpoint (the law puts its remaining mass there); the path then keeps
    whatever falls in (0, T].
    """
    bp = hazard.breakpoints
    if bp[0] > 0 or bp[-1] < T:
        raise CoverageError(f"hazard covers [{bp[0]}, {bp[-1]}], not [0, {T}]")
    cum = hazard.cumulative()
    rng = make_rng(seed)
    e = rng.exponential(size=n)
    idx = np.clip(np.searchsorted(cum, e, side="right") - 1, 0, hazard.rates.size - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = bp[idx] + (e - cum[idx]) / hazard.rates[idx]
    t = np.where(e >= cum[-1], bp[-1], t)
    keep = (t > 0) & (t <= T)
    times = _separate_ties(np.sort(t[keep]), T)
    meta = f"piecewise seed={seed} n={n} T={T}"
    return ObservedPath(times, np.ones(times.size, dtype=np.int8), n, T, meta)
