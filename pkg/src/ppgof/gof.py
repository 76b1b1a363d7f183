"""Goodness-of-fit pipeline: compensated process, empirical transform,
test statistics, and Monte-Carlo p-values.

The raw testing process is W(t) = n^{-1/2} [N(t) - Lambda(t)] at the fitted
parameters, with the compensator in closed form.  The transformed process
integrates the chain image of ell * 1_[0,t] against dW; after the chain's
one-time setup every grid cutoff costs O(m).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _legendre, families, hilbert, mle
from .errors import TableMismatchError
from .families import Family, ModelSpec
from .hilbert import QuadratureGrid, UnitaryChain
from .simulate import ObservedPath

DEFAULT_GRID_SIZE = 500
DEFAULT_PANELS = 256
DEFAULT_NODES = 8


@dataclass(frozen=True)
class ProcessPath:
    """A testing-process path sampled on a strictly increasing grid in (0, T]."""

    grid: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.shape != values.shape:
            raise ValueError("grid and values must have equal shapes")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("process values must be finite")


@dataclass(frozen=True)
class StatTriple:
    ks: float
    cvm: float
    ad: float

    def as_dict(self):
        return {"ks": self.ks, "cvm": self.cvm, "ad": self.ad}


def time_grid(T, G=DEFAULT_GRID_SIZE) -> np.ndarray:
    """G equally spaced evaluation points T/G, 2T/G, ..., T."""
    return np.linspace(T / G, T, G)


def compensator(spec: ModelSpec, theta_hat, path: ObservedPath, t) -> np.ndarray:
    """Integrated fitted intensity Lambda(t), exact between removal times."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    theta_hat = np.asarray(theta_hat, dtype=float)
    if spec.family is Family.POISSON_LEGENDRE:
        P = _legendre.basis_integral(spec.m, t / path.T)
        return path.n * (theta_hat @ P)
    S_t = families.cumulative_hazard(spec, theta_hat, t)
    S_removals = families.cumulative_hazard(spec, theta_hat, path.times)
    prefix = np.concatenate([[0.0], np.cumsum(S_removals)])
    count = np.searchsorted(path.times, t, side="right")
    A = families.initial_at_risk(spec, theta_hat, path.n)
    return (A - count) * S_t + prefix[count]


def compensated_process(path: ObservedPath, spec: ModelSpec, theta_hat,
                        grid_size=DEFAULT_GRID_SIZE) -> ProcessPath:
    """W(t) = n^{-1/2} [N(t) - Lambda(t)] on the evaluation grid."""
    ts = time_grid(path.T, grid_size)
    counts = path.count_events(ts)
    values = (counts - compensator(spec, theta_hat, path, ts)) / np.sqrt(path.n)
    return ProcessPath(ts, values, {"family": spec.family.value, "transformed": False,
                                    "n": path.n, "theta": theta_hat})


class _FittedDensity:
    """beta at the fitted parameters, bound to the path for the censored family."""

    def __init__(self, spec, theta, path):
        self.spec = spec
        self.theta = theta
        self.path = path

    def __call__(self, s):
        return families.beta(self.spec, self.theta, s, path=self.path)


class _FittedIntensity:
    def __init__(self, spec, theta, path):
        self.spec = spec
        self.theta = theta
        self.path = path

    def __call__(self, s):
        return families.conditional_intensity(self.spec, self.theta, self.path, s)


def transform_grid(path: ObservedPath, grid_size=DEFAULT_GRID_SIZE,
                   panels=DEFAULT_PANELS, nodes_per_panel=DEFAULT_NODES) -> QuadratureGrid:
    """Quadrature grid for the transform on this path.

    Panel edges include the evaluation grid (so cumulative integrals read off
    prefix sums), every removal time (the fitted intensity and the censored
    empirical weight jump there), and a geometric refinement near zero for
    weights with an origin singularity.
    """
    T = path.T
    near_zero = T * 2.0 ** -np.arange(1, 41)
    breakpoints = np.concatenate([time_grid(T, grid_size)[:-1], path.times, near_zero])
    return QuadratureGrid.build(T, panels=panels, nodes_per_panel=nodes_per_panel,
                                breakpoints=breakpoints)


def build_transform(path: ObservedPath, spec: ModelSpec, theta_hat,
                    grid_size=DEFAULT_GRID_SIZE, panels=DEFAULT_PANELS,
                    nodes_per_panel=DEFAULT_NODES):
    """Assemble the fitted transform: returns (chain, ell, grid)."""
    theta_hat = np.asarray(theta_hat, dtype=float)
    grid = transform_grid(path, grid_size, panels, nodes_per_panel)
    beta_hat = _FittedDensity(spec, theta_hat, path)
    beta_mu = hilbert.target_weight(path.T)
    q_hat, _ = hilbert.orthonormalize(spec, theta_hat, grid, path=path)
    ell = hilbert.build_ell(beta_hat, beta_mu, grid)
    q_mu = hilbert.target_directions(spec.m, path.T)
    chain = hilbert.build_chain(q_hat, q_mu, ell, beta_hat, grid)
    return chain, ell, grid


def transform(path: ObservedPath, spec: ModelSpec, theta_hat,
              chain: UnitaryChain, ell, grid_size=DEFAULT_GRID_SIZE) -> ProcessPath:
    """The transformed testing process, evaluated on the time grid.

    For each cutoff t the integrand g_t = chain(ell * 1_[0,t]) splits into the
    indicator piece plus m direction pieces, so the jump sum and the
    compensator integral are assembled from precomputed cumulative pieces.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    ts = time_grid(path.T, grid_size)
    grid = chain.grid
    coeffs = chain.indicator_coefficients(ts)  # (G, m)

    events = path.event_times
    ell_at_events = np.asarray(ell(events), dtype=float) if events.size else np.empty(0)
    ell_event_prefix = np.concatenate([[0.0], np.cumsum(ell_at_events)])
    event_counts = np.searchsorted(events, ts, side="right")
    jump_indicator = ell_event_prefix[event_counts]
    jump_directions = chain.u_values(events).sum(axis=1) if events.size else np.zeros(chain.m)

    intensity = _FittedIntensity(spec, theta_hat, path)
    lam_nodes = np.asarray(intensity(grid.nodes), dtype=float)
    comp_indicator = grid.cumulative_at(
        lambda s: np.asarray(ell(s), dtype=float) * np.asarray(intensity(s), dtype=float), ts
    )
    comp_directions = chain.direction_integrals(lam_nodes)

    values = (
        jump_indicator - comp_indicator
        + coeffs @ (jump_directions - comp_directions)
    ) / np.sqrt(path.n)
    return ProcessPath(ts, values, {"family": spec.family.value, "transformed": True,
                                    "n": path.n, "theta": theta_hat})


def statistics(proc: ProcessPath, trim=1.0) -> StatTriple:
    """Supremum, mean-square, and 1/t-weighted mean-square functionals.

    All three are scale-free in time: on the equally spaced grid they depend
    only on the sampled values (and the index in the 1/t weighting), so
    rescaling t -> t/T together with the horizon leaves them unchanged.
    With trim=rho < 1 they are evaluated over [0, rho*T] only.
    """
    values = proc.values
    if trim < 1.0:
        used = int(np.ceil(trim * values.size))
        values = values[:max(used, 1)]
    sq = values**2
    ks = float(np.max(np.abs(values)))
    cvm = float(np.mean(sq))
    ad = float(np.sum(sq / np.arange(1, values.size + 1)))
    return StatTriple(ks, cvm, ad)


def p_values(stats: StatTriple, table, m=None) -> dict:
    """Add-one Monte-Carlo p-values against the calibrated null table."""
    if m is not None and table.m != m:
        raise TableMismatchError(f"null table has m={table.m}, model has m={m}")
    out = {}
    for name in ("ks", "cvm", "ad"):
        sample = getattr(table, name)
        observed = getattr(stats, name)
        n_ge = sample.size - np.searchsorted(sample, observed, side="left")
        out[name] = float((1 + n_ge) / (table.reps + 1))
    return out


# ---------------------------------------------------------------------------
# One-shot fit-and-test report.
# ---------------------------------------------------------------------------

REPORT_SCHEMA_VERSION = 1


@dataclass
class TestReport:
    family: str
    m: int
    n: int
    T: float
    grid_size: int
    theta_hat: list
    loglik: float
    converged: bool
    stats: StatTriple
    p: dict | None
    alpha: float
    rejected: dict | None
    trim: float = 1.0
    diagnostics: dict = field(default_factory=dict)
    schema_version: int = REPORT_SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "family": self.family,
            "m": self.m,
            "n": self.n,
            "T": self.T,
            "grid_size": self.grid_size,
            "theta_hat": [float(v) for v in self.theta_hat],
            "loglik": self.loglik,
            "converged": self.converged,
            "statistics": self.stats.as_dict(),
            "p_values": self.p,
            "alpha": self.alpha,
            "rejected": self.rejected,
            "trim": self.trim,
            "diagnostics": self.diagnostics,
        }


def run_test(path: ObservedPath, spec: ModelSpec, table=None,
             grid_size=DEFAULT_GRID_SIZE, alpha=0.05, trim=1.0,
             fit_result=None) -> TestReport:
    """Fit the family, transform the compensated path, and score it."""
    result = fit_result if fit_result is not None else mle.fit(spec, path)
    theta = result.theta_hat
    chain, ell, _ = build_transform(path, spec, theta, grid_size)
    proc = transform(path, spec, theta, chain, ell, grid_size)
    stats = statistics(proc, trim=trim)
    p = rejected = None
    if table is not None:
        if getattr(table, "trim", 1.0) != trim:
            raise TableMismatchError(
                f"null table calibrated with trim={getattr(table, 'trim', 1.0)}, test uses trim={trim}"
            )
        p = p_values(stats, table, m=spec.m)
        rejected = {name: bool(p[name] <= alpha) for name in p}
    diag = {"fit_iterations": result.iterations, **result.diagnostics}
    np_hat = None
    if spec.is_fault:
        np_hat = float(path.n * theta[-1])
        diag["np_hat"] = np_hat
    return TestReport(
        family=spec.family.value, m=spec.m, n=path.n, T=path.T, grid_size=grid_size,
        theta_hat=list(map(float, theta)), loglik=result.loglik, converged=result.converged,
        stats=stats, p=p, alpha=alpha, rejected=rejected, trim=trim, diagnostics=diag,
    )
