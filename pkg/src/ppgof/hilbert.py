"""Weighted-L2 machinery: quadrature, orthonormal scores, reflection chain.

Functions on [0, T] are represented as a base term (zero, a named smooth
function, or a scaled indicator ell * 1_[0,t]) plus a linear combination of
smooth direction functions.  Every direction produced by the reflection chain
lives in the span of 2m atoms: the m orthonormalized score components of the
fitted family and the m density-ratio-weighted target components.  Working in
atom-coefficient space makes chain construction exact up to the quadrature's
own Gram matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_triangular

from . import _legendre, families
from .errors import IdentifiabilityError, SupportError, UnitNormError

DEGENERACY_RTOL = 1e-12
UNIT_NORM_TOL = 1e-6


@lru_cache(maxsize=None)
def _gauss_nodes(k):
    x, w = np.polynomial.legendre.leggauss(k)
    return x, w


def _map_panel(left, right, k):
    x, w = _gauss_nodes(k)
    half = 0.5 * (right - left)
    return left + half * (x + 1.0), half * w


@dataclass(frozen=True)
class QuadratureGrid:
    """Composite Gauss-Legendre rule on panels tiling [0, T]."""

    edges: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    nodes_per_panel: int

    @classmethod
    def build(cls, T, panels=256, nodes_per_panel=8, breakpoints=None) -> "QuadratureGrid":
        """Uniform panels over [0, T], augmented with the given breakpoints.

        Breakpoints outside (0, T) are ignored; duplicates are merged.
        """
        edges = np.linspace(0.0, T, panels + 1)
        if breakpoints is not None:
            bp = np.asarray(breakpoints, dtype=float)
            bp = bp[(bp > 0.0) & (bp < T)]
            edges = np.unique(np.concatenate([edges, bp]))
        x, w = _gauss_nodes(nodes_per_panel)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        return cls(edges, nodes, weights, nodes_per_panel)

    @property
    def T(self) -> float:
        return float(self.edges[-1])

    @property
    def n_panels(self) -> int:
        return self.edges.size - 1

    def integrate(self, values) -> float:
        return float(np.asarray(values) @ self.weights)

    def panel_sums(self, values) -> np.ndarray:
        return (np.asarray(values) * self.weights).reshape(self.n_panels, self.nodes_per_panel).sum(axis=1)

    def prefix(self, values) -> np.ndarray:
        """Cumulative integral at every panel edge; prefix(values)[j] = int_0^edges[j]."""
        out = np.empty(self.edges.size)
        out[0] = 0.0
        np.cumsum(self.panel_sums(values), out=out[1:])
        return out

    def refined(self, factor=2) -> "QuadratureGrid":
        """Split every panel into `factor` equal parts (convergence checks)."""
        pieces = [
            np.linspace(self.edges[i], self.edges[i + 1], factor + 1)
            for i in range(self.n_panels)
        ]
        edges = np.unique(np.concatenate(pieces))
        return QuadratureGrid.build(
            self.T, panels=1, nodes_per_panel=self.nodes_per_panel, breakpoints=edges[1:-1]
        )

    def cumulative_at(self, values_fn, points) -> np.ndarray:
        """Exact cumulative integral int_0^p values_fn for each point p.

        Points falling on panel edges read off the prefix sums; interior
        points get a fresh Gauss-Legendre sub-panel on [edge, p].
        """
        points = np.atleast_1d(np.asarray(points, dtype=float))
        prefix = self.prefix(np.asarray(values_fn(self.nodes), dtype=float))
        out = np.empty(points.size)
        j = np.searchsorted(self.edges, points, side="left")
        aligned = self.edges[np.minimum(j, self.edges.size - 1)] == points
        out[aligned] = prefix[j[aligned]]
        for i in np.nonzero(~aligned)[0]:
            p = points[i]
            if p <= 0:
                out[i] = 0.0
            elif p >= self.T:
                out[i] = prefix[-1]
            else:
                jj = j[i]
                sub_nodes, sub_w = _map_panel(self.edges[jj - 1], p, self.nodes_per_panel)
                out[i] = prefix[jj - 1] + np.asarray(values_fn(sub_nodes), dtype=float) @ sub_w
        return out


# ---------------------------------------------------------------------------
# Function representation.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FunctionRep:
    """base(s) * 1_[0,cutoff](s) + sum_k coef_k * direction_k(s)."""

    base: object = None
    cutoff: float | None = None
    directions: tuple = ()

    def __call__(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.zeros(s.shape)
        if self.base is not None:
            vals = np.asarray(self.base(s), dtype=float)
            if self.cutoff is not None:
                vals = np.where(s <= self.cutoff, vals, 0.0)
            out += vals
        for coef, direction in self.directions:
            out += coef * np.asarray(direction(s), dtype=float)
        return out

    def with_direction(self, coef, direction) -> "FunctionRep":
        return FunctionRep(self.base, self.cutoff, self.directions + ((coef, direction),))


ZERO = FunctionRep()


def indicator(ell, t) -> FunctionRep:
    """The scaled indicator ell * 1_[0,t]."""
    return FunctionRep(base=ell, cutoff=float(t))


def as_rep(f) -> FunctionRep:
    return f if isinstance(f, FunctionRep) else FunctionRep(base=f)


class _Difference:
    """Callable a - b, kept symbolic so reflections append directions lazily."""

    def __init__(self, a, b):
        self.a, self.b = a, b

    def __call__(self, s):
        return np.asarray(self.a(s), dtype=float) - np.asarray(self.b(s), dtype=float)


class _AtomCombination:
    """Linear combination of the chain atoms with fixed coefficients."""

    def __init__(self, atoms, coeffs):
        self.atoms = atoms
        self.coeffs = np.asarray(coeffs, dtype=float)

    def __call__(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.zeros(s.shape)
        for c, atom in zip(self.coeffs, self.atoms):
            if c != 0.0:
                out += c * np.asarray(atom(s), dtype=float)
        return out


class _Product:
    def __init__(self, f, g):
        self.f, self.g = f, g

    def __call__(self, s):
        return np.asarray(self.f(s), dtype=float) * np.asarray(self.g(s), dtype=float)


# ---------------------------------------------------------------------------
# Weighted inner product.
# ---------------------------------------------------------------------------

def inner(f, g, weight, grid: QuadratureGrid) -> float:
    """<f, g> = int f g weight dt over [0, T].

    The integrand is discontinuous at indicator cutoffs, so the panel
    containing a cutoff is split there and re-integrated; elsewhere plain
    composite Gauss-Legendre applies.  Direction terms attached to either
    function extend over the whole window.
    """
    f, g = as_rep(f), as_rep(g)

    def values(s):
        return f(s) * g(s) * np.asarray(weight(s), dtype=float)

    per_panel = grid.panel_sums(values(grid.nodes))
    total = float(per_panel.sum())
    cuts = {c for c in (f.cutoff, g.cutoff) if c is not None and 0.0 < c < grid.T}
    for cut in cuts:
        j = int(np.searchsorted(grid.edges, cut, side="left"))
        if grid.edges[j] == cut:
            continue  # aligned with a panel edge: nothing to split
        left, right = grid.edges[j - 1], grid.edges[j]
        n1, w1 = _map_panel(left, cut, grid.nodes_per_panel)
        n2, w2 = _map_panel(cut, right, grid.nodes_per_panel)
        total += float(values(n1) @ w1 + values(n2) @ w2 - per_panel[j - 1])
    return total


def norm2(f, weight, grid: QuadratureGrid) -> float:
    return inner(f, f, weight, grid)


# ---------------------------------------------------------------------------
# Orthonormalized score directions and the density-ratio root.
# ---------------------------------------------------------------------------

class _OrthonormalScore:
    """Row of L^{-1} alpha(t) with L the Cholesky factor of the information matrix."""

    def __init__(self, spec, theta, chol, row):
        self.spec = spec
        self.theta = theta
        self.chol = chol
        self.row = row

    def __call__(self, s):
        A = families.alpha(self.spec, self.theta, s)
        return solve_triangular(self.chol, A, lower=True)[self.row]


def orthonormalize(spec, theta_hat, grid: QuadratureGrid, path=None):
    """Orthonormalize the score direction in the fitted weighted-L2 space.

    Returns (q_functions, gamma): gamma is the quadrature value of
    int alpha alpha^T beta dt, and the q's satisfy <q_i, q_j> = delta_ij in
    the same quadrature by construction (triangular Gram-Schmidt, which keeps
    fault-model output invariant under rescalings of the nominal population).
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    w = grid.weights * np.asarray(
        families.beta(spec, theta_hat, grid.nodes, path=path), dtype=float
    )
    A = families.alpha(spec, theta_hat, grid.nodes)
    gamma = (A * w) @ A.T
    gamma = 0.5 * (gamma + gamma.T)
    eigvals = np.linalg.eigvalsh(gamma)
    smallest = float(eigvals[0])
    if smallest <= DEGENERACY_RTOL * float(np.trace(gamma)):
        raise IdentifiabilityError(
            f"information matrix numerically singular: smallest eigenvalue {smallest:.3e}"
        )
    if eigvals[-1] / smallest > 1e12:
        raise IdentifiabilityError(
            f"information matrix ill-conditioned: smallest eigenvalue {smallest:.3e}, "
            f"condition number {eigvals[-1] / smallest:.3e}"
        )
    chol = np.linalg.cholesky(gamma)
    q_fns = [_OrthonormalScore(spec, theta_hat, chol, k) for k in range(spec.m)]
    return q_fns, gamma


class _TargetDirection:
    """k-th orthonormal polynomial component of the target family, on [0, T]."""

    def __init__(self, k, T):
        self.k = k
        self.T = T

    def __call__(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return _legendre.basis(self.k, s / self.T)[self.k - 1]


def target_directions(m, T):
    """q_mu components: orthonormal polynomials rescaled to [0, T]."""
    return [_TargetDirection(k, T) for k in range(1, m + 1)]


def target_weight(T):
    """beta_mu: the flat density 1/T of the standardized target."""
    return lambda s: np.full(np.atleast_1d(np.asarray(s, dtype=float)).shape, 1.0 / T)


class _DensityRatioRoot:
    def __init__(self, beta_hat, beta_mu):
        self.beta_hat = beta_hat
        self.beta_mu = beta_mu

    def __call__(self, s):
        return np.sqrt(np.asarray(self.beta_mu(s), dtype=float) / np.asarray(self.beta_hat(s), dtype=float))


def build_ell(beta_hat, beta_mu, grid: QuadratureGrid):
    """Pointwise square root of the density ratio beta_mu / beta_hat.

    Raises SupportError when the fitted density vanishes at a quadrature node
    (the model puts no mass where the target does).
    """
    vals = np.asarray(beta_hat(grid.nodes), dtype=float)
    if np.any(vals <= 0.0):
        raise SupportError("fitted density nonpositive on the quadrature grid")
    return _DensityRatioRoot(beta_hat, beta_mu)


# ---------------------------------------------------------------------------
# Reflections and the composed chain.
# ---------------------------------------------------------------------------

def reflect(a, b, phi, weight, grid: QuadratureGrid) -> FunctionRep:
    """Reflection swapping the unit vectors a and b, applied to phi.

    Appends a single direction term to phi; the existing terms are untouched.
    A numerically coincident pair (|a-b|^2 below the degeneracy floor) acts
    as the identity.
    """
    a, b = as_rep(a), as_rep(b)
    phi = as_rep(phi)
    na2 = norm2(a, weight, grid)
    nb2 = norm2(b, weight, grid)
    if abs(na2 - 1.0) > 2 * UNIT_NORM_TOL or abs(nb2 - 1.0) > 2 * UNIT_NORM_TOL:
        raise UnitNormError(f"reflection endpoints must be unit vectors, got |a|^2={na2}, |b|^2={nb2}")
    d2 = na2 + nb2 - 2.0 * inner(a, b, weight, grid)
    if d2 < DEGENERACY_RTOL * (na2 + nb2):
        warnings.warn("degenerate reflection (a == b): acting as identity", RuntimeWarning)
        return phi
    diff = _Difference(a, b)
    proj = inner(diff, phi, weight, grid)
    return phi.with_direction(-2.0 * proj / d2, diff)


class UnitaryChain:
    """Composition of m reflections mapping the weighted target directions
    onto the fitted orthonormal scores.

    Stage k reflects across u_k = a_k - b_k with a_k the k-th fitted score
    and b_k the image of ell * q_mu_k under the first k-1 stages.  All stage
    directions are linear combinations of the 2m atoms (a_1..a_m, ell*q_mu_1
    ..ell*q_mu_m), so the chain stores coefficient rows plus the atom Gram
    matrix and never re-integrates its own directions.
    """

    def __init__(self, q_hat, q_mu, ell, weight, grid: QuadratureGrid):
        m = len(q_hat)
        if len(q_mu) != m:
            raise ValueError("q_hat and q_mu must have the same length")
        self.m = m
        self.grid = grid
        self.weight = weight
        self.ell = ell
        self.atoms = tuple(q_hat) + tuple(_Product(ell, qk) for qk in q_mu)
        V = np.vstack([np.asarray(atom(grid.nodes), dtype=float) for atom in self.atoms])
        wbeta = grid.weights * np.asarray(weight(grid.nodes), dtype=float)
        self._node_values = V
        self._wbeta = wbeta
        self.atom_gram = (V * wbeta) @ V.T
        self.atom_gram = 0.5 * (self.atom_gram + self.atom_gram.T)

        self.u_coeffs = np.zeros((m, 2 * m))
        self.b_coeffs = np.zeros((m, 2 * m))
        self.norms2 = np.zeros(m)
        self.degenerate = np.zeros(m, dtype=bool)
        for k in range(m):
            b = np.zeros(2 * m)
            b[m + k] = 1.0
            b = self._apply_coeff_stages(b, upto=k)
            a = np.zeros(2 * m)
            a[k] = 1.0
            for label, vec in (("a", a), ("b", b)):
                sq = float(vec @ self.atom_gram @ vec)
                if abs(sq - 1.0) > 2 * UNIT_NORM_TOL:
                    raise UnitNormError(
                        f"stage {k + 1}: |{label}|^2 = {sq:.8f}, expected 1"
                    )
            u = a - b
            self.b_coeffs[k] = b
            self.u_coeffs[k] = u
            self.norms2[k] = float(u @ self.atom_gram @ u)
            if self.norms2[k] < DEGENERACY_RTOL * 2.0:
                self.degenerate[k] = True
                warnings.warn(
                    f"stage {k + 1} degenerate (score equals weighted target): identity stage",
                    RuntimeWarning,
                )
        self.u_gram = self.u_coeffs @ self.atom_gram @ self.u_coeffs.T
        self._edge_prefix = None

    # -- coefficient-space plumbing -------------------------------------

    def _apply_coeff_stages(self, coeff, upto):
        """Apply reflection stages 0..upto-1 to an atom-coefficient vector."""
        for j in range(upto):
            if self.degenerate[j]:
                continue
            s = float(self.u_coeffs[j] @ self.atom_gram @ coeff)
            coeff = coeff - (2.0 * s / self.norms2[j]) * self.u_coeffs[j]
        return coeff

    def direction(self, k) -> _AtomCombination:
        """The (unnormalized) stage-k reflection direction u_k."""
        return _AtomCombination(self.atoms, self.u_coeffs[k])

    def mapped_target(self, k) -> _AtomCombination:
        """Image of ell * q_mu_k under the full chain (equals q_hat_k by construction)."""
        coeff = np.zeros(2 * self.m)
        coeff[self.m + k] = 1.0
        return _AtomCombination(self.atoms, self._apply_coeff_stages(coeff, upto=self.m))

    def u_values(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        V = np.vstack([np.asarray(atom(s), dtype=float) for atom in self.atoms])
        return self.u_coeffs @ V

    def direction_integrals(self, node_factor) -> np.ndarray:
        """int u_k(s) * factor(s) ds for factor given by its grid-node values."""
        moments = self._node_values @ (np.asarray(node_factor, dtype=float) * self.grid.weights)
        return self.u_coeffs @ moments

    # -- application to general functions --------------------------------

    def apply(self, phi) -> FunctionRep:
        """Apply the full chain to phi, appending one direction per live stage."""
        phi = as_rep(phi)
        coeffs = np.zeros(self.m)
        base_inner = np.array([
            inner(FunctionRep(base=self.direction(k)), phi, self.weight, self.grid)
            for k in range(self.m)
        ])
        for k in range(self.m):
            if self.degenerate[k]:
                continue
            s = base_inner[k] + float(self.u_gram[k] @ coeffs)
            coeffs[k] = -2.0 * s / self.norms2[k]
        out = phi
        for k in range(self.m):
            if coeffs[k] != 0.0:
                out = out.with_direction(coeffs[k], self.direction(k))
        return out

    # -- fast path for indicator arguments --------------------------------

    def _atom_edge_prefix(self) -> np.ndarray:
        """Cumulative integrals of atom_i * ell * weight at every panel edge."""
        if self._edge_prefix is None:
            integrand = self._node_values * (
                np.asarray(self.ell(self.grid.nodes), dtype=float) * self._wbeta
            )
            per_panel = integrand.reshape(
                2 * self.m, self.grid.n_panels, self.grid.nodes_per_panel
            ).sum(axis=2)
            prefix = np.zeros((2 * self.m, self.grid.edges.size))
            np.cumsum(per_panel, axis=1, out=prefix[:, 1:])
            self._edge_prefix = prefix
        return self._edge_prefix

    def _atom_cumulative(self, cutoffs) -> np.ndarray:
        """int_0^t atom_i * ell * weight for each cutoff t; shape (2m, len(t))."""
        cutoffs = np.atleast_1d(np.asarray(cutoffs, dtype=float))
        prefix = self._atom_edge_prefix()
        edges = self.grid.edges
        out = np.empty((2 * self.m, cutoffs.size))
        j = np.searchsorted(edges, cutoffs, side="left")
        aligned = edges[np.minimum(j, edges.size - 1)] == cutoffs
        out[:, aligned] = prefix[:, j[aligned]]
        for i in np.nonzero(~aligned)[0]:
            t = cutoffs[i]
            if t <= 0:
                out[:, i] = 0.0
                continue
            jj = j[i]
            left = edges[jj - 1]
            sub_nodes, sub_w = _map_panel(left, min(t, edges[-1]), self.grid.nodes_per_panel)
            V = np.vstack([np.asarray(atom(sub_nodes), dtype=float) for atom in self.atoms])
            vals = V * (
                np.asarray(self.ell(sub_nodes), dtype=float)
                * np.asarray(self.weight(sub_nodes), dtype=float)
            )
            out[:, i] = prefix[:, jj - 1] + vals @ sub_w
        return out

    def indicator_coefficients(self, cutoffs) -> np.ndarray:
        """Direction coefficients of the chain applied to ell * 1_[0,t].

        Returns shape (len(cutoffs), m); the transformed function for cutoff
        t is ell * 1_[0,t] + sum_k coeff[t,k] * u_k.
        """
        d = self.u_coeffs @ self._atom_cumulative(cutoffs)
        c = np.zeros_like(d)
        for k in range(self.m):
            if self.degenerate[k]:
                continue
            s = d[k] + self.u_gram[k] @ c
            c[k] = -2.0 * s / self.norms2[k]
        return c.T


def build_chain(q_hat, q_mu, ell, weight, grid: QuadratureGrid) -> UnitaryChain:
    """Construct the reflection chain from orthonormalized scores and targets."""
    return UnitaryChain(q_hat, q_mu, ell, weight, grid)


def transform_indicator(chain: UnitaryChain, ell, t, weight=None, grid=None) -> FunctionRep:
    """Image of ell * 1_[0,t] under the chain, as an evaluable FunctionRep."""
    coeffs = chain.indicator_coefficients(np.array([float(t)]))[0]
    rep = indicator(ell, t)
    for k in range(chain.m):
        if coeffs[k] != 0.0:
            rep = rep.with_direction(coeffs[k], chain.direction(k))
    return rep
