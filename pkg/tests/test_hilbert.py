import warnings

import numpy as np
import pytest

from ppgof import families, gof, hilbert, mle, simulate
from ppgof.errors import IdentifiabilityError, SupportError, UnitNormError
from ppgof.hilbert import FunctionRep, QuadratureGrid, indicator


@pytest.fixture(scope="module")
def weibull_fit(weibull_spec, weibull_path):
    return mle.fit(weibull_spec, weibull_path)


@pytest.fixture(scope="module")
def weibull_machinery(weibull_spec, weibull_path, weibull_fit):
    chain, ell, grid = gof.build_transform(weibull_path, weibull_spec, weibull_fit.theta_hat)
    return chain, ell, grid


def flat_weight(T):
    return hilbert.target_weight(T)


def test_legendre_orthonormal_under_flat_weight():
    T = 50.0
    grid = QuadratureGrid.build(T, panels=64)
    q = hilbert.target_directions(3, T)
    w = flat_weight(T)
    for j in range(3):
        for k in range(3):
            val = hilbert.inner(q[j], q[k], w, grid)
            assert abs(val - (1.0 if j == k else 0.0)) < 1e-12


def test_zero_measure_indicator():
    grid = QuadratureGrid.build(1.0, panels=16)
    one = FunctionRep(base=lambda s: np.ones_like(s))
    cut = indicator(lambda s: np.ones_like(s), 0.0)
    assert hilbert.inner(cut, one, flat_weight(1.0), grid) == 0.0


def test_inner_matches_refinement_oracle(weibull_spec, weibull_theta):
    # adaptive panel-halving oracle on a polynomial pair under the Weibull weight
    rng = np.random.default_rng(3)
    coef_f, coef_g = rng.normal(size=4), rng.normal(size=4)
    f = FunctionRep(base=lambda s: np.polyval(coef_f, s / 50.0))
    g = FunctionRep(base=lambda s: np.polyval(coef_g, s / 50.0))
    weight = lambda s: families.beta(weibull_spec, weibull_theta, s)
    value_prev = None
    panels = 8
    while panels <= 512:
        grid = QuadratureGrid.build(50.0, panels=panels)
        value = hilbert.inner(f, g, weight, grid)
        if value_prev is not None and abs(value - value_prev) < 1e-12:
            break
        value_prev = value
        panels *= 2
    final = hilbert.inner(f, g, weight, QuadratureGrid.build(50.0, panels=2 * panels))
    assert abs(value - final) < 1e-11


def test_indicator_cutoff_split_is_exact():
    # int_0^c s^2 ds with a cutoff interior to a panel, against the closed form
    grid = QuadratureGrid.build(1.0, panels=7)
    sq = indicator(lambda s: s**2, 0.437)
    one = FunctionRep(base=lambda s: np.ones_like(s))
    val = hilbert.inner(sq, one, lambda s: np.ones_like(s), grid)
    assert abs(val - 0.437**3 / 3.0) < 1e-15


def test_orthonormalize_poisson_gives_identity():
    spec = families.poisson_legendre(3, 1.0)
    tau0 = np.array([1.0, 0.0, 0.0])
    grid = QuadratureGrid.build(1.0, panels=64)
    q, gamma = hilbert.orthonormalize(spec, tau0, grid)
    assert np.max(np.abs(gamma - np.eye(3))) < 1e-10
    s = np.linspace(0, 1, 23)
    P = hilbert.target_directions(3, 1.0)
    for k in range(3):
        assert np.allclose(q[k](s), P[k](s), atol=1e-10)


def test_orthonormalize_self_check(weibull_spec, weibull_path, weibull_fit):
    theta = weibull_fit.theta_hat
    grid = QuadratureGrid.build(50.0, panels=256)
    q, _ = hilbert.orthonormalize(weibull_spec, theta, grid, path=weibull_path)
    w = lambda s: families.beta(weibull_spec, theta, s)
    for i in range(2):
        for j in range(2):
            val = hilbert.inner(q[i], q[j], w, grid)
            assert abs(val - (1.0 if i == j else 0.0)) < 1e-8


def test_orthonormalize_one_dimensional_normalization():
    spec = families.poisson_legendre(1, 1.0)
    tau = np.array([1.0])
    grid = QuadratureGrid.build(1.0, panels=32)
    q, gamma = hilbert.orthonormalize(spec, tau, grid)
    # alpha is constant 1 and beta = 1, so q = alpha / ||alpha|| = 1
    assert np.allclose(q[0](np.linspace(0, 1, 5)), 1.0, atol=1e-12)


def test_orthonormalize_singular_gamma_raises():
    # two identical score coordinates: rank-1 information matrix
    spec = families.poisson_legendre(2, 1.0)

    class Degenerate(hilbert._OrthonormalScore):
        pass

    grid = QuadratureGrid.build(1.0, panels=16)
    import ppgof.families as fam

    original = fam.alpha

    def broken_alpha(sp, th, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        row = np.ones(t.size)
        return np.vstack([row, row])

    fam_alpha = fam.alpha
    fam.alpha = broken_alpha
    try:
        with pytest.raises(IdentifiabilityError) as err:
            hilbert.orthonormalize(spec, np.array([1.0, 0.0]), grid)
        assert "eigenvalue" in str(err.value)
    finally:
        fam.alpha = fam_alpha


def test_build_ell_identity_and_support():
    grid = QuadratureGrid.build(1.0, panels=16)
    w = flat_weight(1.0)
    ell = hilbert.build_ell(w, w, grid)
    assert np.allclose(ell(np.linspace(0, 1, 9)), 1.0)
    with pytest.raises(SupportError):
        hilbert.build_ell(lambda s: np.zeros_like(np.atleast_1d(s)), w, grid)


def test_ell_multiplication_is_isometry(weibull_spec, weibull_path, weibull_fit, weibull_machinery):
    chain, ell, grid = weibull_machinery
    theta = weibull_fit.theta_hat
    w = lambda s: families.beta(weibull_spec, theta, s)
    q_mu = hilbert.target_directions(2, 50.0)
    for j in range(2):
        for k in range(2):
            lhs = hilbert.inner(hilbert._Product(ell, q_mu[j]), hilbert._Product(ell, q_mu[k]), w, grid)
            assert abs(lhs - (1.0 if j == k else 0.0)) < 1e-8


def test_censored_ell_jumps_exactly_at_path_times():
    spec = families.aalen_weibull_censored(t0=50.0, censor_prob=0.4, censor_rate=1 / 15)
    path = simulate.simulate_path(spec, [86.0, 9.0], 200, 50.0, seed=2)
    fit = mle.fit(spec, path)
    chain, ell, grid = gof.build_transform(path, spec, fit.theta_hat)
    eps = 1e-9
    for t in path.times[5:8]:
        left, right = ell(np.array([t - eps]))[0], ell(np.array([t + eps]))[0]
        assert abs(right - left) > 1e-4  # one individual leaves the risk set
    mid = 0.5 * (path.times[5] + path.times[6])
    a, b = ell(np.array([mid - 1e-7]))[0], ell(np.array([mid + 1e-7]))[0]
    assert abs(a - b) < 1e-6  # smooth between removals


# ---------------------------------------------------------------------------
# Reflection laws.
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def reflection_setup():
    T = 1.0
    grid = QuadratureGrid.build(T, panels=64)
    w = flat_weight(T)
    P = hilbert.target_directions(4, T)
    a = FunctionRep(base=P[1])
    b = FunctionRep(base=P[2])
    return grid, w, a, b, P


def test_reflect_swaps_endpoints(reflection_setup):
    grid, w, a, b, _ = reflection_setup
    image = hilbert.reflect(a, b, a, w, grid)
    s = np.linspace(0, 1, 101)
    assert np.max(np.abs(image(s) - b(s))) < 1e-8
    back = hilbert.reflect(a, b, b, w, grid)
    assert np.max(np.abs(back(s) - a(s))) < 1e-8


def test_reflect_fixes_orthogonal_complement(reflection_setup):
    grid, w, a, b, P = reflection_setup
    phi = FunctionRep(base=P[3])  # orthogonal to both endpoints
    image = hilbert.reflect(a, b, phi, w, grid)
    s = np.linspace(0, 1, 101)
    assert np.max(np.abs(image(s) - phi(s))) < 1e-10


def test_reflect_involution(reflection_setup):
    grid, w, a, b, P = reflection_setup
    rng = np.random.default_rng(9)
    coups = rng.normal(size=4)
    phi = FunctionRep(base=lambda s: np.polyval(coups, s))
    once = hilbert.reflect(a, b, phi, w, grid)
    twice = hilbert.reflect(a, b, once, w, grid)
    s = rng.uniform(0, 1, size=100)
    assert np.max(np.abs(twice(s) - phi(s))) < 1e-8


def test_reflect_self_adjoint(reflection_setup):
    grid, w, a, b, _ = reflection_setup
    rng = np.random.default_rng(11)
    for _ in range(5):
        c1, c2 = rng.normal(size=4), rng.normal(size=4)
        f1 = FunctionRep(base=lambda s, c=c1: np.polyval(c, s))
        f2 = FunctionRep(base=lambda s, c=c2: np.polyval(c, s))
        lhs = hilbert.inner(hilbert.reflect(a, b, f1, w, grid), f2, w, grid)
        rhs = hilbert.inner(f1, hilbert.reflect(a, b, f2, w, grid), w, grid)
        assert abs(lhs - rhs) < 1e-8


def test_reflect_requires_unit_norms(reflection_setup):
    grid, w, a, _, P = reflection_setup
    too_big = FunctionRep(base=lambda s: 2.0 * np.asarray(P[2](s)))
    with pytest.raises(UnitNormError):
        hilbert.reflect(a, too_big, a, w, grid)


def test_reflect_degenerate_is_identity(reflection_setup):
    grid, w, a, _, P = reflection_setup
    phi = FunctionRep(base=P[3])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        image = hilbert.reflect(a, a, phi, w, grid)
    assert image is phi


# ---------------------------------------------------------------------------
# Chain construction.
# ---------------------------------------------------------------------------

def test_chain_identity_when_target_equals_scores():
    # fitting the target family at tau0 gives ell = 1 and q_hat = q_mu,
    # so every stage is degenerate and the chain acts as the identity
    spec = families.poisson_legendre(2, 1.0)
    tau0 = np.array([1.0, 0.0])
    grid = QuadratureGrid.build(1.0, panels=64)
    q_hat, _ = hilbert.orthonormalize(spec, tau0, grid)
    w = lambda s: families.beta(spec, tau0, s)
    ell = hilbert.build_ell(w, hilbert.target_weight(1.0), grid)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        chain = hilbert.build_chain(q_hat, hilbert.target_directions(2, 1.0), ell, w, grid)
    assert chain.degenerate.all()
    phi = FunctionRep(base=lambda s: np.sin(3 * s))
    image = chain.apply(phi)
    s = np.linspace(0, 1, 50)
    assert np.max(np.abs(image(s) - phi(s))) == 0.0


def test_chain_maps_weighted_targets_to_scores(weibull_spec, weibull_path, weibull_fit, weibull_machinery):
    chain, ell, grid = weibull_machinery
    q_hat, _ = hilbert.orthonormalize(weibull_spec, weibull_fit.theta_hat, grid, path=weibull_path)
    s = np.linspace(0.05, 49.95, 300)
    for k in range(2):
        assert np.max(np.abs(chain.mapped_target(k)(s) - q_hat[k](s))) < 1e-6


def test_chain_preserves_inner_products(weibull_spec, weibull_fit, weibull_machinery):
    chain, ell, grid = weibull_machinery
    w = lambda s: families.beta(weibull_spec, weibull_fit.theta_hat, s)
    rng = np.random.default_rng(13)
    for _ in range(20):
        cf, cg = rng.normal(size=3), rng.normal(size=3)
        f = FunctionRep(base=lambda s, c=cf: np.polyval(c, s / 50.0))
        g = FunctionRep(base=lambda s, c=cg: np.polyval(c, s / 50.0))
        before = hilbert.inner(f, g, w, grid)
        after = hilbert.inner(chain.apply(f), chain.apply(g), w, grid)
        assert abs(after - before) < 1e-8 * max(1.0, abs(before))


def test_chain_mapped_system_orthonormal(weibull_spec, weibull_fit, weibull_machinery):
    chain, ell, grid = weibull_machinery
    w = lambda s: families.beta(weibull_spec, weibull_fit.theta_hat, s)
    images = [FunctionRep(base=chain.mapped_target(k)) for k in range(2)]
    for j in range(2):
        for k in range(2):
            val = hilbert.inner(images[j], images[k], w, grid)
            assert abs(val - (1.0 if j == k else 0.0)) < 1e-6


def test_quadrature_convergence_smooth_weight(weibull_spec, weibull_fit, weibull_path):
    theta = weibull_fit.theta_hat
    w = lambda s: families.beta(weibull_spec, theta, s)
    f = FunctionRep(base=lambda s: np.cos(s / 9.0))
    g = FunctionRep(base=lambda s: (s / 50.0) ** 2)
    coarse = hilbert.inner(f, g, w, QuadratureGrid.build(50.0, panels=256))
    fine = hilbert.inner(f, g, w, QuadratureGrid.build(50.0, panels=512))
    assert abs(coarse - fine) < 1e-9


# ---------------------------------------------------------------------------
# Indicator transport.
# ---------------------------------------------------------------------------

def test_transform_indicator_zero_cutoff(weibull_machinery):
    chain, ell, grid = weibull_machinery
    assert np.allclose(chain.indicator_coefficients(np.array([0.0])), 0.0)
    rep = hilbert.transform_indicator(chain, ell, 0.0)
    assert rep.directions == ()
    s = np.linspace(0.01, 50, 11)  # s = 0 itself has measure zero
    assert np.allclose(rep(s), 0.0)


def test_transform_indicator_norm_preserved(weibull_spec, weibull_fit, weibull_machinery):
    chain, ell, grid = weibull_machinery
    w = lambda s: families.beta(weibull_spec, weibull_fit.theta_hat, s)
    full = hilbert.transform_indicator(chain, ell, 50.0)
    raw = indicator(ell, 50.0)
    assert abs(hilbert.norm2(full, w, grid) - hilbert.norm2(raw, w, grid)) < 1e-8


def test_transform_indicator_matches_generic_apply(weibull_machinery):
    # the O(m)-per-cutoff fast path equals the generic reflection pipeline
    chain, ell, grid = weibull_machinery
    rng = np.random.default_rng(17)
    for t in rng.uniform(1.0, 49.0, size=10):
        fast = hilbert.transform_indicator(chain, ell, t)
        slow = chain.apply(indicator(ell, t))
        s = rng.uniform(0, 50, size=64)
        assert np.max(np.abs(fast(s) - slow(s))) < 1e-10


def test_transform_indicator_expansion_vs_direct_quadrature(weibull_spec, weibull_fit, weibull_machinery):
    # inner products of the transformed indicator against the mapped system,
    # once from the stored expansion and once by direct quadrature
    chain, ell, grid = weibull_machinery
    w = lambda s: families.beta(weibull_spec, weibull_fit.theta_hat, s)
    rng = np.random.default_rng(19)
    for t in rng.uniform(2.0, 48.0, size=10):
        rep = hilbert.transform_indicator(chain, ell, t)
        probe = FunctionRep(base=chain.mapped_target(0))
        direct = hilbert.inner(rep, probe, w, grid)
        # expansion: <ell 1_[0,t], probe> + sum_k c_k <u_k, probe>
        expansion = hilbert.inner(indicator(ell, t), probe, w, grid)
        for coef, direction in rep.directions:
            expansion += coef * hilbert.inner(FunctionRep(base=direction), probe, w, grid)
        assert abs(direct - expansion) < 1e-10
