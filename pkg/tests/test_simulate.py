import numpy as np
import pytest
from scipy.stats import ks_2samp

from ppgof import families, simulate
from ppgof.errors import CoverageError, UnsupportedFamilyError
from ppgof.simulate import ObservedPath, PiecewiseHazard

WEIBULL_F50 = 0.9793183752165216224398072500584730866191  # 40-digit closed form
JM_EXPECTED_EVENTS = 632.1205588285576784044762298385391326  # 1000 * (1 - e^-1)


def test_reproducible_bit_identical():
    spec = families.aalen_weibull(t0=50.0)
    a = simulate.simulate_path(spec, [86.0, 9.0], 500, 50.0, seed=42)
    b = simulate.simulate_path(spec, [86.0, 9.0], 500, 50.0, seed=42)
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.status, b.status)
    c = simulate.simulate_path(spec, [86.0, 9.0], 500, 50.0, seed=43)
    assert not np.array_equal(a.times, c.times)


def test_times_within_window_and_status_flags():
    cens = families.aalen_weibull_censored(t0=50.0, censor_prob=0.4, censor_rate=1 / 15)
    specs = [
        (families.aalen_weibull(t0=50.0), [86.0, 9.0], 50.0),
        (cens, [86.0, 9.0], 50.0),
        (families.jelinski_moranda(), [1.0, 0.1], 1.0),
        (families.mixture_cure(), [0.8, 1.2, 0.75], 1.0),
        (families.littlewood(), [4.0, 1.0, 0.1], 1.0),
        (families.poisson_legendre(2, 1.0), [1.0, 0.0], 1.0),
    ]
    for spec, theta, T in specs:
        path = simulate.simulate_path(spec, theta, 800, T, seed=1)
        assert path.times.size == 0 or (path.times[0] > 0 and path.times[-1] <= T)
        assert np.all(np.diff(path.times) > 0)
        if spec.is_censored:
            assert np.any(path.status == 0)
        else:
            assert np.all(path.status == 1)
        if spec.family is not families.Family.POISSON_LEGENDRE:
            assert path.n_events <= path.n


def test_weibull_event_count_mean_matches_cdf_oracle():
    spec = families.aalen_weibull(t0=50.0)
    counts = [simulate.simulate_path(spec, [86.0, 9.0], 1000, 50.0, seed=s).n_events
              for s in range(200)]
    mean = np.mean(counts)
    sd = np.sqrt(1000 * WEIBULL_F50 * (1 - WEIBULL_F50) / 200)
    assert abs(mean - 1000 * WEIBULL_F50) < 3 * sd


def test_poisson_count_mean():
    spec = families.poisson_legendre(2, 1.0)
    counts = [simulate.simulate_path(spec, [1.0, 0.0], 1000, 1.0, seed=s).times.size
              for s in range(200)]
    assert abs(np.mean(counts) - 1000) < 3 * np.sqrt(1000 / 200)


def test_poisson_requires_tau0():
    spec = families.poisson_legendre(2, 1.0)
    with pytest.raises(UnsupportedFamilyError):
        simulate.simulate_path(spec, [1.0, 0.1], 1000, 1.0, seed=0)


def test_jm_event_count_mean():
    spec = families.jelinski_moranda()
    counts = [simulate.simulate_path(spec, [1.0, 0.1], 10000, 1.0, seed=s).n_events
              for s in range(200)]
    p = JM_EXPECTED_EVENTS / 1000
    sd = np.sqrt(1000 * p * (1 - p) / 200)
    assert abs(np.mean(counts) - JM_EXPECTED_EVENTS) < 3 * sd


def test_fixed_vs_binomial_susceptibles():
    spec = families.mixture_cure()
    fixed_counts = {simulate.simulate_path(spec, [0.8, 1.2, 0.75], 1000, 50.0, seed=s).n_events
                    for s in range(20)}
    # with T large every susceptible eventually fails: the fixed rule is exact
    assert fixed_counts == {750}
    binom = [simulate.simulate_path(spec, [0.8, 1.2, 0.75], 1000, 50.0, seed=s,
                                    susceptibles="binomial").n_events for s in range(20)]
    assert len(set(binom)) > 1


def test_censored_structure():
    spec = families.aalen_weibull_censored(t0=50.0, censor_prob=0.4, censor_rate=1 / 15)
    path = simulate.simulate_path(spec, [86.0, 9.0], 2000, 50.0, seed=3)
    frac_censored = np.mean(path.status == 0)
    assert 0.2 < frac_censored < 0.5
    assert path.n_events + np.sum(path.status == 0) == path.times.size


def test_piecewise_exponential_special_case():
    hz = PiecewiseHazard(np.array([0.0, 2000.0]), np.array([0.25]))
    draws = simulate.simulate_piecewise(hz, 100000, 2000.0, seed=9)
    assert abs(np.mean(draws.times) - 4.0) < 3 * 4.0 / np.sqrt(100000)


def test_piecewise_zero_rate_interval_has_no_events():
    hz = PiecewiseHazard(np.array([0.0, 5.0, 100.0]), np.array([0.0, 0.5]))
    draws = simulate.simulate_piecewise(hz, 20000, 100.0, seed=9)
    assert draws.times[0] > 5.0


def test_piecewise_atom_at_last_breakpoint():
    hz = PiecewiseHazard(np.array([0.0, 1.0]), np.array([2.0]))
    draws = simulate.simulate_piecewise(hz, 5000, 1.0, seed=13)
    # P(E > H_total) = e^-2 of the population collapses onto the endpoint
    at_end = np.sum(draws.times > 1.0 - 1e-9)
    assert abs(at_end - 5000 * np.exp(-2)) < 3 * np.sqrt(5000 * np.exp(-2))
    assert draws.times[-1] <= 1.0
    assert np.all(np.diff(draws.times) > 0)


def test_piecewise_coverage_error():
    hz = PiecewiseHazard(np.array([0.0, 10.0]), np.array([0.1]))
    with pytest.raises(CoverageError):
        simulate.simulate_piecewise(hz, 100, 20.0, seed=0)


def test_piecewise_matches_rejection_sampling_oracle():
    # mortality-style table; oracle draws by rejection from the same density
    ages = np.arange(0, 53, dtype=float)
    rates = 0.006 * np.exp(0.075 * ages[:-1])
    hz = PiecewiseHazard(ages, rates)
    draws = simulate.simulate_piecewise(hz, 10000, 50.0, seed=21)

    rng = np.random.default_rng(2121)
    cum = hz.cumulative()

    def dens(t):
        idx = np.clip(np.searchsorted(ages, t, side="right") - 1, 0, rates.size - 1)
        H = cum[idx] + (t - ages[idx]) * rates[idx]
        return rates[idx] * np.exp(-H)

    bound = float(np.max(dens(np.linspace(0, 50, 2001)))) * 1.05
    accepted = []
    while len(accepted) < 10000:
        t = rng.uniform(0, 50, size=4 * 10000)
        u = rng.uniform(0, bound, size=t.size)
        accepted.extend(t[u < dens(t)].tolist())
    oracle = np.array(accepted[:10000])
    assert ks_2samp(draws.times, oracle).pvalue > 0.01


def test_path_validation():
    with pytest.raises(ValueError):
        ObservedPath(np.array([1.0, 1.0]), np.array([1, 1]), 10, 2.0)
    with pytest.raises(ValueError):
        ObservedPath(np.array([1.0, 3.0]), np.array([1, 1]), 10, 2.0)
    with pytest.raises(ValueError):
        ObservedPath(np.array([1.0]), np.array([2]), 10, 2.0)
    with pytest.raises(ValueError):
        PiecewiseHazard(np.array([0.0, 1.0]), np.array([-0.5]))
