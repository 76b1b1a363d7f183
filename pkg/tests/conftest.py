import os

import numpy as np
import pytest

from ppgof import families, nulldist, simulate


@pytest.fixture(scope="session", autouse=True)
def _isolated_cache(tmp_path_factory):
    cache = tmp_path_factory.mktemp("table-cache")
    old = os.environ.get("PPGOF_CACHE_DIR")
    os.environ["PPGOF_CACHE_DIR"] = str(cache)
    yield cache
    if old is None:
        os.environ.pop("PPGOF_CACHE_DIR", None)
    else:
        os.environ["PPGOF_CACHE_DIR"] = old


@pytest.fixture(scope="session")
def weibull_spec():
    return families.aalen_weibull(t0=50.0)


@pytest.fixture(scope="session")
def weibull_theta():
    return np.array([86.0, 9.0])


@pytest.fixture(scope="session")
def weibull_path(weibull_spec, weibull_theta):
    return simulate.simulate_path(weibull_spec, weibull_theta, 1000, 50.0, seed=7)


@pytest.fixture(scope="session")
def jm_path():
    return simulate.simulate_path(families.jelinski_moranda(), [1.0, 0.1], 10000, 1.0, seed=5)


@pytest.fixture(scope="session")
def table_m2_small():
    return nulldist.calibrate(2, n_sim=1000, reps=500, seed=11)


@pytest.fixture(scope="session")
def table_m3_small():
    return nulldist.calibrate(3, n_sim=1000, reps=500, seed=11)
