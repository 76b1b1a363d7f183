import json

import numpy as np
import pytest
from scipy.stats import ks_2samp

from ppgof import nulldist
from ppgof.errors import TableFormatError


def test_deterministic(table_m2_small):
    again = nulldist.calibrate(2, n_sim=1000, reps=500, seed=11)
    assert np.array_equal(table_m2_small.ks, again.ks)
    assert np.array_equal(table_m2_small.cvm, again.cvm)
    assert np.array_equal(table_m2_small.ad, again.ad)


def test_save_load_roundtrip(tmp_path, table_m2_small):
    loc = tmp_path / "table.json"
    nulldist.save(table_m2_small, loc)
    loaded = nulldist.load(loc)
    for name in ("ks", "cvm", "ad"):
        assert np.array_equal(getattr(loaded, name), getattr(table_m2_small, name))
    assert (loaded.m, loaded.reps, loaded.n_sim, loaded.grid_size, loaded.seed) == (
        table_m2_small.m, table_m2_small.reps, table_m2_small.n_sim,
        table_m2_small.grid_size, table_m2_small.seed,
    )


def test_truncated_file_rejected(tmp_path, table_m2_small):
    loc = tmp_path / "table.json"
    nulldist.save(table_m2_small, loc)
    text = loc.read_text()
    loc.write_text(text[: len(text) // 2])
    with pytest.raises(TableFormatError):
        nulldist.load(loc)


def test_wrong_schema_rejected(tmp_path, table_m2_small):
    loc = tmp_path / "table.json"
    payload = nulldist.to_payload(table_m2_small)
    payload["schema_version"] = 99
    loc.write_text(json.dumps(payload))
    with pytest.raises(TableFormatError):
        nulldist.load(loc)


def test_empty_table_rejected():
    with pytest.raises(TableFormatError):
        nulldist.NullTable(m=2, reps=0, n_sim=10, grid_size=10, seed=0,
                           ks=np.array([]), cvm=np.array([]), ad=np.array([]))


def test_unsorted_sample_rejected(table_m2_small):
    with pytest.raises(TableFormatError):
        nulldist.NullTable(m=2, reps=table_m2_small.reps, n_sim=1000, grid_size=500, seed=11,
                           ks=table_m2_small.ks[::-1], cvm=table_m2_small.cvm,
                           ad=table_m2_small.ad)


def test_calibrate_validates_arguments():
    with pytest.raises(ValueError):
        nulldist.calibrate(0, reps=100)
    with pytest.raises(ValueError):
        nulldist.calibrate(2, reps=50)


def test_quantile_conventions(table_m2_small):
    reps = table_m2_small.reps
    # level k/reps picks the k-th order statistic
    for k in (1, 17, reps // 2, reps - 1):
        assert nulldist.quantile(table_m2_small, "ks", k / reps) == table_m2_small.ks[k - 1]
    # level -> 0 picks the sample minimum
    assert nulldist.quantile(table_m2_small, "cvm", 1e-9) == table_m2_small.cvm[0]
    with pytest.raises(ValueError):
        nulldist.quantile(table_m2_small, "sup", 0.9)
    with pytest.raises(ValueError):
        nulldist.quantile(table_m2_small, "ks", 0.0)


def test_quantiles_monotone_in_level(table_m2_small):
    levels = np.linspace(0.01, 0.99, 33)
    for name in ("ks", "cvm", "ad"):
        qs = [nulldist.quantile(table_m2_small, name, lvl) for lvl in levels]
        assert np.all(np.diff(qs) >= 0)


def test_dimension_changes_the_law(table_m2_small, table_m3_small):
    d = ks_2samp(table_m2_small.ks, table_m3_small.ks)
    assert d.statistic > 0.05
    assert d.pvalue < 0.01


def test_population_size_does_not_change_the_law():
    a = nulldist.calibrate(2, n_sim=500, reps=1000, seed=17)
    b = nulldist.calibrate(2, n_sim=2000, reps=1000, seed=18)
    for name in ("ks", "cvm", "ad"):
        assert ks_2samp(getattr(a, name), getattr(b, name)).pvalue > 0.01


def test_cache_roundtrip(tmp_path):
    t1 = nulldist.get_or_calibrate(2, n_sim=400, reps=120, seed=3, directory=tmp_path)
    key = nulldist.cache_key(2, 400, 120, 500, 3)
    assert (tmp_path / key).exists()
    t2 = nulldist.get_or_calibrate(2, n_sim=400, reps=120, seed=3, directory=tmp_path)
    assert np.array_equal(t1.ks, t2.ks)
