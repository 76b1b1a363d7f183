"""Monte-Carlo calibration of the target null distribution.

The target process is the compensated homogeneous Poisson path fitted within
the m-dimensional orthonormal-polynomial intensity embedding.  Its statistic
law depends only on m (and the evaluation grid), so tables are calibrated on
a unit horizon and reused for any T.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import families, gof, mle, simulate
from .errors import TableFormatError

SCHEMA_VERSION = 1
DEFAULT_REPS = 5000
DEFAULT_N_SIM = 1000
_CAL_HORIZON = 1.0
_MAX_FAILURE_FRACTION = 0.01


@dataclass(frozen=True)
class NullTable:
    """Sorted Monte-Carlo samples of the three statistics under the target."""

    m: int
    reps: int
    n_sim: int
    grid_size: int
    seed: int
    ks: np.ndarray
    cvm: np.ndarray
    ad: np.ndarray
    trim: float = 1.0
    failures: int = 0
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        for name in ("ks", "cvm", "ad"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
            if arr.size != self.reps:
                raise TableFormatError(f"{name} sample has length {arr.size}, expected reps={self.reps}")
            if np.any(np.diff(arr) < 0):
                raise TableFormatError(f"{name} sample is not sorted")
        if self.reps < 1:
            raise TableFormatError("table must hold at least one replication")


def _one_replication(m, n_sim, grid_size, seed, rep, trim):
    """Simulate, fit, compensate, and score one target path; None on fit failure."""
    tau0 = np.zeros(m)
    tau0[0] = 1.0
    spec = families.poisson_legendre(m, _CAL_HORIZON)
    for attempt in range(8):
        path = simulate.simulate_path(spec, tau0, n_sim, _CAL_HORIZON, (seed, rep, attempt))
        result = mle.fit_target(path, m)
        if result.converged:
            proc = gof.compensated_process(path, spec, result.theta_hat, grid_size)
            s = gof.statistics(proc, trim=trim)
            return s.ks, s.cvm, s.ad, attempt
    return None


def _replication_batch(args):
    m, n_sim, grid_size, seed, reps_slice, trim = args
    return [_one_replication(m, n_sim, grid_size, seed, r, trim) for r in reps_slice]


def calibrate(m, n_sim=DEFAULT_N_SIM, reps=DEFAULT_REPS, grid_size=gof.DEFAULT_GRID_SIZE,
              seed=0, trim=1.0, workers=None) -> NullTable:
    """Build a null table from `reps` independent target replications.

    Replications whose fit fails are retried with a fresh sub-seed and
    counted; more than 1% total failures aborts the calibration.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if reps < 100:
        raise ValueError("reps must be >= 100 for a usable table")
    rep_ids = list(range(reps))
    if workers and workers > 1:
        chunks = np.array_split(rep_ids, workers * 4)
        args = [(m, n_sim, grid_size, seed, list(chunk), trim) for chunk in chunks if len(chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for batch in pool.map(_replication_batch, args) for r in batch]
    else:
        results = [_one_replication(m, n_sim, grid_size, seed, r, trim) for r in rep_ids]
    if any(r is None for r in results):
        raise RuntimeError("target fit failed after retries; calibration aborted")
    failures = sum(r[3] for r in results)
    if failures > _MAX_FAILURE_FRACTION * reps:
        raise RuntimeError(
            f"{failures} target-fit retries over {reps} replications exceeds the 1% budget"
        )
    arr = np.asarray([r[:3] for r in results], dtype=float)
    return NullTable(
        m=m, reps=reps, n_sim=n_sim, grid_size=grid_size, seed=seed,
        ks=np.sort(arr[:, 0]), cvm=np.sort(arr[:, 1]), ad=np.sort(arr[:, 2]),
        trim=trim, failures=failures,
    )


def save(table: NullTable, location) -> None:
    location = Path(location)
    location.parent.mkdir(parents=True, exist_ok=True)
    tmp = location.with_suffix(location.suffix + ".tmp")
    tmp.write_text(json.dumps(to_payload(table)))
    tmp.replace(location)


def from_payload(payload) -> NullTable:
    """Validate and build a table from a parsed JSON document."""
    if not isinstance(payload, dict) or payload.get("schema_version") != SCHEMA_VERSION:
        raise TableFormatError(
            f"unsupported null-table schema: {payload.get('schema_version') if isinstance(payload, dict) else 'not an object'}"
        )
    try:
        return NullTable(
            m=int(payload["m"]), reps=int(payload["reps"]), n_sim=int(payload["n_sim"]),
            grid_size=int(payload["grid_size"]), seed=int(payload["seed"]),
            ks=payload["ks"], cvm=payload["cvm"], ad=payload["ad"],
            trim=float(payload.get("trim", 1.0)), failures=int(payload.get("failures", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise TableFormatError(f"malformed null table: {exc}") from exc


def to_payload(table: NullTable) -> dict:
    return {
        "schema_version": table.schema_version,
        "m": table.m,
        "reps": table.reps,
        "n_sim": table.n_sim,
        "grid_size": table.grid_size,
        "seed": table.seed,
        "trim": table.trim,
        "failures": table.failures,
        "ks": table.ks.tolist(),
        "cvm": table.cvm.tolist(),
        "ad": table.ad.tolist(),
    }


def load(location) -> NullTable:
    location = Path(location)
    try:
        payload = json.loads(location.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise TableFormatError(f"cannot read null table at {location}: {exc}") from exc
    try:
        return from_payload(payload)
    except TableFormatError as exc:
        raise TableFormatError(f"{location}: {exc}") from None


def quantile(table: NullTable, statistic: str, level: float) -> float:
    """Empirical quantile by the ceiling-index convention on the sorted sample."""
    if statistic not in ("ks", "cvm", "ad"):
        raise ValueError(f"unknown statistic {statistic!r}; expected ks, cvm, or ad")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    sample = getattr(table, statistic)
    idx = max(int(np.ceil(level * table.reps)), 1)
    return float(sample[idx - 1])


def cache_dir() -> Path:
    env = os.environ.get("PPGOF_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "ppgof"


def cache_key(m, n_sim, reps, grid_size, seed, trim=1.0) -> str:
    trim_tag = "" if trim == 1.0 else f"_trim{trim:g}"
    return f"null_m{m}_G{grid_size}_reps{reps}_n{n_sim}_seed{seed}{trim_tag}.json"


def get_or_calibrate(m, n_sim=DEFAULT_N_SIM, reps=DEFAULT_REPS,
                     grid_size=gof.DEFAULT_GRID_SIZE, seed=0, trim=1.0,
                     workers=None, directory=None) -> NullTable:
    """Load a cached table for these parameters or calibrate and cache one."""
    directory = Path(directory) if directory is not None else cache_dir()
    location = directory / cache_key(m, n_sim, reps, grid_size, seed, trim)
    if location.exists():
        try:
            table = load(location)
            if (table.m, table.n_sim, table.reps, table.grid_size, table.seed, table.trim) == (
                m, n_sim, reps, grid_size, seed, trim,
            ):
                return table
        except TableFormatError:
            pass
    table = calibrate(m, n_sim, reps, grid_size, seed, trim, workers)
    save(table, location)
    return table
