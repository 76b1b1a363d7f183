"""File ingestion: event-time files, inter-event gap files, mortality rates.

Events files are UTF-8 CSV with a required `time[,status]` header; gap files
hold one positive inter-event waiting time per line and accumulate to
absolute times.  Rates files are `age,rate` CSV with integer ascending ages.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .simulate import ObservedPath, PiecewiseHazard


def read_events(location, gaps=False, time_scale=1.0):
    """Parse an events file; returns (times, status).

    In gap mode every line is one positive inter-event gap (no header); in
    absolute mode a `time[,status]` header is required and status defaults
    to 1.  time_scale multiplies all parsed times.
    """
    text = Path(location).read_text()
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{location}: no data rows")
    if gaps:
        gaps_arr = np.array([float(ln.split(",")[0]) for ln in lines])
        if np.any(gaps_arr <= 0):
            raise ValueError(f"{location}: gap rows must be positive")
        times = np.cumsum(gaps_arr) * time_scale
        return times, np.ones(times.size, dtype=np.int8)
    header = [c.strip().lower() for c in lines[0].split(",")]
    if header[0] != "time":
        raise ValueError(f"{location}: expected a 'time[,status]' header, got {lines[0]!r}")
    has_status = len(header) > 1 and header[1] == "status"
    times, status = [], []
    for ln in lines[1:]:
        cells = ln.split(",")
        times.append(float(cells[0]))
        status.append(int(cells[1]) if has_status and len(cells) > 1 else 1)
    times = np.asarray(times, dtype=float) * time_scale
    status = np.asarray(status, dtype=np.int8)
    if np.any(np.diff(times) <= 0):
        raise ValueError(f"{location}: times must be strictly increasing")
    return times, status


def write_events(location, times, status=None):
    times = np.asarray(times, dtype=float)
    if status is None:
        status = np.ones(times.size, dtype=np.int8)
    rows = [f"{t:.12g},{int(s)}" for t, s in zip(times, status)]
    Path(location).write_text("\n".join(["time,status"] + rows) + "\n")


def read_rates(location):
    """Parse an `age,rate` file; returns (ages, rates) with ages integer ascending."""
    lines = [ln.strip() for ln in Path(location).read_text().splitlines()
             if ln.strip() and not ln.startswith("#")]
    header = [c.strip().lower() for c in lines[0].split(",")]
    if header[:2] != ["age", "rate"]:
        raise ValueError(f"{location}: expected an 'age,rate' header, got {lines[0]!r}")
    ages, rates = [], []
    for ln in lines[1:]:
        a, r = ln.split(",")[:2]
        ages.append(int(a))
        rates.append(float(r))
    ages = np.asarray(ages)
    rates = np.asarray(rates, dtype=float)
    if np.any(np.diff(ages) <= 0):
        raise ValueError(f"{location}: ages must be strictly ascending")
    if np.any(rates < 0):
        raise ValueError(f"{location}: rates must be nonnegative")
    return ages, rates


def rates_to_hazard(ages, rates) -> PiecewiseHazard:
    """Annual death rates at ages a0..aK to a piecewise hazard on excess age.

    Interval [k, k+1) carries the rate of age a0+k; the table covers
    [0, K+1] years past age a0.
    """
    ages = np.asarray(ages)
    breakpoints = np.arange(ages.size + 1, dtype=float)
    return PiecewiseHazard(breakpoints, np.asarray(rates, dtype=float))


def to_path(times, status, n, horizon, meta="") -> ObservedPath:
    times = np.asarray(times, dtype=float)
    if times.size and times[-1] > horizon:
        raise ValueError(f"last time {times[-1]} exceeds the horizon {horizon}")
    return ObservedPath(times, np.asarray(status, dtype=np.int8), n, horizon, meta)


# ---------------------------------------------------------------------------
# Bundled fixtures.
# ---------------------------------------------------------------------------

def _data_file(name) -> Path:
    return resources.files("ppgof.data").joinpath(name)


def load_csr2(n=10000) -> ObservedPath:
    """The bundled 129-failure workstation log (gaps in days over 75 days).

    The nominal size n is arbitrary for fault models: it enters only through
    n*p, so any choice gives the same test.
    """
    with resources.as_file(_data_file("csr2_gaps.txt")) as f:
        gaps_arr, status = read_events(f, gaps=True)
    return to_path(gaps_arr, status, n, 75.0, meta="csr2 software failures")


def load_luxembourg_rates():
    """Bundled cohort mortality table (annual death rates, ages 50..101)."""
    with resources.as_file(_data_file("lux_1970_male_rates.csv")) as f:
        ages, rates = read_rates(f)
    return rates_to_hazard(ages, rates), ages
