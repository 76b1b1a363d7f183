"""Scripted Monte-Carlo studies and dataset analyses.

Each simulation study runs `reps` full pipelines (simulate, fit, transform,
score), counts rejections against the calibrated target quantiles, and emits
machine-readable CSVs: one replications file per arm plus one ECDF file per
statistic per processing stage, each holding the tested arm and the target
arm.  The two dataset studies (a mortality cohort, a software failure log)
run the fit-and-test report for their competing model pairs instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dataio, families, gof, mle, nulldist, simulate
from .errors import PpgofError
from .families import ModelSpec
from .simulate import ObservedPath

LEVELS = (0.10, 0.05, 0.01)
STATS = ("ks", "cvm", "ad")
SIMULATION_STUDIES = ("table1", "table2", "table_cens", "table_cure", "power_aalen", "power_jm")
DATASET_STUDIES = ("luxembourg", "csr2")
STUDY_IDS = SIMULATION_STUDIES + DATASET_STUDIES
_MAX_EXCLUDED_FRACTION = 0.02


@dataclass(frozen=True)
class StudyArm:
    name: str
    true_spec: ModelSpec
    true_params: tuple
    fitted_spec: ModelSpec


@dataclass
class StudySpec:
    """Configuration of one study; defaults reproduce the published setups."""

    study_id: str
    reps: int | None = None
    n: int | None = None
    T: float | None = None
    seed: int = 0
    true_params: tuple | None = None
    fitted_family: str | None = None
    output_dir: str | None = None
    grid_size: int = gof.DEFAULT_GRID_SIZE
    null_reps: int = nulldist.DEFAULT_REPS
    null_n_sim: int = nulldist.DEFAULT_N_SIM
    null_seed: int = 2025
    trim: float = 1.0
    susceptibles: str = "fixed"

    def __post_init__(self):
        if self.study_id not in STUDY_IDS:
            raise ValueError(f"unknown study id {self.study_id!r}; expected one of {STUDY_IDS}")


@dataclass
class ArmResult:
    name: str
    fitted_family: str
    m: int
    reps_done: int
    excluded: list
    counts: dict
    expected: dict
    transformed: dict
    untransformed: dict

    def to_dict(self):
        return {
            "name": self.name,
            "fitted_family": self.fitted_family,
            "m": self.m,
            "reps_done": self.reps_done,
            "excluded": self.excluded,
            "counts": {s: {str(l): c for l, c in per.items()} for s, per in self.counts.items()},
            "expected": {str(l): e for l, e in self.expected.items()},
        }


@dataclass
class StudyResult:
    study_id: str
    seed: int
    arms: dict = field(default_factory=dict)
    reports: dict = field(default_factory=dict)
    output_dir: str | None = None

    def to_dict(self):
        out = {"study_id": self.study_id, "seed": self.seed, "output_dir": self.output_dir}
        if self.arms:
            out["arms"] = {name: arm.to_dict() for name, arm in self.arms.items()}
        if self.reports:
            out["reports"] = {
                name: (rep.to_dict() if isinstance(rep, gof.TestReport) else rep)
                for name, rep in self.reports.items()
            }
        return out


def _study_defaults(study_id):
    w50 = families.aalen_weibull(t0=50.0)
    g50 = families.aalen_gompertz(t0=50.0)
    if study_id == "table1":
        return dict(reps=1000, n=1000, T=50.0,
                    arms=[StudyArm("weibull", w50, (86.0, 9.0), w50)])
    if study_id == "table2":
        return dict(reps=1000, n=10000, T=1.0, arms=[
            StudyArm("jm", families.jelinski_moranda(), (1.0, 0.1), families.jelinski_moranda()),
            StudyArm("littlewood", families.littlewood(), (4.0, 1.0, 0.1), families.littlewood()),
        ])
    if study_id == "table_cens":
        cens = families.aalen_weibull_censored(t0=50.0, censor_prob=0.4, censor_rate=1.0 / 15.0)
        return dict(reps=1000, n=1000, T=50.0,
                    arms=[StudyArm("weibull_censored", cens, (86.0, 9.0), cens)])
    if study_id == "table_cure":
        cure = families.mixture_cure()
        return dict(reps=1000, n=1000, T=1.0,
                    arms=[StudyArm("cure", cure, (0.8, 1.2, 0.75), cure)])
    if study_id == "power_aalen":
        return dict(reps=1000, n=1000, T=50.0,
                    arms=[StudyArm("gompertz_on_weibull", w50, (86.0, 9.0), g50)])
    if study_id == "power_jm":
        return dict(reps=1000, n=10000, T=1.0, arms=[
            StudyArm("jm_on_littlewood", families.littlewood(), (4.0, 1.0, 0.1),
                     families.jelinski_moranda()),
        ])
    raise ValueError(study_id)


def _fmt(x):
    return f"{x:.12g}"


def _write_csv(location: Path, header, rows):
    location.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    lines += [",".join(str(c) for c in row) for row in rows]
    location.write_text("\n".join(lines) + "\n")


def _write_ecdf(location: Path, tested, target):
    rows = []
    for arm_name, sample in (("tested", tested), ("target", target)):
        xs = np.sort(np.asarray(sample, dtype=float))
        k = xs.size
        rows += [(_fmt(x), _fmt((i + 1) / k), arm_name) for i, x in enumerate(xs)]
    _write_csv(location, ("value", "ecdf", "arm"), rows)


def _run_arm(study: StudySpec, arm: StudyArm, arm_idx, table, out_dir: Path | None) -> ArmResult:
    reps, n, T = study.reps, study.n, study.T
    quantiles = {s: {lvl: nulldist.quantile(table, s, 1.0 - lvl) for lvl in LEVELS} for s in STATS}
    samples_t = {s: [] for s in STATS}
    samples_u = {s: [] for s in STATS}
    rows = []
    excluded = []
    for rep in range(reps):
        path = simulate.simulate_path(
            arm.true_spec, np.asarray(arm.true_params), n, T,
            (study.seed, arm_idx, rep), susceptibles=study.susceptibles,
        )
        try:
            result = mle.fit(arm.fitted_spec, path)
            theta = result.theta_hat
            proc_u = gof.compensated_process(path, arm.fitted_spec, theta, study.grid_size)
            chain, ell, _ = gof.build_transform(path, arm.fitted_spec, theta, study.grid_size)
            proc_t = gof.transform(path, arm.fitted_spec, theta, chain, ell, study.grid_size)
        except (PpgofError, OverflowError, FloatingPointError, np.linalg.LinAlgError) as exc:
            excluded.append({"rep": rep, "error": f"{type(exc).__name__}: {exc}"})
            if len(excluded) > _MAX_EXCLUDED_FRACTION * reps:
                raise RuntimeError(
                    f"{len(excluded)} replication failures in arm {arm.name} exceed the 2% budget"
                ) from exc
            continue
        st = gof.statistics(proc_t, trim=study.trim)
        su = gof.statistics(proc_u, trim=study.trim)
        for s in STATS:
            samples_t[s].append(getattr(st, s))
            samples_u[s].append(getattr(su, s))
        rejects = {lvl: {s: int(getattr(st, s) > quantiles[s][lvl]) for s in STATS} for lvl in LEVELS}
        rows.append((
            rep, _fmt(st.ks), _fmt(st.cvm), _fmt(st.ad),
            max(rejects[0.10].values()), max(rejects[0.05].values()), max(rejects[0.01].values()),
        ))
    counts = {
        s: {lvl: int(np.sum(np.asarray(samples_t[s]) > quantiles[s][lvl])) for lvl in LEVELS}
        for s in STATS
    }
    done = len(samples_t["ks"])
    expected = {lvl: lvl * done for lvl in LEVELS}
    if out_dir is not None:
        arm_dir = out_dir / arm.name
        _write_csv(
            arm_dir / "replications.csv",
            ("rep", "stat_ks", "stat_cvm", "stat_ad", "reject10", "reject05", "reject01"),
            rows,
        )
        for s in STATS:
            _write_ecdf(arm_dir / f"ecdf_{s}_transformed.csv", samples_t[s], getattr(table, s))
            _write_ecdf(arm_dir / f"ecdf_{s}_untransformed.csv", samples_u[s], getattr(table, s))
    return ArmResult(
        name=arm.name, fitted_family=arm.fitted_spec.family.value, m=arm.fitted_spec.m,
        reps_done=done, excluded=excluded, counts=counts, expected=expected,
        transformed={s: np.asarray(v) for s, v in samples_t.items()},
        untransformed={s: np.asarray(v) for s, v in samples_u.items()},
    )


def run_study(study: StudySpec, cache_dir=None) -> StudyResult:
    """Execute a study; returns counts/samples and writes CSVs if requested."""
    if study.study_id in DATASET_STUDIES:
        return _run_dataset_study(study, cache_dir)
    defaults = _study_defaults(study.study_id)
    study.reps = study.reps or defaults["reps"]
    study.n = study.n or defaults["n"]
    study.T = study.T or defaults["T"]
    arms = defaults["arms"]
    if study.true_params is not None:
        arms = [StudyArm(a.name, a.true_spec, tuple(study.true_params), a.fitted_spec) for a in arms]
    out_dir = Path(study.output_dir) if study.output_dir else None
    result = StudyResult(study.study_id, study.seed, output_dir=study.output_dir)
    for arm_idx, arm in enumerate(arms):
        table = nulldist.get_or_calibrate(
            arm.fitted_spec.m, n_sim=study.null_n_sim, reps=study.null_reps,
            grid_size=study.grid_size, seed=study.null_seed, trim=study.trim,
            directory=cache_dir,
        )
        result.arms[arm.name] = _run_arm(study, arm, arm_idx, table, out_dir)
    if out_dir is not None:
        (out_dir / "study.json").write_text(json.dumps(result.to_dict(), indent=2, sort_keys=True))
    return result


# ---------------------------------------------------------------------------
# Dataset analyses.
# ---------------------------------------------------------------------------

def analyze_dataset(path: ObservedPath, specs, tables, grid_size=gof.DEFAULT_GRID_SIZE,
                    alpha=0.05, trim=1.0) -> dict:
    """Fit and test each candidate family on a fixed path.

    `tables` maps parameter dimension m to a NullTable.  A family whose fit
    fails is reported as {"error": ...}; the others proceed.
    """
    reports = {}
    for spec in specs:
        name = spec.family.value
        try:
            table = tables[spec.m]
            reports[name] = gof.run_test(path, spec, table=table, grid_size=grid_size,
                                         alpha=alpha, trim=trim)
        except (PpgofError, KeyError, OverflowError, np.linalg.LinAlgError) as exc:
            reports[name] = {"error": f"{type(exc).__name__}: {exc}"}
    return reports


def fitted_curve(spec: ModelSpec, theta, T, points=400):
    """Large-population limit of N(t)/n under the fitted model."""
    ts = np.linspace(0.0, T, points + 1)
    F = families.cdf(spec, np.asarray(theta), ts)
    if spec.is_fault:
        F = theta[-1] * F
    return ts, F


def observed_curve(path: ObservedPath, points=400):
    ts = np.linspace(0.0, path.T, points + 1)
    return ts, path.count_events(ts) / path.n


def _write_fit_curves(out_dir: Path, path: ObservedPath, specs, reports):
    ts, obs = observed_curve(path)
    _write_csv(out_dir / "observed.csv", ("t", "value"),
               [(_fmt(t), _fmt(v)) for t, v in zip(ts, obs)])
    rows = []
    for spec in specs:
        report = reports.get(spec.family.value)
        if not isinstance(report, gof.TestReport):
            continue
        tf, F = fitted_curve(spec, np.asarray(report.theta_hat), path.T)
        rows += [(_fmt(t), _fmt(v), spec.family.value) for t, v in zip(tf, F)]
    _write_csv(out_dir / "fitted.csv", ("t", "value", "model"), rows)


def _run_dataset_study(study: StudySpec, cache_dir=None) -> StudyResult:
    result = StudyResult(study.study_id, study.seed, output_dir=study.output_dir)
    if study.study_id == "csr2":
        path = dataio.load_csr2(n=study.n or 10000)
        specs = [families.jelinski_moranda(), families.littlewood()]
    else:
        hazard, ages = dataio.load_luxembourg_rates()
        n = study.n or 1788
        T = study.T or 50.0
        path = simulate.simulate_piecewise(hazard, n, T, seed=study.seed)
        specs = [families.aalen_weibull(t0=50.0), families.aalen_gompertz(t0=50.0)]
    tables = {
        m: nulldist.get_or_calibrate(m, n_sim=study.null_n_sim, reps=study.null_reps,
                                     grid_size=study.grid_size, seed=study.null_seed,
                                     trim=study.trim, directory=cache_dir)
        for m in sorted({s.m for s in specs})
    }
    result.reports = analyze_dataset(path, specs, tables, study.grid_size, trim=study.trim)
    if study.output_dir:
        out_dir = Path(study.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_fit_curves(out_dir, path, specs, result.reports)
        (out_dir / "study.json").write_text(json.dumps(result.to_dict(), indent=2, sort_keys=True))
    return result
