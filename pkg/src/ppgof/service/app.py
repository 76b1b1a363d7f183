"""FastAPI service wrapping the testing pipeline.

Null-table calibration is the expensive step, so the service keeps calibrated
tables in an in-memory cache backed by the on-disk cache directory; repeated
test requests against the same parameter dimension are then cheap.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__, dataio, families, gof, mle, nulldist, simulate, studies
from ..errors import PpgofError
from . import schemas


def _spec_from(model: schemas.ModelField, horizon=None) -> families.ModelSpec:
    return families.spec_from_name(
        model.family, t0=model.t0, m=model.m, horizon=horizon,
        censor_prob=model.censor_prob, censor_rate=model.censor_rate,
    )


def _path_from(payload: schemas.PathPayload) -> simulate.ObservedPath:
    times = np.asarray(payload.times, dtype=float)
    status = (np.asarray(payload.status, dtype=np.int8)
              if payload.status is not None else np.ones(times.size, dtype=np.int8))
    return simulate.ObservedPath(times, status, payload.n, payload.horizon, payload.meta)


def _path_payload(path: simulate.ObservedPath) -> schemas.PathPayload:
    return schemas.PathPayload(
        times=[float(t) for t in path.times],
        status=[int(s) for s in path.status],
        n=path.n, horizon=path.T, meta=path.meta,
    )


def _table_summary(table: nulldist.NullTable) -> schemas.TableSummary:
    return schemas.TableSummary(
        key=nulldist.cache_key(table.m, table.n_sim, table.reps, table.grid_size,
                               table.seed, table.trim),
        m=table.m, reps=table.reps, n_sim=table.n_sim, grid_size=table.grid_size,
        seed=table.seed, trim=table.trim,
        quantiles={
            stat: {str(lvl): nulldist.quantile(table, stat, lvl) for lvl in (0.90, 0.95, 0.99)}
            for stat in ("ks", "cvm", "ad")
        },
    )


def create_app() -> FastAPI:
    app = FastAPI(title="ppgof", version=__version__,
                  description="Goodness-of-fit testing for point-process intensity models")
    app.state.tables = {}

    def table_for(params: schemas.TableParams) -> nulldist.NullTable:
        key = nulldist.cache_key(params.m, params.n_sim, params.reps,
                                 params.grid_size, params.seed, params.trim)
        if key not in app.state.tables:
            app.state.tables[key] = nulldist.get_or_calibrate(
                params.m, n_sim=params.n_sim, reps=params.reps,
                grid_size=params.grid_size, seed=params.seed, trim=params.trim,
            )
        return app.state.tables[key]

    @app.exception_handler(PpgofError)
    async def _domain_error(request, exc):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=422, content={"detail": str(exc), "kind": type(exc).__name__})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate_endpoint(req: schemas.SimulateRequest):
        spec = _spec_from(req.model, horizon=req.horizon)
        path = simulate.simulate_path(spec, np.asarray(req.params), req.n, req.horizon,
                                      req.seed, susceptibles=req.susceptibles)
        return schemas.SimulateResponse(path=_path_payload(path))

    @app.post("/fit", response_model=schemas.FitResponse)
    def fit_endpoint(req: schemas.FitRequest):
        path = _path_from(req.path)
        spec = _spec_from(req.model, horizon=path.T)
        result = mle.fit(spec, path)
        np_hat = float(path.n * result.theta_hat[-1]) if spec.is_fault else None
        return schemas.FitResponse(
            theta_hat=[float(v) for v in result.theta_hat],
            loglik=result.loglik, iterations=result.iterations,
            converged=result.converged, np_hat=np_hat,
            diagnostics={k: (v if isinstance(v, (int, float, str, bool)) else str(v))
                         for k, v in result.diagnostics.items()},
        )

    @app.post("/test", response_model=schemas.TestResponse)
    def test_endpoint(req: schemas.TestRequest):
        path = _path_from(req.path)
        spec = _spec_from(req.model, horizon=path.T)
        table = None
        if req.table_data is not None:
            table = nulldist.from_payload(req.table_data)
        elif req.table is not None:
            if req.table.m != spec.m:
                raise HTTPException(422, f"table m={req.table.m} does not match model m={spec.m}")
            table = table_for(req.table)
        report = gof.run_test(path, spec, table=table, grid_size=req.grid_size,
                              alpha=req.alpha, trim=req.trim)
        return schemas.TestResponse(report=report.to_dict())

    @app.post("/calibrate", response_model=schemas.CalibrateResponse)
    def calibrate_endpoint(req: schemas.CalibrateRequest):
        table = table_for(req)
        return schemas.CalibrateResponse(
            summary=_table_summary(table),
            table_data=nulldist.to_payload(table) if req.include_samples else None,
        )

    @app.get("/tables", response_model=list[schemas.TableSummary])
    def tables_endpoint():
        return [_table_summary(t) for t in app.state.tables.values()]

    @app.post("/study", response_model=schemas.StudyResponse)
    def study_endpoint(req: schemas.StudyRequest):
        spec = studies.StudySpec(
            study_id=req.study_id, reps=req.reps, n=req.n, T=req.horizon,
            seed=req.seed, output_dir=req.output_dir, grid_size=req.grid_size,
            null_reps=req.null_reps, null_n_sim=req.null_n_sim,
            null_seed=req.null_seed, trim=req.trim,
        )
        result = studies.run_study(spec)
        return schemas.StudyResponse(result=result.to_dict())

    @app.post("/ingest-rates", response_model=schemas.SimulateResponse)
    def ingest_rates_endpoint(req: schemas.IngestRatesRequest):
        hazard = dataio.rates_to_hazard(np.asarray(req.rates.ages), np.asarray(req.rates.rates))
        path = simulate.simulate_piecewise(hazard, req.n, req.horizon, req.seed)
        return schemas.SimulateResponse(path=_path_payload(path))

    return app
