"""Pydantic request/response models for the HTTP surface."""

from __future__ import annotations

from pydantic import BaseModel, Field


class ModelField(BaseModel):
    """A parametric intensity family selector."""

    family: str = Field(description="weibull | gompertz | weibull-censored | cure | jm | littlewood | poisson")
    t0: float = 0.0
    m: int | None = None
    censor_prob: float | None = None
    censor_rate: float | None = None


class PathPayload(BaseModel):
    times: list[float]
    status: list[int] | None = None
    n: int
    horizon: float
    meta: str = ""


class SimulateRequest(BaseModel):
    model: ModelField
    params: list[float]
    n: int
    horizon: float
    seed: int = 0
    susceptibles: str = "fixed"


class SimulateResponse(BaseModel):
    path: PathPayload


class FitRequest(BaseModel):
    model: ModelField
    path: PathPayload


class FitResponse(BaseModel):
    theta_hat: list[float]
    loglik: float
    iterations: int
    converged: bool
    np_hat: float | None = None
    diagnostics: dict


class TableParams(BaseModel):
    m: int
    reps: int = 5000
    n_sim: int = 1000
    grid_size: int = 500
    seed: int = 0
    trim: float = 1.0


class TableSummary(BaseModel):
    key: str
    m: int
    reps: int
    n_sim: int
    grid_size: int
    seed: int
    trim: float
    quantiles: dict


class TestRequest(BaseModel):
    model: ModelField
    path: PathPayload
    alpha: float = 0.05
    grid_size: int = 500
    trim: float = 1.0
    table: TableParams | None = None
    table_data: dict | None = None  # inline pre-calibrated table document


class CalibrateRequest(TableParams):
    include_samples: bool = False


class CalibrateResponse(BaseModel):
    summary: TableSummary
    table_data: dict | None = None


class TestResponse(BaseModel):
    report: dict


class StudyRequest(BaseModel):
    study_id: str
    reps: int | None = None
    n: int | None = None
    horizon: float | None = None
    seed: int = 0
    output_dir: str | None = None
    grid_size: int = 500
    null_reps: int = 2000
    null_n_sim: int = 1000
    null_seed: int = 2025
    trim: float = 1.0


class StudyResponse(BaseModel):
    result: dict


class RatesPayload(BaseModel):
    ages: list[int]
    rates: list[float]


class IngestRatesRequest(BaseModel):
    rates: RatesPayload
    n: int
    horizon: float
    seed: int = 0


class HealthResponse(BaseModel):
    status: str
    version: str
