"""Command-line client for the testing service.

Every command is a thin client of the HTTP API: by default requests run
against an in-process instance of the app (no socket, no running server);
pass --server to talk to a remote instance started with `ppgof serve`.
File parsing and writing stay on the client side.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import dataio, nulldist
from .errors import PpgofError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECTED = 2


class ClientError(Exception):
    pass


class ServiceClient:
    def __init__(self, server: str | None = None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=7200.0)
        else:
            import warnings

            with warnings.catch_warnings():
                # starlette tags its in-process client as test-only; here it
                # is the deliberate no-socket local transport
                warnings.simplefilter("ignore", DeprecationWarning)
                from starlette.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app())

    def post(self, route: str, payload: dict) -> dict:
        response = self._client.post(route, json=payload)
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except Exception:
                detail = response.text
            raise ClientError(f"{route} failed: {detail}")
        return response.json()


def _fail(stage: str, message: str):
    click.echo(f"error [{stage}]: {message}", err=True)
    sys.exit(EXIT_ERROR)


def _model_payload(model, t0, m, censor_prob, censor_rate):
    return {"family": model, "t0": t0, "m": m,
            "censor_prob": censor_prob, "censor_rate": censor_rate}


def _load_path_payload(data, gaps, horizon, n, time_scale, meta=""):
    try:
        times, status = dataio.read_events(data, gaps=gaps, time_scale=time_scale)
    except FileNotFoundError:
        _fail("read", f"cannot open data file: {data}")
    except ValueError as exc:
        _fail("parse", str(exc))
    if times.size and times[-1] > horizon:
        _fail("parse", f"last event time {times[-1]:g} exceeds the horizon {horizon:g}")
    return {"times": [float(t) for t in times], "status": [int(s) for s in status],
            "n": n, "horizon": horizon, "meta": meta}


_model_option = click.option("--model", required=True,
                             help="weibull | gompertz | weibull-censored | cure | jm | littlewood | poisson")
_server_option = click.option("--server", default=None,
                              help="base URL of a running service; default runs in-process")


@click.group()
def main():
    """Goodness-of-fit testing for point-process intensity models."""


@main.command()
@_model_option
@click.option("--params", required=True, help="comma-separated parameter vector, e.g. '86,9'")
@click.option("--t0", default=0.0, show_default=True)
@click.option("--n", required=True, type=int)
@click.option("--horizon", required=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--censor-prob", default=None, type=float)
@click.option("--censor-rate", default=None, type=float)
@click.option("--m", default=None, type=int, help="dimension for the poisson family")
@click.option("--susceptibles", default="fixed", type=click.Choice(["fixed", "binomial"]),
              show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@_server_option
def simulate(model, params, t0, n, horizon, seed, censor_prob, censor_rate, m,
             susceptibles, out, server):
    """Generate one path from a family and write it as an events CSV."""
    theta = [float(v) for v in params.split(",")]
    client = ServiceClient(server)
    try:
        resp = client.post("/simulate", {
            "model": _model_payload(model, t0, m, censor_prob, censor_rate),
            "params": theta, "n": n, "horizon": horizon, "seed": seed,
            "susceptibles": susceptibles,
        })
    except ClientError as exc:
        _fail("simulate", str(exc))
    path = resp["path"]
    dataio.write_events(out, path["times"], path["status"])
    click.echo(f"wrote {len(path['times'])} rows to {out}")


@main.command()
@_model_option
@click.option("--data", required=True)
@click.option("--gaps", is_flag=True, help="data file holds one inter-event gap per line")
@click.option("--horizon", required=True, type=float)
@click.option("--t0", default=0.0, show_default=True)
@click.option("--n", default=None, type=int, help="population size; defaults to 10000 for fault models")
@click.option("--time-scale", default=1.0, show_default=True, type=float)
@_server_option
def fit(model, data, gaps, horizon, t0, n, time_scale, server):
    """Maximum-likelihood fit of a family to an observed path."""
    n = _default_n(model, n)
    payload = _load_path_payload(data, gaps, horizon, n, time_scale)
    client = ServiceClient(server)
    try:
        resp = client.post("/fit", {"model": _model_payload(model, t0, None, None, None),
                                    "path": payload})
    except ClientError as exc:
        _fail("fit", str(exc))
    click.echo(json.dumps(resp, indent=2, sort_keys=True))


def _default_n(model, n):
    if n is not None:
        return n
    if model in ("cure", "jm", "littlewood"):
        return 10000
    _fail("args", f"--n is required for model {model}")


@main.command()
@_model_option
@click.option("--data", required=True)
@click.option("--gaps", is_flag=True)
@click.option("--horizon", required=True, type=float)
@click.option("--t0", default=0.0, show_default=True)
@click.option("--n", default=None, type=int)
@click.option("--time-scale", default=1.0, show_default=True, type=float)
@click.option("--null-table", default=None, type=click.Path(dir_okay=False),
              help="pre-calibrated table file; otherwise calibration parameters are used")
@click.option("--calibrate-reps", default=5000, show_default=True, type=int)
@click.option("--null-seed", default=0, show_default=True, type=int)
@click.option("--n-sim", default=1000, show_default=True, type=int)
@click.option("--grid-size", default=500, show_default=True, type=int)
@click.option("--alpha", default=0.05, show_default=True, type=float)
@click.option("--trim", default=1.0, show_default=True, type=float)
@click.option("--fail-on-reject", is_flag=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False), help="write the report JSON here")
@_server_option
def test(model, data, gaps, horizon, t0, n, time_scale, null_table, calibrate_reps,
         null_seed, n_sim, grid_size, alpha, trim, fail_on_reject, out, server):
    """Fit a family, apply the transform, and report statistics and p-values."""
    n = _default_n(model, n)
    payload = _load_path_payload(data, gaps, horizon, n, time_scale)
    request = {
        "model": _model_payload(model, t0, None, None, None),
        "path": payload, "alpha": alpha, "grid_size": grid_size, "trim": trim,
    }
    if null_table is not None:
        try:
            request["table_data"] = nulldist.to_payload(nulldist.load(null_table))
        except PpgofError as exc:
            _fail("table", str(exc))
    else:
        request["table"] = {"m": _model_dim(model), "reps": calibrate_reps,
                            "n_sim": n_sim, "grid_size": grid_size,
                            "seed": null_seed, "trim": trim}
    client = ServiceClient(server)
    try:
        resp = client.post("/test", request)
    except ClientError as exc:
        _fail("test", str(exc))
    report = resp["report"]
    _print_report(report)
    if out:
        Path(out).write_text(json.dumps(report, indent=2, sort_keys=True))
        click.echo(f"report written to {out}")
    if fail_on_reject and report.get("rejected") and any(report["rejected"].values()):
        sys.exit(EXIT_REJECTED)


def _model_dim(model):
    return {"weibull": 2, "gompertz": 2, "weibull-censored": 2, "jm": 2,
            "cure": 3, "littlewood": 3}.get(model, 2)


def _print_report(report):
    theta = ", ".join(f"{v:.6g}" for v in report["theta_hat"])
    click.echo(f"family: {report['family']}   n={report['n']}  T={report['T']:g}")
    click.echo(f"estimates: [{theta}]  loglik={report['loglik']:.4f}  converged={report['converged']}")
    if "np_hat" in report.get("diagnostics", {}):
        click.echo(f"n*p estimate: {report['diagnostics']['np_hat']:.4f}")
    stats = report["statistics"]
    pvals = report.get("p_values") or {}
    rejected = report.get("rejected") or {}
    click.echo(f"{'statistic':<10}{'value':>10}{'p-value':>12}{'reject':>9}")
    for name in ("ks", "cvm", "ad"):
        p = f"{pvals[name]:.4f}" if name in pvals else "-"
        r = {True: "yes", False: "no"}.get(rejected.get(name), "-")
        click.echo(f"{name.upper():<10}{stats[name]:>10.4f}{p:>12}{r:>9}")
    if rejected:
        verdict = "REJECT" if any(rejected.values()) else "no rejection"
        click.echo(f"decision at alpha={report['alpha']:g}: {verdict}")


@main.command()
@click.option("--m", required=True, type=int)
@click.option("--reps", default=5000, show_default=True, type=int)
@click.option("--n-sim", default=1000, show_default=True, type=int)
@click.option("--grid-size", default=500, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--trim", default=1.0, show_default=True, type=float)
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@_server_option
def calibrate(m, reps, n_sim, grid_size, seed, trim, out, server):
    """Calibrate (or fetch from cache) a null table; optionally save it locally."""
    client = ServiceClient(server)
    try:
        resp = client.post("/calibrate", {"m": m, "reps": reps, "n_sim": n_sim,
                                          "grid_size": grid_size, "seed": seed,
                                          "trim": trim, "include_samples": out is not None})
    except ClientError as exc:
        _fail("calibrate", str(exc))
    click.echo(json.dumps(resp["summary"], indent=2, sort_keys=True))
    if out:
        nulldist.save(nulldist.from_payload(resp["table_data"]), out)
        click.echo(f"table written to {out}")


@main.command()
@click.option("--id", "study_id", required=True,
              help="table1 | table2 | table_cens | table_cure | power_aalen | power_jm | luxembourg | csr2")
@click.option("--reps", default=None, type=int)
@click.option("--n", default=None, type=int)
@click.option("--horizon", default=None, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--output-dir", default=None, type=click.Path(file_okay=False))
@click.option("--null-reps", default=2000, show_default=True, type=int)
@click.option("--null-seed", default=2025, show_default=True, type=int)
@click.option("--grid-size", default=500, show_default=True, type=int)
@_server_option
def study(study_id, reps, n, horizon, seed, output_dir, null_reps, null_seed,
          grid_size, server):
    """Run a scripted Monte-Carlo study or dataset analysis."""
    client = ServiceClient(server)
    try:
        resp = client.post("/study", {
            "study_id": study_id, "reps": reps, "n": n, "horizon": horizon,
            "seed": seed, "output_dir": output_dir, "null_reps": null_reps,
            "null_seed": null_seed, "grid_size": grid_size,
        })
    except ClientError as exc:
        _fail("study", str(exc))
    click.echo(json.dumps(resp["result"], indent=2, sort_keys=True))


@main.command("ingest-rates")
@click.option("--rates", required=True, type=click.Path(dir_okay=False))
@click.option("--n", required=True, type=int)
@click.option("--horizon", required=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@_server_option
def ingest_rates(rates, n, horizon, seed, out, server):
    """Simulate a cohort path from an age,rate mortality table."""
    try:
        ages, rate_values = dataio.read_rates(rates)
    except FileNotFoundError:
        _fail("read", f"cannot open rates file: {rates}")
    except ValueError as exc:
        _fail("parse", str(exc))
    client = ServiceClient(server)
    try:
        resp = client.post("/ingest-rates", {
            "rates": {"ages": [int(a) for a in ages], "rates": [float(r) for r in rate_values]},
            "n": n, "horizon": horizon, "seed": seed,
        })
    except ClientError as exc:
        _fail("ingest", str(exc))
    path = resp["path"]
    dataio.write_events(out, path["times"], path["status"])
    click.echo(f"wrote {len(path['times'])} rows to {out}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
