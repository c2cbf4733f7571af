"""Stateless HTTP layer over the analysis core.

Endpoints mirror the CLI commands and return JSON payloads whose fields
match the CSV columns; identical configs produce numerically identical
results through either surface.  Long scans can stream per-frequency
progress as newline-delimited JSON.
"""

from __future__ import annotations

import json
import math
from typing import Literal

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, ConfigDict

from . import __version__
from .closed_loop import AnalysisSingularityError, closed_loop_grid
from .config import AnalysisConfig, ConfigError
from .export import closed_loop_rows, open_loop_rows, trace_rows
from .lti import LtiError
from .open_loop import cr_grid, open_loop_grid, reconstruct_open_loop_output
from .closed_loop import (
    reconstruct_closed_loop_signals,
    reconstruct_disturbance_error,
)
from .reset_controller import ResetSingularityError, open_loop_stability_check
from .simulation import (
    SimConfig,
    SimulationError,
    collect_scan,
    multiple_reset_scan,
    prediction_error,
    resets_per_cycle,
    scan_frequencies,
    scan_points,
    simulate,
    steady_state_window,
)

_NUMERICAL_ERRORS = (
    LtiError,
    AnalysisSingularityError,
    ResetSingularityError,
    SimulationError,
)

# hard ceilings guarding against oversized sweep/trace payloads
MAX_GRID_POINTS = 500_000
MAX_TRACE_SAMPLES = 500_000


class AnalyzeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: AnalysisConfig
    function: Literal["cr", "ln"] = "ln"


class ClosedLoopRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: AnalysisConfig
    function: Literal["sn", "tn", "csn", "psn"] = "sn"


class ScanRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: AnalysisConfig
    f_start_hz: float = 1.0
    f_end_hz: float = 1000.0
    step_hz: float = 1.0
    stream: bool = False


class SimInput(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["r", "d", "eo"]
    amplitude: float = 1.0
    freq_hz: float


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: AnalysisConfig
    input: SimInput
    decimate: int = 8
    harmonics: int | None = None


def _stability_payload(system) -> dict:
    scan = open_loop_stability_check(system.cr)
    return {
        "passed": scan.passed,
        "marginal": scan.marginal,
        "worst_spectral_radius": scan.worst_radius,
        "worst_delta_s": scan.worst_delta,
    }


def _grid_guard(cfg: AnalysisConfig, n_h: int | None = None):
    harmonics = n_h if n_h is not None else cfg.analysis.harmonics
    count = cfg.analysis.points * (harmonics // 2 + 1)
    if count > MAX_GRID_POINTS:
        raise _Oversized(
            f"grid of {count} points exceeds the {MAX_GRID_POINTS} limit"
        )


class _Oversized(Exception):
    pass


def create_app() -> FastAPI:
    app = FastAPI(title="resetfreq", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def _validation(request: Request, exc: RequestValidationError):
        detail = [
            {"loc": [str(p) for p in e["loc"]], "msg": e["msg"]}
            for e in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.exception_handler(ConfigError)
    async def _config(request: Request, exc: ConfigError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(_Oversized)
    async def _oversized(request: Request, exc: _Oversized):
        return JSONResponse(status_code=413, content={"detail": str(exc)})

    for err in _NUMERICAL_ERRORS:
        @app.exception_handler(err)
        async def _numerical(request: Request, exc: Exception):
            return JSONResponse(
                status_code=422,
                content={"detail": str(exc), "kind": type(exc).__name__},
            )

    @app.get("/health")
    async def health():
        return {"status": "ok", "version": __version__}

    @app.post("/analyze/open-loop")
    async def analyze_open_loop(req: AnalyzeRequest):
        _grid_guard(req.config)
        system = req.config.system()
        freqs = req.config.frequencies_rad()
        builder = cr_grid if req.function == "cr" else open_loop_grid
        grid = builder(system.open_loop(), freqs, req.config.analysis.harmonics)
        return {
            "function": req.function,
            "freqs_hz": (grid.freqs / (2 * math.pi)).tolist(),
            "harmonics": list(grid.harmonics),
            "rows": open_loop_rows(grid),
            "stability": _stability_payload(system),
            "failures": [
                {"freq_index": i, "n": n, "message": msg}
                for i, n, msg in grid.failures
            ],
        }

    @app.post("/analyze/closed-loop")
    async def analyze_closed_loop(req: ClosedLoopRequest):
        _grid_guard(req.config)
        system = req.config.system()
        freqs = req.config.frequencies_rad()
        grid = closed_loop_grid(
            system, freqs, req.config.analysis.harmonics,
            families=(req.function,),
        )
        gamma = [g if np.isfinite(g) else None for g in grid.gamma]
        return {
            "function": req.function,
            "freqs_hz": (grid.freqs / (2 * math.pi)).tolist(),
            "harmonics": list(grid.harmonics),
            "rows": closed_loop_rows(grid, req.function),
            "gamma": gamma,
            "stability": _stability_payload(system),
            "failures": [
                {"freq_index": i, "message": msg} for i, msg in grid.failures
            ],
        }

    def _scan_result_payload(report) -> dict:
        return {
            "intervals_hz": [list(iv) for iv in report.intervals_hz],
            "frequencies_hz": report.frequencies_hz.tolist(),
            "counts": [c if np.isfinite(c) else None for c in report.counts],
            "failures": [{"freq_hz": f, "message": m} for f, m in report.failures],
            "has_multiple_reset_region": report.has_multiple_reset_region,
        }

    @app.post("/analyze/scan")
    async def analyze_scan(req: ScanRequest):
        if req.step_hz <= 0 or req.f_end_hz < req.f_start_hz:
            return JSONResponse(
                status_code=400, content={"detail": "invalid scan band/step"}
            )
        n_points = int((req.f_end_hz - req.f_start_hz) / req.step_hz) + 1
        if n_points > 100_000:
            raise _Oversized(f"scan of {n_points} frequencies exceeds the limit")
        system = req.config.system()
        sim = req.config.sim
        kwargs = dict(
            step_hz=req.step_hz,
            steps_per_cycle=sim.steps_per_cycle,
            settle_cycles=sim.settle_cycles,
            analysis_cycles=sim.analysis_cycles,
            stepper=sim.stepper,
        )
        if not req.stream:
            report = multiple_reset_scan(
                system, req.f_start_hz, req.f_end_hz, **kwargs
            )
            return _scan_result_payload(report)

        freqs = scan_frequencies(req.f_start_hz, req.f_end_hz, req.step_hz)
        step_kwargs = {k: v for k, v in kwargs.items() if k != "step_hz"}

        def ndjson():
            collected = []
            for f_hz, count, err in scan_points(system, freqs, **step_kwargs):
                collected.append((f_hz, count, err))
                yield json.dumps(
                    {"type": "progress", "freq_hz": f_hz, "count": count,
                     "error": err}
                ) + "\n"
            report = collect_scan(freqs, collected)
            yield json.dumps(
                {"type": "result", **_scan_result_payload(report)}
            ) + "\n"

        return StreamingResponse(ndjson(), media_type="application/x-ndjson")

    @app.post("/analyze/simulate")
    async def analyze_simulate(req: SimulateRequest):
        cfg = req.config
        system = cfg.system()
        omega = 2.0 * math.pi * req.input.freq_hz
        sim_cfg = SimConfig(
            system=system.open_loop() if req.input.kind == "eo" else system,
            kind=req.input.kind,
            amplitude=req.input.amplitude,
            omega=omega,
            steps_per_cycle=cfg.sim.steps_per_cycle,
            settle_cycles=cfg.sim.settle_cycles,
            analysis_cycles=cfg.sim.analysis_cycles,
            refractory=cfg.sim.refractory,
            stepper=cfg.sim.stepper,
        )
        decimate = max(1, req.decimate)
        total = sim_cfg.total_cycles * sim_cfg.steps_per_cycle
        if total // decimate > MAX_TRACE_SAMPLES:
            raise _Oversized(
                f"trace of {total // decimate} samples exceeds the "
                f"{MAX_TRACE_SAMPLES} limit; increase decimate"
            )
        trace = simulate(sim_cfg)
        rows = trace_rows(trace, decimate=decimate)
        payload = {
            "step_s": trace.step,
            "decimate": decimate,
            "columns": list(rows[0].keys()) if rows else [],
            "rows": rows,
            "reset_times_s": trace.reset_times.tolist(),
            "effective_resets": trace.effective_resets,
            "notes": list(trace.notes),
        }
        n_h = req.harmonics or cfg.analysis.harmonics
        try:
            win = steady_state_window(trace)
        except SimulationError as exc:
            payload["steady_state"] = {"reached": False, "message": str(exc)}
            return payload
        tw = trace.t[win.slice]
        errors = {}
        if req.input.kind == "eo":
            pred = reconstruct_open_loop_output(
                system.open_loop(), req.input.amplitude, 0.0, omega, n_h, tw
            )
            errors["y"] = prediction_error(trace, pred, signal="y")
        elif req.input.kind == "r":
            rec = reconstruct_closed_loop_signals(
                system, req.input.amplitude, omega, n_h, tw
            )
            errors["e"] = prediction_error(trace, rec.error, signal="e")
            errors["y"] = prediction_error(trace, rec.output, signal="y")
            errors["u"] = prediction_error(trace, rec.control, signal="u")
        else:
            pred = reconstruct_disturbance_error(
                system, req.input.amplitude, omega, n_h, tw
            )
            errors["e"] = prediction_error(trace, pred, signal="e")
        payload["steady_state"] = {
            "reached": True,
            "convergence_metric": win.metric,
            "resets_per_cycle": resets_per_cycle(trace),
            "prediction_error": errors,
            "harmonics": n_h,
        }
        return payload

    return app


app = create_app()
