#!/usr/bin/env python3
"""
HTTP front end for witnesslab.
Serves the same versioned reports as the command line.
"""

import logging
from datetime import datetime
from typing import Any, Dict, Optional

import uvicorn
from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, ValidationError

import config
from errors import WitnessLabError
from reporting_cli import RunConfig, cmd_eval, cmd_oracle, cmd_settings, cmd_table1

# Configure logging
logging.basicConfig(
    level=config.LOG_LEVEL,
    format=config.LOG_FORMAT,
    datefmt=config.LOG_DATEFMT,
)
log = logging.getLogger("witnesslab_api")

app = FastAPI(
    title="witnesslab API",
    version="1.0.0",
    description="Hyperentanglement and graph-state witness reports",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)


class EvalRequest(BaseModel):
    state: str
    witness: str
    p_noise: float = Field(0.0, ge=0, le=1)
    shots: int = Field(0, ge=0)
    seed: int = config.DEFAULT_SEED
    detect: bool = False
    c0: int = 2


def respond(report) -> Dict[str, Any]:
    return {
        "status": "OK",
        "data": report.to_dict(),
        "timestamp": datetime.now().isoformat(),
    }


def fail(err: Exception) -> HTTPException:
    if isinstance(err, WitnessLabError):
        log.error(f"{type(err).__name__}: {err}")
        return HTTPException(status_code=err.http_status, detail=str(err))
    log.error(f"Invalid request: {err}")
    return HTTPException(status_code=400, detail=str(err))


@app.get("/")
def root():
    return {
        "message": "witnesslab API is running",
        "version": "1.0.0",
        "endpoints": ["/health", "/table1", "/eval", "/oracle", "/settings"],
    }


@app.get("/health")
def health_check():
    """Health check endpoint"""
    return {
        "status": "OK",
        "schema": config.REPORT_SCHEMA,
        "dense_vector_cap": config.DENSE_VECTOR_CAP,
        "dense_density_cap": config.DENSE_DENSITY_CAP,
        "timestamp": datetime.now().isoformat(),
    }


@app.get("/table1")
def table1(n_min: int = Query(1), n_max: int = Query(5)):
    """Traces and noise thresholds per witness and N"""
    try:
        return respond(cmd_table1(n_min, n_max))
    except (WitnessLabError, ValidationError) as e:
        raise fail(e)


@app.post("/eval")
def evaluate(request: EvalRequest):
    """Exact expectation, optional sampled estimate and detection verdict"""
    try:
        cfg = RunConfig(command="eval", **request.model_dump())
        return respond(cmd_eval(cfg))
    except (WitnessLabError, ValidationError) as e:
        raise fail(e)


@app.get("/oracle")
def oracle(
    n: int = Query(..., gt=0),
    method: str = Query("svd"),
    restarts: int = Query(config.SEARCH_RESTARTS, gt=0),
    seed: int = Query(config.DEFAULT_SEED),
):
    """Biseparable overlap bound over every cut"""
    try:
        return respond(cmd_oracle(n, method, restarts, seed))
    except (WitnessLabError, ValidationError) as e:
        raise fail(e)


@app.get("/settings")
def settings(witness: str = Query(...), n: Optional[int] = Query(None), graph: Optional[str] = Query(None)):
    """Local measurement settings of a witness"""
    try:
        system = RunConfig(command="settings", n=n, graph=graph).system()
        return respond(cmd_settings(witness, system))
    except (WitnessLabError, ValidationError) as e:
        raise fail(e)


def main() -> None:
    log.info(f"Starting witnesslab API on {config.API_HOST}:{config.API_PORT}")
    uvicorn.run(app, host=config.API_HOST, port=config.API_PORT)


if __name__ == "__main__":
    main()
