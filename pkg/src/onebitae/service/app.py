"""FastAPI service wrapping the simulation toolkit.

The CLI is a thin client of these endpoints; run the server standalone
with `uvicorn onebitae.service.app:app`.
"""

from __future__ import annotations

import tempfile
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import ValidationError

from .. import harness
from .schemas import (
    BerPointModel,
    KernelReportRequest,
    KernelReportResponse,
    RunRequest,
    RunResponse,
    SummarizeRequest,
    SummarizeResponse,
    ValidateRequest,
    ValidateResponse,
)

app = FastAPI(title="onebitae", version="0.1.0")


@app.get("/health")
def health():
    return {"status": "ok"}


def _parse_config(raw: dict, chain=None, seed=None) -> harness.ExperimentConfig:
    data = dict(raw)
    if chain is not None:
        data["chain"] = chain
    if seed is not None:
        data["seed"] = seed
    return harness.ExperimentConfig.model_validate(data)


@app.post("/config/validate", response_model=ValidateResponse)
def validate_config(req: ValidateRequest):
    try:
        cfg = _parse_config(req.config)
    except ValidationError as e:
        errors = [
            ".".join(str(p) for p in err["loc"]) + ": " + err["msg"]
            for err in e.errors()
        ]
        return ValidateResponse(valid=False, errors=errors)
    return ValidateResponse(valid=True, warnings=cfg.warnings())


@app.post("/runs", response_model=RunResponse)
def run(req: RunRequest):
    try:
        cfg = _parse_config(req.config, chain=req.chain, seed=req.seed)
    except ValidationError as e:
        raise HTTPException(status_code=422, detail=str(e))
    points, csv_text = harness.run_chain(cfg, out_dir=req.out_dir)
    csv_path = str(Path(req.out_dir) / f"{cfg.chain}.csv") if req.out_dir else None
    return RunResponse(
        chain=cfg.chain,
        points=[BerPointModel(**vars(p)) for p in points],
        csv=csv_text,
        csv_path=csv_path,
    )


@app.post("/summarize", response_model=SummarizeResponse)
def summarize(req: SummarizeRequest):
    paths = list(req.csv_paths)
    tmp = None
    try:
        if req.csv_texts:
            tmp = tempfile.TemporaryDirectory()
            for label, text in req.csv_texts.items():
                p = Path(tmp.name) / f"{label}.csv"
                p.write_text(text, encoding="utf-8")
                paths.append(str(p))
        if not paths:
            raise HTTPException(status_code=422, detail="no CSV inputs")
        try:
            table = harness.summarize(paths)
        except (ValueError, OSError) as e:
            raise HTTPException(status_code=422, detail=str(e))
    finally:
        if tmp is not None:
            tmp.cleanup()
    return SummarizeResponse(table=table)


@app.post("/kernel-report", response_model=KernelReportResponse)
def kernel_report(req: KernelReportRequest):
    try:
        cfg = harness.GpConfig.model_validate(req.config.get("gp", req.config))
    except ValidationError as e:
        raise HTTPException(status_code=422, detail=str(e))
    report = harness.kernel_report(cfg)
    if req.out_path:
        Path(req.out_path).parent.mkdir(parents=True, exist_ok=True)
        Path(req.out_path).write_text(report, encoding="utf-8")
    return KernelReportResponse(report=report, out_path=req.out_path)
