"""Request/response models for the simulation service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class ValidateRequest(BaseModel):
    config: dict[str, Any]


class ValidateResponse(BaseModel):
    valid: bool
    errors: list[str] = Field(default_factory=list)
    warnings: list[str] = Field(default_factory=list)


class RunRequest(BaseModel):
    config: dict[str, Any]
    chain: Optional[str] = None       # overrides config.chain
    seed: Optional[int] = None        # overrides config.seed
    out_dir: Optional[str] = None     # server-side CSV output directory


class BerPointModel(BaseModel):
    es_n0_db: float
    codewords: int
    bit_errors: int
    bits: int
    ber: float
    seconds: float


class RunResponse(BaseModel):
    chain: str
    points: list[BerPointModel]
    csv: str
    csv_path: Optional[str] = None


class SummarizeRequest(BaseModel):
    csv_paths: list[str] = Field(default_factory=list)
    csv_texts: dict[str, str] = Field(default_factory=dict)  # label -> CSV body


class SummarizeResponse(BaseModel):
    table: str


class KernelReportRequest(BaseModel):
    config: dict[str, Any] = Field(default_factory=dict)
    out_path: Optional[str] = None


class KernelReportResponse(BaseModel):
    report: str
    out_path: Optional[str] = None
