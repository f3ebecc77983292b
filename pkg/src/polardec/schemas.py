"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

DEFAULT_SEED = 123456789


class CodeSpec(BaseModel):
    n: int = Field(ge=1, le=16)
    min_info_set: list[int] = Field(min_length=1)


class CodeInfo(BaseModel):
    n: int
    N: int
    K: int
    min_info_set: list[int]
    info_set: list[int]
    block_profile: list[int]


class FastNodeFlags(BaseModel):
    rate0: bool = False
    rate1: bool = False
    rep: bool = False
    spc: bool = False


class DecoderSpec(BaseModel):
    algorithm: Literal["sc", "scl", "scal", "aed"] = "scl"
    list_size: int = Field(1, ge=1)
    inner_list_size: int = Field(1, ge=1)
    quantize: bool = False
    llr_bits: int = Field(6, ge=2, le=16)
    pm_bits: int = Field(8, ge=1, le=32)
    llr_scale: float = Field(2.0, gt=0)
    fast_nodes: bool | FastNodeFlags = False
    spc_split_limit: int | None = Field(None, ge=0)
    spc_size_param: int = Field(0, ge=0)


class AutomorphismModel(BaseModel):
    A: list[list[int]]
    b: list[int]


class PermSetModel(BaseModel):
    perms: list[AutomorphismModel]


class PermsRequest(BaseModel):
    code: CodeSpec
    count: int = Field(ge=1)
    seed: int = Field(DEFAULT_SEED, ge=0)
    relax_perm_classes: bool = False


class PermsResponse(BaseModel):
    count: int
    perms: list[AutomorphismModel]


class DecodeRequest(BaseModel):
    code: CodeSpec
    decoder: DecoderSpec = DecoderSpec()
    llrs: list[float]
    seed: int = Field(DEFAULT_SEED, ge=0)
    perms: PermSetModel | None = None


class ListEntry(BaseModel):
    codeword: list[int]
    pm: float
    origin: int


class DecodeResponse(BaseModel):
    x_hat: list[int]
    u_hat: list[int]
    winner_origin: int
    final_list: list[ListEntry]


class SimulateRequest(BaseModel):
    code: CodeSpec
    decoder: DecoderSpec = DecoderSpec()
    snr_points: list[float] = Field(min_length=1)
    max_blocks: int = Field(10 ** 8, ge=1)
    max_errors: int = Field(1000, ge=1)
    seed: int = Field(DEFAULT_SEED, ge=0)
    workers: int = Field(1, ge=0)
    batch_size: int = Field(256, ge=1)
    all_zero: bool = False
    track_ml: bool = False
    relax_perm_classes: bool = False
    emit_timing: bool = False


class PointRow(BaseModel):
    ebn0_db: float
    blocks: int
    frame_errors: int
    bit_errors: int
    fer: float
    ber: float
    fer_ci_low: float
    fer_ci_high: float
    ml_upper: float
    ml_lower: float
    seconds: float


class SimulateResponse(BaseModel):
    rows: list[PointRow]
    csv: str


class AnalyzeResponse(BaseModel):
    perm_evolution_csv: str
    final_list_csv: str
