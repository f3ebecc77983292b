"""HTTP facade over code construction, permutation sampling, decoding and simulation."""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from . import schemas
from .autom import (InsufficientClassesError, block_profile, perms_from_dict,
                    select_permutations)
from .code import build_code
from .decode import AedEnsemble, DecoderConfig, ListEngine
from .sim import (SimConfig, _PERM_STREAM, _stream_rng, analyze, final_list_csv,
                  perm_evolution_csv, results_csv, run_fer)

app = FastAPI(
    title="polardec",
    description="Polar code construction, SC/SCL/SCAL/AED decoding and "
                "Monte-Carlo evaluation.",
    version="0.1.0",
)


def _bad_request(exc: Exception) -> HTTPException:
    return HTTPException(status_code=400, detail=str(exc))


def _decoder_config(spec: schemas.DecoderSpec) -> DecoderConfig:
    fast = spec.fast_nodes
    if isinstance(fast, bool):
        flags = dict.fromkeys(("rate0", "rate1", "rep", "spc"), fast)
    else:
        flags = fast.model_dump()
    return DecoderConfig(
        list_size=spec.list_size,
        quantize=spec.quantize,
        llr_bits=spec.llr_bits,
        pm_bits=spec.pm_bits,
        llr_scale=spec.llr_scale,
        fast_rate0=flags["rate0"],
        fast_rate1=flags["rate1"],
        fast_rep=flags["rep"],
        fast_spc=flags["spc"],
        spc_split_limit=spec.spc_split_limit,
        spc_size_param=spec.spc_size_param,
    )


@app.get("/healthz")
def healthz():
    return {"status": "ok"}


@app.post("/code", response_model=schemas.CodeInfo)
def make_code(req: schemas.CodeSpec):
    try:
        code = build_code(req.n, req.min_info_set)
        profile = block_profile(code)
    except ValueError as exc:
        raise _bad_request(exc)
    return schemas.CodeInfo(
        n=code.n, N=code.N, K=code.K,
        min_info_set=[int(g) for g in code.min_info_set],
        info_set=[int(i) for i in code.info_set],
        block_profile=list(profile),
    )


@app.post("/perms", response_model=schemas.PermsResponse)
def make_perms(req: schemas.PermsRequest):
    try:
        code = build_code(req.code.n, req.code.min_info_set)
        pset = select_permutations(
            code, req.count, _stream_rng(req.seed, _PERM_STREAM),
            distinct_classes=not req.relax_perm_classes)
    except (ValueError, InsufficientClassesError) as exc:
        raise _bad_request(exc)
    return schemas.PermsResponse(
        count=len(pset),
        perms=[schemas.AutomorphismModel(**a.to_dict()) for a in pset],
    )


@app.post("/decode", response_model=schemas.DecodeResponse)
def decode(req: schemas.DecodeRequest):
    try:
        code = build_code(req.code.n, req.code.min_info_set)
        if len(req.llrs) != code.N:
            raise ValueError(f"expected {code.N} LLR values, got {len(req.llrs)}")
        cfg = _decoder_config(req.decoder)
        llrs = np.asarray(req.llrs, dtype=np.float64)[None, :]
        algo = req.decoder.algorithm
        if algo in ("scal", "aed"):
            if req.perms is not None:
                pset = perms_from_dict(req.perms.model_dump())
                if len(pset) != cfg.list_size:
                    raise ValueError(
                        f"permutation count {len(pset)} != list size {cfg.list_size}")
            else:
                pset = select_permutations(
                    code, cfg.list_size, _stream_rng(req.seed, _PERM_STREAM))
            if algo == "scal":
                res = ListEngine(code, cfg, perms=pset).decode_batch(llrs)
            else:
                inner = DecoderConfig(
                    list_size=req.decoder.inner_list_size,
                    quantize=cfg.quantize, llr_bits=cfg.llr_bits,
                    pm_bits=cfg.pm_bits, llr_scale=cfg.llr_scale,
                    fast_rate0=cfg.fast_rate0, fast_rate1=cfg.fast_rate1,
                    fast_rep=cfg.fast_rep, fast_spc=cfg.fast_spc,
                    spc_split_limit=cfg.spc_split_limit,
                    spc_size_param=cfg.spc_size_param)
                res = AedEnsemble(code, pset, inner).decode_batch(llrs)
        else:
            if algo == "sc":
                cfg = DecoderConfig(quantize=cfg.quantize, llr_bits=cfg.llr_bits,
                                    pm_bits=cfg.pm_bits, llr_scale=cfg.llr_scale)
            res = ListEngine(code, cfg).decode_batch(llrs)
    except (ValueError, InsufficientClassesError) as exc:
        raise _bad_request(exc)
    return schemas.DecodeResponse(
        x_hat=res.x_hat[0].tolist(),
        u_hat=res.u_hat[0].tolist(),
        winner_origin=int(res.origins[0, 0]),
        final_list=[
            schemas.ListEntry(codeword=res.codewords[0, p].tolist(),
                              pm=float(res.pms[0, p]),
                              origin=int(res.origins[0, p]))
            for p in range(res.pms.shape[1])
        ],
    )


def _sim_config(req: schemas.SimulateRequest) -> SimConfig:
    return SimConfig.from_dict(req.model_dump(exclude={"emit_timing"}))


def _rows(result) -> list[schemas.PointRow]:
    rows = []
    for p in result.points:
        lo, hi = p.fer_ci
        blocks = max(p.blocks, 1)
        rows.append(schemas.PointRow(
            ebn0_db=p.ebn0_db, blocks=p.blocks, frame_errors=p.frame_errors,
            bit_errors=p.bit_errors, fer=p.fer, ber=p.ber,
            fer_ci_low=lo, fer_ci_high=hi,
            ml_upper=p.ml_upper_count / blocks,
            ml_lower=p.ml_lower_count / blocks,
            seconds=p.seconds))
    return rows


@app.post("/simulate", response_model=schemas.SimulateResponse)
def simulate(req: schemas.SimulateRequest):
    try:
        result = run_fer(_sim_config(req))
    except (ValueError, InsufficientClassesError) as exc:
        raise _bad_request(exc)
    return schemas.SimulateResponse(
        rows=_rows(result),
        csv=results_csv(result, include_timing=req.emit_timing),
    )


@app.post("/analyze", response_model=schemas.AnalyzeResponse)
def analyze_perms(req: schemas.SimulateRequest):
    try:
        result = analyze(_sim_config(req))
    except (ValueError, InsufficientClassesError) as exc:
        raise _bad_request(exc)
    return schemas.AnalyzeResponse(
        perm_evolution_csv=perm_evolution_csv(result),
        final_list_csv=final_list_csv(result),
    )
