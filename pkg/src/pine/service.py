"""FastAPI service wrapping the protocol library.

The CLI is a thin client of these endpoints (in-process by default, over
HTTP when pointed at a running server via ``pine serve``).  Binary
payloads travel base64-encoded; big integers ride as JSON numbers, which
Python serializes losslessly.
"""

from __future__ import annotations

import base64
import math
from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from . import costs as costs_mod
from . import dzk as dzk_mod
from . import harness as harness_mod
from . import norm as norm_mod
from .fiat_shamir import NiProof
from .field import FIELD64, FIELD128
from .norm import InfeasibleParamsError
from .wraparound import err_complete_log2, err_sound_log2

app = FastAPI(title="pine", version=__version__,
              description="Two-verifier zero-knowledge norm-bound verification")

_FIELDS = {"f64": FIELD64.modulus, "f128": FIELD128.modulus}


def _resolve_modulus(field: str, modulus: Optional[int]) -> int:
    if field == "custom":
        if not modulus:
            raise HTTPException(400, detail={"error": {"code": "usage",
                                                       "detail": "custom field needs a modulus"}})
        return modulus
    try:
        return _FIELDS[field]
    except KeyError:
        raise HTTPException(400, detail={"error": {"code": "usage",
                                                   "detail": f"unknown field {field!r}"}})


def _norm_bound(b_bits: Optional[int], norm_bound_sq: Optional[int]) -> int:
    if norm_bound_sq is not None:
        return norm_bound_sq
    if b_bits is not None:
        return 1 << b_bits
    raise HTTPException(400, detail={"error": {"code": "usage",
                                               "detail": "need b_bits or norm_bound_sq"}})


def _infeasible(exc: Exception) -> HTTPException:
    return HTTPException(409, detail={"error": {"code": "infeasible",
                                                "detail": str(exc)}})


class ParamsRequest(BaseModel):
    variant: Literal["statistical", "dzk"] = "statistical"
    d: int = Field(..., ge=1, description="vector dimension")
    b_bits: Optional[int] = Field(None, description="squared-norm bound as B = 2^b_bits")
    norm_bound_sq: Optional[int] = Field(None, description="norm bound B directly")
    field: Literal["f64", "f128", "custom"] = "f64"
    modulus: Optional[int] = None
    rho_bits: float = Field(50, description="target soundness error 2^-rho_bits")
    delta_bits: float = Field(50, description="target completeness/ZK error 2^-delta_bits")
    eps: Optional[float] = Field(None, description="dzk privacy parameter")


class ProveRequest(BaseModel):
    variant: Literal["statistical", "dzk"] = "statistical"
    vector: list[int]
    b_bits: Optional[int] = None
    norm_bound_sq: Optional[int] = None
    field: Literal["f64", "f128", "custom"] = "f64"
    modulus: Optional[int] = None
    rho_bits: float = 50
    delta_bits: float = 50
    eps: Optional[float] = None
    seed: int = 0


class VerifyRequest(BaseModel):
    proof_b64: str
    verifier: Literal["both", "0", "1"] = "both"
    rho_bits: float = 50
    delta_bits: float = 50


class SimulateRequest(BaseModel):
    variant: Literal["statistical", "dzk"] = "statistical"
    strategy: str = "honest"
    trials: int = Field(100, ge=1)
    d: int = 100
    b_bits: Optional[int] = 10
    norm_bound_sq: Optional[int] = None
    field: Literal["f64", "f128", "custom"] = "f64"
    modulus: Optional[int] = None
    rho_bits: float = 50
    delta_bits: float = 50
    eps: Optional[float] = None
    seed: int = 0
    mode: Literal["fs", "interactive"] = "fs"
    jobs: int = 1
    strategy_kwargs: dict = Field(default_factory=dict)


class BenchRequest(BaseModel):
    table: Literal["intro", "single"] = "intro"
    variant: Literal["statistical", "dzk"] = "statistical"
    d: Optional[int] = None
    b_bits: int = 30
    field: Literal["f64", "f128", "custom"] = "f64"
    modulus: Optional[int] = None
    rho_bits: float = 50
    delta_bits: float = 50
    eps: float = 0.1
    seed: int = 0  # interface symmetry; the model itself is deterministic


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok", "version": __version__}


def _session_params(req, modulus: int, bound: int):
    if req.variant == "statistical":
        return norm_mod.select_params(len(req.vector) if hasattr(req, "vector") else req.d,
                                      bound, modulus, 2.0 ** -req.rho_bits,
                                      2.0 ** -req.delta_bits)
    if req.eps is None:
        raise HTTPException(400, detail={"error": {"code": "usage",
                                                   "detail": "dzk needs eps"}})
    d = len(req.vector) if hasattr(req, "vector") else req.d
    noise = dzk_mod.dzk_params(req.eps, 2.0 ** -req.delta_bits, bound, d)
    if noise.min_modulus > modulus:
        raise _infeasible(ValueError(
            f"dzk needs q > 4*lam^2 = {noise.min_modulus - 1}; "
            f"requested field has q = {modulus}"))
    t = dzk_mod.select_quad_reps(d, modulus, 2.0 ** -req.rho_bits)
    return dzk_mod.DzkSessionParams(noise=noise, modulus=modulus, quad_reps=t)


@app.post("/params")
def params_endpoint(req: ParamsRequest) -> dict:
    modulus = _resolve_modulus(req.field, req.modulus)
    bound = _norm_bound(req.b_bits, req.norm_bound_sq)
    try:
        if req.variant == "statistical":
            p = norm_mod.select_params(req.d, bound, modulus,
                                       2.0 ** -req.rho_bits, 2.0 ** -req.delta_bits)
            sizes = norm_mod.message_sizes(p)
            return {
                "variant": "statistical", "d": req.d, "norm_bound_sq": bound,
                "modulus": modulus, "field_bits": modulus.bit_length(),
                "r": p.repetitions, "tau": p.tau, "eta": p.eta,
                "t": p.quad_reps,
                "alpha": math.sqrt(math.log(2.0 / p.eta)),
                "err_complete_log2": err_complete_log2(p.repetitions, p.tau, p.eta),
                "err_sound_log2": err_sound_log2(p.repetitions, p.tau),
                "sizes": {"msg1": sizes.msg1_bits, "msg2": sizes.msg2_bits,
                          "msg3": sizes.msg3_bits, "msg4": sizes.msg4_bits,
                          "exchange": sizes.exchange_bits,
                          "client_total": sizes.client_bits},
            }
        if req.eps is None:
            raise HTTPException(400, detail={"error": {"code": "usage",
                                                       "detail": "dzk needs eps"}})
        noise = dzk_mod.dzk_params(req.eps, 2.0 ** -req.delta_bits, bound, req.d)
        out = {
            "variant": "dzk", "d": req.d, "norm_bound_sq": bound,
            "eps": req.eps, "sigma": noise.sigma, "big_delta": noise.big_delta,
            "lam": noise.lam, "min_modulus": noise.min_modulus,
            "min_modulus_bits": noise.min_modulus_bits,
        }
        if noise.min_modulus <= modulus:
            t = dzk_mod.select_quad_reps(req.d, modulus, 2.0 ** -req.rho_bits)
            sp = dzk_mod.DzkSessionParams(noise=noise, modulus=modulus, quad_reps=t)
            sizes = dzk_mod.message_sizes(sp)
            out.update({"modulus": modulus, "t": t,
                        "sizes": {"msg1_extra": sizes.msg1_extra_bits,
                                  "msg2": sizes.msg2_bits, "msg3": sizes.msg3_bits,
                                  "exchange": sizes.exchange_bits,
                                  "client_total": sizes.client_bits}})
        else:
            out["suggested_modulus"] = noise.suggested_modulus()
        return out
    except InfeasibleParamsError as exc:
        raise _infeasible(exc)
    except dzk_mod.DzkError as exc:
        raise _infeasible(exc)


@app.post("/prove")
def prove_endpoint(req: ProveRequest) -> dict:
    modulus = _resolve_modulus(req.field, req.modulus)
    bound = _norm_bound(req.b_bits, req.norm_bound_sq)
    x = np.asarray(req.vector, dtype=np.int64)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(req.seed)))
    try:
        params = _session_params(req, modulus, bound)
        if req.variant == "statistical":
            proof = norm_mod.ni_prove(params, x, rng)
        else:
            proof = dzk_mod.ni_prove(params, x, rng)
    except InfeasibleParamsError as exc:
        raise _infeasible(exc)
    except (ValueError, dzk_mod.DzkError) as exc:
        raise HTTPException(400, detail={"error": {"code": "usage", "detail": str(exc)}})
    blob = proof.to_bytes()
    return {"proof_b64": base64.b64encode(blob).decode(),
            "proof_bytes": len(blob), "variant": req.variant,
            "d": len(x), "norm_bound_sq": bound}


@app.post("/verify")
def verify_endpoint(req: VerifyRequest) -> dict:
    try:
        proof = NiProof.from_bytes(base64.b64decode(req.proof_b64))
        if proof.variant == "statistical":
            params = norm_mod.params_from_header(
                proof.header, 2.0 ** -req.rho_bits, 2.0 ** -req.delta_bits)
            verify_both = norm_mod.ni_verify
            local = norm_mod.ni_verify_local
        else:
            params = dzk_mod.params_from_header(proof.header)
            verify_both = dzk_mod.ni_verify
            local = dzk_mod.ni_verify_local
        if req.verifier == "both":
            accept, cause = verify_both(params, proof)
            return {"accept": accept, "cause": cause, "verifier": "both"}
        j = int(req.verifier)
        state, msg = local(params, proof, j)
        # single-verifier mode reports the local phase only; the peer
        # exchange is what the harness or a second service call supplies
        ok = state.failure is None
        return {"accept": ok, "cause": state.failure or "local-ok",
                "verifier": j, "needs_exchange": True}
    except Exception as exc:
        raise HTTPException(400, detail={"error": {"code": "usage",
                                                   "detail": f"bad proof: {exc}"}})


@app.post("/simulate")
def simulate_endpoint(req: SimulateRequest) -> dict:
    modulus = _resolve_modulus(req.field, req.modulus)
    bound = _norm_bound(req.b_bits, req.norm_bound_sq)
    try:
        params = _session_params(req, modulus, bound)
    except InfeasibleParamsError as exc:
        raise _infeasible(exc)
    cfg = harness_mod.SessionConfig(
        req.variant, params, req.seed,
        None if req.strategy == "honest" else req.strategy,
        harness_mod.SessionConfig.pack_kwargs(req.strategy_kwargs), req.mode)
    try:
        mc = harness_mod.monte_carlo(cfg, req.trials, jobs=req.jobs)
    except harness_mod.HarnessError as exc:
        raise HTTPException(400, detail={"error": {"code": "usage", "detail": str(exc)}})
    return {"strategy": mc.strategy, "trials": mc.trials, "accepts": mc.accepts,
            "rate": mc.rate, "wilson_low": mc.wilson_low,
            "wilson_high": mc.wilson_high,
            "csv": mc.csv_row(f"{req.variant}/d={req.d}")}


@app.post("/bench")
def bench_endpoint(req: BenchRequest) -> dict:
    modulus = _resolve_modulus(req.field, req.modulus)
    bound = 1 << req.b_bits
    try:
        if req.table == "intro":
            rows = costs_mod.intro_table(modulus, bound, 2.0 ** -req.rho_bits,
                                         2.0 ** -req.delta_bits, req.eps)
            return {"rows": rows, "text": costs_mod.format_intro_table(rows)}
        if req.d is None:
            raise HTTPException(400, detail={"error": {"code": "usage",
                                                       "detail": "single-row bench needs d"}})
        report = costs_mod.cost(req.variant, req.d, bound, modulus,
                                2.0 ** -req.rho_bits, 2.0 ** -req.delta_bits,
                                eps=req.eps)
        return {"report": report.__dict__}
    except InfeasibleParamsError as exc:
        raise _infeasible(exc)
    except dzk_mod.DzkError as exc:
        raise _infeasible(exc)
