"""HTTP JSON facade over frozen model bundles.

Endpoints: POST /api/generate (parameters in, micrographs + histogram
estimates + performance predictions out), POST /api/predict (micrograph in,
performance out), GET /api/materials, GET /api/health.  Bundles load once
and are never mutated; every response is deterministic for a supplied seed,
and an omitted seed is drawn by the server and echoed back so any result
can be reproduced.
"""

from __future__ import annotations

import base64
import binascii
import dataclasses

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from .bundle import BundleError
from .dataset import DatasetError, parse_pgm, pgm_bytes
from .domain import (DD_FIELDS, ELEMENTS, IrradiationConditions,
                     MaterialComposition, ValidationError)
from .materials import ALLOY_NAMES, composition, nominal_dd
from .pipeline import Pipeline, bundle_hashes


def _bad(field: str, message: str):
    return HTTPException(status_code=400,
                         detail={"field": field, "message": message})


def _number(body: dict, field: str, label: str) -> float:
    if field not in body:
        raise _bad(label, "missing required field")
    value = body[field]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _bad(label, f"expected a number, got {value!r}")
    return float(value)


def _conditions(body: dict) -> IrradiationConditions:
    d_c = body.get("d_c")
    if not isinstance(d_c, dict):
        raise _bad("d_c", "missing irradiation-conditions object")
    values = {name: _number(d_c, name, f"d_c.{name}")
              for name in ("phi_fast", "phi_thermal", "phi_flux", "T_irr", "T_exp")}
    try:
        return IrradiationConditions(**values)
    except ValidationError as exc:
        offender = next((n for n in values if n in str(exc)), "d_c")
        raise _bad(f"d_c.{offender}", str(exc))


def _material(body: dict) -> tuple[MaterialComposition, str | None]:
    alloy = body.get("alloy_name")
    raw = body.get("composition")
    if alloy is None and raw is None:
        raise _bad("alloy_name", "provide alloy_name or a 12-element composition")
    if alloy is not None:
        if alloy not in ALLOY_NAMES:
            raise _bad("alloy_name", f"unknown alloy {alloy!r}; valid names: "
                                     f"{', '.join(ALLOY_NAMES)}")
        return composition(alloy), alloy
    if not isinstance(raw, (list, tuple)) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
        raise _bad("composition", "expected a list of 12 numeric fractions")
    try:
        return MaterialComposition(alloy_name="custom",
                                   m=tuple(float(v) for v in raw)), None
    except ValidationError as exc:
        raise _bad("composition", str(exc))


def _thermo_mech(body: dict, alloy: str | None):
    overrides = body.get("d_d_overrides") or {}
    if not isinstance(overrides, dict):
        raise _bad("d_d_overrides", "expected an object of field overrides")
    for name in overrides:
        if name not in DD_FIELDS:
            raise _bad(f"d_d_overrides.{name}", "unknown thermo-mechanical field")
    if alloy is not None:
        base = nominal_dd(alloy)
        try:
            return dataclasses.replace(base, **overrides)
        except ValidationError as exc:
            raise _bad("d_d_overrides", str(exc))
    missing = [name for name in DD_FIELDS if name not in overrides]
    if missing:
        raise _bad("d_d_overrides",
                   "raw-composition requests must supply every thermo-mechanical "
                   f"field; missing: {', '.join(missing)}")
    try:
        from .domain import ThermoMechParams
        return ThermoMechParams(**overrides)
    except ValidationError as exc:
        raise _bad("d_d_overrides", str(exc))


def create_app(bundles_dir, preload: bool = True) -> FastAPI:
    app = FastAPI(title="swellgen inference service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    state = {"pipeline": None, "error": None}

    def load() -> None:
        try:
            state["pipeline"] = Pipeline.load(bundles_dir)
            state["error"] = None
        except (BundleError, OSError) as exc:
            state["error"] = str(exc)

    app.state.load_bundles = load
    if preload:
        load()

    def pipeline() -> Pipeline:
        if state["pipeline"] is None:
            raise HTTPException(status_code=503,
                                detail={"status": "loading",
                                        "message": state["error"]
                                        or "bundles not loaded"})
        return state["pipeline"]

    @app.get("/api/health")
    def health():
        if state["pipeline"] is None:
            return {"status": "error" if state["error"] else "loading",
                    "message": state["error"]}
        pipe = state["pipeline"]
        return {"status": "ready", "dataset_version": pipe.dataset_version,
                "bundles": bundle_hashes(bundles_dir),
                "warnings": pipe.warnings}

    @app.get("/api/materials")
    def materials():
        out = []
        for name in ALLOY_NAMES:
            comp = composition(name)
            d_d = nominal_dd(name)
            out.append({
                "name": name,
                "composition": {el: float(f)
                                for el, f in zip(ELEMENTS, comp.m)},
                "d_d": {field: (getattr(d_d, field) if field == "crystal_type"
                                else float(getattr(d_d, field)))
                        for field in DD_FIELDS},
            })
        return out

    @app.post("/api/generate")
    def generate_endpoint(body: dict):
        pipe = pipeline()
        comp, alloy = _material(body)
        d_d = _thermo_mech(body, alloy)
        d_c = _conditions(body)
        n = body.get("n", 1)
        if isinstance(n, bool) or not isinstance(n, int) or not 1 <= n <= 16:
            raise _bad("n", f"sample count must be an integer in [1, 16], got {n!r}")
        seed = body.get("seed")
        if seed is None:
            seed = int(np.random.default_rng().integers(0, 2 ** 31))
        elif isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise _bad("seed", f"seed must be a nonnegative integer, got {seed!r}")
        try:
            samples = pipe.generate_samples(comp, d_d, d_c, n, seed)
        except ValidationError as exc:
            raise _bad("request", str(exc))
        return {
            "dataset_version": pipe.dataset_version,
            "seed_used": seed,
            "samples": [{
                "image": base64.b64encode(pgm_bytes(s["image"])).decode("ascii"),
                "h_v_estimate": s["h_v_estimate"],
                "d_r_prediction": s["d_r_prediction"],
                "seed_used": s["seed_used"],
            } for s in samples],
        }

    @app.post("/api/predict")
    def predict_endpoint(body: dict):
        pipe = pipeline()
        alloy = body.get("alloy_name")
        if alloy not in ALLOY_NAMES:
            raise _bad("alloy_name", f"unknown alloy {alloy!r}; valid names: "
                                     f"{', '.join(ALLOY_NAMES)}")
        encoded = body.get("image")
        if not isinstance(encoded, str):
            raise _bad("image", "expected a base64-encoded binary PGM string")
        try:
            blob = base64.b64decode(encoded.encode("ascii"), validate=True)
        except (binascii.Error, UnicodeEncodeError):
            raise _bad("image", "invalid base64 payload")
        try:
            image = parse_pgm(blob, origin="request image")
        except DatasetError as exc:
            raise _bad("image", str(exc))
        return {"alloy_name": alloy,
                "d_r_prediction": pipe.predict_from_image(image, composition(alloy))}

    return app
