"""HTTP prediction service for adaptive form clients.

Endpoints: GET /schema, GET /health, POST /predict, POST /reload.  The
bundle is held behind an atomic reference: every response is computed
against exactly one bundle version, echoed as ``bundle_version``.
"""

from __future__ import annotations

import asyncio
import hashlib
import threading
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .errors import FormRelaxError, SchemaMismatch, UnknownTarget
from .pipeline import ModelBundle, bundle_json, load_bundle
from .relax import PartialForm, predict_all, predict_requirement


@dataclass(frozen=True)
class ServiceConfig:
    bundle_path: str
    host: str = "127.0.0.1"
    port: int = 8000
    request_timeout_s: float = 5.0
    log_level: str = "info"
    cors_origins: tuple[str, ...] = ("*",)

    def __post_init__(self):
        if self.request_timeout_s <= 0:
            raise ValueError("request_timeout_s must be positive")


class PredictRequest(BaseModel):
    filled: dict[str, str] = Field(default_factory=dict)
    targets: list[str] | None = None


class _BundleHolder:
    """Single-writer atomic swap; readers grab one consistent snapshot."""

    def __init__(self):
        self._lock = threading.Lock()
        self._bundle: ModelBundle | None = None
        self._version: str | None = None

    def snapshot(self) -> tuple[ModelBundle | None, str | None]:
        return self._bundle, self._version

    def swap(self, bundle: ModelBundle) -> str:
        version = hashlib.sha256(bundle_json(bundle).encode()).hexdigest()[:16]
        with self._lock:
            self._bundle = bundle
            self._version = version
        return version


def _decision_payload(decision) -> dict:
    return {
        "target": decision.target,
        "class": decision.predicted_class.lower(),
        "probability": decision.probability,
        "endorsed": decision.endorsed,
        "final_required": decision.final_required,
        "latency_ms": decision.latency_s * 1e3,
    }


def create_app(config: ServiceConfig, bundle: ModelBundle | None = None) -> FastAPI:
    app = FastAPI(title="formrelax")
    if config.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )
    holder = _BundleHolder()
    if bundle is None:
        try:
            bundle = load_bundle(config.bundle_path)
        except FormRelaxError:
            bundle = None
    if bundle is not None:
        holder.swap(bundle)
    app.state.holder = holder
    app.state.config = config

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed body"})

    @app.get("/health")
    async def health():
        current, version = holder.snapshot()
        return {"status": "ok", "bundle_loaded": current is not None,
                "bundle_version": version}

    @app.get("/schema")
    async def schema():
        current, version = holder.snapshot()
        if current is None:
            return JSONResponse(status_code=503, content={"detail": "no bundle"})
        return {
            "bundle_version": version,
            "schema": current.schema.to_json_dict(),
            "modeled_targets": sorted(current.models),
        }

    @app.post("/predict")
    async def predict(body: PredictRequest):
        current, version = holder.snapshot()
        if current is None:
            return JSONResponse(status_code=503, content={"detail": "no bundle"})
        known = set(current.schema.field_names())
        unknown_filled = set(body.filled) - known
        if unknown_filled:
            return JSONResponse(
                status_code=400,
                content={"detail": f"unknown fields: {sorted(unknown_filled)}"},
            )
        form = PartialForm(filled=dict(body.filled))

        def compute():
            if body.targets is None:
                return predict_all(current, form)
            decisions = []
            for target in body.targets:
                if target not in known:
                    raise UnknownTarget(target)
                if target in form.filled:
                    raise ValueError(f"target {target!r} is already filled")
                decisions.append(predict_requirement(current, form, target))
            return decisions

        try:
            decisions = await asyncio.wait_for(
                asyncio.to_thread(compute),
                timeout=app.state.config.request_timeout_s,
            )
        except UnknownTarget as exc:
            return JSONResponse(
                status_code=404, content={"detail": f"unknown target: {exc}"}
            )
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        except asyncio.TimeoutError:
            return JSONResponse(status_code=504, content={"detail": "timed out"})
        return {
            "bundle_version": version,
            "decisions": [_decision_payload(d) for d in decisions],
        }

    @app.post("/reload")
    async def reload():
        current, _ = holder.snapshot()
        try:
            fresh = load_bundle(config.bundle_path)
        except SchemaMismatch as exc:
            return JSONResponse(status_code=409, content={"detail": str(exc)})
        except FormRelaxError as exc:
            # keep serving the current bundle
            return JSONResponse(
                status_code=503 if current is None else 500,
                content={"detail": str(exc)},
            )
        if current is not None and fresh.schema_hash != current.schema_hash:
            return JSONResponse(
                status_code=409,
                content={
                    "detail": "reloaded bundle was trained against a different schema"
                },
            )
        version = holder.swap(fresh)
        return {"bundle_version": version, "models": sorted(fresh.models)}

    return app
