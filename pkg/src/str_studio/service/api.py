"""HTTP JSON API backing the designer/buyer workbench.

Read endpoints are pure functions of the loaded state (and therefore
idempotent); only the design endpoints append, through the single-writer
draft store. Error bodies are {code, message, field?}.
"""

from __future__ import annotations

from typing import Optional, Union

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..counterfactual import CfRequest, GaConfig, solve_counterfactual, what_if_sweep
from ..errors import DataValidationError, SchemaError, StrStudioError
from ..explain import pdp
from ..explain.dependence import DEFAULT_PDP_POINTS, default_grid_for
from ..ingest.types import LAUNCH_WEEK_FEATURE
from .drafts import DraftStore, IllegalTransition, VALID_STATUSES
from .state import EngineState
from .views import (
    catalog_summary,
    encode_request_attributes,
    filter_products,
    forecast_payload,
    product_summary_row,
    product_view,
    sort_products,
)

AttrMap = dict[str, Optional[Union[str, float]]]


class ForecastBody(BaseModel):
    attributes: AttrMap = Field(default_factory=dict)
    launch_week: int
    list_price: float


class WhatIfBody(ForecastBody):
    feature: str
    candidates: Optional[list[Union[str, float]]] = None


class CounterfactualBody(ForecastBody):
    target: float
    epsilon: float = 0.02
    mutable_features: Optional[list[str]] = None
    frozen_features: Optional[list[str]] = None
    seed: int = 0
    generations: int = 200
    population_size: int = 64


class DesignBody(BaseModel):
    attributes: AttrMap = Field(default_factory=dict)
    category: Optional[str] = None
    launch_week: Optional[int] = None
    list_price: Optional[float] = None
    images: list[str] = Field(default_factory=list)


class FeedbackBody(BaseModel):
    author: str
    text: str


class StatusBody(BaseModel):
    status: str


def _error(status: int, code: str, message: str, field: Optional[str] = None) -> JSONResponse:
    body = {"code": code, "message": message}
    if field:
        body["field"] = field
    return JSONResponse(status_code=status, content=body)


def create_app(state: EngineState, draft_store: Optional[DraftStore] = None) -> FastAPI:
    app = FastAPI(title="STR Studio", version="0.1.0")
    drafts = draft_store or DraftStore(state.data_dir / "designs.jsonl")

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = ".".join(str(p) for p in first.get("loc", []) if p != "body")
        return _error(400, "invalid_request", first.get("msg", "invalid request body"), loc or None)

    @app.exception_handler(DataValidationError)
    async def _data_handler(request: Request, exc: DataValidationError):
        return _error(400, "invalid_request", str(exc), exc.field)

    @app.exception_handler(SchemaError)
    async def _schema_handler(request: Request, exc: SchemaError):
        return _error(400, "schema_error", str(exc))

    @app.exception_handler(IllegalTransition)
    async def _transition_handler(request: Request, exc: IllegalTransition):
        return _error(409, "illegal_transition", str(exc), "status")

    @app.exception_handler(KeyError)
    async def _missing_handler(request: Request, exc: KeyError):
        return _error(404, "not_found", f"unknown id {exc.args[0]!r}")

    @app.exception_handler(StrStudioError)
    async def _generic_handler(request: Request, exc: StrStudioError):
        return _error(400, "error", str(exc))

    @app.get("/health")
    def health():
        return {"status": "ok", "products": len(state.products), "rows": len(state.dataset)}

    @app.get("/schema")
    def schema():
        feats = []
        for f in state.schema.features:
            entry = {"name": f.name, "kind": f.kind}
            if f.kind == "categorical":
                by_code = sorted(f.codes.items(), key=lambda kv: kv[1])
                entry["labels"] = [label for label, _ in by_code]
            else:
                entry["range"] = list(f.value_range)
            feats.append(entry)
        return {"features": feats, "fingerprint": state.schema.fingerprint()}

    @app.get("/products")
    def products(
        request: Request,
        category: Optional[str] = None,
        str_min: Optional[float] = None,
        str_max: Optional[float] = None,
        q: Optional[str] = None,
        sort: str = "id",
        page: int = 1,
        page_size: int = 50,
    ):
        attrs = {
            key[5:]: value
            for key, value in request.query_params.items()
            if key.startswith("attr:")
        }
        found = filter_products(state, category=category, attrs=attrs, str_min=str_min, str_max=str_max, q=q)
        found = sort_products(state, found, sort)
        if page < 1 or page_size < 1:
            raise DataValidationError("page and page_size must be >= 1", field="page")
        start = (page - 1) * page_size
        items = [product_summary_row(state, p) for p in found[start : start + page_size]]
        return {"items": items, "total": len(found), "page": page, "page_size": page_size}

    @app.get("/products/{product_id}")
    def product(product_id: str):
        return product_view(state, product_id)

    @app.get("/summary")
    def summary(group_by: str = "category"):
        return {"group_by": group_by, "groups": catalog_summary(state, group_by)}

    @app.post("/forecast")
    def forecast(body: ForecastBody):
        instance = encode_request_attributes(state, body.attributes, body.launch_week, body.list_price)
        return forecast_payload(state, instance)

    @app.post("/whatif")
    def whatif(body: WhatIfBody):
        instance = encode_request_attributes(state, body.attributes, body.launch_week, body.list_price)
        feature = state.schema.index_of(body.feature)
        spec = state.schema.features[feature]
        if body.candidates is None:
            grid = default_grid_for(state.dataset, feature)
        elif spec.kind == "categorical":
            grid = []
            for label in body.candidates:
                code = spec.codes.get(str(label))
                if code is None:
                    raise DataValidationError(
                        f"unknown label {label!r} for '{spec.name}'", field="candidates"
                    )
                grid.append(float(code))
        else:
            grid = [float(v) for v in body.candidates]
        points = what_if_sweep(state.estimator, instance, feature, grid, state.schema)
        for p in points:
            if spec.kind == "categorical":
                p["label"] = spec.label_of(int(p["value"]))
        return {"feature": spec.name, "points": points}

    @app.post("/counterfactual")
    def counterfactual(body: CounterfactualBody):
        instance = encode_request_attributes(state, body.attributes, body.launch_week, body.list_price)
        names = state.schema.feature_names
        if body.mutable_features is not None:
            mutable = [state.schema.index_of(n) for n in body.mutable_features]
        else:
            mutable = [i for i, n in enumerate(names) if n != LAUNCH_WEEK_FEATURE]
        if body.frozen_features:
            frozen = {state.schema.index_of(n) for n in body.frozen_features}
            mutable = [i for i in mutable if i not in frozen]
        negligible = {}
        price_idx = state.price_feature_index()
        if price_idx is not None:
            negligible[price_idx] = 0.001
        request_obj = CfRequest(
            instance=instance,
            target=body.target,
            mutable_features=mutable,
            schema=state.schema,
            epsilon=body.epsilon,
            ga=GaConfig(seed=body.seed, generations=body.generations, population_size=body.population_size),
            negligible=negligible,
        )
        result = solve_counterfactual(state.estimator, request_obj)
        return result.to_dict()

    @app.get("/importance")
    def importance(method: str = "mean_abs_shap"):
        report = state.importance(method)
        names = report.feature_names or state.schema.feature_names
        scores = [
            {"feature": names[i], "score": float(report.scores[i]), "raw": float(report.raw[i])}
            for i in range(len(names))
        ]
        scores.sort(key=lambda s: (-s["score"], s["feature"]))
        return {"method": report.method, "scores": scores}

    @app.get("/pdp")
    def pdp_endpoint(feature: str, points: int = DEFAULT_PDP_POINTS):
        idx = state.schema.index_of(feature)
        spec = state.schema.features[idx]
        grid = default_grid_for(state.dataset, idx, points=points)
        curve = pdp(state.base_model, state.dataset, idx, grid)
        out = curve.to_dict()
        if spec.kind == "categorical":
            out["labels"] = [spec.label_of(int(v)) for v in curve.grid]
        return out

    @app.get("/designs")
    def list_designs(status: Optional[str] = None):
        if status is not None and status not in VALID_STATUSES:
            raise DataValidationError(f"unknown status '{status}'", field="status")
        return {"items": [d.to_dict() for d in drafts.list(status)]}

    @app.post("/designs", status_code=201)
    def create_design(body: DesignBody):
        draft = drafts.create(
            attributes=body.attributes,
            category=body.category,
            launch_week=body.launch_week,
            list_price=body.list_price,
            images=body.images,
        )
        return draft.to_dict()

    @app.post("/designs/{draft_id}/feedback")
    def add_feedback(draft_id: str, body: FeedbackBody):
        return drafts.add_feedback(draft_id, body.author, body.text).to_dict()

    @app.post("/designs/{draft_id}/like")
    def like(draft_id: str):
        return drafts.like(draft_id).to_dict()

    @app.post("/designs/{draft_id}/status")
    def set_status(draft_id: str, body: StatusBody):
        return drafts.set_status(draft_id, body.status).to_dict()

    return app
