"""Review-service HTTP API over a curation store.

REST surface:

* ``GET /api/queue?rater_id=`` — items the rater may act on
* ``GET /api/items/{item_id}`` — full item with image URL and panel boxes
* ``POST /api/items/{item_id}/verdict`` — ``{rater_id, decision, scores?, revision}``
* ``POST /api/items/{item_id}/revise`` — ``{rater_id, revision}`` (conflict only)
* ``POST /api/items/{item_id}/adjudicate`` — ``{rater_id, decision, revision}``
* ``GET /api/stats`` — per-state counts, curation agreement, score-agreement report
* ``GET /api/figures/{name}`` — image bytes by exported file name

Errors: 404 unknown ids, 409 stale revision / duplicate / terminal state,
400 schema violations. When a built UI directory is supplied it is served at /.
"""
from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..errors import (
    DegenerateMatrix,
    DuplicateVerdict,
    EmptyInput,
    NoDualVerdicts,
    StaleRevision,
    TerminalState,
    UnknownItem,
)
from ..stats import RatingRecord, build_agreement_report
from .curation import CurationStore, curation_agreement


class VerdictBody(BaseModel):
    rater_id: str
    decision: str
    scores: dict | None = None
    revision: int


class ReviseBody(BaseModel):
    rater_id: str
    revision: int


class AdjudicateBody(BaseModel):
    rater_id: str
    decision: str
    revision: int


def load_figures_meta(figures_path: str | Path) -> dict[tuple[str, str], dict]:
    meta = {}
    path = Path(figures_path)
    if not path.exists():
        return meta
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                entry = json.loads(line)
                meta[(entry["article_id"], entry["figure_id"])] = entry
    return meta


def create_app(
    store: CurationStore,
    figures_meta: dict[tuple[str, str], dict] | None = None,
    images_root: str | Path | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="figforge review service")
    figures_meta = figures_meta or {}
    images_root = Path(images_root) if images_root else None

    @app.exception_handler(RequestValidationError)
    async def schema_violation(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def run_command(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except UnknownItem as exc:
            raise HTTPException(404, str(exc))
        except (StaleRevision, DuplicateVerdict, TerminalState) as exc:
            raise HTTPException(409, str(exc))
        except ValueError as exc:
            raise HTTPException(400, str(exc))

    @app.get("/api/queue")
    def queue(rater_id: str):
        items = store.queue_for(rater_id)
        return [
            {"item_id": i.item_id, "category": i.category, "state": i.state,
             "revision": i.revision, "question": i.record.get("question", "")}
            for i in items
        ]

    @app.get("/api/items/{item_id}")
    def item_detail(item_id: str):
        item = run_command(store.get, item_id)
        payload = item.to_json()
        prov = item.record.get("provenance", {})
        meta = figures_meta.get((prov.get("article_id"), prov.get("figure_id")))
        if meta:
            payload["figure"] = {
                "image_url": f"/api/figures/{Path(meta['image']).name}",
                "width": meta["width"],
                "height": meta["height"],
                "panels": meta["panels"],
            }
        else:
            payload["figure"] = None
        return payload

    @app.post("/api/items/{item_id}/verdict")
    def submit_verdict(item_id: str, body: VerdictBody):
        state = run_command(
            store.submit_verdict, item_id, body.rater_id, body.decision,
            scores=body.scores, revision=body.revision,
        )
        item = store.get(item_id)
        return {"item_id": item_id, "state": state, "revision": item.revision}

    @app.post("/api/items/{item_id}/revise")
    def revise(item_id: str, body: ReviseBody):
        run_command(store.revise, item_id, body.rater_id, revision=body.revision)
        item = store.get(item_id)
        return {"item_id": item_id, "state": item.state, "revision": item.revision}

    @app.post("/api/items/{item_id}/adjudicate")
    def adjudicate(item_id: str, body: AdjudicateBody):
        state = run_command(
            store.adjudicate, item_id, body.rater_id, body.decision, revision=body.revision,
        )
        item = store.get(item_id)
        return {"item_id": item_id, "state": state, "revision": item.revision}

    @app.get("/api/stats")
    def stats():
        items = store.items()
        try:
            agreement = curation_agreement(items)
        except NoDualVerdicts:
            agreement = None
        ratings = []
        for item in items:
            refined = bool(item.record.get("provenance", {}).get("refined"))
            stage = 5 if refined else 4
            for verdict in item.history:
                if verdict.scores:
                    ratings.append(RatingRecord(
                        sample_id=item.item_id, stage=stage, rater_id=verdict.rater_id,
                        correctness=verdict.scores["correctness"],
                        completeness=verdict.scores["completeness"],
                        clarity=verdict.scores["clarity"],
                    ))
        report = None
        if ratings:
            try:
                report = build_agreement_report(ratings).to_json()
            except (EmptyInput, DegenerateMatrix):
                report = None  # not enough complete dual-scored items yet
        return {
            "per_state": store.per_state_counts(),
            "agreement_pct": agreement,
            "ratings_report": report,
        }

    @app.get("/api/figures/{name}")
    def figure_bytes(name: str):
        if images_root is None:
            raise HTTPException(404, "no images root configured")
        target = (images_root / name).resolve()
        if not str(target).startswith(str(images_root.resolve())) or not target.is_file():
            raise HTTPException(404, f"no figure {name!r}")
        media = "image/png" if target.suffix.lower() == ".png" else "image/jpeg"
        return Response(content=target.read_bytes(), media_type=media)

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
