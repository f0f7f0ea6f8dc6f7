"""HTTP facade over the corpus, the generation engines, the study harness,
and the analysis. Every route is a thin delegate; payload schemas are
documented in api.md at the repository root.

Raters authenticate with the opaque session token returned at session
creation. Rating-study task payloads carry explanation text only; the
explanation type's name never appears in anything a participant sees.
"""

from __future__ import annotations

import random
import secrets
from dataclasses import replace

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import assessment, counterfactual, mcts, prototypes, scenarios, stats
from .data import (
    Dataset,
    MadWeights,
    instance_from_dict,
    instance_to_dict,
    model_from_dict,
    schema_from_dict,
)
from .errors import (
    AnswerOutOfRange,
    DuplicateResponse,
    NoResponses,
    OutOfPlanTask,
    RecourseError,
    UnknownSession,
)

_STATUS = {
    UnknownSession: 404,
    DuplicateResponse: 409,
    OutOfPlanTask: 422,
    AnswerOutOfRange: 422,
    NoResponses: 404,
}


def _error_response(exc: RecourseError) -> JSONResponse:
    status = 400
    for klass, code in _STATUS.items():
        if isinstance(exc, klass):
            status = code
            break
    return JSONResponse(
        status_code=status,
        content={
            "code": type(exc).__name__,
            "message": str(exc),
            "detail": getattr(exc, "problems", None),
        },
    )


def _scenario_payload(s: scenarios.Scenario) -> dict:
    return {
        "id": s.id,
        "domain": s.domain,
        "title": s.title,
        "narrative": s.narrative,
        "scale_notes": s.scale_notes,
        "profile_rows": [
            [spec.name, scenarios.format_value(spec, v)]
            for spec, v in zip(s.schema, s.profile.values)
        ],
        "decision_header": s.info.decision_header,
        "decision_text": s.decision_text,
    }


def _dataset_from_payload(doc: dict, schema) -> Dataset:
    rows = tuple(instance_from_dict({"values": r}, schema) for r in doc["rows"])
    return Dataset(schema, rows, tuple(int(y) for y in doc["labels"]))


def _weights_from_payload(doc: dict, schema) -> MadWeights:
    if "mad_weights" in doc:
        return MadWeights(schema, tuple(float(v) for v in doc["mad_weights"]))
    if "dataset" in doc:
        from .data import mad_weights

        return mad_weights(_dataset_from_payload(doc["dataset"], schema))
    return MadWeights(schema, tuple(1.0 for _ in schema))


def create_app(store: assessment.ResponseStore | None = None,
               corpus: scenarios.Corpus | None = None,
               seed: int | None = None) -> FastAPI:
    """Application factory. `seed` makes server-side randomization (study
    allocation and plan seeds) reproducible for tests."""
    store = store if store is not None else assessment.ResponseStore()
    corpus = corpus if corpus is not None else scenarios.load_corpus()
    server_rng = random.Random(seed)
    tokens: dict[str, str] = {}

    app = FastAPI(title="recourse study service")
    # the survey UI is typically served from another origin (static server)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(RecourseError)
    async def _handle(request: Request, exc: RecourseError):
        return _error_response(exc)

    @app.exception_handler(KeyError)
    @app.exception_handler(ValueError)
    async def _handle_bad_payload(request: Request, exc: Exception):
        return JSONResponse(
            status_code=400,
            content={"code": "BadRequest", "message": str(exc), "detail": None},
        )

    # -- sessions --

    @app.post("/sessions")
    def create_session(body: dict):
        participant = body["participant"]
        study = body.get("study") or server_rng.choice(assessment.STUDIES)
        if study not in assessment.STUDIES:
            raise ValueError(f"study must be one of {assessment.STUDIES}")
        plan_seed = body.get("seed")
        if plan_seed is None:
            plan_seed = server_rng.randrange(2**31)
        session = assessment.build_study_plan(participant, study, corpus, int(plan_seed))
        if body.get("demographics"):
            session = replace(session, demographics=dict(body["demographics"]))
        store.register_session(session)
        token = secrets.token_hex(16)
        tokens[session.id] = token
        return {
            "session_id": session.id,
            "token": token,
            "study": session.study,
            "domain": session.domain,
            "n_tasks": len(session.tasks),
            "seed": session.seed,
        }

    def _authorized(session_id: str, token: str) -> assessment.Session:
        session = store.session(session_id)
        if tokens.get(session_id) != token:
            raise UnknownSession("bad or missing session token")
        return session

    @app.get("/sessions/{session_id}/next")
    def next_task(session_id: str, token: str = ""):
        session = _authorized(session_id, token)
        task = store.next_task(session_id)
        if task is None:
            return {"done": True}
        index = session.tasks.index(task)
        scenario = corpus.by_id(task.scenario_id)
        payload = {
            "done": False,
            "task_index": index,
            "n_tasks": len(session.tasks),
            "study": session.study,
            "role_framing": assessment.ROLE_FRAMINGS[session.domain] if index == 0 else None,
            "scenario": _scenario_payload(scenario),
        }
        if isinstance(task, assessment.RatingTask):
            payload["explanation"] = {
                "text": scenarios.display_text(scenario, task.kind)
            }
            payload["instrument"] = [
                {"id": q.id, "text": q.text, "topic": q.topic}
                for q in assessment.instrument()
            ]
            payload["scale"] = {
                "points": store.scale_points,
                "anchors": {str(k): v for k, v in assessment.LIKERT_ANCHORS.items()},
            }
        else:
            payload["prompt"] = assessment.PAIRWISE_PROMPT
            payload["panels"] = [
                {"side": side, "text": scenarios.display_text(scenario, kind)}
                for side, kind in zip(("A", "B"), task.pair)
            ]
        return payload

    @app.post("/sessions/{session_id}/responses")
    def submit_response(session_id: str, body: dict, token: str = ""):
        session = _authorized(session_id, token)
        scenario_id = body["scenario_id"]
        if session.study == "rating":
            task = next(
                (t for t in session.tasks if t.scenario_id == scenario_id), None
            )
            if task is None:
                raise OutOfPlanTask(f"{scenario_id!r} is not in the session plan")
            answers = {q: int(v) for q, v in body.get("answers", {}).items()}
            stored = store.record_rating(
                assessment.RatingResponse(
                    session_id, scenario_id, task.kind, answers,
                    float(body.get("elapsed_s", 0.0)),
                )
            )
        else:
            task = next(
                (t for t in session.tasks if t.scenario_id == scenario_id), None
            )
            if task is None:
                raise OutOfPlanTask(f"{scenario_id!r} is not in the session plan")
            side = body.get("choice")
            if side not in ("A", "B"):
                raise AnswerOutOfRange("choice must be 'A' or 'B'")
            chosen = task.pair[0 if side == "A" else 1]
            stored = store.record_pairwise(
                assessment.PairwiseResponse(
                    session_id, scenario_id, task.pair, chosen
                )
            )
        return {"stored": stored, "done": store.next_task(session_id) is None}

    # -- static corpus and instrument --

    @app.get("/scenarios")
    def get_scenarios():
        return corpus.to_dict()

    @app.get("/instrument")
    def get_instrument():
        return [
            {"id": q.id, "text": q.text, "topic": q.topic}
            for q in assessment.instrument()
        ]

    # -- generation engines --

    @app.post("/generate/cf")
    def generate_cf(body: dict):
        schema = schema_from_dict(body["schema"])
        model = model_from_dict(body["model"], schema)
        x = instance_from_dict(body["instance"], schema)
        w = _weights_from_payload(body, schema)
        cfg_doc = body.get("config", {})
        cfg = counterfactual.CounterfactualConfig(
            grid=cfg_doc.get("grid_steps", counterfactual.DEFAULT_GRID_STEPS),
            frozen_features=frozenset(cfg_doc.get("freeze", ())),
            max_candidates=cfg_doc.get("max_candidates", 2_000_000),
        )
        result = counterfactual.find_counterfactual(model, x, w, cfg)
        return result.to_dict(schema)

    @app.post("/generate/proto")
    def generate_proto(body: dict):
        schema = schema_from_dict(body["schema"])
        data = _dataset_from_payload(body["dataset"], schema)
        result = prototypes.protodash_select(
            data,
            int(body["class"]),
            int(body.get("m", 10)),
            body.get("bandwidth"),
        )
        out = result.to_dict()
        out["top_prototype"] = instance_to_dict(
            prototypes.top_prototype(result, data), schema
        )
        return out

    @app.post("/generate/directive")
    def generate_directive(body: dict):
        schema = schema_from_dict(body["schema"])
        model = model_from_dict(body["model"], schema)
        x = instance_from_dict(body["instance"], schema)
        actions = mcts.actions_from_dict(body["actions"], schema)
        if "counterfactual" in body:
            c = instance_from_dict(body["counterfactual"], schema)
        else:
            w = _weights_from_payload(body, schema)
            c = counterfactual.find_counterfactual(model, x, w).c
        cfg_doc = body.get("config", {})
        cfg = mcts.MctsConfig(
            delta=cfg_doc.get("delta", 5.0),
            horizon=cfg_doc.get("horizon", 3),
            num_rollouts=cfg_doc.get("rollouts", 1000),
            seed=cfg_doc.get("seed", 0),
            max_depth=cfg_doc.get("max_depth", 10),
        )
        plans = mcts.generate_directives(x, model, actions, c, cfg)
        return {
            "counterfactual": instance_to_dict(c, schema),
            "plans": [p.to_dict(schema) for p in plans],
        }

    # -- analysis --

    @app.get("/analysis")
    def analysis(study: str):
        if study == "pairwise":
            return stats.analyze_pairwise(assessment.pairwise_rows(store)).to_dict()
        if study == "rating":
            return stats.analyze_ratings(assessment.rating_rows(store)).to_dict()
        raise RecourseError(f"unknown study {study!r}")

    return app
