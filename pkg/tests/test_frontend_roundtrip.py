"""Secondary-component round trip: a driven browser session (the TypeScript
survey UI running under happy-dom) completes one pairwise and one rating
study against a live service; every submission lands in the export, and
analysis over the export equals analysis over the in-memory store."""

import os
import shutil
import socket
import subprocess
import threading
import time
from pathlib import Path

import pytest

from recourse.assessment import (
    PairwiseResponse,
    QUESTION_IDS,
    RatingResponse,
    ResponseStore,
    build_study_plan,
    export_responses,
    pairwise_rows,
    rating_rows,
    read_export,
)
from recourse.scenarios import load_corpus
from recourse.service import create_app
from recourse.stats import analyze_pairwise, analyze_ratings

FRONTEND = Path(__file__).resolve().parent.parent / "frontend"
VITEST = FRONTEND / "node_modules" / ".bin" / "vitest"

pytestmark = pytest.mark.skipif(
    not VITEST.exists() or shutil.which("node") is None,
    reason="frontend toolchain not installed",
)


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def start_server(app, port):
    import uvicorn

    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.05)
    return server, thread


def seed_scripted_participants(store, corpus):
    """Library-path participants in the same domain (credit) as the UI
    sessions, so each study has an analyzable matrix."""
    for i, seed in enumerate((43, 49)):  # both seeds draw the credit domain
        session = store.register_session(
            build_study_plan(f"scripted-rating-{i}", "rating", corpus, seed)
        )
        assert session.domain == "credit"
        for task in session.tasks:
            base = {"directive": 5, "counterfactual": 3, "prototypical": 2}[task.kind]
            store.record_rating(RatingResponse(
                session.id, task.scenario_id, task.kind,
                {q: max(1, base - (i % 2)) for q in QUESTION_IDS}, 1.0,
            ))
        session = store.register_session(
            build_study_plan(f"scripted-pairwise-{i}", "pairwise", corpus, seed)
        )
        assert session.domain == "credit"
        for task in session.tasks:
            choice = "directive" if "directive" in task.pair else "counterfactual"
            store.record_pairwise(PairwiseResponse(
                session.id, task.scenario_id, task.pair, choice,
            ))


def test_ui_round_trip():
    corpus = load_corpus()
    store = ResponseStore()
    seed_scripted_participants(store, corpus)
    port = free_port()
    server, thread = start_server(create_app(store=store, corpus=corpus, seed=0), port)
    try:
        env = dict(os.environ, RECOURSE_BASE_URL=f"http://127.0.0.1:{port}")
        result = subprocess.run(
            [str(VITEST), "run", "tests/live.test.ts"],
            cwd=FRONTEND,
            env=env,
            capture_output=True,
            text=True,
            timeout=300,
        )
        assert result.returncode == 0, result.stdout + result.stderr
    finally:
        server.should_exit = True
        thread.join(timeout=10)

    # every UI submission is in the store and in the export
    ui_ratings = [r for r in rating_rows(store) if r["participant"] == "ui-rating"]
    ui_choices = [r for r in pairwise_rows(store) if r["participant"] == "ui-pairwise"]
    assert len(ui_ratings) == 3 and len(ui_choices) == 3
    assert {r["kind"] for r in ui_ratings} == {
        "counterfactual", "directive", "prototypical",
    }

    rating_export = export_responses(store, "rating")
    pairwise_export = export_responses(store, "pairwise")
    assert rating_export.count("ui-rating") == 3
    assert pairwise_export.count("ui-pairwise") == 3

    # analysis over the export equals analysis over the in-memory store
    assert (
        analyze_ratings(read_export(rating_export)).to_dict()
        == analyze_ratings(rating_rows(store)).to_dict()
    )
    assert (
        analyze_pairwise(read_export(pairwise_export)).to_dict()
        == analyze_pairwise(pairwise_rows(store)).to_dict()
    )
    print("\nACCEPTANCE ui-round-trip: PASS")
