"""The seven-question actionability instrument, the two study protocols with
their randomization rules, and durable capture of participant responses.

Study 1 shows each participant three scenario tasks with two competing
explanations and one forced choice; study 2 shows three scenario tasks, one
explanation each (every explanation type exactly once), rated on all seven
questions. Raters never see a definition of "actionable" and never see the
explanation type's name.
"""

from __future__ import annotations

import csv
import io
import json
import os
import random
import tempfile
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import (
    AnswerOutOfRange,
    CorpusTooSmall,
    DuplicateResponse,
    OutOfPlanTask,
    UnknownSession,
)
from .stats import KINDS

STUDIES = ("pairwise", "rating")
DOMAINS = ("credit", "employee")

LIKERT_POINTS = 5
LIKERT_ANCHORS = {
    1: "Strongly disagree",
    2: "Disagree",
    3: "Neither agree nor disagree",
    4: "Agree",
    5: "Strongly agree",
}

PAIRWISE_PROMPT = "Which of the two explanations do you think is more actionable?"

ROLE_FRAMINGS = {
    "credit": (
        "Imagine you are the loan applicant. The information you receive is "
        "meant to help you change the model's decision (for example, to get "
        "your loan approved)."
    ),
    "employee": (
        "Imagine you are the concerned employee's supervisor. The information "
        "you receive is meant to help you prevent employees from leaving the "
        "organisation."
    ),
}

TOPIC_CLARITY = "clarity"
TOPIC_DECISION = "decision-understanding"
TOPIC_PERSONALISATION = "personalisation"
TOPIC_CORRECTION = "correction"
TOPIC_ACTION = "action"


@dataclass(frozen=True)
class Question:
    id: str
    text: str
    topic: str


_QUESTIONS = (
    Question("Q1", "The information is clear and easy to understand.", TOPIC_CLARITY),
    Question("Q2", "The information helps me understand the reason(s) for the decision.", TOPIC_DECISION),
    Question("Q3", "The information is relevant to my personal circumstances.", TOPIC_PERSONALISATION),
    Question("Q4", "The information is socially appropriate.", TOPIC_PERSONALISATION),
    Question("Q5", "The information allows me to identify and correct any misunderstandings of my personal situation.", TOPIC_CORRECTION),
    Question("Q6", "The information allows me to identify at least one feasible action to achieve my desired outcome.", TOPIC_ACTION),
    Question("Q7", "The information allows me to break down any action into explicit steps.", TOPIC_ACTION),
)

QUESTION_IDS = tuple(q.id for q in _QUESTIONS)


def instrument() -> list[Question]:
    """The seven questions, always in the fixed order Q1..Q7."""
    return list(_QUESTIONS)


@dataclass(frozen=True)
class RatingTask:
    scenario_id: str
    kind: str


@dataclass(frozen=True)
class PairwiseTask:
    scenario_id: str
    pair: tuple[str, str]  # (side A kind, side B kind), presentation order


@dataclass(frozen=True)
class Session:
    id: str
    participant: str
    study: str
    domain: str
    tasks: tuple
    seed: int
    created_at: str
    demographics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        tasks = []
        for t in self.tasks:
            if isinstance(t, RatingTask):
                tasks.append({"scenario_id": t.scenario_id, "kind": t.kind})
            else:
                tasks.append({"scenario_id": t.scenario_id, "pair": list(t.pair)})
        return {
            "id": self.id,
            "participant": self.participant,
            "study": self.study,
            "domain": self.domain,
            "tasks": tasks,
            "seed": self.seed,
            "created_at": self.created_at,
            "demographics": dict(self.demographics),
        }


def build_study_plan(participant: str, study: str, corpus, seed: int) -> Session:
    """Deterministic randomized plan for one participant.

    The domain is drawn uniformly, 3 of its 4 scenarios are sampled without
    replacement, and then either each explanation type is assigned to exactly
    one scenario (rating study) or each unordered type pair appears exactly
    once with randomized presentation sides (pairwise study).
    """
    if study not in STUDIES:
        raise ValueError(f"study must be one of {STUDIES}")
    rng = random.Random(seed)
    domain = rng.choice(DOMAINS)
    pool = corpus.in_domain(domain)
    if len(pool) < 3:
        raise CorpusTooSmall(f"domain {domain!r} has {len(pool)} scenarios, need >= 3")
    chosen = rng.sample(pool, 3)
    if study == "rating":
        kinds = list(KINDS)
        rng.shuffle(kinds)
        tasks = tuple(RatingTask(s.id, k) for s, k in zip(chosen, kinds))
    else:
        pairs = [(a, b) for i, a in enumerate(KINDS) for b in KINDS[i + 1:]]
        rng.shuffle(pairs)
        sided = [pair if rng.random() < 0.5 else (pair[1], pair[0]) for pair in pairs]
        tasks = tuple(PairwiseTask(s.id, p) for s, p in zip(chosen, sided))
    return Session(
        id=uuid.uuid4().hex,
        participant=participant,
        study=study,
        domain=domain,
        tasks=tasks,
        seed=seed,
        created_at=datetime.now(timezone.utc).isoformat(),
    )


@dataclass(frozen=True)
class RatingResponse:
    session_id: str
    scenario_id: str
    kind: str
    answers: dict  # Q1..Q7 -> 1..LIKERT_POINTS
    elapsed_s: float = 0.0


@dataclass(frozen=True)
class PairwiseResponse:
    session_id: str
    scenario_id: str
    pair: tuple[str, str]
    choice: str  # the chosen kind, one of the pair


class ResponseStore:
    """Append-only response log with optional file persistence.

    Writes are idempotent on (session, scenario, kind-or-pair): replays raise
    DuplicateResponse and leave the log unchanged. Persistence rewrites the
    whole JSON log through an atomic rename, so readers never observe a torn
    file.
    """

    def __init__(self, path=None, scale_points: int = LIKERT_POINTS):
        self.path = path
        self.scale_points = scale_points
        self.sessions: dict[str, Session] = {}
        self.responses: list = []
        self._keys: set = set()
        if path is not None and os.path.exists(path):
            self._load(path)

    # -- persistence --

    def _load(self, path):
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        for rec in doc.get("sessions", []):
            tasks = []
            for t in rec["tasks"]:
                if "kind" in t:
                    tasks.append(RatingTask(t["scenario_id"], t["kind"]))
                else:
                    tasks.append(PairwiseTask(t["scenario_id"], tuple(t["pair"])))
            session = Session(
                id=rec["id"],
                participant=rec["participant"],
                study=rec["study"],
                domain=rec["domain"],
                tasks=tuple(tasks),
                seed=rec["seed"],
                created_at=rec["created_at"],
                demographics=rec.get("demographics", {}),
            )
            self.sessions[session.id] = session
        for rec in doc.get("responses", []):
            if rec["type"] == "rating":
                r = RatingResponse(
                    rec["session_id"], rec["scenario_id"], rec["kind"],
                    dict(rec["answers"]), rec.get("elapsed_s", 0.0),
                )
                self._keys.add((r.session_id, r.scenario_id, r.kind))
            else:
                r = PairwiseResponse(
                    rec["session_id"], rec["scenario_id"],
                    tuple(rec["pair"]), rec["choice"],
                )
                self._keys.add((r.session_id, r.scenario_id, frozenset(r.pair)))
            self.responses.append(r)

    def _persist(self):
        if self.path is None:
            return
        doc = {
            "sessions": [s.to_dict() for s in self.sessions.values()],
            "responses": [self._response_dict(r) for r in self.responses],
        }
        directory = os.path.dirname(os.path.abspath(self.path))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(doc, fh)
            os.replace(tmp, self.path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @staticmethod
    def _response_dict(r) -> dict:
        if isinstance(r, RatingResponse):
            return {
                "type": "rating",
                "session_id": r.session_id,
                "scenario_id": r.scenario_id,
                "kind": r.kind,
                "answers": dict(r.answers),
                "elapsed_s": r.elapsed_s,
            }
        return {
            "type": "pairwise",
            "session_id": r.session_id,
            "scenario_id": r.scenario_id,
            "pair": list(r.pair),
            "choice": r.choice,
        }

    # -- session management --

    def register_session(self, session: Session) -> Session:
        self.sessions[session.id] = session
        self._persist()
        return session

    def session(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownSession(f"no session {session_id!r}") from None

    def answered_keys(self, session_id: str) -> set:
        return {k for k in self._keys if k[0] == session_id}

    def next_task(self, session_id: str):
        """First unanswered task of a session's plan, or None when done."""
        session = self.session(session_id)
        for task in session.tasks:
            if isinstance(task, RatingTask):
                key = (session_id, task.scenario_id, task.kind)
            else:
                key = (session_id, task.scenario_id, frozenset(task.pair))
            if key not in self._keys:
                return task
        return None

    # -- recording --

    def record_rating(self, r: RatingResponse) -> str:
        session = self.session(r.session_id)
        if session.study != "rating":
            raise OutOfPlanTask(f"session {r.session_id!r} is not a rating session")
        task = RatingTask(r.scenario_id, r.kind)
        if task not in session.tasks:
            raise OutOfPlanTask(f"{r.scenario_id!r}/{r.kind!r} is not in the session plan")
        missing = [q for q in QUESTION_IDS if q not in r.answers]
        if missing:
            raise AnswerOutOfRange(f"missing answer(s): {', '.join(missing)}")
        extra = [q for q in r.answers if q not in QUESTION_IDS]
        if extra:
            raise AnswerOutOfRange(f"unknown question(s): {', '.join(extra)}")
        for q, v in r.answers.items():
            if not isinstance(v, int) or isinstance(v, bool) or not 1 <= v <= self.scale_points:
                raise AnswerOutOfRange(f"{q} answer {v!r} not an integer in 1..{self.scale_points}")
        key = (r.session_id, r.scenario_id, r.kind)
        if key in self._keys:
            raise DuplicateResponse(f"task already answered: {key}")
        self._keys.add(key)
        self.responses.append(r)
        self._persist()
        return f"{r.session_id}:{len(self.responses) - 1}"

    def record_pairwise(self, p: PairwiseResponse) -> str:
        session = self.session(p.session_id)
        if session.study != "pairwise":
            raise OutOfPlanTask(f"session {p.session_id!r} is not a pairwise session")
        planned = None
        for task in session.tasks:
            if isinstance(task, PairwiseTask) and task.scenario_id == p.scenario_id \
                    and frozenset(task.pair) == frozenset(p.pair):
                planned = task
                break
        if planned is None:
            raise OutOfPlanTask(f"{p.scenario_id!r}/{p.pair!r} is not in the session plan")
        if p.choice not in p.pair:
            raise AnswerOutOfRange(f"choice {p.choice!r} is not one of the pair {p.pair}")
        key = (p.session_id, p.scenario_id, frozenset(p.pair))
        if key in self._keys:
            raise DuplicateResponse(f"task already answered: {key}")
        self._keys.add(key)
        self.responses.append(p)
        self._persist()
        return f"{p.session_id}:{len(self.responses) - 1}"


EXPORT_COLUMNS = (
    "session", "participant", "domain", "study", "scenario",
    "kind_or_pair", "choice", *QUESTION_IDS, "elapsed_s",
)


def export_responses(store: ResponseStore, study: str) -> str:
    """CSV export of one study's responses, one row per response."""
    if study not in STUDIES:
        raise ValueError(f"study must be one of {STUDIES}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EXPORT_COLUMNS)
    for r in store.responses:
        session = store.sessions.get(r.session_id)
        if session is None or session.study != study:
            continue
        meta = [r.session_id, session.participant, session.domain, session.study, r.scenario_id]
        if isinstance(r, RatingResponse):
            row = meta + [r.kind, "", *[r.answers[q] for q in QUESTION_IDS], r.elapsed_s]
        else:
            row = meta + ["|".join(r.pair), r.choice, *[""] * len(QUESTION_IDS), ""]
        writer.writerow(row)
    return buf.getvalue()


def read_export(csv_text: str) -> list[dict]:
    """Parse an export back into analysis rows (the stats module's input)."""
    rows = []
    for rec in csv.DictReader(io.StringIO(csv_text)):
        row = {
            "session": rec["session"],
            "participant": rec["participant"],
            "domain": rec["domain"],
            "study": rec["study"],
            "scenario": rec["scenario"],
        }
        if rec["study"] == "rating":
            row["kind"] = rec["kind_or_pair"]
            row["answers"] = {q: int(rec[q]) for q in QUESTION_IDS}
            row["elapsed_s"] = float(rec["elapsed_s"]) if rec["elapsed_s"] else 0.0
        else:
            row["pair"] = tuple(rec["kind_or_pair"].split("|"))
            row["choice"] = rec["choice"]
        rows.append(row)
    return rows


def plan_coverage_problems(rows) -> list[str]:
    """Check the plan invariants from response rows alone (no session data):
    every complete rating participant covers each explanation type exactly
    once, and every complete pairwise participant covers each unordered type
    pair exactly once."""
    from .stats import KINDS

    problems = []
    by_participant: dict = {}
    for row in rows:
        by_participant.setdefault(row["participant"], []).append(row)
    all_pairs = {
        frozenset((KINDS[i], KINDS[j]))
        for i in range(len(KINDS))
        for j in range(i + 1, len(KINDS))
    }
    for participant, prows in sorted(by_participant.items()):
        if len(prows) != 3:
            continue  # incomplete participants are excluded upstream
        if "kind" in prows[0]:
            kinds = sorted(r["kind"] for r in prows)
            if kinds != sorted(KINDS):
                problems.append(f"{participant}: kinds {kinds} are not a bijection")
        else:
            pairs = {frozenset(r["pair"]) for r in prows}
            if pairs != all_pairs:
                problems.append(f"{participant}: pair coverage incomplete")
        scenarios = {r["scenario"] for r in prows}
        if len(scenarios) != 3:
            problems.append(f"{participant}: repeated scenario in plan")
    return problems


def rating_rows(store: ResponseStore) -> list[dict]:
    """In-memory analysis rows for the rating study (bypasses CSV)."""
    rows = []
    for r in store.responses:
        if isinstance(r, RatingResponse):
            s = store.sessions[r.session_id]
            rows.append({
                "session": r.session_id, "participant": s.participant,
                "domain": s.domain, "study": s.study, "scenario": r.scenario_id,
                "kind": r.kind, "answers": dict(r.answers), "elapsed_s": r.elapsed_s,
            })
    return rows


def pairwise_rows(store: ResponseStore) -> list[dict]:
    """In-memory analysis rows for the pairwise study."""
    rows = []
    for r in store.responses:
        if isinstance(r, PairwiseResponse):
            s = store.sessions[r.session_id]
            rows.append({
                "session": r.session_id, "participant": s.participant,
                "domain": s.domain, "study": s.study, "scenario": r.scenario_id,
                "pair": r.pair, "choice": r.choice,
            })
    return rows
