import itertools

import pytest

from recourse.assessment import (
    LIKERT_POINTS,
    PAIRWISE_PROMPT,
    PairwiseResponse,
    QUESTION_IDS,
    RatingResponse,
    ResponseStore,
    build_study_plan,
    export_responses,
    instrument,
    rating_rows,
    read_export,
)
from recourse.errors import (
    AnswerOutOfRange,
    CorpusTooSmall,
    DuplicateResponse,
    OutOfPlanTask,
    UnknownSession,
)
from recourse.scenarios import load_corpus
from recourse.stats import KINDS, analyze_ratings, chi_square_gof


@pytest.fixture(scope="module")
def corpus():
    return load_corpus()


# --- the instrument -------------------------------------------------------------

def test_seven_questions_in_fixed_order():
    qs = instrument()
    assert [q.id for q in qs] == [f"Q{i}" for i in range(1, 8)]
    assert instrument() == qs  # same order every call


def test_question_texts_and_topics():
    qs = {q.id: q for q in instrument()}
    assert qs["Q1"].text == "The information is clear and easy to understand."
    assert qs["Q4"].text == "The information is socially appropriate."
    assert qs["Q7"].text == "The information allows me to break down any action into explicit steps."
    assert qs["Q6"].topic == "action" and qs["Q7"].topic == "action"
    assert len({q.topic for q in instrument()}) == 5


def test_pairwise_prompt_is_fixed():
    assert PAIRWISE_PROMPT == "Which of the two explanations do you think is more actionable?"


# --- study plans ------------------------------------------------------------------

def test_same_seed_same_plan(corpus):
    a = build_study_plan("p1", "rating", corpus, seed=99)
    b = build_study_plan("p1", "rating", corpus, seed=99)
    assert a.tasks == b.tasks and a.domain == b.domain


def test_rating_plan_is_a_bijection(corpus):
    for seed in range(40):
        plan = build_study_plan("p", "rating", corpus, seed)
        assert len(plan.tasks) == 3
        assert sorted(t.kind for t in plan.tasks) == sorted(KINDS)
        assert len({t.scenario_id for t in plan.tasks}) == 3


def test_pairwise_plan_covers_all_three_pairs(corpus):
    want = {frozenset(p) for p in itertools.combinations(KINDS, 2)}
    for seed in range(40):
        plan = build_study_plan("p", "pairwise", corpus, seed)
        assert len(plan.tasks) == 3
        assert {frozenset(t.pair) for t in plan.tasks} == want


def test_scenario_omission_is_uniform(corpus):
    counts = {}
    for seed in range(1000):
        plan = build_study_plan("p", "rating", corpus, seed)
        used = {t.scenario_id for t in plan.tasks}
        pool = {s.id for s in corpus.in_domain(plan.domain)}
        (omitted,) = pool - used
        counts[omitted] = counts.get(omitted, 0) + 1
    for domain in ("credit", "employee"):
        ids = [s.id for s in corpus.in_domain(domain)]
        result = chi_square_gof([counts.get(i, 0) for i in ids])
        assert result.p > 0.01


def test_domain_allocation_is_roughly_even(corpus):
    domains = [build_study_plan("p", "rating", corpus, s).domain for s in range(600)]
    share = domains.count("credit") / len(domains)
    assert 0.4 < share < 0.6


def test_small_corpus_rejected(corpus):
    class Tiny:
        def in_domain(self, domain):
            return corpus.in_domain(domain)[:2]

    with pytest.raises(CorpusTooSmall):
        build_study_plan("p", "rating", Tiny(), seed=0)


# --- recording ---------------------------------------------------------------------

def rating_session(store, corpus, seed=1):
    session = build_study_plan("alice", "rating", corpus, seed)
    store.register_session(session)
    return session


def answers(v=3):
    return {q: v for q in QUESTION_IDS}


def test_valid_rating_stored(corpus):
    store = ResponseStore()
    session = rating_session(store, corpus)
    task = session.tasks[0]
    rid = store.record_rating(
        RatingResponse(session.id, task.scenario_id, task.kind, answers(), 12.5)
    )
    assert rid and len(store.responses) == 1


def test_out_of_scale_answer_rejected(corpus):
    store = ResponseStore()
    session = rating_session(store, corpus)
    task = session.tasks[0]
    bad = answers()
    bad["Q3"] = LIKERT_POINTS + 1
    with pytest.raises(AnswerOutOfRange):
        store.record_rating(RatingResponse(session.id, task.scenario_id, task.kind, bad))
    assert store.responses == []


def test_missing_answer_rejected(corpus):
    store = ResponseStore()
    session = rating_session(store, corpus)
    task = session.tasks[0]
    partial = answers()
    del partial["Q7"]
    with pytest.raises(AnswerOutOfRange):
        store.record_rating(RatingResponse(session.id, task.scenario_id, task.kind, partial))


def test_duplicate_leaves_store_unchanged(corpus):
    store = ResponseStore()
    session = rating_session(store, corpus)
    task = session.tasks[0]
    r = RatingResponse(session.id, task.scenario_id, task.kind, answers(), 3.0)
    store.record_rating(r)
    with pytest.raises(DuplicateResponse):
        store.record_rating(r)
    assert len(store.responses) == 1


def test_unknown_session_and_out_of_plan(corpus):
    store = ResponseStore()
    session = rating_session(store, corpus)
    with pytest.raises(UnknownSession):
        store.record_rating(RatingResponse("nope", "s", "directive", answers()))
    task = session.tasks[0]
    wrong_kind = next(k for k in KINDS if k != task.kind)
    with pytest.raises(OutOfPlanTask):
        store.record_rating(
            RatingResponse(session.id, task.scenario_id, wrong_kind, answers())
        )


def test_pairwise_choice_must_come_from_pair(corpus):
    store = ResponseStore()
    session = store.register_session(build_study_plan("bob", "pairwise", corpus, 5))
    task = session.tasks[0]
    outside = next(k for k in KINDS if k not in task.pair)
    with pytest.raises(AnswerOutOfRange):
        store.record_pairwise(
            PairwiseResponse(session.id, task.scenario_id, task.pair, outside)
        )
    store.record_pairwise(
        PairwiseResponse(session.id, task.scenario_id, task.pair, task.pair[0])
    )


def test_next_task_walks_the_plan(corpus):
    store = ResponseStore()
    session = rating_session(store, corpus)
    seen = []
    while (task := store.next_task(session.id)) is not None:
        seen.append(task)
        store.record_rating(
            RatingResponse(session.id, task.scenario_id, task.kind, answers())
        )
    assert seen == list(session.tasks)
    assert store.next_task(session.id) is None


def test_store_persists_and_replays(tmp_path, corpus):
    path = tmp_path / "log.json"
    store = ResponseStore(path)
    session = rating_session(store, corpus)
    task = session.tasks[0]
    store.record_rating(RatingResponse(session.id, task.scenario_id, task.kind, answers(), 9.0))

    reopened = ResponseStore(path)
    assert len(reopened.responses) == 1
    assert reopened.next_task(session.id) == session.tasks[1]
    with pytest.raises(DuplicateResponse):
        reopened.record_rating(
            RatingResponse(session.id, task.scenario_id, task.kind, answers())
        )


# --- export ---------------------------------------------------------------------

def test_empty_export_is_header_only():
    store = ResponseStore()
    text = export_responses(store, "rating")
    lines = text.strip().splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("session,participant,domain,study,scenario")


def test_export_has_one_row_per_response(corpus):
    store = ResponseStore()
    session = rating_session(store, corpus)
    for task in session.tasks:
        store.record_rating(
            RatingResponse(session.id, task.scenario_id, task.kind, answers(4), 2.0)
        )
    lines = export_responses(store, "rating").strip().splitlines()
    assert len(lines) == 4  # header + 3
    assert lines[1].count(",") == len(lines[0].split(",")) - 1


def fill_rating_store(store, corpus, n=12):
    for i in range(n):
        session = store.register_session(
            build_study_plan(f"p{i}", "rating", corpus, seed=1000 + i)
        )
        for j, task in enumerate(session.tasks):
            score = {"directive": 5, "counterfactual": 3, "prototypical": 2}[task.kind]
            noise = (i + j) % 2
            vals = {q: max(1, min(5, score - noise)) for q in QUESTION_IDS}
            store.record_rating(
                RatingResponse(session.id, task.scenario_id, task.kind, vals, 1.0)
            )


def test_export_round_trip_equals_in_memory_analysis(corpus):
    store = ResponseStore()
    fill_rating_store(store, corpus)
    from_store = analyze_ratings(rating_rows(store)).to_dict()
    from_export = analyze_ratings(read_export(export_responses(store, "rating"))).to_dict()
    assert from_export == from_store


def test_plan_coverage_checkable_from_responses_alone(corpus):
    from recourse.assessment import plan_coverage_problems

    store = ResponseStore()
    fill_rating_store(store, corpus)
    rows = read_export(export_responses(store, "rating"))
    assert plan_coverage_problems(rows) == []
    # corrupt one participant's kinds and the check catches it
    bad = [dict(r) for r in rows]
    victim = bad[0]["participant"]
    for r in bad:
        if r["participant"] == victim:
            r["kind"] = "directive"
    assert any(victim in p for p in plan_coverage_problems(bad))
