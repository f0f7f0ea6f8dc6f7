"""Simulate both studies end to end and print the analysis in the layout of
the result tables: pairwise pair-preference tests per domain, then the
per-question Friedman/Nemenyi grid for the rating study.

Simulated raters prefer directives over counterfactuals over prototypes, so
the pipeline should recover exactly that ordering.
"""

import numpy as np

from recourse import (
    PairwiseResponse,
    RatingResponse,
    ResponseStore,
    analyze_pairwise,
    analyze_ratings,
    build_study_plan,
    load_corpus,
)
from recourse.assessment import QUESTION_IDS, pairwise_rows, rating_rows

ACTIONABILITY = {"directive": 4.6, "counterfactual": 3.3, "prototypical": 1.9}

corpus = load_corpus()
store = ResponseStore()
rng = np.random.default_rng(42)

# study 1: 80 raters pick the more actionable of two explanations
for i in range(80):
    session = store.register_session(
        build_study_plan(f"pair-{i}", "pairwise", corpus, seed=i)
    )
    for task in session.tasks:
        scores = {k: ACTIONABILITY[k] + rng.normal(0, 1.0) for k in task.pair}
        choice = max(task.pair, key=scores.get)
        store.record_pairwise(
            PairwiseResponse(session.id, task.scenario_id, task.pair, choice)
        )

# study 2: 80 raters score one explanation per scenario on the instrument
for i in range(80):
    session = store.register_session(
        build_study_plan(f"rate-{i}", "rating", corpus, seed=10_000 + i)
    )
    for task in session.tasks:
        answers = {
            q: int(np.clip(round(ACTIONABILITY[task.kind] + rng.normal(0, 0.7)), 1, 5))
            for q in QUESTION_IDS
        }
        store.record_rating(
            RatingResponse(session.id, task.scenario_id, task.kind, answers, 30.0)
        )

print("study 1: pairwise comparisons")
report = analyze_pairwise(pairwise_rows(store))
for domain, d in report.domains.items():
    f = d.friedman
    print(f"\n  {domain} (N={d.n_participants})  counts={d.selection_counts}")
    print(f"    chi2({f.df}) = {f.chi2:.1f}   p = {f.p:.2g}   Kendall's W = {f.kendall_w:.2f}")
    for pair, p in d.posthoc.items():
        print(f"    {pair}: p = {p:.2g}")

print("\nstudy 2: ratings via the seven-question instrument")
report = analyze_ratings(rating_rows(store))
for domain, d in report.domains.items():
    print(f"\n  {domain} (N={d.n_participants})")
    header = "    " + " ".join(f"{q:>8}" for q in QUESTION_IDS)
    print(header)
    chi_row = "    " + " ".join(
        f"{d.questions[q].friedman.chi2:8.1f}" for q in QUESTION_IDS
    )
    w_row = "    " + " ".join(
        f"{d.questions[q].friedman.kendall_w:8.2f}" for q in QUESTION_IDS
    )
    dp_row = "    " + " ".join(
        f"{d.questions[q].posthoc['d vs p']:8.2g}" for q in QUESTION_IDS
    )
    print(chi_row + "   chi2(2)")
    print(w_row + "   Kendall's W")
    print(dp_row + "   d vs p")
