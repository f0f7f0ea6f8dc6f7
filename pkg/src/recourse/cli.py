"""Command line mirror of the service routes.

Engines: `recourse cf`, `recourse proto`, `recourse directive`.
Harness:  `recourse session new|next|respond`, `recourse export`,
          `recourse analyze`, `recourse scenarios`, `recourse instrument`.
Server:   `recourse serve`.
All commands print JSON (or CSV for export) to stdout.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import assessment, counterfactual, mcts, prototypes, scenarios, stats
from .data import (
    instance_from_dict,
    instance_to_dict,
    load_dataset,
    load_schema,
    mad_weights,
    model_from_dict,
    MadWeights,
)


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _emit(doc):
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _load_model_bits(args):
    schema = load_schema(args.schema)
    model = model_from_dict(_read_json(args.model), schema)
    x = instance_from_dict(_read_json(args.instance), schema)
    if getattr(args, "data", None):
        w = mad_weights(load_dataset(args.data, schema))
    else:
        w = MadWeights(schema, tuple(1.0 for _ in schema))
    return schema, model, x, w


def _cmd_cf(args):
    schema, model, x, w = _load_model_bits(args)
    cfg = counterfactual.CounterfactualConfig(
        grid=args.grid_steps, frozen_features=frozenset(args.freeze or ())
    )
    _emit(counterfactual.find_counterfactual(model, x, w, cfg).to_dict(schema))


def _cmd_proto(args):
    schema = load_schema(args.schema)
    data = load_dataset(args.data, schema)
    result = prototypes.protodash_select(data, args.class_label, args.m, args.bandwidth)
    doc = result.to_dict()
    doc["top_prototype"] = instance_to_dict(prototypes.top_prototype(result, data), schema)
    _emit(doc)


def _cmd_directive(args):
    schema, model, x, w = _load_model_bits(args)
    actions = mcts.load_actions(args.actions, schema)
    if args.counterfactual:
        c = instance_from_dict(_read_json(args.counterfactual), schema)
    else:
        c = counterfactual.find_counterfactual(model, x, w).c
    cfg = mcts.MctsConfig(
        delta=args.delta,
        horizon=args.horizon,
        num_rollouts=args.rollouts,
        seed=args.seed,
        max_depth=args.max_depth,
    )
    plans = mcts.generate_directives(x, model, actions, c, cfg)
    _emit({
        "counterfactual": instance_to_dict(c, schema),
        "plans": [p.to_dict(schema) for p in plans],
    })


def _cmd_session_new(args):
    corpus = scenarios.load_corpus(args.corpus)
    store = assessment.ResponseStore(args.store)
    session = assessment.build_study_plan(args.participant, args.study, corpus, args.seed)
    store.register_session(session)
    _emit(session.to_dict())


def _cmd_session_next(args):
    store = assessment.ResponseStore(args.store)
    task = store.next_task(args.session)
    if task is None:
        _emit({"done": True})
    elif isinstance(task, assessment.RatingTask):
        _emit({"done": False, "scenario_id": task.scenario_id, "kind": task.kind})
    else:
        _emit({"done": False, "scenario_id": task.scenario_id, "pair": list(task.pair)})


def _cmd_session_respond(args):
    store = assessment.ResponseStore(args.store)
    session = store.session(args.session)
    if session.study == "rating":
        values = [int(v) for v in args.answers.split(",")]
        answers = dict(zip(assessment.QUESTION_IDS, values))
        task = next(t for t in session.tasks if t.scenario_id == args.scenario)
        stored = store.record_rating(assessment.RatingResponse(
            args.session, args.scenario, task.kind, answers, args.elapsed
        ))
    else:
        task = next(t for t in session.tasks if t.scenario_id == args.scenario)
        chosen = task.pair[0 if args.choice == "A" else 1]
        stored = store.record_pairwise(assessment.PairwiseResponse(
            args.session, args.scenario, task.pair, chosen
        ))
    _emit({"stored": stored})


def _cmd_export(args):
    store = assessment.ResponseStore(args.store)
    sys.stdout.write(assessment.export_responses(store, args.study))


def _cmd_analyze(args):
    if args.export:
        with open(args.export, encoding="utf-8") as fh:
            rows = assessment.read_export(fh.read())
    else:
        store = assessment.ResponseStore(args.store)
        rows = (
            assessment.pairwise_rows(store)
            if args.study == "pairwise"
            else assessment.rating_rows(store)
        )
    if args.study == "pairwise":
        report = stats.analyze_pairwise(rows)
    else:
        report = stats.analyze_ratings(rows)
    if args.medians_out:
        with open(args.medians_out, "w", encoding="utf-8") as fh:
            fh.write(stats.medians_csv(report))
    _emit(report.to_dict())


def _cmd_scenarios(args):
    _emit(scenarios.load_corpus(args.corpus).to_dict())


def _cmd_instrument(_args):
    _emit([
        {"id": q.id, "text": q.text, "topic": q.topic}
        for q in assessment.instrument()
    ])


def _cmd_serve(args):
    import uvicorn

    from .service import create_app

    store = assessment.ResponseStore(args.store)
    corpus = scenarios.load_corpus(args.corpus)
    uvicorn.run(create_app(store, corpus), host=args.host, port=args.port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="recourse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cf", help="nearest counterfactual for an instance")
    p.add_argument("--model", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--data", help="CSV used to fit MAD weights (default: unit weights)")
    p.add_argument("--grid-steps", type=int, default=counterfactual.DEFAULT_GRID_STEPS)
    p.add_argument("--freeze", nargs="*", default=[], metavar="FEATURE")
    p.set_defaults(func=_cmd_cf)

    p = sub.add_parser("proto", help="class prototypes with importance weights")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--class", dest="class_label", type=int, required=True)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--bandwidth", type=float, default=None)
    p.set_defaults(func=_cmd_proto)

    p = sub.add_parser("directive", help="action plans reaching the counterfactual")
    p.add_argument("--model", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--actions", required=True)
    p.add_argument("--counterfactual", help="instance JSON; generated when omitted")
    p.add_argument("--data", help="CSV used to fit MAD weights for the generated counterfactual")
    p.add_argument("--delta", type=float, default=5.0)
    p.add_argument("--rollouts", type=int, default=1000)
    p.add_argument("--horizon", type=int, default=3)
    p.add_argument("--max-depth", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_directive)

    p = sub.add_parser("session", help="study session management")
    ssub = p.add_subparsers(dest="session_command", required=True)
    q = ssub.add_parser("new")
    q.add_argument("--store", required=True)
    q.add_argument("--participant", required=True)
    q.add_argument("--study", choices=assessment.STUDIES, required=True)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--corpus")
    q.set_defaults(func=_cmd_session_new)
    q = ssub.add_parser("next")
    q.add_argument("--store", required=True)
    q.add_argument("--session", required=True)
    q.set_defaults(func=_cmd_session_next)
    q = ssub.add_parser("respond")
    q.add_argument("--store", required=True)
    q.add_argument("--session", required=True)
    q.add_argument("--scenario", required=True)
    q.add_argument("--answers", help="comma separated Q1..Q7 ratings")
    q.add_argument("--choice", choices=("A", "B"))
    q.add_argument("--elapsed", type=float, default=0.0)
    q.set_defaults(func=_cmd_session_respond)

    p = sub.add_parser("export", help="CSV export of one study's responses")
    p.add_argument("--store", required=True)
    p.add_argument("--study", choices=assessment.STUDIES, required=True)
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("analyze", help="statistical report for one study")
    p.add_argument("--study", choices=assessment.STUDIES, required=True)
    p.add_argument("--store")
    p.add_argument("--export", help="analyze a CSV export instead of a store")
    p.add_argument("--medians-out", help="also write per-question median plot data (CSV)")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("scenarios", help="dump the scenario corpus")
    p.add_argument("--corpus")
    p.set_defaults(func=_cmd_scenarios)

    p = sub.add_parser("instrument", help="dump the seven questions")
    p.set_defaults(func=_cmd_instrument)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--store")
    p.add_argument("--corpus")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
