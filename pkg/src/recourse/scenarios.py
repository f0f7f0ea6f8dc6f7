"""Bundled corpus of the eight study scenarios (four credit, four employee)
and template rendering of machine-generated explanation artifacts into the
same sentence forms.

The corpus texts are curated transcriptions and are pinned byte-for-byte by
golden files; one directive text ends mid-sentence in the source material and
is preserved that way on purpose.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .counterfactual import CounterfactualResult
from .data import FeatureSchema, Instance, schema_from_dict, schema_to_dict
from .errors import ArtifactSchemaMismatch, CorpusInvalid, SchemaMismatch
from .mcts import DirectivePlan
from .prototypes import PrototypeSet, top_prototype

EXPLANATION_KINDS = ("counterfactual", "directive", "prototypical")


@dataclass(frozen=True)
class DomainInfo:
    name: str
    schema: FeatureSchema
    decision_header: str
    decision_noun: str
    outcomes: dict          # {"favourable": "STAY", "unfavourable": "RESIGN"}
    prototype_title: str
    prototype_intros: dict  # outcome text -> intro sentence
    feature_phrases: dict   # feature name -> {phrase, lower_levels, quote_levels, ...}

    def outcome_text(self, label: int) -> str:
        return self.outcomes["unfavourable" if label == 1 else "favourable"]

    def phrase(self, name: str) -> str:
        return self.feature_phrases.get(name, {}).get("phrase", name.lower())


@dataclass(frozen=True)
class ExplanationText:
    kind: str
    body: str
    prototype_profile: Instance | None = None
    prototype_decision: str | None = None

    def display(self, info: DomainInfo) -> str:
        """Full presentation text; prototypical explanations append the
        prototype's profile table."""
        if self.kind != "prototypical":
            return self.body
        table = profile_table(
            self.prototype_profile,
            info.schema,
            info.prototype_title,
            info.decision_header,
            self.prototype_decision,
        )
        return f"{self.body}\n\n{table}"


@dataclass(frozen=True)
class Scenario:
    id: str
    domain: str
    info: DomainInfo
    title: str
    subject: str | None
    pronoun: str
    profile: Instance
    decision_label: int
    decision_text: str
    favourable: bool
    narrative: str
    scale_notes: str
    explanations: dict  # kind -> ExplanationText

    @property
    def schema(self) -> FeatureSchema:
        return self.info.schema


@dataclass(frozen=True)
class Corpus:
    domains: dict       # name -> DomainInfo
    scenarios: tuple    # Scenario, ...

    def by_id(self, scenario_id: str) -> Scenario:
        for s in self.scenarios:
            if s.id == scenario_id:
                return s
        raise KeyError(f"no scenario {scenario_id!r}")

    def in_domain(self, domain: str) -> list:
        return [s for s in self.scenarios if s.domain == domain]

    def to_dict(self) -> dict:
        return {
            "domains": {
                name: {
                    "schema": schema_to_dict(info.schema),
                    "decision_header": info.decision_header,
                    "decision_noun": info.decision_noun,
                    "outcomes": dict(info.outcomes),
                    "prototype_title": info.prototype_title,
                    "prototype_intros": dict(info.prototype_intros),
                    "feature_phrases": {
                        k: dict(v) for k, v in info.feature_phrases.items()
                    },
                }
                for name, info in self.domains.items()
            },
            "scenarios": [_scenario_to_dict(s) for s in self.scenarios],
        }


def format_value(spec, value) -> str:
    """Display form of one profile cell: levels by name, numerics without a
    trailing .0, units appended when the schema declares one."""
    if spec.is_numeric:
        v = float(value)
        text = str(int(v)) if v.is_integer() else f"{v:g}"
        return f"{text} {spec.unit}" if spec.unit else text
    return spec.levels[value]


def profile_table(x: Instance, schema: FeatureSchema, title: str,
                  decision_header: str, decision_text: str) -> str:
    lines = [title]
    for spec, value in zip(schema, x.values):
        lines.append(f"{spec.name}: {format_value(spec, value)}")
    lines.append(f"{decision_header} {decision_text}")
    return "\n".join(lines)


def _profile_to_instance(profile: dict, schema: FeatureSchema) -> Instance:
    values = []
    for f in schema:
        v = profile[f.name]
        values.append(float(v) if f.is_numeric else f.level_index(v))
    x = Instance(tuple(values))
    x.validate(schema)
    return x


def _instance_to_profile(x: Instance, schema: FeatureSchema) -> dict:
    out = {}
    for f, v in zip(schema, x.values):
        if f.is_numeric:
            out[f.name] = int(v) if float(v).is_integer() else float(v)
        else:
            out[f.name] = f.levels[v]
    return out


def _scenario_to_dict(s: Scenario) -> dict:
    explanations = {}
    for kind in EXPLANATION_KINDS:
        text = s.explanations[kind]
        rec = {"body": text.body}
        if text.prototype_profile is not None:
            rec["prototype_decision"] = text.prototype_decision
            rec["prototype_profile"] = _instance_to_profile(
                text.prototype_profile, s.schema
            )
        explanations[kind] = rec
    return {
        "id": s.id,
        "domain": s.domain,
        "title": s.title,
        "subject": s.subject,
        "pronoun": s.pronoun,
        "profile": _instance_to_profile(s.profile, s.schema),
        "decision": {"label": s.decision_label, "text": s.decision_text},
        "favourable": s.favourable,
        "narrative": s.narrative,
        "scale_notes": s.scale_notes,
        "explanations": explanations,
    }


def _bundled_corpus_text() -> str:
    return resources.files("recourse").joinpath("data/scenarios.json").read_text("utf-8")


def load_corpus(path=None) -> Corpus:
    """Load and validate a corpus file (the bundled one by default).

    Every structural problem is collected and reported together in a
    CorpusInvalid, tagged with the offending scenario id.
    """
    if path is None:
        doc = json.loads(_bundled_corpus_text())
    else:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)

    problems: list[str] = []
    domains: dict = {}
    for name, rec in doc.get("domains", {}).items():
        try:
            domains[name] = DomainInfo(
                name=name,
                schema=schema_from_dict(rec["schema"]),
                decision_header=rec["decision_header"],
                decision_noun=rec["decision_noun"],
                outcomes=dict(rec["outcomes"]),
                prototype_title=rec["prototype_title"],
                prototype_intros=dict(rec["prototype_intros"]),
                feature_phrases={k: dict(v) for k, v in rec.get("feature_phrases", {}).items()},
            )
        except (KeyError, ValueError) as exc:
            problems.append(f"domain {name!r}: {exc}")

    scenarios = []
    for rec in doc.get("scenarios", []):
        sid = rec.get("id", "<missing id>")
        info = domains.get(rec.get("domain"))
        if info is None:
            problems.append(f"{sid}: unknown domain {rec.get('domain')!r}")
            continue
        try:
            scenarios.append(_parse_scenario(rec, info, problems))
        except (KeyError, ValueError, SchemaMismatch) as exc:
            problems.append(f"{sid}: {exc}")

    by_domain: dict = {}
    for s in scenarios:
        if s is not None:
            by_domain.setdefault(s.domain, []).append(s)
    for name, group in by_domain.items():
        if len(group) != 4:
            problems.append(f"domain {name!r} has {len(group)} scenarios, expected 4")
        elif sum(s.favourable for s in group) != 2:
            problems.append(f"domain {name!r} must have exactly 2 favourable scenarios")

    if problems:
        raise CorpusInvalid(problems)
    return Corpus(domains=domains, scenarios=tuple(s for s in scenarios if s))


def _parse_scenario(rec: dict, info: DomainInfo, problems: list) -> "Scenario | None":
    sid = rec["id"]
    ok = True
    explanations = {}
    for kind in EXPLANATION_KINDS:
        ex = rec.get("explanations", {}).get(kind)
        if ex is None:
            problems.append(f"{sid}: missing {kind} explanation")
            ok = False
            continue
        profile = ex.get("prototype_profile")
        if kind == "prototypical":
            if profile is None:
                problems.append(f"{sid}: prototypical explanation lacks a profile table")
                ok = False
                continue
            explanations[kind] = ExplanationText(
                kind=kind,
                body=ex["body"],
                prototype_profile=_profile_to_instance(profile, info.schema),
                prototype_decision=ex["prototype_decision"],
            )
        else:
            if profile is not None:
                problems.append(f"{sid}: {kind} explanation must not carry a profile")
                ok = False
                continue
            explanations[kind] = ExplanationText(kind=kind, body=ex["body"])

    label = int(rec["decision"]["label"])
    favourable = bool(rec["favourable"])
    if favourable != (label == 0):
        problems.append(f"{sid}: favourable flag disagrees with the decision label")
        ok = False
    if rec["decision"]["text"] != info.outcome_text(label):
        problems.append(f"{sid}: decision text disagrees with the domain outcome table")
        ok = False
    if not ok:
        return None
    return Scenario(
        id=sid,
        domain=info.name,
        info=info,
        title=rec["title"],
        subject=rec.get("subject"),
        pronoun=rec.get("pronoun", "their"),
        profile=_profile_to_instance(rec["profile"], info.schema),
        decision_label=label,
        decision_text=rec["decision"]["text"],
        favourable=favourable,
        narrative=rec["narrative"],
        scale_notes=rec.get("scale_notes", ""),
        explanations=explanations,
    )


def load_scenarios(path=None) -> list:
    """The corpus scenarios as a list (bundled corpus when no path given)."""
    return list(load_corpus(path).scenarios)


# --------------------------------------------------------------------------
# template rendering of generated artifacts
# --------------------------------------------------------------------------


def _level_text(info: DomainInfo, feature: str, level: str) -> str:
    meta = info.feature_phrases.get(feature, {})
    text = level.lower() if meta.get("lower_levels") else level
    return f"'{text}'" if meta.get("quote_levels", True) else text


def _value_text(info: DomainInfo, feature: str, value: float) -> str:
    meta = info.feature_phrases.get(feature, {})
    v = float(value)
    body = str(int(v)) if v.is_integer() else f"{v:g}"
    return f"{meta.get('value_prefix', '')}{body}{meta.get('value_suffix', '')}"


def _changes(scenario: Scenario, target: Instance) -> list:
    """(feature spec, old value, new value) for every differing feature."""
    out = []
    for spec, old, new in zip(scenario.schema, scenario.profile.values, target.values):
        if old != new:
            out.append((spec, old, new))
    return out


def _join(parts: list, oxford: bool) -> str:
    if len(parts) == 1:
        return parts[0]
    sep = ", and " if oxford else " and "
    return ", ".join(parts[:-1]) + sep + parts[-1]


def _past(outcome: str) -> str:
    return {"DENY": "DENIED"}.get(outcome, outcome + "ED")


def _change_target(info, spec, old, new, prefer_at_least: bool) -> str:
    if spec.is_numeric:
        direction = "higher than" if new > old else "lower than"
        return f"{direction} {_value_text(info, spec.name, new)}"
    level = _level_text(info, spec.name, spec.levels[new])
    if prefer_at_least and spec.kind == "ordinal":
        return f"at least {level}" if new > old else f"at most {level}"
    return level


def _second_person_items(info, changes, prefer_at_least, verb="needs to be") -> list:
    items = []
    for spec, old, new in changes:
        target = _change_target(info, spec, old, new, prefer_at_least)
        items.append(f"your {info.phrase(spec.name)} {verb} {target}")
    return items


def _third_person_items(scenario, changes, prefer_at_least, template) -> list:
    info = scenario.info
    items = []
    for i, (spec, old, new) in enumerate(changes):
        owner = f"{scenario.subject}'s" if i == 0 else scenario.pronoun
        target = _change_target(info, spec, old, new, prefer_at_least)
        items.append(template.format(owner=owner, phrase=info.phrase(spec.name), target=target))
    return items


def _counterfactual_sentence(scenario: Scenario, target: Instance) -> str:
    info = scenario.info
    changes = _changes(scenario, target)
    if not changes:
        raise ArtifactSchemaMismatch("counterfactual changes nothing")
    at_least = len(changes) == 1
    if not scenario.favourable:
        goal = info.outcome_text(0)
        if scenario.subject:
            items = _third_person_items(
                scenario, changes, at_least, "{owner} {phrase} to {target}"
            )
            return (
                f"To change the {info.decision_noun} to {goal}, you need to change "
                f"{_join(items, oxford=False)}."
            )
        items = _second_person_items(info, changes, at_least)
        return f"To change the {info.decision_noun} to {goal}, {_join(items, oxford=False)}."
    bad = info.outcome_text(1)
    if scenario.subject:
        items = _third_person_items(
            scenario, changes, False, "{owner} {phrase} were to change to {target}"
        )
        return f"{scenario.subject} may {bad.lower()} if {_join(items, oxford=True)}."
    items = []
    for spec, old, new in changes:
        target_text = _change_target(info, spec, old, new, False)
        items.append(f"your {info.phrase(spec.name)} had been {target_text}")
    return f"We would have {_past(bad)} you the loan if {_join(items, oxford=True)}."


def _directive_sentences(scenario: Scenario, plan: DirectivePlan) -> str:
    info = scenario.info
    changes = _changes(scenario, plan.final_state)
    if not plan.actions:
        raise ArtifactSchemaMismatch("a directive must contain at least one action")
    if not changes:
        raise ArtifactSchemaMismatch("directive plan changes nothing")
    descriptions = []
    for a in plan.actions:
        if a.description:
            descriptions.append(a.description)
        elif a.set_level is not None:
            level = info.schema.feature(a.feature).levels[a.set_level]
            descriptions.append(
                f"set {info.phrase(a.feature)} to {_level_text(info, a.feature, level)}"
            )
        else:
            descriptions.append(f"change {info.phrase(a.feature)}")
    how = _join(descriptions, oxford=False)
    if not scenario.favourable:
        goal = info.outcome_text(0)
        if scenario.subject:
            items = _third_person_items(scenario, changes, False, "{owner} {phrase} to {target}")
            first = f"To change the {info.decision_noun} to {goal}, change {_join(items, oxford=True)}."
        else:
            items = _second_person_items(info, changes, False)
            first = f"To change the {info.decision_noun} to {goal}, {_join(items, oxford=False)}."
        connective = "this" if len(changes) == 1 else "these"
        return f"{first} To do {connective}, you could {how}."
    bad = info.outcome_text(1)
    if scenario.subject:
        items = _third_person_items(scenario, changes, False, "{owner} {phrase} changed to {target}")
        first = f"{scenario.subject} may {bad.lower()} if {_join(items, oxford=False)}."
    else:
        items = []
        for spec, old, new in changes:
            items.append(
                f"your {info.phrase(spec.name)} was {_change_target(info, spec, old, new, False)}"
            )
        first = f"We would have {_past(bad)} you the loan if {_join(items, oxford=False)}."
    return f"{first} This could happen if {how}."


def render_explanation(kind: str, scenario: Scenario, artifact=None, dataset=None) -> ExplanationText:
    """Explanation text for a scenario.

    Without an artifact this returns the curated corpus text. With one, the
    artifact is rendered through the sentence templates: a counterfactual
    lists required changes, a directive appends how to make them, and a
    prototype emits an intro plus the prototype's profile table.
    """
    if kind not in EXPLANATION_KINDS:
        raise ValueError(f"unknown explanation kind {kind!r}")
    if artifact is None:
        return scenario.explanations[kind]
    info = scenario.info
    try:
        if kind == "counterfactual":
            if not isinstance(artifact, CounterfactualResult):
                raise ArtifactSchemaMismatch("counterfactual rendering needs a CounterfactualResult")
            artifact.c.validate(info.schema)
            return ExplanationText(kind=kind, body=_counterfactual_sentence(scenario, artifact.c))
        if kind == "directive":
            if not isinstance(artifact, DirectivePlan):
                raise ArtifactSchemaMismatch("directive rendering needs a DirectivePlan")
            artifact.final_state.validate(info.schema)
            return ExplanationText(kind=kind, body=_directive_sentences(scenario, artifact))
        if not isinstance(artifact, PrototypeSet) or dataset is None:
            raise ArtifactSchemaMismatch("prototype rendering needs a PrototypeSet and its Dataset")
        if dataset.schema != info.schema:
            raise ArtifactSchemaMismatch("prototype dataset schema differs from the scenario's")
        proto = top_prototype(artifact, dataset)
        outcome = info.outcome_text(artifact.class_label)
        return ExplanationText(
            kind=kind,
            body=info.prototype_intros[outcome],
            prototype_profile=proto,
            prototype_decision=outcome,
        )
    except SchemaMismatch as exc:
        raise ArtifactSchemaMismatch(str(exc)) from exc


def display_text(scenario: Scenario, kind: str, artifact=None, dataset=None) -> str:
    """Convenience: render and produce the full presentation text."""
    return render_explanation(kind, scenario, artifact, dataset).display(scenario.info)
