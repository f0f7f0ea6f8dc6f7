"""Nearest-counterfactual search over a discretized candidate grid.

The candidate closest to the factual instance (inverse-MAD weighted L1 in
encoded space) whose predicted label differs is returned. The min-max
objective's penalty term only ever rules out candidates that keep the factual
label, so among flipped candidates the ordering is by distance alone,
independent of the penalty schedule.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .data import (
    CATEGORICAL,
    Encoding,
    Instance,
    LinearClassifier,
    MadWeights,
    predict,
)
from .errors import CandidateBudgetExceeded, NoCounterfactualFound, SchemaMismatch

DEFAULT_GRID_STEPS = 10


@dataclass(frozen=True)
class CounterfactualConfig:
    """grid: steps per numeric feature (a mapping by name, or one int for all);
    ordinal/categorical features always enumerate their levels."""

    grid: int | dict = DEFAULT_GRID_STEPS
    tau_schedule: tuple[float, ...] = (1.0, 10.0, 100.0)
    max_candidates: int = 2_000_000
    frozen_features: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "frozen_features", frozenset(self.frozen_features))
        taus = tuple(self.tau_schedule)
        if any(t <= 0 for t in taus) or any(
            a >= b for a, b in zip(taus, taus[1:])
        ):
            raise ValueError("tau_schedule must be strictly increasing and positive")
        object.__setattr__(self, "tau_schedule", taus)

    def steps_for(self, name: str) -> int:
        steps = self.grid.get(name, DEFAULT_GRID_STEPS) if isinstance(self.grid, dict) else self.grid
        if steps < 2:
            raise ValueError(f"grid for {name!r} needs >= 2 steps")
        return steps


@dataclass(frozen=True)
class CounterfactualResult:
    c: Instance
    distance: float
    target_label: int
    changed_features: tuple[str, ...]

    def to_dict(self, schema) -> dict:
        from .data import instance_to_dict

        return {
            "counterfactual": instance_to_dict(self.c, schema),
            "distance": self.distance,
            "target_label": self.target_label,
            "changed_features": list(self.changed_features),
        }


def distance_l1_mad(x: Instance, c: Instance, w: MadWeights, encoding: Encoding) -> float:
    """Sum_j w_j * |enc_j(x) - enc_j(c)| over per-feature encoded scalars;
    a changed categorical feature contributes w_j * 1."""
    if w.schema is not encoding.schema and w.schema != encoding.schema:
        raise SchemaMismatch("weights and encoding disagree on the schema")
    sx = encoding.scalar_values(x)
    sc = encoding.scalar_values(c)
    total = 0.0
    for j, f in enumerate(encoding.schema):
        if f.kind == CATEGORICAL:
            total += w[j] * (0.0 if x.values[j] == c.values[j] else 1.0)
        else:
            total += w[j] * abs(sx[j] - sc[j])
    return total


def _candidate_values(f, value, encoding, cfg):
    if f.name in cfg.frozen_features:
        return [value]
    if f.is_numeric:
        lo, hi = encoding.numeric_ranges.get(f.name, (None, None))
        if lo is None:
            raise SchemaMismatch(
                f"numeric feature {f.name!r} has no fitted range to grid over"
            )
        if hi == lo:
            return [lo]
        return [float(v) for v in np.linspace(lo, hi, cfg.steps_for(f.name))]
    return list(range(len(f.levels)))


def find_counterfactual(
    f: LinearClassifier,
    x: Instance,
    w: MadWeights,
    cfg: CounterfactualConfig = CounterfactualConfig(),
) -> CounterfactualResult:
    """Enumerate the discretized candidate space and return the flipped
    candidate at minimum weighted-L1 distance.

    The flip target is always the opposite of f(x). Ties break
    deterministically: smallest per-feature change magnitudes read in feature
    order, then the candidate values themselves.
    """
    schema = f.schema
    x.validate(schema)
    source_label = predict(f, x).label
    per_feature = [
        _candidate_values(spec, value, f.encoding, cfg)
        for spec, value in zip(schema, x.values)
    ]
    n_candidates = math.prod(len(vals) for vals in per_feature)
    if n_candidates > cfg.max_candidates:
        raise CandidateBudgetExceeded(
            f"{n_candidates} grid candidates exceed the budget of {cfg.max_candidates}"
        )

    sx = f.encoding.scalar_values(x)
    best = None
    for combo in itertools.product(*per_feature):
        if combo == x.values:
            continue
        cand = Instance(combo)
        if predict(f, cand).label == source_label:
            continue
        dist = distance_l1_mad(x, cand, w, f.encoding)
        sc = f.encoding.scalar_values(cand)
        tie_key = (tuple(abs(sc - sx)), combo)
        if best is None or (dist, *tie_key) < (best[0], *best[1]):
            best = (dist, tie_key, cand)
    if best is None:
        raise NoCounterfactualFound(
            f"no grid candidate flips the label away from {source_label}"
        )
    dist, _, cand = best
    changed = tuple(
        spec.name for spec, a, b in zip(schema, x.values, cand.values) if a != b
    )
    return CounterfactualResult(
        c=cand,
        distance=dist,
        target_label=1 - source_label,
        changed_features=changed,
    )
