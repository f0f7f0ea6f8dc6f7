"""Tabular data model: feature schemas, instances, CSV ingestion, encoding,
logistic classifier training, and robust per-feature scale weights.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadLevel,
    EmptyDataset,
    MissingColumn,
    NonFiniteLoss,
    ScalerNotFitted,
    SchemaMismatch,
    SingleClassDataset,
)

NUMERIC = "numeric"
ORDINAL = "ordinal"
CATEGORICAL = "categorical"
KINDS = (NUMERIC, ORDINAL, CATEGORICAL)

LABEL_COLUMN = "label"


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str
    levels: tuple[str, ...] = ()
    unit: str | None = None
    actionable: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.kind == NUMERIC and self.levels:
            raise ValueError(f"numeric feature {self.name!r} must not declare levels")
        if self.kind in (ORDINAL, CATEGORICAL) and len(self.levels) < 2:
            raise ValueError(f"{self.kind} feature {self.name!r} needs >= 2 levels")
        object.__setattr__(self, "levels", tuple(self.levels))

    @property
    def is_numeric(self):
        return self.kind == NUMERIC

    def level_index(self, level: str) -> int:
        try:
            return self.levels.index(level)
        except ValueError:
            raise KeyError(f"feature {self.name!r} has no level {level!r}") from None


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[FeatureSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        if not self.features:
            raise ValueError("schema needs at least one feature")

    def __len__(self):
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def index(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise KeyError(f"no feature named {name!r}")

    def feature(self, name: str) -> FeatureSpec:
        return self.features[self.index(name)]

    @property
    def actionable_features(self) -> tuple[FeatureSpec, ...]:
        return tuple(f for f in self.features if f.actionable)


@dataclass(frozen=True)
class Instance:
    """One value per schema feature: float for numeric, level index otherwise."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    def validate(self, schema: FeatureSchema) -> None:
        if len(self.values) != len(schema):
            raise SchemaMismatch(
                f"instance has {len(self.values)} values, schema has {len(schema)} features"
            )
        for v, f in zip(self.values, schema):
            if f.is_numeric:
                if not isinstance(v, (int, float)) or isinstance(v, bool):
                    raise SchemaMismatch(f"feature {f.name!r} expects a number, got {v!r}")
                if not math.isfinite(float(v)):
                    raise SchemaMismatch(f"feature {f.name!r} value is not finite")
            else:
                if not isinstance(v, int) or isinstance(v, bool):
                    raise SchemaMismatch(f"feature {f.name!r} expects a level index, got {v!r}")
                if not 0 <= v < len(f.levels):
                    raise SchemaMismatch(
                        f"feature {f.name!r} level index {v} out of range 0..{len(f.levels) - 1}"
                    )

    def with_value(self, schema: FeatureSchema, name: str, value) -> "Instance":
        i = schema.index(name)
        vals = list(self.values)
        vals[i] = value
        return Instance(tuple(vals))

    def value_of(self, schema: FeatureSchema, name: str):
        return self.values[schema.index(name)]


@dataclass(frozen=True)
class Dataset:
    schema: FeatureSchema
    rows: tuple[Instance, ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "labels", tuple(int(y) for y in self.labels))
        if len(self.rows) != len(self.labels):
            raise ValueError("row/label count mismatch")
        if not self.rows:
            raise EmptyDataset("dataset has no rows")
        for r in self.rows:
            r.validate(self.schema)
        if any(y not in (0, 1) for y in self.labels):
            raise ValueError("labels must be 0 or 1")

    def __len__(self):
        return len(self.rows)


def load_dataset(path, schema: FeatureSchema) -> Dataset:
    """Parse a CSV file (UTF-8, header row, a {0,1} 'label' column) into a Dataset.

    Level cells are stripped of surrounding whitespace and then matched exactly
    against the declared levels; anything else is a BadLevel with its line number.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [n for n in (*schema.names, LABEL_COLUMN) if n not in header]
        if missing:
            raise MissingColumn(f"missing column(s): {', '.join(missing)}")
        rows, labels = [], []
        for line, rec in enumerate(reader, start=2):
            values = []
            for f in schema:
                raw = (rec[f.name] or "").strip()
                if f.is_numeric:
                    try:
                        values.append(float(raw))
                    except ValueError:
                        raise BadLevel(f.name, rec[f.name], line) from None
                else:
                    if raw not in f.levels:
                        raise BadLevel(f.name, rec[f.name], line)
                    values.append(f.levels.index(raw))
            raw_label = (rec[LABEL_COLUMN] or "").strip()
            if raw_label not in ("0", "1"):
                raise BadLevel(LABEL_COLUMN, rec[LABEL_COLUMN], line)
            rows.append(Instance(tuple(values)))
            labels.append(int(raw_label))
    if not rows:
        raise EmptyDataset(f"{path} contains a header but no data rows")
    return Dataset(schema, tuple(rows), tuple(labels))


class Encoding:
    """Deterministic instance -> vector map, with a dataset-fitted min-max scaler
    for numeric features.

    Ordinal level i of a k-level feature maps to i/(k-1); categorical features
    map to one-hot groups; numeric features map to (v - lo) / (hi - lo).
    """

    def __init__(self, schema: FeatureSchema, numeric_ranges: dict | None = None):
        self.schema = schema
        self.numeric_ranges = dict(numeric_ranges or {})
        self._slices = []
        start = 0
        for f in schema:
            width = len(f.levels) if f.kind == CATEGORICAL else 1
            self._slices.append(slice(start, start + width))
            start += width
        self.dim = start

    @classmethod
    def fit(cls, data: Dataset) -> "Encoding":
        ranges = {}
        for j, f in enumerate(data.schema):
            if f.is_numeric:
                col = [float(r.values[j]) for r in data.rows]
                ranges[f.name] = (min(col), max(col))
        return cls(data.schema, ranges)

    def _numeric_scaled(self, f: FeatureSpec, v: float) -> float:
        if f.name not in self.numeric_ranges:
            raise ScalerNotFitted(f"no fitted range for numeric feature {f.name!r}")
        lo, hi = self.numeric_ranges[f.name]
        if hi == lo:
            return 0.0
        return (float(v) - lo) / (hi - lo)

    def encode(self, x: Instance) -> np.ndarray:
        x.validate(self.schema)
        out = np.zeros(self.dim)
        for f, v, sl in zip(self.schema, x.values, self._slices):
            if f.is_numeric:
                out[sl] = self._numeric_scaled(f, v)
            elif f.kind == ORDINAL:
                out[sl] = v / (len(f.levels) - 1)
            else:
                out[sl.start + v] = 1.0
        return out

    def scalar_values(self, x: Instance) -> np.ndarray:
        """One encoded scalar per feature: scaled value for numeric/ordinal,
        the level index for categorical (categorical distance is change/no-change)."""
        x.validate(self.schema)
        out = np.empty(len(self.schema))
        for j, (f, v) in enumerate(zip(self.schema, x.values)):
            if f.is_numeric:
                out[j] = self._numeric_scaled(f, v)
            elif f.kind == ORDINAL:
                out[j] = v / (len(f.levels) - 1)
            else:
                out[j] = v
        return out


def encode(x: Instance, schema: FeatureSchema) -> np.ndarray:
    """Encode against a schema with no numeric features (no scaler to fit).

    Schemas with numeric features need an Encoding fitted on a dataset;
    calling this on one raises ScalerNotFitted.
    """
    return Encoding(schema).encode(x)


@dataclass(frozen=True)
class MadWeights:
    """Inverse median-absolute-deviation weight per feature, in schema order.

    MAD is taken over the raw per-feature value stream (numeric values, level
    indices); constant features fall back to weight 1 so distances stay finite.
    """

    schema: FeatureSchema
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.schema):
            raise ValueError("one weight per schema feature required")
        if any(not math.isfinite(w) or w <= 0 for w in self.weights):
            raise ValueError("weights must be finite and > 0")

    def __getitem__(self, j):
        return self.weights[j]


def mad_weights(data: Dataset) -> MadWeights:
    """1/MAD per feature where MAD = median(|v - median(v)|), fallback weight 1."""
    if not data.rows:
        raise EmptyDataset("cannot compute MAD weights of an empty dataset")
    weights = []
    for j, _f in enumerate(data.schema):
        col = np.array([float(r.values[j]) for r in data.rows])
        mad = float(np.median(np.abs(col - np.median(col))))
        weights.append(1.0 / mad if mad > 0 else 1.0)
    return MadWeights(data.schema, tuple(weights))


@dataclass(frozen=True)
class Prediction:
    label: int
    probability: float


@dataclass(frozen=True)
class LinearClassifier:
    """Logistic model over encoded instances: p = sigmoid(w . enc(x) + b)."""

    encoding: Encoding
    weights: np.ndarray
    bias: float
    threshold: float = 0.5

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.shape != (self.encoding.dim,):
            raise ValueError(
                f"weight vector length {w.shape} != encoded dimension {self.encoding.dim}"
            )
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")

    @property
    def schema(self) -> FeatureSchema:
        return self.encoding.schema


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def predict(f: LinearClassifier, x: Instance) -> Prediction:
    enc = f.encoding.encode(x)
    p = float(_sigmoid(float(f.weights @ enc) + f.bias))
    return Prediction(label=int(p >= f.threshold), probability=p)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1.0
    epochs: int = 500
    l2: float = 0.0
    seed: int = 0
    threshold: float = 0.5


def _log_loss(z: np.ndarray, y: np.ndarray, w: np.ndarray, l2: float) -> float:
    # mean(log(1 + exp(z)) - y*z), computed via logaddexp for stability
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * float(w @ w))


def train_logistic(data: Dataset, config: TrainConfig = TrainConfig()) -> LinearClassifier:
    """Full-batch gradient descent from an all-zero start.

    Deterministic for a fixed config; per-epoch backtracking halves the step
    whenever it would increase the (L2-regularised) loss, so the training loss
    is non-increasing by construction.
    """
    labels = set(data.labels)
    if labels != {0, 1}:
        raise SingleClassDataset(f"training needs both classes, got {sorted(labels)}")
    encoding = Encoding.fit(data)
    X = np.stack([encoding.encode(r) for r in data.rows])
    y = np.asarray(data.labels, dtype=float)
    n = len(y)
    w = np.zeros(encoding.dim)
    b = 0.0
    loss = _log_loss(X @ w + b, y, w, config.l2)
    for _ in range(config.epochs):
        z = X @ w + b
        p = _sigmoid(z)
        gw = X.T @ (p - y) / n + config.l2 * w
        gb = float(np.sum(p - y)) / n
        step = config.learning_rate
        while True:
            w2 = w - step * gw
            b2 = b - step * gb
            new_loss = _log_loss(X @ w2 + b2, y, w2, config.l2)
            if not math.isfinite(new_loss):
                raise NonFiniteLoss(f"loss became {new_loss} during training")
            if new_loss <= loss or step < 1e-12:
                break
            step /= 2.0
        w, b, loss = w2, b2, new_loss
    return LinearClassifier(encoding, w, b, threshold=config.threshold)


# --- JSON wire formats (schema s.json, model m.json, instance i.json) ---


def schema_from_dict(doc: dict) -> FeatureSchema:
    feats = []
    for rec in doc["features"]:
        feats.append(
            FeatureSpec(
                name=rec["name"],
                kind=rec["kind"],
                levels=tuple(rec.get("levels") or ()),
                unit=rec.get("unit"),
                actionable=bool(rec.get("actionable", False)),
            )
        )
    return FeatureSchema(tuple(feats))


def schema_to_dict(schema: FeatureSchema) -> dict:
    return {
        "features": [
            {
                "name": f.name,
                "kind": f.kind,
                **({"levels": list(f.levels)} if f.levels else {}),
                **({"unit": f.unit} if f.unit else {}),
                "actionable": f.actionable,
            }
            for f in schema
        ]
    }


def load_schema(path) -> FeatureSchema:
    with open(path, encoding="utf-8") as fh:
        return schema_from_dict(json.load(fh))


def model_to_dict(f: LinearClassifier) -> dict:
    return {
        "weights": [float(v) for v in f.weights],
        "bias": f.bias,
        "threshold": f.threshold,
        "numeric_ranges": {k: list(v) for k, v in f.encoding.numeric_ranges.items()},
    }


def model_from_dict(doc: dict, schema: FeatureSchema) -> LinearClassifier:
    enc = Encoding(schema, {k: tuple(v) for k, v in doc.get("numeric_ranges", {}).items()})
    return LinearClassifier(
        enc,
        np.asarray(doc["weights"], dtype=float),
        float(doc["bias"]),
        threshold=float(doc.get("threshold", 0.5)),
    )


def instance_from_dict(doc: dict, schema: FeatureSchema) -> Instance:
    """Instance JSON: {"values": {feature name: number | level name | level index}}."""
    by_name = doc["values"]
    missing = [f.name for f in schema if f.name not in by_name]
    if missing:
        raise SchemaMismatch(f"instance missing feature(s): {', '.join(missing)}")
    values = []
    for f in schema:
        v = by_name[f.name]
        if f.is_numeric:
            values.append(float(v))
        elif isinstance(v, str):
            values.append(f.level_index(v))
        else:
            values.append(int(v))
    x = Instance(tuple(values))
    x.validate(schema)
    return x


def instance_to_dict(x: Instance, schema: FeatureSchema) -> dict:
    values = {}
    for f, v in zip(schema, x.values):
        values[f.name] = float(v) if f.is_numeric else f.levels[v]
    return {"values": values}
