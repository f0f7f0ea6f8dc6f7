import numpy as np
import pytest

from recourse.data import Dataset, FeatureSchema, FeatureSpec, Instance


@pytest.fixture
def toy_schema():
    return FeatureSchema((
        FeatureSpec("income", "numeric", actionable=False),
        FeatureSpec("rating", "ordinal", ("F", "E", "D", "C", "B", "A"), actionable=True),
        FeatureSpec("overtime", "categorical", ("No", "Yes"), actionable=True),
    ))


@pytest.fixture
def toy_dataset(toy_schema):
    rows = (
        Instance((20000.0, 0, 1)),
        Instance((60000.0, 4, 0)),
        Instance((30000.0, 2, 1)),
        Instance((80000.0, 5, 0)),
        Instance((25000.0, 1, 1)),
        Instance((50000.0, 3, 0)),
    )
    return Dataset(toy_schema, rows, (1, 0, 1, 0, 1, 0))


def random_schema(rng: np.random.Generator, max_features=4, max_levels=6) -> FeatureSchema:
    """Small random schema mixing the three feature kinds."""
    n = int(rng.integers(1, max_features + 1))
    feats = []
    for i in range(n):
        kind = rng.choice(["numeric", "ordinal", "categorical"])
        if kind == "numeric":
            feats.append(FeatureSpec(f"f{i}", "numeric", actionable=True))
        else:
            k = int(rng.integers(2, max_levels + 1))
            levels = tuple(f"L{j}" for j in range(k))
            feats.append(FeatureSpec(f"f{i}", kind, levels, actionable=True))
    return FeatureSchema(tuple(feats))


def random_instance(rng: np.random.Generator, schema: FeatureSchema) -> Instance:
    values = []
    for f in schema:
        if f.is_numeric:
            values.append(float(rng.uniform(0, 10)))
        else:
            values.append(int(rng.integers(0, len(f.levels))))
    return Instance(tuple(values))


def random_dataset(rng: np.random.Generator, schema: FeatureSchema, n_rows: int) -> Dataset:
    rows = tuple(random_instance(rng, schema) for _ in range(n_rows))
    labels = [int(rng.integers(0, 2)) for _ in range(n_rows)]
    if len(set(labels)) == 1:  # both classes must be present for training
        labels[0] = 1 - labels[0]
    return Dataset(schema, rows, tuple(labels))
