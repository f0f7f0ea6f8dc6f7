"""Generate all three explanation types for one denied credit applicant.

Builds a small synthetic lending dataset, trains the logistic model, and then
walks the full chain: nearest counterfactual -> prototype per class ->
directive action plans that reach the counterfactual.
"""

import numpy as np

from recourse import (
    Action,
    CounterfactualConfig,
    Dataset,
    FeatureSchema,
    FeatureSpec,
    Instance,
    MctsConfig,
    TrainConfig,
    find_counterfactual,
    generate_directives,
    mad_weights,
    predict,
    protodash_select,
    top_prototype,
    train_logistic,
)

rng = np.random.default_rng(7)

schema = FeatureSchema((
    FeatureSpec("Salary", "numeric", actionable=True),
    FeatureSpec("Credit Rating", "ordinal", ("F", "E", "D", "C", "B", "A"), actionable=True),
    FeatureSpec("Delinquent", "categorical", ("No", "Yes"), actionable=True),
))

# synthetic applicants: better rating and salary, fewer delinquencies -> approve
rows, labels = [], []
for _ in range(200):
    salary = float(rng.uniform(20_000, 120_000))
    rating = int(rng.integers(0, 6))
    delinquent = int(rng.random() < 0.3)
    score = salary / 120_000 + rating / 5 - 0.8 * delinquent + rng.normal(0, 0.2)
    rows.append(Instance((salary, rating, delinquent)))
    labels.append(int(score < 0.9))  # 1 = DENY
data = Dataset(schema, tuple(rows), tuple(labels))

model = train_logistic(data, TrainConfig(epochs=400, learning_rate=2.0))
accuracy = np.mean([predict(model, r).label == y for r, y in zip(rows, labels)])
print(f"trained logistic model, training accuracy {accuracy:.2f}")

applicant = Instance((28_000.0, 1, 1))  # low salary, rating E, delinquent
decision = predict(model, applicant)
print(f"\napplicant {applicant.values} -> label {decision.label} "
      f"(p={decision.probability:.2f}, 1 means DENY)")

# 1. counterfactual: the closest grid point with the opposite decision
weights = mad_weights(data)
cf = find_counterfactual(model, applicant, weights, CounterfactualConfig(grid=8))
print("\ncounterfactual:")
print("  change", ", ".join(cf.changed_features))
print("  target values:", cf.c.values, f"(weighted L1 distance {cf.distance:.3f})")

# 2. prototype: the most important approved applicant
protos = protodash_select(data, class_label=0, m=10)
champion = top_prototype(protos, data)
print(f"\nprototype for the APPROVE class (of {len(protos.indices)} selected):")
print("  ", champion.values)

# 3. directives: action sequences that reach the counterfactual
actions = (
    Action("clear-delinquency", "Delinquent", set_level=0,
           description="settle the outstanding delinquency"),
    Action("rating-up", "Credit Rating", delta=+1,
           description="make six months of on-time payments"),
)
plans = generate_directives(
    applicant, model, actions, cf.c,
    MctsConfig(horizon=3, num_rollouts=4000, seed=11, delta=5.0),
)
print(f"\ndirective plans ({len(plans)}):")
for plan in plans:
    steps = " + ".join(a.description for a in plan.actions)
    print(f"  cost {plan.total_cost:g}: {steps} -> flipped={plan.flipped}")
