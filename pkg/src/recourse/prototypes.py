"""Greedy class-conditional prototype selection with importance weights.

Maximizes l(w) = w'mu - 1/2 w'Kw over a class's rows: at each step the
candidate with the largest objective gradient joins the set, then the weights
are re-fit by non-negative projected coordinate ascent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, Encoding, Instance
from .errors import ClassAbsent, EmptyPrototypeSet, MTooLarge

_GRADIENT_EPS = 1e-12


@dataclass(frozen=True)
class PrototypeSet:
    indices: tuple[int, ...]      # dataset row indices
    weights: tuple[float, ...]
    class_label: int
    objective_trace: tuple[float, ...]

    def __post_init__(self):
        if len(self.indices) != len(self.weights):
            raise ValueError("one weight per selected index required")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("selected indices must be distinct")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")

    def to_dict(self) -> dict:
        return {
            "indices": list(self.indices),
            "weights": list(self.weights),
            "class_label": self.class_label,
            "objective_trace": list(self.objective_trace),
        }


def median_heuristic_bandwidth(data: Dataset, encoding: Encoding | None = None) -> float:
    """Median pairwise encoded distance; 1.0 when every pair coincides."""
    encoding = encoding or Encoding.fit(data)
    X = np.stack([encoding.encode(r) for r in data.rows])
    sq = np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=-1)
    iu = np.triu_indices(len(X), k=1)
    if len(iu[0]) == 0:
        return 1.0
    med = float(np.median(np.sqrt(sq[iu])))
    return med if med > 0 else 1.0


def kernel_matrix(data: Dataset, bandwidth: float, encoding: Encoding | None = None) -> np.ndarray:
    """RBF kernel K[i,j] = exp(-||enc(x_i) - enc(x_j)||^2 / (2 bw^2))."""
    if bandwidth <= 0:
        raise ValueError("bandwidth must be > 0")
    encoding = encoding or Encoding.fit(data)
    X = np.stack([encoding.encode(r) for r in data.rows])
    sq = np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=-1)
    K = np.exp(-sq / (2.0 * bandwidth**2))
    np.fill_diagonal(K, 1.0)
    return (K + K.T) / 2.0


def _fit_weights(K_sel: np.ndarray, mu_sel: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Maximize w'mu - 1/2 w'Kw subject to w >= 0 by projected coordinate
    ascent; at most 10*m^2 sweeps."""
    m = len(mu_sel)
    w = np.zeros(m)
    max_sweeps = max(10 * m * m, 10)
    for _ in range(max_sweeps):
        biggest_change = 0.0
        for i in range(m):
            rest = float(K_sel[i] @ w) - K_sel[i, i] * w[i]
            new = max(0.0, (mu_sel[i] - rest) / K_sel[i, i])
            biggest_change = max(biggest_change, abs(new - w[i]))
            w[i] = new
        if biggest_change < tol:
            break
    return w


def _objective(K_sel, mu_sel, w) -> float:
    return float(w @ mu_sel - 0.5 * w @ K_sel @ w)


def protodash_select(
    data: Dataset,
    class_label: int,
    m: int,
    bandwidth: float | None = None,
) -> PrototypeSet:
    """Greedy selection of up to m prototypes for one class.

    Stops early when no remaining candidate has a positive gradient (adding
    one could not improve the objective), so the set may be smaller than m.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    class_rows = [i for i, y in enumerate(data.labels) if y == class_label]
    if not class_rows:
        raise ClassAbsent(f"no rows with label {class_label}")
    if m > len(class_rows):
        raise MTooLarge(f"m={m} exceeds class size {len(class_rows)}")
    encoding = Encoding.fit(data)
    if bandwidth is None:
        bandwidth = median_heuristic_bandwidth(data, encoding)
    K_full = kernel_matrix(data, bandwidth, encoding)
    K = K_full[np.ix_(class_rows, class_rows)]
    mu = K.mean(axis=1)  # mean similarity of each candidate to all class rows

    selected: list[int] = []
    w = np.zeros(0)
    trace: list[float] = []
    for _ in range(m):
        # gradient of the objective at the current (padded) weights
        grad = mu - (K[:, selected] @ w if selected else np.zeros(len(mu)))
        grad[selected] = -np.inf
        best = int(np.argmax(grad))
        if grad[best] <= _GRADIENT_EPS:
            break
        selected.append(best)
        sel = np.asarray(selected)
        w = _fit_weights(K[np.ix_(sel, sel)], mu[sel])
        trace.append(_objective(K[np.ix_(sel, sel)], mu[sel], w))
    return PrototypeSet(
        indices=tuple(class_rows[i] for i in selected),
        weights=tuple(float(v) for v in w),
        class_label=class_label,
        objective_trace=tuple(trace),
    )


def top_prototype(p: PrototypeSet, data: Dataset) -> Instance:
    """The selected row with the largest weight; ties go to the lowest index."""
    if not p.indices:
        raise EmptyPrototypeSet("prototype set has no members")
    best = min(
        range(len(p.indices)), key=lambda i: (-p.weights[i], p.indices[i])
    )
    return data.rows[p.indices[best]]
