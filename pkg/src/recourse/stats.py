"""Nonparametric analysis of study responses: chi-square goodness of fit,
per-question Friedman tests with Kendall's W, and Nemenyi post-hoc pairwise
comparisons.

The tail probabilities are computed here rather than taken from a stats
package: the chi-square upper tail via the regularized incomplete gamma
function (series / continued fraction), and the studentized-range upper tail
via direct quadrature of its infinite-df CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBlocks, IncompleteMatrix, NoResponses, ZeroTotal

KINDS = ("counterfactual", "directive", "prototypical")
KIND_CODES = {"counterfactual": "c", "directive": "d", "prototypical": "p"}


# --------------------------------------------------------------------------
# chi-square upper tail via the regularized incomplete gamma function
# --------------------------------------------------------------------------

_EPS = 1e-16
_MAX_ITER = 600


def _gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = Gamma(a,x)/Gamma(a).

    Series for the lower function when x < a+1, Lentz continued fraction
    otherwise; both converge to ~1e-15 relative accuracy.
    """
    if a <= 0:
        raise ValueError("a must be > 0")
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0:
        return 1.0
    log_prefactor = -x + a * math.log(x) - math.lgamma(a)
    if x < a + 1.0:
        # P(a,x) = x^a e^-x / Gamma(a) * sum_n x^n / (a(a+1)...(a+n))
        ap = a
        total = delta = 1.0 / a
        for _ in range(_MAX_ITER):
            ap += 1.0
            delta *= x / ap
            total += delta
            if abs(delta) < abs(total) * _EPS:
                break
        p = total * math.exp(log_prefactor)
        return min(1.0, max(0.0, 1.0 - p))
    # Q(a,x) via modified Lentz evaluation of the continued fraction
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return min(1.0, max(0.0, math.exp(log_prefactor) * h))


def chi2_sf(stat: float, df: float) -> float:
    """P(chi2_df >= stat)."""
    if df <= 0:
        raise ValueError("df must be > 0")
    if stat < 0:
        raise ValueError("stat must be >= 0")
    return _gamma_q(df / 2.0, stat / 2.0)


@dataclass(frozen=True)
class GofResult:
    stat: float
    df: int
    p: float
    n: int


def chi_square_gof(counts) -> GofResult:
    """Goodness of fit of observed counts against a uniform expectation."""
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise ValueError("counts must be non-negative")
    total = sum(counts)
    if total == 0:
        raise ZeroTotal("all counts are zero")
    k = len(counts)
    expected = total / k
    stat = sum((o - expected) ** 2 / expected for o in counts)
    df = k - 1
    return GofResult(stat=stat, df=df, p=chi2_sf(stat, df), n=total)


# --------------------------------------------------------------------------
# Friedman test with midrank ties and Kendall's W
# --------------------------------------------------------------------------


def _midranks(row) -> tuple[list[float], int]:
    """Ranks 1..k with ties sharing the mean rank; also returns sum(t^3 - t)
    over this row's tie groups."""
    k = len(row)
    order = sorted(range(k), key=lambda j: row[j])
    ranks = [0.0] * k
    tie_term = 0
    i = 0
    while i < k:
        j = i
        while j + 1 < k and row[order[j + 1]] == row[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for t in range(i, j + 1):
            ranks[order[t]] = mean_rank
        t = j - i + 1
        tie_term += t * t * t - t
        i = j + 1
    return ranks, tie_term


@dataclass(frozen=True)
class FriedmanResult:
    chi2: float
    df: int
    p: float
    kendall_w: float
    mean_ranks: tuple[float, ...]


def _validated_matrix(scores) -> np.ndarray:
    m = np.asarray(scores, dtype=float)
    if m.ndim != 2:
        raise IncompleteMatrix("scores must be a 2-D blocks x treatments matrix")
    if not np.all(np.isfinite(m)):
        raise IncompleteMatrix("scores contain missing or non-finite cells")
    n, k = m.shape
    if k < 2 or n < 2:
        raise DegenerateBlocks(f"need >= 2 blocks and >= 2 treatments, got {n} x {k}")
    return m


def friedman(scores) -> FriedmanResult:
    """Friedman rank test over a complete blocks x treatments matrix.

    chi2 = [12/(N k (k+1)) * sum_j R_j^2 - 3 N (k+1)] / C with the standard
    tie correction C = 1 - sum(t^3 - t) / (N k (k^2 - 1)); Kendall's W is
    chi2 / (N (k-1)).
    """
    m = _validated_matrix(scores)
    n, k = m.shape
    rank_sums = np.zeros(k)
    tie_total = 0
    for row in m:
        ranks, tie_term = _midranks(row)
        rank_sums += ranks
        tie_total += tie_term
    raw = 12.0 / (n * k * (k + 1)) * float(rank_sums @ rank_sums) - 3.0 * n * (k + 1)
    correction = 1.0 - tie_total / (n * k * (k * k - 1))
    if correction <= 0:
        # every block fully tied: no information, no disagreement
        chi2 = 0.0
    else:
        chi2 = max(0.0, raw / correction)
    df = k - 1
    return FriedmanResult(
        chi2=chi2,
        df=df,
        p=chi2_sf(chi2, df),
        kendall_w=chi2 / (n * (k - 1)),
        mean_ranks=tuple(rank_sums / n),
    )


# --------------------------------------------------------------------------
# studentized-range tail (infinite df) and the Nemenyi post-hoc test
# --------------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(200)
_Z_LIMIT = 8.5
_Z_NODES = _GL_X * _Z_LIMIT
_Z_WEIGHTS = _GL_W * _Z_LIMIT
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_PHI_NODES = np.exp(-0.5 * _Z_NODES**2) / _SQRT_2PI
_CDF_NODES = np.array([0.5 * (1.0 + math.erf(z / math.sqrt(2.0))) for z in _Z_NODES])


def studentized_range_sf(q: float, k: int) -> float:
    """P(Q >= q) for the range of k standard normals (studentized range at
    infinite degrees of freedom).

    Uses 1 - F(q) = k * int phi(z) [Phi(z)^(k-1) - (Phi(z) - Phi(z-q))^(k-1)] dz,
    which stays accurate in the far tail where F(q) -> 1.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if q <= 0:
        return 1.0
    shifted = np.array(
        [0.5 * (1.0 + math.erf((z - q) / math.sqrt(2.0))) for z in _Z_NODES]
    )
    inner = _CDF_NODES ** (k - 1) - np.maximum(_CDF_NODES - shifted, 0.0) ** (k - 1)
    sf = k * float(np.sum(_Z_WEIGHTS * _PHI_NODES * inner))
    return min(1.0, max(0.0, sf))


def studentized_range_cdf(q: float, k: int) -> float:
    return 1.0 - studentized_range_sf(q, k)


def nemenyi(scores) -> np.ndarray:
    """All-pairs Nemenyi p-values after a Friedman test.

    For each treatment pair, q = |mean rank difference| / sqrt(k(k+1)/(6N)),
    and p comes from the studentized-range tail at q * sqrt(2) (k groups,
    infinite df). Returns a symmetric k x k matrix with a unit diagonal.
    """
    m = _validated_matrix(scores)
    n, k = m.shape
    mean_ranks = np.zeros(k)
    for row in m:
        ranks, _ = _midranks(row)
        mean_ranks += ranks
    mean_ranks /= n
    se = math.sqrt(k * (k + 1) / (6.0 * n))
    out = np.ones((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            q = abs(mean_ranks[i] - mean_ranks[j]) / se
            p = studentized_range_sf(q * math.sqrt(2.0), k)
            out[i, j] = out[j, i] = p
    return out


# --------------------------------------------------------------------------
# response analysis mirroring the two studies' result tables
# --------------------------------------------------------------------------

QUESTION_IDS = tuple(f"Q{i}" for i in range(1, 8))


def _posthoc_dict(matrix: np.ndarray) -> dict:
    pairs = {}
    for i in range(len(KINDS)):
        for j in range(i + 1, len(KINDS)):
            key = f"{KIND_CODES[KINDS[i]]} vs {KIND_CODES[KINDS[j]]}"
            pairs[key] = float(matrix[i, j])
    return pairs


@dataclass
class PairwiseDomainReport:
    n_participants: int
    selection_counts: dict
    gof: GofResult
    friedman: FriedmanResult
    posthoc: dict
    excluded_participants: list = field(default_factory=list)


@dataclass
class QuestionReport:
    friedman: FriedmanResult
    posthoc: dict
    medians: dict


@dataclass
class RatingsDomainReport:
    n_participants: int
    questions: dict
    excluded_participants: list = field(default_factory=list)


@dataclass
class AnalysisReport:
    study: str
    domains: dict
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        def as_plain(obj):
            if isinstance(obj, (GofResult, FriedmanResult)):
                d = obj.__dict__.copy()
                d.pop("mean_ranks", None)
                return {k: as_plain(v) for k, v in d.items()}
            if isinstance(
                obj, (PairwiseDomainReport, RatingsDomainReport, QuestionReport)
            ):
                return {k: as_plain(v) for k, v in obj.__dict__.items()}
            if isinstance(obj, dict):
                return {k: as_plain(v) for k, v in obj.items()}
            if isinstance(obj, (list, tuple)):
                return [as_plain(v) for v in obj]
            if isinstance(obj, (np.floating, np.integer)):
                return obj.item()
            return obj

        return {
            "study": self.study,
            "domains": as_plain(self.domains),
            "notes": list(self.notes),
        }


_NORMALITY_NOTE = (
    "Normality pre-checks are intentionally not run; the analysis is "
    "nonparametric throughout (rank tests only)."
)


def medians_csv(report: "AnalysisReport") -> str:
    """Per-question median plot data (one row per domain/question/kind)."""
    lines = ["domain,question,kind,median"]
    for domain, domain_report in report.domains.items():
        questions = getattr(domain_report, "questions", None)
        if not questions:
            continue
        for qid, question in questions.items():
            for kind in KINDS:
                lines.append(f"{domain},{qid},{kind},{question.medians[kind]:g}")
    return "\n".join(lines) + "\n"


def analyze_pairwise(rows) -> AnalysisReport:
    """Study-1 analysis: per-participant selection counts, pooled chi-square
    goodness of fit, and Friedman + Nemenyi over the count matrix, per domain."""
    rows = [r for r in rows]
    if not rows:
        raise NoResponses("no pairwise responses to analyze")
    domains: dict = {}
    by_domain: dict = {}
    for r in rows:
        by_domain.setdefault(r["domain"], []).append(r)
    for domain, domain_rows in sorted(by_domain.items()):
        by_participant: dict = {}
        for r in domain_rows:
            by_participant.setdefault(r["participant"], []).append(r)
        counts_matrix = []
        excluded = []
        for participant, prows in sorted(by_participant.items()):
            if len(prows) != 3:
                excluded.append(participant)
                continue
            counts = [0, 0, 0]
            for r in prows:
                counts[KINDS.index(r["choice"])] += 1
            counts_matrix.append(counts)
        if not counts_matrix:
            raise NoResponses(f"no complete participants in domain {domain!r}")
        pooled = [sum(c[j] for c in counts_matrix) for j in range(3)]
        matrix = np.asarray(counts_matrix, dtype=float)
        domains[domain] = PairwiseDomainReport(
            n_participants=len(counts_matrix),
            selection_counts=dict(zip(KINDS, pooled)),
            gof=chi_square_gof(pooled),
            friedman=friedman(matrix),
            posthoc=_posthoc_dict(nemenyi(matrix)),
            excluded_participants=excluded,
        )
    return AnalysisReport(study="pairwise", domains=domains, notes=(_NORMALITY_NOTE,))


def analyze_ratings(rows) -> AnalysisReport:
    """Study-2 analysis: one Friedman + Nemenyi per question per domain, no
    aggregation across questions. Participants lacking a complete
    one-response-per-kind triple are excluded and reported."""
    rows = [r for r in rows]
    if not rows:
        raise NoResponses("no rating responses to analyze")
    domains: dict = {}
    by_domain: dict = {}
    for r in rows:
        by_domain.setdefault(r["domain"], []).append(r)
    for domain, domain_rows in sorted(by_domain.items()):
        by_participant: dict = {}
        for r in domain_rows:
            by_participant.setdefault(r["participant"], {})[r["kind"]] = r
        complete, excluded = [], []
        for participant, by_kind in sorted(by_participant.items()):
            if set(by_kind) == set(KINDS):
                complete.append(by_kind)
            else:
                excluded.append(participant)
        if not complete:
            raise NoResponses(f"no complete participants in domain {domain!r}")
        questions = {}
        for qid in QUESTION_IDS:
            matrix = np.asarray(
                [[by_kind[k]["answers"][qid] for k in KINDS] for by_kind in complete],
                dtype=float,
            )
            questions[qid] = QuestionReport(
                friedman=friedman(matrix),
                posthoc=_posthoc_dict(nemenyi(matrix)),
                medians={
                    k: float(np.median(matrix[:, j])) for j, k in enumerate(KINDS)
                },
            )
        domains[domain] = RatingsDomainReport(
            n_participants=len(complete),
            questions=questions,
            excluded_participants=excluded,
        )
    return AnalysisReport(study="rating", domains=domains, notes=(_NORMALITY_NOTE,))
