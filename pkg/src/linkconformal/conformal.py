"""Split-conformal calibration for quantile-band link predictions.

The non-conformity score of a labeled point against a band [lower, upper]
is max(lower - y, y - upper): negative when y sits strictly inside the
band, positive when it falls outside. Calibration takes the k-th smallest
of K scores with k = ceil((K+1)(1-alpha)); when k exceeds K the quantile
is +inf and intervals become unbounded (maximally conservative).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

# Absolute slack when ceiling (K+1)(1-alpha); guards against float
# representation error at exact integer boundaries (e.g. 10 * 0.9).
_CEIL_EPS = 1e-9


@dataclass(frozen=True)
class PredictionInterval:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"inverted interval [{self.lower}, {self.upper}]")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def covers(self, y: float) -> bool:
        return self.lower <= y <= self.upper


@dataclass(frozen=True)
class ConformalReport:
    empirical_coverage: float
    avg_interval_length: float
    q_hat: float
    alpha: float
    calib_size: int
    test_size: int


def nonconformity(lower: float, upper: float, y: float) -> float:
    """Score of label y against the band [lower, upper]."""
    if lower > upper:
        raise ValueError(f"lower={lower} exceeds upper={upper}")
    return max(lower - y, y - upper)


def conformal_quantile(scores, alpha: float) -> float:
    """k-th smallest calibration score, k = ceil((K+1)(1-alpha)).

    Returns +inf when k > K, which happens for small calibration sets.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("calibration scores must be non-empty")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    k = math.ceil((scores.size + 1) * (1.0 - alpha) - _CEIL_EPS)
    k = max(k, 1)
    if k > scores.size:
        return math.inf
    return float(np.partition(scores, k - 1)[k - 1])


def prediction_interval(lower: float, upper: float, q_hat: float) -> PredictionInterval:
    """Widen the band [lower, upper] by q_hat on both sides.

    A negative q_hat can empty the interval; in that case the degenerate
    point interval at the band midpoint is returned.
    """
    if lower > upper:
        raise ValueError(f"lower={lower} exceeds upper={upper}")
    lo, hi = lower - q_hat, upper + q_hat
    if lo > hi:
        mid = (lower + upper) / 2.0
        return PredictionInterval(mid, mid)
    return PredictionInterval(lo, hi)


def evaluate(
    intervals: Sequence[PredictionInterval],
    labels,
    q_hat: float = math.nan,
    alpha: float = math.nan,
    calib_size: int = 0,
) -> ConformalReport:
    """Empirical coverage (closed endpoints) and average interval length."""
    labels = np.asarray(labels, dtype=np.float64)
    if len(intervals) != labels.size:
        raise ValueError(f"{len(intervals)} intervals vs {labels.size} labels")
    if labels.size == 0:
        raise ValueError("nothing to evaluate")
    covered = sum(iv.covers(y) for iv, y in zip(intervals, labels))
    lengths = np.array([iv.length for iv in intervals])
    return ConformalReport(
        empirical_coverage=covered / labels.size,
        avg_interval_length=float(np.mean(lengths)),
        q_hat=q_hat,
        alpha=alpha,
        calib_size=calib_size,
        test_size=int(labels.size),
    )


def conformalize(
    qmodel,
    calib_embeddings,
    calib_labels,
    test_embeddings,
    alpha: float,
) -> Tuple[List[PredictionInterval], float]:
    """Calibrate the quantile band and construct test intervals.

    ``qmodel`` must expose ``quantiles(Z) -> (n, 2)`` sorted bands.
    Returns (one PredictionInterval per test row, q_hat).
    """
    calib_embeddings = np.asarray(calib_embeddings, dtype=np.float64)
    calib_labels = np.asarray(calib_labels, dtype=np.float64)
    if calib_embeddings.shape[0] == 0:
        raise ValueError("calibration set must be non-empty")
    bands = qmodel.quantiles(calib_embeddings)
    scores = np.maximum(bands[:, 0] - calib_labels, calib_labels - bands[:, 1])
    q_hat = conformal_quantile(scores, alpha)
    test_bands = qmodel.quantiles(np.asarray(test_embeddings, dtype=np.float64))
    intervals = [prediction_interval(lo, hi, q_hat) for lo, hi in test_bands]
    return intervals, q_hat
