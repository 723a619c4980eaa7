"""Detection metrics over labeled trial scores: DET sweep, EER, minDCF."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError


@dataclass(frozen=True)
class DetPoint:
    threshold: float
    p_miss: float
    p_fa: float


@dataclass(frozen=True)
class DcfParams:
    p_tar: float = 0.01
    c_miss: float = 1.0
    c_fa: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.p_tar < 1.0:
            raise ConfigError("invalid config: p_tar must be in (0, 1)")
        if self.c_miss <= 0 or self.c_fa <= 0:
            raise ConfigError("invalid config: costs must be positive")


def _split(scores: np.ndarray, labels: np.ndarray):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise DataError("trial mismatch")
    targets = scores[labels == 1]
    nontargets = scores[labels == 0]
    if targets.size == 0 or nontargets.size == 0:
        raise DataError("degenerate labels")
    return targets, nontargets


def det_sweep(scores: np.ndarray, labels: np.ndarray) -> list:
    """Operating points at every distinct score plus the two extremes.

    Decisions accept iff score >= threshold, so p_miss is the fraction of
    targets below the threshold and p_fa the fraction of nontargets at or
    above it. Points come back ordered by increasing threshold, from
    accept-all (-inf) to reject-all (+inf).
    """
    targets, nontargets = _split(scores, labels)
    t_sorted = np.sort(targets)
    n_sorted = np.sort(nontargets)
    thresholds = np.unique(np.concatenate([targets, nontargets]))
    points = [DetPoint(-np.inf, 0.0, 1.0)]
    for thr in thresholds:
        n_miss = np.searchsorted(t_sorted, thr, side="left")
        n_fa = n_sorted.size - np.searchsorted(n_sorted, thr, side="left")
        points.append(DetPoint(float(thr), n_miss / t_sorted.size, n_fa / n_sorted.size))
    points.append(DetPoint(np.inf, 1.0, 0.0))
    return points


def eer(scores: np.ndarray, labels: np.ndarray):
    """Equal error rate by linear interpolation on the DET step points.

    Returns (eer, threshold). The crossing threshold clamps to the finite
    endpoint when the bracketing point is an extreme.
    """
    points = det_sweep(scores, labels)
    diffs = [p.p_miss - p.p_fa for p in points]
    idx = next(i for i, d in enumerate(diffs) if d >= 0)
    b = points[idx]
    if diffs[idx] == 0.0:
        return b.p_miss, _finite(b.threshold, points)
    a = points[idx - 1]
    frac = -diffs[idx - 1] / (diffs[idx] - diffs[idx - 1])
    value = a.p_miss + frac * (b.p_miss - a.p_miss)
    if np.isinf(a.threshold):
        threshold = _finite(b.threshold, points)
    elif np.isinf(b.threshold):
        threshold = a.threshold
    else:
        threshold = a.threshold + frac * (b.threshold - a.threshold)
    return value, threshold


def _finite(threshold: float, points) -> float:
    if not np.isinf(threshold):
        return threshold
    finite = [p.threshold for p in points if not np.isinf(p.threshold)]
    if not finite:
        return 0.0
    return finite[0] if threshold < 0 else finite[-1]


def min_dcf(scores: np.ndarray, labels: np.ndarray, params: DcfParams = DcfParams()):
    """Minimum normalized detection cost over all thresholds.

    Cost is p_tar*c_miss*p_miss + (1-p_tar)*c_fa*p_fa, normalized by the
    better of the two trivial systems. Returns (min_dcf, threshold); ties
    resolve to the lowest threshold.
    """
    points = det_sweep(scores, labels)
    norm = min(params.p_tar * params.c_miss, (1.0 - params.p_tar) * params.c_fa)
    best = None
    for p in points:
        cost = (
            params.p_tar * params.c_miss * p.p_miss
            + (1.0 - params.p_tar) * params.c_fa * p.p_fa
        ) / norm
        if best is None or cost < best[0]:
            best = (cost, p.threshold)
    return best
