"""Trial scoring: cosine, Sub-Mean, adaptive score normalization, fusion."""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

SIGMA_FLOOR = 1e-8
DEFAULT_TOP_K = 300


class EmbeddingStore:
    """Immutable id -> vector map with an optional speaker grouping."""

    def __init__(self, embeddings: dict, utt2spk: dict | None = None):
        if not embeddings:
            raise DataError("no embeddings")
        self._vectors = {}
        dims = set()
        for rec_id, vec in embeddings.items():
            vec = np.asarray(vec, dtype=np.float64)
            if not np.all(np.isfinite(vec)):
                raise DataError(f"{rec_id}: non-finite embedding")
            self._vectors[rec_id] = vec
            dims.add(vec.shape[0])
        if len(dims) != 1:
            raise DataError(f"inconsistent embedding dims: {sorted(dims)}")
        self.dim = dims.pop()
        self.utt2spk = dict(utt2spk) if utt2spk else None

    def __len__(self):
        return len(self._vectors)

    def __contains__(self, rec_id):
        return rec_id in self._vectors

    def ids(self):
        return list(self._vectors.keys())

    def get(self, rec_id: str) -> np.ndarray:
        if rec_id not in self._vectors:
            raise DataError(f"embedding id '{rec_id}' not found")
        return self._vectors[rec_id]

    def matrix(self) -> np.ndarray:
        return np.stack([self._vectors[i] for i in self._vectors])


@dataclass(frozen=True)
class Cohort:
    """Score-normalization cohort: one center embedding per speaker."""

    centers: np.ndarray  # (n, E)

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=np.float64)
        if centers.ndim != 2 or centers.shape[0] == 0:
            raise DataError("empty cohort")
        if not np.all(np.isfinite(centers)):
            raise DataError("non-finite cohort center")
        if np.any(np.linalg.norm(centers, axis=1) == 0):
            raise DataError("zero-norm cohort center")
        object.__setattr__(self, "centers", centers)

    def __len__(self):
        return self.centers.shape[0]


@dataclass
class FusionModel:
    weights: np.ndarray
    bias: float = 0.0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.size == 0 or not np.any(self.weights != 0):
            raise ConfigError("invalid config: fusion needs a nonzero weight")


def cosine_score(e: np.ndarray, t: np.ndarray) -> float:
    e = np.asarray(e, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    ne, nt = np.linalg.norm(e), np.linalg.norm(t)
    if ne == 0 or nt == 0:
        raise DataError("degenerate embedding")
    return float(e @ t / (ne * nt))


def domain_mean(store: EmbeddingStore, sample_size: int, rng: np.random.Generator) -> np.ndarray:
    """Mean of a random embedding sample, standing in for the domain center."""
    if sample_size < 1:
        raise ConfigError("invalid config: sample_size must be >= 1")
    ids = sorted(store.ids())
    if sample_size >= len(ids):
        if sample_size > len(ids):
            log.warning("sample_size %d > store size %d; using all", sample_size, len(ids))
        chosen = ids
    else:
        chosen = [ids[i] for i in rng.choice(len(ids), size=sample_size, replace=False)]
    return np.mean([store.get(i) for i in chosen], axis=0)


def sub_mean_score(e: np.ndarray, t: np.ndarray, mean: np.ndarray) -> float:
    """Cosine after subtracting the domain mean from both sides."""
    e = np.asarray(e, dtype=np.float64) - mean
    t = np.asarray(t, dtype=np.float64) - mean
    if np.linalg.norm(e) == 0 or np.linalg.norm(t) == 0:
        raise DataError("embedding equals domain mean")
    return cosine_score(e, t)


def build_cohort(store: EmbeddingStore, rng: np.random.Generator) -> Cohort:
    """One uniformly chosen utterance embedding per speaker."""
    if store.utt2spk is None:
        raise DataError("store has no speaker grouping")
    by_speaker = {}
    for utt in sorted(store.ids()):
        spk = store.utt2spk.get(utt)
        if spk is None:
            log.warning("utterance %s missing from speaker grouping; skipped", utt)
            continue
        by_speaker.setdefault(spk, []).append(utt)
    centers = []
    for spk in sorted(by_speaker):
        utts = by_speaker[spk]
        centers.append(store.get(utts[int(rng.integers(0, len(utts)))]))
    if not centers:
        raise DataError("no cohort speakers")
    return Cohort(centers=np.stack(centers))


def topk_stats(scores: np.ndarray, top_k: int):
    """Mean and population std of the top_k highest scores."""
    scores = np.asarray(scores, dtype=np.float64)
    if top_k < 2:
        raise ConfigError("invalid config: top_k must be >= 2")
    if scores.shape[0] < top_k:
        raise DataError("cohort too small")
    top = np.partition(scores, scores.shape[0] - top_k)[-top_k:]
    mu = float(np.mean(top))
    sigma = float(np.std(top))
    if sigma < SIGMA_FLOOR:
        raise DataError("degenerate cohort")
    return mu, sigma


def cohort_scores(x: np.ndarray, cohort: Cohort) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    nx = np.linalg.norm(x)
    if nx == 0:
        raise DataError("degenerate embedding")
    norms = np.linalg.norm(cohort.centers, axis=1)
    return cohort.centers @ x / (norms * nx)


def as_norm(
    raw: float,
    e: np.ndarray,
    t: np.ndarray,
    cohort: Cohort,
    top_k: int = DEFAULT_TOP_K,
) -> float:
    """Symmetric adaptive score normalization against a speaker-center cohort.

    Each side is standardized by the mean/std of its top_k highest cohort
    scores; the result is the average of the two standardized scores.
    """
    mu_e, sd_e = topk_stats(cohort_scores(e, cohort), top_k)
    mu_t, sd_t = topk_stats(cohort_scores(t, cohort), top_k)
    return 0.5 * ((raw - mu_e) / sd_e + (raw - mu_t) / sd_t)


def score_trials(
    store: EmbeddingStore,
    enroll_ids,
    test_ids,
    mean: np.ndarray | None = None,
    cohort: Cohort | None = None,
    top_k: int = DEFAULT_TOP_K,
) -> np.ndarray:
    """Score (enroll, test) pairs with optional Sub-Mean and AS-Norm.

    Sub-Mean shifts the whole embedding space (cohort included) before
    cosine scoring; AS-Norm then standardizes each raw score. Unknown
    trial ids fail the run. Cohort statistics are cached per embedding.
    """
    if len(enroll_ids) != len(test_ids):
        raise DataError("trial mismatch")

    def fetch(rec_id):
        vec = store.get(rec_id)
        return vec if mean is None else vec - mean

    shifted_cohort = None
    if cohort is not None:
        centers = cohort.centers if mean is None else cohort.centers - mean
        shifted_cohort = Cohort(centers=centers)

    stats_cache = {}

    def stats(rec_id, vec):
        if rec_id not in stats_cache:
            stats_cache[rec_id] = topk_stats(cohort_scores(vec, shifted_cohort), top_k)
        return stats_cache[rec_id]

    scores = np.empty(len(enroll_ids), dtype=np.float64)
    for i, (eid, tid) in enumerate(zip(enroll_ids, test_ids)):
        e_vec, t_vec = fetch(eid), fetch(tid)
        if mean is not None and (np.linalg.norm(e_vec) == 0 or np.linalg.norm(t_vec) == 0):
            raise DataError("embedding equals domain mean")
        raw = cosine_score(e_vec, t_vec)
        if shifted_cohort is None:
            scores[i] = raw
        else:
            mu_e, sd_e = stats(eid, e_vec)
            mu_t, sd_t = stats(tid, t_vec)
            scores[i] = 0.5 * ((raw - mu_e) / sd_e + (raw - mu_t) / sd_t)
    return scores


# ----------------------------------------------------------------- fusion

def fit_fusion(
    system_scores: np.ndarray,
    labels: np.ndarray,
    lr: float = 1.0,
    max_iter: int = 50000,
    tol: float = 1e-6,
) -> FusionModel:
    """Logistic regression by full-batch gradient ascent.

    system_scores is (n_systems, n_trials); labels are {0, 1}. Ascends the
    mean binomial log-likelihood until the gradient norm falls below tol
    or max_iter is reached (separable data runs to the iteration cap).
    """
    scores = np.asarray(system_scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[1] != labels.shape[0]:
        raise DataError("trial mismatch")
    classes = np.unique(labels)
    if classes.size < 2:
        raise DataError("degenerate labels")
    if not set(classes).issubset({0.0, 1.0}):
        raise DataError("labels must be 0 or 1")

    n_sys, n_trials = scores.shape
    w = np.zeros(n_sys)
    b = 0.0
    for _ in range(max_iter):
        logits = w @ scores + b
        p = 1.0 / (1.0 + np.exp(-logits))
        resid = labels - p
        grad_w = scores @ resid / n_trials
        grad_b = float(np.mean(resid))
        if np.sqrt(np.sum(grad_w**2) + grad_b**2) < tol:
            break
        w += lr * grad_w
        b += lr * grad_b
    return FusionModel(weights=w, bias=b)


def fuse(system_scores: np.ndarray, model: FusionModel) -> np.ndarray:
    """Normalized weighted average of per-system scores.

    The logistic bias is dropped: a shared affine shift cannot change
    EER/minDCF ranking.
    """
    scores = np.asarray(system_scores, dtype=np.float64)
    if scores.shape[0] != model.weights.shape[0]:
        raise DataError("trial mismatch")
    total = float(np.sum(model.weights))
    if total == 0.0:
        raise ConfigError("zero total weight")
    return model.weights @ scores / total
