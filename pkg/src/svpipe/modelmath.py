"""Pooling layers and margin-softmax losses with analytic gradients.

Forward formulas are exact; every backward pass here is checked against
central finite differences in the test suite. Batched variants carry the
actual math; the single-instance functions are thin wrappers over them.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError

VAR_FLOOR = 1e-10
SIN_FLOOR = 1e-12


@dataclass
class SpeakerHead:
    """Class weights with sub-centers: shape (classes, sub_centers, dim).

    reserved_mask flags classes that have no positive samples in the
    current training stage; they are trained only as negatives.
    """

    weights: np.ndarray
    scale: float = 30.0
    margin: float = 0.0
    reserved_mask: np.ndarray = field(default=None)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 3:
            raise ConfigError("invalid config: head weights must be (J, K, E)")
        if self.scale <= 0:
            raise ConfigError("invalid config: scale must be positive")
        if self.reserved_mask is None:
            self.reserved_mask = np.zeros(self.weights.shape[0], dtype=bool)
        self.reserved_mask = np.asarray(self.reserved_mask, dtype=bool)

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_subcenters(self) -> int:
        return self.weights.shape[1]

    @property
    def dim(self) -> int:
        return self.weights.shape[2]

    def copy(self) -> "SpeakerHead":
        return SpeakerHead(
            weights=self.weights.copy(),
            scale=self.scale,
            margin=self.margin,
            reserved_mask=self.reserved_mask.copy(),
        )


@dataclass
class MarginSchedule:
    start_m: float
    end_m: float
    curve: str = "linear"
    total_steps: int = 1

    def __post_init__(self):
        if not (0.0 <= self.start_m <= self.end_m):
            raise ConfigError("invalid config: need 0 <= start_m <= end_m")
        if self.total_steps < 1:
            raise ConfigError("invalid config: total_steps must be >= 1")
        if self.curve not in ("linear", "exponential"):
            raise ConfigError(f"invalid config: unknown margin curve '{self.curve}'")
        if self.curve == "exponential" and self.start_m == 0.0:
            raise ConfigError("invalid exponential schedule")


def margin_at(step: int, sched: MarginSchedule) -> float:
    """Margin value at an optimizer step, hitting both endpoints exactly."""
    if not 0 <= step <= sched.total_steps:
        raise ConfigError("invalid config: step outside schedule")
    if step == 0:
        return sched.start_m
    if step == sched.total_steps:
        return sched.end_m
    frac = step / sched.total_steps
    if sched.curve == "linear":
        return sched.start_m + (sched.end_m - sched.start_m) * frac
    return sched.start_m * (sched.end_m / sched.start_m) ** frac


# ------------------------------------------------------------- pooling

def gsp_batch(H: np.ndarray):
    """Global statistics pooling: per-channel mean and population std.

    H is (B, T, C); returns ((B, 2C), cache). Computed as the
    uniform-attention case of mqmha so the two agree bit for bit.
    """
    H = np.asarray(H, dtype=np.float64)
    return mqmha_batch(H, np.zeros((1, 1, H.shape[2])))


def gsp_batch_grad(cache, g_out: np.ndarray) -> np.ndarray:
    g_H, _ = mqmha_batch_grad(cache, g_out)
    return g_H


def mqmha_batch(H: np.ndarray, queries: np.ndarray):
    """Multi-query multi-head attention pooling.

    H is (B, T, C), queries is (Q, h, C//h). Channels split into h heads;
    each (query, head) pair softmax-attends over time and contributes its
    weighted mean and weighted std, so the output is (B, 2*C*Q) laid out
    as [mean, std] per (query, head) block.
    """
    H = np.asarray(H, dtype=np.float64)
    queries = np.asarray(queries, dtype=np.float64)
    B, T, C = H.shape
    Q, h, c = queries.shape
    if C % h != 0 or h * c != C:
        raise ConfigError("invalid head split")
    Hh = H.reshape(B, T, h, c)
    u = np.einsum("bthc,qhc->btqh", Hh, queries)
    u = u - u.max(axis=1, keepdims=True)
    a = np.exp(u)
    a /= a.sum(axis=1, keepdims=True)
    mu = np.einsum("btqh,bthc->bqhc", a, Hh)
    m2 = np.einsum("btqh,bthc->bqhc", a, Hh**2)
    var = m2 - mu**2
    floored = var < VAR_FLOOR
    sd = np.sqrt(np.maximum(var, VAR_FLOOR))
    out = np.concatenate([mu, sd], axis=-1).reshape(B, 2 * C * Q)
    return out, (Hh, queries, a, mu, sd, floored)


def mqmha_batch_grad(cache, g_out: np.ndarray):
    """Returns (grad wrt H (B,T,C), grad wrt queries (Q,h,c))."""
    Hh, queries, a, mu, sd, floored = cache
    B, T, h, c = Hh.shape
    Q = queries.shape[0]
    g = g_out.reshape(B, Q, h, 2 * c)
    g_mu = g[..., :c].copy()
    g_sd = g[..., c:]
    d_var = np.where(floored, 0.0, g_sd / (2.0 * sd))
    g_mu -= 2.0 * mu * d_var  # var = m2 - mu^2 routes back into mu
    g_m2 = d_var
    gHh = np.einsum("bqhc,btqh->bthc", g_mu, a)
    gHh += 2.0 * Hh * np.einsum("bqhc,btqh->bthc", g_m2, a)
    g_a = np.einsum("bqhc,bthc->btqh", g_mu, Hh)
    g_a += np.einsum("bqhc,bthc->btqh", g_m2, Hh**2)
    g_u = a * (g_a - (a * g_a).sum(axis=1, keepdims=True))
    gHh += np.einsum("btqh,qhc->bthc", g_u, queries)
    g_queries = np.einsum("btqh,bthc->qhc", g_u, Hh)
    return gHh.reshape(B, T, h * c), g_queries


def gsp(H: np.ndarray) -> np.ndarray:
    """Pool one utterance's frame features (T, C) into (2C,)."""
    out, _ = gsp_batch(np.asarray(H, dtype=np.float64)[None])
    return out[0]


def mqmha(H: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Pool one utterance's frame features (T, C) into (2*C*Q,)."""
    out, _ = mqmha_batch(np.asarray(H, dtype=np.float64)[None], queries)
    return out[0]


# ------------------------------------------------------ sub-center head

def head_cosines_batch(x: np.ndarray, head: SpeakerHead):
    """Per-class cosine against the nearest sub-center.

    x is (B, E); returns ((B, J) cosines, cache).
    """
    x = np.asarray(x, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise DataError("degenerate embedding")
    w_norms = np.linalg.norm(head.weights, axis=2, keepdims=True)
    if np.any(w_norms == 0):
        raise DataError("degenerate sub-center weight")
    x_hat = x / norms
    w_hat = head.weights / w_norms
    cos_all = np.einsum("be,jke->bjk", x_hat, w_hat)
    k_star = np.argmax(cos_all, axis=2)  # ties break toward the lowest k
    cos = np.take_along_axis(cos_all, k_star[..., None], axis=2)[..., 0]
    return cos, (x, norms, x_hat, w_norms, w_hat, k_star)


def head_cosines_grad(cache, g_cos: np.ndarray):
    """Returns (grad wrt x (B,E), grad wrt head weights (J,K,E)).

    Gradient flows only through each class's argmax sub-center.
    """
    x, norms, x_hat, w_norms, w_hat, k_star = cache
    B, E = x.shape
    J, K = w_hat.shape[:2]
    # Selected unit sub-centers per (b, j): shape (B, J, E).
    w_sel = w_hat[np.arange(J)[None, :], k_star]
    g_xhat = np.einsum("bj,bje->be", g_cos, w_sel)
    g_x = (g_xhat - (g_xhat * x_hat).sum(axis=1, keepdims=True) * x_hat) / norms
    one_hot = (np.arange(K)[None, None, :] == k_star[..., None]).astype(np.float64)
    g_what = np.einsum("bjk,bj,be->jke", one_hot, g_cos, x_hat)
    g_w = (g_what - (g_what * w_hat).sum(axis=2, keepdims=True) * w_hat) / w_norms
    return g_x, g_w


def subcenter_cosine(x: np.ndarray, head: SpeakerHead) -> np.ndarray:
    """Cosine of one embedding against every class's nearest sub-center."""
    cos, _ = head_cosines_batch(np.asarray(x, dtype=np.float64)[None], head)
    return cos[0]


# ---------------------------------------------------------------- losses

def margin_loss_batch(
    cosines: np.ndarray,
    labels: np.ndarray,
    scale: float,
    margin: float,
    kind: str = "am",
):
    """Mean margin-softmax cross-entropy and its gradient wrt the cosines.

    kind "am" puts the target logit at s*(cos - m); "aam" at s*cos(theta + m),
    falling back to s*(cos - m*sin m) where theta + m would pass pi.
    """
    if scale <= 0:
        raise ConfigError("invalid config: scale must be positive")
    if margin < 0:
        raise ConfigError("invalid config: margin must be >= 0")
    if kind not in ("am", "aam"):
        raise ConfigError(f"invalid config: unknown loss '{kind}'")
    cosines = np.asarray(cosines, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    B, J = cosines.shape
    if np.any(labels < 0) or np.any(labels >= J):
        raise ConfigError("invalid config: label out of range")
    rows = np.arange(B)
    c_lab = cosines[rows, labels]

    z = scale * cosines.copy()
    if kind == "am":
        z[rows, labels] = scale * (c_lab - margin)
        d_target = np.full(B, scale)
    else:
        sin_m, cos_m = np.sin(margin), np.cos(margin)
        sin_lab = np.sqrt(np.clip(1.0 - c_lab**2, 0.0, None))
        normal = c_lab >= -cos_m  # theta + m <= pi
        phi = np.where(normal, c_lab * cos_m - sin_lab * sin_m, c_lab - margin * sin_m)
        z[rows, labels] = scale * phi
        d_phi = np.where(
            normal, cos_m + sin_m * c_lab / np.maximum(sin_lab, SIN_FLOOR), 1.0
        )
        d_target = scale * d_phi

    z -= z.max(axis=1, keepdims=True)
    expz = np.exp(z)
    p = expz / expz.sum(axis=1, keepdims=True)
    loss = float(np.mean(-np.log(p[rows, labels])))

    dz = p.copy()
    dz[rows, labels] -= 1.0
    dz /= B
    d_cos = scale * dz
    d_cos[rows, labels] = dz[rows, labels] * d_target
    return loss, d_cos


def am_softmax_loss(cosines: np.ndarray, label: int, scale: float, margin: float):
    """Additive-margin softmax loss and gradient for one cosine vector."""
    loss, grad = margin_loss_batch(
        np.asarray(cosines, dtype=np.float64)[None], np.array([label]), scale, margin, "am"
    )
    return loss, grad[0]


def aam_softmax_loss(cosines: np.ndarray, label: int, scale: float, margin: float):
    """Additive-angular-margin softmax loss and gradient for one cosine vector."""
    loss, grad = margin_loss_batch(
        np.asarray(cosines, dtype=np.float64)[None], np.array([label]), scale, margin, "aam"
    )
    return loss, grad[0]
