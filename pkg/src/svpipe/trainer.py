"""Staged-transfer training of a small dense encoder on synthetic speakers.

The protocol has three stages:
  1. pre-train on source speakers only, with extra head rows reserved for
     the target speakers; reserved rows see only negative gradients.
  2. fine-tune on source + target at a much smaller learning rate, with
     the previously reserved rows initializing the target classes.
  3. large-margin fine-tune on target data only: longer chunks, AAM loss,
     margin raised exponentially, one extra epoch.

Backpropagation is hand-written; every gradient is finite-difference
checked in the test suite.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm

from .errors import ConfigError, DataError
from .frontend import chunk
from .seeding import substream
from .modelmath import (
    MarginSchedule,
    SpeakerHead,
    gsp_batch,
    gsp_batch_grad,
    head_cosines_batch,
    head_cosines_grad,
    margin_at,
    margin_loss_batch,
    mqmha_batch,
    mqmha_batch_grad,
)


@dataclass
class EncoderConfig:
    in_dim: int = 24
    hidden_dim: int = 48
    channels: int = 16
    pooling: str = "gsp"  # or "mqmha"
    queries: int = 1
    heads: int = 1

    def __post_init__(self):
        if self.pooling not in ("gsp", "mqmha"):
            raise ConfigError(f"invalid config: unknown pooling '{self.pooling}'")
        if self.pooling == "mqmha" and self.channels % self.heads != 0:
            raise ConfigError("invalid head split")

    @property
    def embed_dim(self) -> int:
        if self.pooling == "mqmha":
            return 2 * self.channels * self.queries
        return 2 * self.channels


@dataclass
class TrainConfig:
    lr: float = 0.08
    momentum: float = 0.9
    weight_decay: float = 1e-3
    batch: int = 32
    epochs: int = 5
    chunk_len: int = 200
    loss: str = "am"
    margin_start: float = 0.0
    margin_end: float = 0.2
    margin_curve: str = "linear"
    plateau_factor: float = 0.1
    plateau_patience: int = 2
    min_lr: float = 1e-6
    val_every: int = 0  # 0 = once per epoch
    scale: float = 30.0

    def __post_init__(self):
        if self.lr <= 0:
            raise ConfigError("invalid config: lr must be positive")
        if not 0.0 < self.plateau_factor < 1.0:
            raise ConfigError("invalid config: plateau factor must be in (0, 1)")
        if self.batch < 1 or self.epochs < 0 or self.chunk_len < 1:
            raise ConfigError("invalid config: bad batch/epochs/chunk_len")


@dataclass
class EncoderParams:
    """Dense encoder weights plus pooling parameters and the speaker head."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    pooling: str
    pool_queries: np.ndarray | None
    head: SpeakerHead

    @property
    def in_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def embed_dim(self) -> int:
        return self.head.dim

    def copy(self) -> "EncoderParams":
        return EncoderParams(
            w1=self.w1.copy(),
            b1=self.b1.copy(),
            w2=self.w2.copy(),
            b2=self.b2.copy(),
            pooling=self.pooling,
            pool_queries=None if self.pool_queries is None else self.pool_queries.copy(),
            head=self.head.copy(),
        )

    def trainable(self) -> dict:
        out = {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2}
        if self.pool_queries is not None:
            out["pool_q"] = self.pool_queries
        out["head_w"] = self.head.weights
        return out


# ------------------------------------------------------------ synthetic data

@dataclass
class SyntheticConfig:
    n_source: int = 40
    n_target: int = 10
    utts_per_speaker: int = 10
    val_utts: int = 2
    frames: int = 25
    dim: int = 24
    center_scale: float = 1.0
    within_std: float = 0.6
    utt_jitter: float = 0.0
    shift_angle: float = 0.6
    shift_strength: float = 1.0
    eval_utts: int = 4

    def __post_init__(self):
        if self.n_source < 1 or self.n_target < 0:
            raise ConfigError("invalid config: need at least one source speaker")
        if not 0 < self.val_utts < self.utts_per_speaker:
            raise ConfigError("invalid config: val_utts must leave training data")


@dataclass
class SyntheticSpeakerSet:
    """Synthetic speaker clusters with a domain-shifted target subset.

    Class indexing is fixed: source speakers take 0..n_source-1, target
    speakers take n_source..n_source+n_target-1.
    """

    cfg: SyntheticConfig
    features: np.ndarray  # (n_utt, T, D)
    labels: np.ndarray  # (n_utt,)
    is_val: np.ndarray  # (n_utt,) bool
    rotation: np.ndarray
    bias: np.ndarray
    centers: np.ndarray = field(repr=False, default=None)

    @property
    def n_classes(self) -> int:
        return self.cfg.n_source + self.cfg.n_target

    def target_class(self, label: int) -> bool:
        return label >= self.cfg.n_source

    def subset(self, speakers: str, split: str):
        """Select (features, labels) by speaker group and train/val split."""
        if speakers == "source":
            keep = self.labels < self.cfg.n_source
        elif speakers == "target":
            keep = self.labels >= self.cfg.n_source
        elif speakers == "all":
            keep = np.ones_like(self.is_val)
        else:
            raise ConfigError(f"invalid config: unknown speaker group '{speakers}'")
        if split == "train":
            keep = keep & ~self.is_val
        elif split == "val":
            keep = keep & self.is_val
        elif split != "both":
            raise ConfigError(f"invalid config: unknown split '{split}'")
        return self.features[keep], self.labels[keep]


def _random_rotation(dim: int, angle: float, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal matrix exp(angle * S) for a random unit-norm skew-symmetric S."""
    a = rng.normal(size=(dim, dim))
    skew = (a - a.T) / 2.0
    skew /= max(np.linalg.norm(skew, 2), 1e-12)
    return expm(angle * skew)


def _draw_utterances(centers, speakers, n_utts, cfg, rng):
    """One (n, T, D) block of frames per speaker.

    Each utterance is its speaker's center plus an utterance-level jitter
    offset (session variability) plus per-frame noise.
    """
    feats, labels = [], []
    frame_std = cfg.within_std / math.sqrt(cfg.dim)
    jitter_std = cfg.utt_jitter / math.sqrt(cfg.dim)
    for spk in speakers:
        jitter = rng.normal(scale=jitter_std, size=(n_utts, 1, cfg.dim)) if jitter_std else 0.0
        noise = rng.normal(scale=frame_std, size=(n_utts, cfg.frames, cfg.dim))
        feats.append(centers[spk][None, None, :] + jitter + noise)
        labels.extend([spk] * n_utts)
    return np.concatenate(feats, axis=0), np.array(labels, dtype=np.int64)


def synthesize_speakers(cfg: SyntheticConfig, rng: np.random.Generator) -> SyntheticSpeakerSet:
    """Generate the synthetic speaker set; identical for a fixed generator."""
    n_spk = cfg.n_source + cfg.n_target
    centers = rng.normal(scale=cfg.center_scale / math.sqrt(cfg.dim), size=(n_spk, cfg.dim))
    rotation = _random_rotation(cfg.dim, cfg.shift_angle, rng)
    bias_dir = rng.normal(size=cfg.dim)
    bias = bias_dir / np.linalg.norm(bias_dir) * cfg.shift_strength * cfg.center_scale

    feats, labels = _draw_utterances(centers, range(n_spk), cfg.utts_per_speaker, cfg, rng)
    target = labels >= cfg.n_source
    feats[target] = feats[target] @ rotation.T + bias

    is_val = np.zeros(len(labels), dtype=bool)
    for spk in range(n_spk):
        idx = np.nonzero(labels == spk)[0]
        is_val[idx[-cfg.val_utts :]] = True
    return SyntheticSpeakerSet(
        cfg=cfg,
        features=feats,
        labels=labels,
        is_val=is_val,
        rotation=rotation,
        bias=bias,
        centers=centers,
    )


def synthesize_eval_utterances(dataset: SyntheticSpeakerSet, rng: np.random.Generator):
    """Held-out target-speaker utterances for enroll/test trials."""
    cfg = dataset.cfg
    speakers = range(cfg.n_source, cfg.n_source + cfg.n_target)
    feats, labels = _draw_utterances(dataset.centers, speakers, cfg.eval_utts, cfg, rng)
    feats = feats @ dataset.rotation.T + dataset.bias
    return feats, labels


# ------------------------------------------------------------ model plumbing

def build_head(
    n_base: int,
    n_reserved: int,
    n_subcenters: int,
    dim: int,
    rng: np.random.Generator,
    scale: float = 30.0,
) -> SpeakerHead:
    """Random unit-norm head with the last n_reserved classes masked reserved."""
    if dim < 1:
        raise ConfigError("invalid dim")
    if n_base < 0 or n_reserved < 0 or n_base + n_reserved < 1:
        raise ConfigError("invalid config: class counts must be non-negative")
    if n_subcenters < 1:
        raise ConfigError("invalid config: need at least one sub-center")
    n_classes = n_base + n_reserved
    weights = rng.normal(size=(n_classes, n_subcenters, dim))
    weights /= np.linalg.norm(weights, axis=2, keepdims=True)
    mask = np.zeros(n_classes, dtype=bool)
    mask[n_base:] = True
    return SpeakerHead(weights=weights, scale=scale, reserved_mask=mask)


def init_encoder(
    enc: EncoderConfig,
    head: SpeakerHead,
    rng: np.random.Generator,
) -> EncoderParams:
    if head.dim != enc.embed_dim:
        raise ConfigError(
            f"invalid config: head dim {head.dim} != pooled dim {enc.embed_dim}"
        )
    w1 = rng.normal(size=(enc.in_dim, enc.hidden_dim)) / math.sqrt(enc.in_dim)
    w2 = rng.normal(size=(enc.hidden_dim, enc.channels)) / math.sqrt(enc.hidden_dim)
    queries = None
    if enc.pooling == "mqmha":
        queries = 0.01 * rng.normal(
            size=(enc.queries, enc.heads, enc.channels // enc.heads)
        )
    return EncoderParams(
        w1=w1,
        b1=np.zeros(enc.hidden_dim),
        w2=w2,
        b2=np.zeros(enc.channels),
        pooling=enc.pooling,
        pool_queries=queries,
        head=head,
    )


def _encode_batch(params: EncoderParams, x: np.ndarray):
    z1 = x @ params.w1 + params.b1
    a1 = np.tanh(z1)
    frames = a1 @ params.w2 + params.b2
    if params.pooling == "mqmha":
        emb, pool_cache = mqmha_batch(frames, params.pool_queries)
    else:
        emb, pool_cache = gsp_batch(frames)
    return emb, (x, a1, pool_cache)


def forward_backward(
    params: EncoderParams,
    x: np.ndarray,
    labels: np.ndarray,
    margin: float,
    loss_kind: str,
):
    """Mean loss plus gradients for every trainable array.

    x is a (B, T, D) batch of feature chunks.
    """
    emb, (x_in, a1, pool_cache) = _encode_batch(params, x)
    cos, head_cache = head_cosines_batch(emb, params.head)
    loss, d_cos = margin_loss_batch(cos, labels, params.head.scale, margin, loss_kind)

    g_emb, g_head = head_cosines_grad(head_cache, d_cos)
    grads = {"head_w": g_head}
    if params.pooling == "mqmha":
        g_frames, grads["pool_q"] = mqmha_batch_grad(pool_cache, g_emb)
    else:
        g_frames = gsp_batch_grad(pool_cache, g_emb)
    grads["w2"] = np.einsum("bth,btc->hc", a1, g_frames)
    grads["b2"] = g_frames.sum(axis=(0, 1))
    g_a1 = g_frames @ params.w2.T
    g_z1 = g_a1 * (1.0 - a1**2)
    grads["w1"] = np.einsum("btd,bth->dh", x_in, g_z1)
    grads["b1"] = g_z1.sum(axis=(0, 1))
    return loss, grads


def embed(params: EncoderParams, features: np.ndarray) -> np.ndarray:
    """Deterministic utterance embedding: encoder forward plus pooling."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != params.in_dim:
        raise DataError("shape error")
    emb, _ = _encode_batch(params, features[None])
    return emb[0]


def embed_batch(params: EncoderParams, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 3 or features.shape[2] != params.in_dim:
        raise DataError("shape error")
    emb, _ = _encode_batch(params, features)
    return emb


# ------------------------------------------------------------ optimization

class PlateauScheduler:
    """Reduce-on-plateau: multiply lr by `factor` after `patience` stale
    validations, never dropping below `min_lr`."""

    def __init__(self, lr: float, factor: float, patience: int, min_lr: float):
        self.lr = lr
        self.factor = factor
        self.patience = patience
        self.min_lr = min_lr
        self.best = math.inf
        self.stale = 0

    def step(self, metric: float) -> float:
        if metric < self.best:
            self.best = metric
            self.stale = 0
        else:
            self.stale += 1
            if self.stale > self.patience:
                self.lr = max(self.lr * self.factor, self.min_lr)
                self.stale = 0
        return self.lr


def sgd_step(params: dict, grads: dict, velocity: dict, lr, momentum, weight_decay):
    """Momentum SGD with decoupled weight decay, updating arrays in place."""
    for name, value in params.items():
        velocity[name] = momentum * velocity[name] + grads[name]
        value -= lr * (velocity[name] + weight_decay * value)
        if not np.all(np.isfinite(value)):
            raise DataError(f"parameter '{name}' became non-finite during training")


def evaluate(params: EncoderParams, feats: np.ndarray, labels: np.ndarray):
    """(cross-entropy at zero margin, accuracy) on full-length utterances."""
    emb = embed_batch(params, feats)
    cos, _ = head_cosines_batch(emb, params.head)
    loss, _ = margin_loss_batch(cos, labels, params.head.scale, 0.0, "am")
    acc = float(np.mean(np.argmax(cos, axis=1) == labels))
    return loss, acc


def _chunk_batch(feats: np.ndarray, chunk_len: int, rng: np.random.Generator) -> np.ndarray:
    if feats.shape[1] == chunk_len:
        return feats
    return np.stack([chunk(f, chunk_len, rng) for f in feats])


def train(
    params: EncoderParams,
    train_feats: np.ndarray,
    train_labels: np.ndarray,
    val_feats: np.ndarray,
    val_labels: np.ndarray,
    cfg: TrainConfig,
    rng: np.random.Generator,
    forbid_reserved: bool = False,
    history: list | None = None,
):
    """Run one training stage in place; returns the trained params.

    When forbid_reserved is set, any batch containing a reserved-class
    label aborts the stage (reserved rows must only see negatives).
    """
    n = train_feats.shape[0]
    if n == 0:
        raise DataError("no training data")
    if int(train_labels.max()) >= params.head.n_classes:
        raise DataError("label outside head classes")
    steps_per_epoch = max(1, math.ceil(n / cfg.batch))
    total_steps = max(1, cfg.epochs * steps_per_epoch)
    sched = MarginSchedule(cfg.margin_start, cfg.margin_end, cfg.margin_curve, total_steps)
    plateau = PlateauScheduler(cfg.lr, cfg.plateau_factor, cfg.plateau_patience, cfg.min_lr)
    val_every = cfg.val_every if cfg.val_every > 0 else steps_per_epoch
    trainable = params.trainable()
    velocity = {name: np.zeros_like(value) for name, value in trainable.items()}
    params.head.scale = cfg.scale

    step = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch):
            idx = order[start : start + cfg.batch]
            labels = train_labels[idx]
            if forbid_reserved and np.any(params.head.reserved_mask[labels]):
                raise DataError("label leak into reserved classes")
            batch = _chunk_batch(train_feats[idx], cfg.chunk_len, rng)
            margin = margin_at(step, sched)
            params.head.margin = margin
            loss, grads = forward_backward(params, batch, labels, margin, cfg.loss)
            sgd_step(trainable, grads, velocity, plateau.lr, cfg.momentum, cfg.weight_decay)
            step += 1
            row = {"step": step, "lr": plateau.lr, "margin": margin, "loss": loss,
                   "val_acc": ""}
            if step % val_every == 0 and len(val_feats) > 0:
                val_loss, val_acc = evaluate(params, val_feats, val_labels)
                plateau.step(val_loss)
                row["val_acc"] = val_acc
                row["lr"] = plateau.lr
            if history is not None:
                history.append(row)
    if step:
        params.head.margin = margin_at(min(step, total_steps), sched)
    return params


# ------------------------------------------------------------ staged protocol

def pretrain_stage1(
    dataset: SyntheticSpeakerSet,
    params: EncoderParams,
    cfg: TrainConfig,
    rng: np.random.Generator,
    history: list | None = None,
) -> EncoderParams:
    """Stage 1: source speakers only; reserved rows trained as negatives."""
    train_f, train_l = dataset.subset("source", "train")
    val_f, val_l = dataset.subset("source", "val")
    return train(params, train_f, train_l, val_f, val_l, cfg, rng,
                 forbid_reserved=True, history=history)


def transfer_to_stage2(
    stage1: EncoderParams,
    mapping,
    rng: np.random.Generator,
    scale: float | None = None,
) -> EncoderParams:
    """Re-map head rows for fine-tuning; encoder weights copy verbatim.

    mapping[j] is the stage-1 class whose weights initialize stage-2
    class j, or -1 for a fresh random row (the traditional-transfer
    baseline when every target entry is fresh). Stage-1 classes absent
    from the mapping are dropped.
    """
    mapping = np.asarray(list(mapping), dtype=np.int64)
    if mapping.size == 0:
        raise ConfigError("bad mapping")
    if np.any(mapping >= stage1.head.n_classes):
        raise ConfigError("bad mapping")
    out = stage1.copy()
    k, dim = stage1.head.n_subcenters, stage1.head.dim
    weights = np.empty((mapping.size, k, dim))
    copied = mapping >= 0
    weights[copied] = stage1.head.weights[mapping[copied]]
    n_fresh = int(np.count_nonzero(~copied))
    if n_fresh:
        fresh = rng.normal(size=(n_fresh, k, dim))
        fresh /= np.linalg.norm(fresh, axis=2, keepdims=True)
        weights[~copied] = fresh
    out.head = SpeakerHead(
        weights=weights,
        scale=scale if scale is not None else stage1.head.scale,
        reserved_mask=np.zeros(mapping.size, dtype=bool),
    )
    return out


def finetune_stage2(
    dataset: SyntheticSpeakerSet,
    params: EncoderParams,
    cfg: TrainConfig,
    rng: np.random.Generator,
    history: list | None = None,
) -> EncoderParams:
    """Stage 2: source + target speakers at a small learning rate."""
    train_f, train_l = dataset.subset("all", "train")
    val_f, val_l = dataset.subset("all", "val")
    return train(params, train_f, train_l, val_f, val_l, cfg, rng, history=history)


def lmft_stage3(
    dataset: SyntheticSpeakerSet,
    params: EncoderParams,
    cfg: TrainConfig,
    rng: np.random.Generator,
    history: list | None = None,
):
    """Stage 3: large-margin fine-tuning on target data only.

    Returns (params, report) where the report carries validation metrics
    from before and after the extra epoch, since this stage can hurt.
    """
    val_f, val_l = dataset.subset("all", "val")
    pre_loss, pre_acc = evaluate(params, val_f, val_l)
    train_f, train_l = dataset.subset("target", "train")
    train(params, train_f, train_l, val_f, val_l, cfg, rng, history=history)
    post_loss, post_acc = evaluate(params, val_f, val_l)
    report = {
        "pre_val_loss": pre_loss,
        "pre_val_acc": pre_acc,
        "post_val_loss": post_loss,
        "post_val_acc": post_acc,
    }
    return params, report


def reserved_mapping(n_source: int, n_target: int) -> np.ndarray:
    """Stage-2 mapping that reuses the pre-trained reserved rows."""
    return np.arange(n_source + n_target, dtype=np.int64)


def fresh_target_mapping(n_source: int, n_target: int) -> np.ndarray:
    """Traditional transfer: keep source rows, re-draw target rows."""
    mapping = np.arange(n_source + n_target, dtype=np.int64)
    mapping[n_source:] = -1
    return mapping


def target_val_accuracy(params: EncoderParams, dataset: SyntheticSpeakerSet) -> float:
    feats, labels = dataset.subset("target", "val")
    _, acc = evaluate(params, feats, labels)
    return acc


def run_ab_experiment(
    seeds,
    data_cfg: SyntheticConfig,
    enc_cfg: EncoderConfig,
    stage1_cfg: TrainConfig,
    stage2_cfg: TrainConfig,
    n_subcenters: int = 1,
):
    """Paired comparison of reserved-weight vs fresh-row initialization.

    For each seed, stage 1 is trained once and both stage-2 branches run
    under identical budgets and identical batch streams. Returns a list
    of (reserved_accuracy, fresh_accuracy) on target-speaker validation.
    """
    results = []
    for seed in seeds:
        dataset = synthesize_speakers(data_cfg, substream(seed, "data"))
        head = build_head(
            data_cfg.n_source, data_cfg.n_target, n_subcenters, enc_cfg.embed_dim,
            substream(seed, "head"), scale=stage1_cfg.scale,
        )
        params = init_encoder(enc_cfg, head, substream(seed, "init"))
        stage1 = pretrain_stage1(dataset, params, stage1_cfg, substream(seed, "train1"))

        accs = {}
        for variant, mapping in (
            ("reserved", reserved_mapping(data_cfg.n_source, data_cfg.n_target)),
            ("fresh", fresh_target_mapping(data_cfg.n_source, data_cfg.n_target)),
        ):
            branch = transfer_to_stage2(stage1, mapping, substream(seed, "fresh-init"))
            finetune_stage2(dataset, branch, stage2_cfg, substream(seed, "train2"))
            accs[variant] = target_val_accuracy(branch, dataset)
        results.append((accs["reserved"], accs["fresh"]))
    return results


def stage_lr_ratio(stage1_lr: float = 0.08, stage2_lr: float = 2e-5) -> float:
    """Default stage-2/stage-1 learning-rate ratio, preserved at toy scale."""
    return stage2_lr / stage1_lr


def scaled_stage2(cfg: TrainConfig, stage1_lr: float) -> TrainConfig:
    return replace(cfg, lr=stage1_lr * stage_lr_ratio())


# ------------------------------------------------------------ serialization

_POOL_CODES = {"gsp": 0.0, "mqmha": 1.0}


def params_records(params: EncoderParams):
    """Flatten parameters into named 2-D records for the archive format.

    Head sub-center rows are stored individually under ids "class:j:k".
    """
    records = [
        ("enc.w1", params.w1),
        ("enc.b1", params.b1[None, :]),
        ("enc.w2", params.w2),
        ("enc.b2", params.b2[None, :]),
        ("pool.kind", np.array([[_POOL_CODES[params.pooling]]])),
        ("head.scale", np.array([[params.head.scale]])),
        ("head.margin", np.array([[params.head.margin]])),
        ("head.reserved", params.head.reserved_mask.astype(np.float64)[None, :]),
    ]
    if params.pool_queries is not None:
        q, h, c = params.pool_queries.shape
        records.append(("pool.q_shape", np.array([[q, h, c]], dtype=np.float64)))
        records.append(("pool.q", params.pool_queries.reshape(q * h, c)))
    head = params.head
    for j in range(head.n_classes):
        for k in range(head.n_subcenters):
            records.append((f"class:{j}:{k}", head.weights[j, k][None, :]))
    return records


def save_params(path, params: EncoderParams) -> None:
    from .dataio import write_params_archive

    write_params_archive(path, params_records(params))


def load_params(path) -> EncoderParams:
    from .dataio import read_params_archive

    records = read_params_archive(path)
    try:
        pooling = "mqmha" if records["pool.kind"][0, 0] == 1.0 else "gsp"
        queries = None
        if pooling == "mqmha":
            q, h, c = (int(v) for v in records["pool.q_shape"][0])
            queries = records["pool.q"].reshape(q, h, c)
        class_keys = [key for key in records if key.startswith("class:")]
        n_classes = 1 + max(int(key.split(":")[1]) for key in class_keys)
        n_sub = 1 + max(int(key.split(":")[2]) for key in class_keys)
        dim = records[class_keys[0]].shape[1]
        weights = np.empty((n_classes, n_sub, dim))
        for key in class_keys:
            _, j, k = key.split(":")
            weights[int(j), int(k)] = records[key][0]
        head = SpeakerHead(
            weights=weights,
            scale=float(records["head.scale"][0, 0]),
            margin=float(records["head.margin"][0, 0]),
            reserved_mask=records["head.reserved"][0] != 0.0,
        )
        return EncoderParams(
            w1=records["enc.w1"],
            b1=records["enc.b1"][0],
            w2=records["enc.w2"],
            b2=records["enc.b2"][0],
            pooling=pooling,
            pool_queries=queries,
            head=head,
        )
    except (KeyError, IndexError, ValueError) as exc:
        raise DataError(f"{path}: malformed parameter archive ({exc})") from exc
