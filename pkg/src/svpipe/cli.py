"""Command-line entry point wiring the pipeline stages end to end.

Subcommands: featurize, augment, train, embed, score, fit-fusion, fuse,
eval, pipeline. Exit codes: 0 success, 2 config error, 3 data error.
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import augment as aug
from . import backend, dataio, metrics, report, trainer
from .config import PipelineConfig, default_config, load_config
from .errors import ConfigError, DataError, PipelineError
from .frontend import FrontendConfig, Waveform, cmn, logmel_fbank
from .seeding import substream

log = logging.getLogger("svpipe")

PIPELINE_STAGES = (
    "featurize", "augment", "train1", "train2", "train3",
    "embed", "score", "fuse", "eval",
)
DEFAULT_STAGES = "train1,train2,embed,score,eval"


# ------------------------------------------------------------ config glue

def _data_cfg(config: PipelineConfig) -> trainer.SyntheticConfig:
    sec = config.section("data")
    return trainer.SyntheticConfig(**sec)


def _enc_cfg(config: PipelineConfig) -> trainer.EncoderConfig:
    sec = config.section("encoder")
    return trainer.EncoderConfig(in_dim=config.get("data", "dim"), **sec)


def _train_cfg(config: PipelineConfig, stage: int) -> trainer.TrainConfig:
    sec = dict(config.section(f"train{stage}"))
    sec.pop("init", None)
    return trainer.TrainConfig(scale=config.get("head", "scale"), **sec)


def _frontend_cfg(config: PipelineConfig) -> FrontendConfig:
    sec = dict(config.section("frontend"))
    sec.pop("cmn")
    return FrontendConfig(**sec)


def _load_config(path: str | None) -> PipelineConfig:
    return load_config(path) if path else default_config()


# ------------------------------------------------------------- featurize

def _featurize_one(task):
    utt_id, wav_path, cfg, apply_cmn = task
    wave = dataio.read_wav(wav_path)
    feats = logmel_fbank(wave, cfg)
    if apply_cmn:
        feats = cmn(feats)
    return utt_id, feats


def cmd_featurize(args) -> int:
    config = _load_config(args.config)
    config.require("paths", "manifest", "features")
    rows = dataio.read_manifest(config.get("paths", "manifest"))
    cfg = _frontend_cfg(config)
    apply_cmn = config.get("frontend", "cmn")
    tasks = [(utt, path, cfg, apply_cmn) for utt, path, _ in rows]
    jobs = args.jobs or config.get("global", "jobs")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_featurize_one, tasks, chunksize=8))
    else:
        results = [_featurize_one(t) for t in tasks]
    out_path = config.get("paths", "features")
    dataio.write_feature_archive(out_path, results)
    log.info("wrote %d utterances to %s", len(results), out_path)
    return 0


# --------------------------------------------------------------- augment

_AUG_SOURCES = {}


def _load_wav_dir(directory):
    if directory is None:
        return []
    names = sorted(
        n for n in os.listdir(directory) if n.lower().endswith(".wav")
    )
    return [dataio.read_wav(os.path.join(directory, n)) for n in names]


def _augment_init(dirs):
    _AUG_SOURCES["rirs"] = _load_wav_dir(dirs.get("rir_dir"))
    _AUG_SOURCES["music"] = _load_wav_dir(dirs.get("music_dir"))
    _AUG_SOURCES["noises"] = _load_wav_dir(dirs.get("noise_dir"))
    _AUG_SOURCES["speech"] = _load_wav_dir(dirs.get("speech_dir"))


def _augment_one(task):
    (utt_id, wav_path, speaker, factor, recipes, seed, out_dir, label) = task
    rng = substream(seed, "augment", f"{factor}|{utt_id}")
    recipe = recipes[int(rng.integers(0, len(recipes)))]
    wave = dataio.read_wav(wav_path)
    shifted = aug.speed_perturb(wave, factor)
    out = aug.corrupt(
        shifted,
        recipe,
        rng,
        rirs=_AUG_SOURCES["rirs"],
        music=_AUG_SOURCES["music"],
        noises=_AUG_SOURCES["noises"],
        speech=_AUG_SOURCES["speech"],
    )
    new_utt = utt_id if factor == 1.0 else f"sp{factor}-{utt_id}"
    out_path = os.path.join(out_dir, f"{new_utt}.wav")
    dataio.write_wav(out_path, out)
    return new_utt, out_path, label


def cmd_augment(args) -> int:
    config = _load_config(args.config)
    config.require("paths", "manifest", "wav_out_dir")
    seed = args.seed if args.seed is not None else config.get("global", "seed")
    rows = dataio.read_manifest(config.get("paths", "manifest"))
    recipes = tuple(r.strip() for r in config.get("augment", "recipes").split(","))

    speakers = list(dict.fromkeys(spk for _, _, spk in rows))
    label_map = aug.expand_speakers(speakers)

    out_dir = config.get("paths", "wav_out_dir")
    os.makedirs(out_dir, exist_ok=True)
    dirs = {k: config.get("paths", k) for k in ("rir_dir", "music_dir", "noise_dir", "speech_dir")}

    tasks = []
    for utt_id, wav_path, speaker in rows:
        for factor in aug.SPEED_FACTORS:
            label = label_map.label_name(speaker, factor)
            tasks.append((utt_id, wav_path, speaker, factor, recipes, seed, out_dir, label))

    jobs = args.jobs or config.get("global", "jobs")
    if jobs > 1:
        with ProcessPoolExecutor(
            max_workers=jobs, initializer=_augment_init, initargs=(dirs,)
        ) as pool:
            out_rows = list(pool.map(_augment_one, tasks, chunksize=4))
    else:
        _augment_init(dirs)
        out_rows = [_augment_one(t) for t in tasks]

    dataio.write_manifest(os.path.join(out_dir, "manifest.txt"), out_rows)
    with dataio.atomic_open(os.path.join(out_dir, "classes.txt"), "w") as handle:
        for factor in label_map.factors:
            for speaker in label_map.speakers:
                idx = label_map.class_of(speaker, factor)
                handle.write(f"{idx} {label_map.label_name(speaker, factor)}\n")
    log.info("wrote %d augmented utterances to %s", len(out_rows), out_dir)
    return 0


# ----------------------------------------------------------------- train

def _train_stage(stage: int, config: PipelineConfig, seed: int, out_path: str,
                 init_path: str | None, log_path: str | None) -> dict | None:
    data_cfg = _data_cfg(config)
    dataset = trainer.synthesize_speakers(data_cfg, substream(seed, "data"))
    cfg = _train_cfg(config, stage)
    history: list = []
    report_out = None

    if stage == 1:
        head = trainer.build_head(
            data_cfg.n_source,
            data_cfg.n_target,
            config.get("head", "sub_centers"),
            _enc_cfg(config).embed_dim,
            substream(seed, "head"),
            scale=config.get("head", "scale"),
        )
        params = trainer.init_encoder(_enc_cfg(config), head, substream(seed, "init"))
        trainer.pretrain_stage1(dataset, params, cfg, substream(seed, "train1"), history)
    else:
        if init_path is None:
            raise ConfigError(f"invalid config: stage {stage} needs --init parameters")
        if not os.path.exists(init_path):
            raise DataError(f"stage dependency missing: {init_path}")
        params = trainer.load_params(init_path)
        if stage == 2:
            if config.get("train2", "init") == "fresh":
                mapping = trainer.fresh_target_mapping(data_cfg.n_source, data_cfg.n_target)
            else:
                mapping = trainer.reserved_mapping(data_cfg.n_source, data_cfg.n_target)
            params = trainer.transfer_to_stage2(params, mapping, substream(seed, "fresh-init"))
            trainer.finetune_stage2(dataset, params, cfg, substream(seed, "train2"), history)
        else:
            params, report_out = trainer.lmft_stage3(
                dataset, params, cfg, substream(seed, "train3"), history
            )
    trainer.save_params(out_path, params)
    if log_path:
        report.write_train_log(log_path, history)
        report.render_train_curves(log_path, report.sibling_png(log_path))
    if report_out is not None:
        lines = [f"{key} {value:.6f}" for key, value in report_out.items()]
        with dataio.atomic_open(out_path + ".report.txt", "w") as handle:
            handle.write("\n".join(lines) + "\n")
        for line in lines:
            print(line)
    return report_out


def cmd_train(args) -> int:
    config = _load_config(args.config)
    _train_stage(args.stage, config, args.seed, args.out, args.init, args.log)
    log.info("stage %d parameters written to %s", args.stage, args.out)
    return 0


# ----------------------------------------------------------------- embed

def cmd_embed(args) -> int:
    params = trainer.load_params(args.params)
    feats = dataio.read_feature_archive(args.features)
    embeddings = [(utt, trainer.embed(params, f)) for utt, f in feats.items()]
    dataio.write_embeddings(args.out, embeddings, text=args.text)
    log.info("embedded %d utterances to %s", len(embeddings), args.out)
    return 0


# ----------------------------------------------------------------- score

def _single_record_mean(path: str) -> np.ndarray:
    records = dataio.read_embeddings(path)
    if len(records) != 1:
        raise DataError(f"{path}: mean file must hold exactly one vector")
    return next(iter(records.values()))


def cmd_score(args) -> int:
    store = backend.EmbeddingStore(dataio.read_embeddings(args.embeddings))
    enroll, test, _ = dataio.read_trials(args.trials)

    mean = None
    if args.sub_mean and args.compute_mean:
        raise ConfigError("invalid config: pass --sub-mean or --compute-mean, not both")
    if args.sub_mean:
        mean = _single_record_mean(args.sub_mean)
    elif args.compute_mean:
        mean = backend.domain_mean(store, args.compute_mean, substream(args.seed, "mean"))

    cohort = None
    if args.as_norm:
        if not args.cohort:
            raise ConfigError("invalid config: --as-norm needs --cohort")
        cohort_records = dataio.read_embeddings(args.cohort)
        if args.cohort_utt2spk:
            cohort_store = backend.EmbeddingStore(
                cohort_records, dataio.read_utt2spk(args.cohort_utt2spk)
            )
            cohort = backend.build_cohort(cohort_store, substream(args.seed, "cohort"))
        else:
            cohort = backend.Cohort(centers=np.stack(list(cohort_records.values())))

    scores = backend.score_trials(
        store, enroll, test, mean=mean, cohort=cohort, top_k=args.top_k
    )
    dataio.write_scores(args.out, enroll, test, scores)
    log.info("scored %d trials to %s", len(scores), args.out)
    return 0


# ---------------------------------------------------------------- fusion

def _aligned_systems(paths, enroll, test):
    systems = []
    for path in paths:
        s_enroll, s_test, s_scores = dataio.read_scores(path)
        if s_enroll != list(enroll) or s_test != list(test):
            raise DataError(f"trial mismatch: {path}")
        systems.append(s_scores)
    return np.stack(systems)


def cmd_fit_fusion(args) -> int:
    enroll, test, labels = dataio.read_trials(args.dev_labels)
    if labels is None:
        raise DataError("degenerate labels: dev trials must be labeled")
    paths = [p.strip() for p in args.inputs.split(",") if p.strip()]
    systems = _aligned_systems(paths, enroll, test)
    model = backend.fit_fusion(systems, labels)
    lines = ["weights " + " ".join(f"{w:.6f}" for w in model.weights),
             f"bias {model.bias:.6f}"]
    if args.out:
        with dataio.atomic_open(args.out, "w") as handle:
            handle.write("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    return 0


def cmd_fuse(args) -> int:
    paths = [p.strip() for p in args.inputs.split(",") if p.strip()]
    weights = np.array([float(w) for w in args.weights.split(",")])
    if weights.shape[0] != len(paths):
        raise ConfigError("invalid config: one weight per input required")
    enroll, test, _ = dataio.read_scores(paths[0])
    systems = _aligned_systems(paths, enroll, test)
    fused = backend.fuse(systems, backend.FusionModel(weights=weights))
    dataio.write_scores(args.out, enroll, test, fused)
    log.info("fused %d systems to %s", len(paths), args.out)
    return 0


# ------------------------------------------------------------------ eval

def _evaluate(scores_path, trials_path, dcf: metrics.DcfParams, det_path=None):
    enroll, test, labels = dataio.read_trials(trials_path)
    if labels is None:
        raise DataError("degenerate labels: trials must be labeled for eval")
    s_enroll, s_test, scores = dataio.read_scores(scores_path)
    if s_enroll != enroll or s_test != test:
        raise DataError("trial mismatch between scores and trials")
    eer_value, eer_thr = metrics.eer(scores, labels)
    dcf_value, dcf_thr = metrics.min_dcf(scores, labels, dcf)
    lines = [
        f"EER(%) {100.0 * eer_value:.4f} threshold {eer_thr:.6f}",
        f"minDCF {dcf_value:.4f} threshold {dcf_thr:.6f}",
    ]
    if det_path:
        points = metrics.det_sweep(scores, labels)
        report.write_det_csv(det_path, points)
        report.render_det_curve(points, report.sibling_png(det_path))
    return lines


def cmd_eval(args) -> int:
    dcf = metrics.DcfParams(p_tar=args.p_tar, c_miss=args.c_miss, c_fa=args.c_fa)
    lines = _evaluate(args.scores, args.trials, dcf, det_path=args.det)
    for line in lines:
        print(line)
    return 0


# -------------------------------------------------------------- pipeline

def _need(path: str, stage: str) -> str:
    if not os.path.exists(path):
        raise DataError(f"stage dependency missing: {stage} needs {path}")
    return path


def _latest_params(out_dir: str, stage: str) -> str:
    for n in (3, 2, 1):
        path = os.path.join(out_dir, f"params_stage{n}.bin")
        if os.path.exists(path):
            return path
    raise DataError(f"stage dependency missing: {stage} needs trained parameters")


def _stage_embed(config: PipelineConfig, out_dir: str, seed: int):
    params = trainer.load_params(_latest_params(out_dir, "embed"))
    data_cfg = _data_cfg(config)
    dataset = trainer.synthesize_speakers(data_cfg, substream(seed, "data"))

    eval_feats, eval_labels = trainer.synthesize_eval_utterances(
        dataset, substream(seed, "eval-data")
    )
    embeddings, enroll_ids, test_rows = [], {}, []
    counters = {}
    for feats, label in zip(eval_feats, eval_labels):
        speaker = f"spk{label}"
        n = counters.get(speaker, 0)
        counters[speaker] = n + 1
        utt = f"{speaker}_enroll" if n == 0 else f"{speaker}_test{n}"
        embeddings.append((utt, trainer.embed(params, feats)))
        if n == 0:
            enroll_ids[speaker] = utt
        else:
            test_rows.append((speaker, utt))
    dataio.write_embeddings(os.path.join(out_dir, "eval_embeddings.bin"), embeddings)

    enroll, test, labels = [], [], []
    for enroll_spk in sorted(enroll_ids):
        for test_spk, utt in test_rows:
            enroll.append(enroll_ids[enroll_spk])
            test.append(utt)
            labels.append(1 if test_spk == enroll_spk else 0)
    dataio.write_trials(os.path.join(out_dir, "trials.txt"), enroll, test, labels)

    per_spk = config.get("backend", "cohort_per_speaker")
    cohort_embeddings, utt2spk = [], {}
    train_feats, train_labels = dataset.subset("all", "train")
    seen = {}
    for feats, label in zip(train_feats, train_labels):
        speaker = f"spk{label}"
        n = seen.get(speaker, 0)
        if n >= per_spk:
            continue
        seen[speaker] = n + 1
        utt = f"{speaker}_train{n}"
        cohort_embeddings.append((utt, trainer.embed(params, feats)))
        utt2spk[utt] = speaker
    dataio.write_embeddings(os.path.join(out_dir, "cohort_embeddings.bin"), cohort_embeddings)
    with dataio.atomic_open(os.path.join(out_dir, "cohort_utt2spk.txt"), "w") as handle:
        for utt, speaker in utt2spk.items():
            handle.write(f"{utt} {speaker}\n")
    return [
        os.path.join(out_dir, name)
        for name in ("eval_embeddings.bin", "trials.txt",
                     "cohort_embeddings.bin", "cohort_utt2spk.txt")
    ]


def _stage_score(config: PipelineConfig, out_dir: str, seed: int):
    store = backend.EmbeddingStore(
        dataio.read_embeddings(_need(os.path.join(out_dir, "eval_embeddings.bin"), "score"))
    )
    enroll, test, _ = dataio.read_trials(_need(os.path.join(out_dir, "trials.txt"), "score"))

    mean = None
    if config.get("backend", "sub_mean"):
        n = config.get("backend", "compute_mean_n") or len(store)
        mean = backend.domain_mean(store, n, substream(seed, "mean"))

    cohort = None
    if config.get("backend", "as_norm"):
        cohort_store = backend.EmbeddingStore(
            dataio.read_embeddings(_need(os.path.join(out_dir, "cohort_embeddings.bin"), "score")),
            dataio.read_utt2spk(_need(os.path.join(out_dir, "cohort_utt2spk.txt"), "score")),
        )
        cohort = backend.build_cohort(cohort_store, substream(seed, "cohort"))

    scores = backend.score_trials(
        store, enroll, test, mean=mean, cohort=cohort,
        top_k=config.get("backend", "top_k"),
    )
    out_path = os.path.join(out_dir, "scores.txt")
    dataio.write_scores(out_path, enroll, test, scores)
    return [out_path]


def _stage_eval(config: PipelineConfig, out_dir: str):
    dcf = metrics.DcfParams(
        p_tar=config.get("metrics", "p_tar"),
        c_miss=config.get("metrics", "c_miss"),
        c_fa=config.get("metrics", "c_fa"),
    )
    det_path = os.path.join(out_dir, "det.csv") if config.get("metrics", "det") else None
    lines = _evaluate(
        _need(os.path.join(out_dir, "scores.txt"), "eval"),
        _need(os.path.join(out_dir, "trials.txt"), "eval"),
        dcf,
        det_path=det_path,
    )
    metrics_path = os.path.join(out_dir, "metrics.txt")
    with dataio.atomic_open(metrics_path, "w") as handle:
        handle.write("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    produced = [metrics_path]
    if det_path:
        produced += [det_path, report.sibling_png(det_path)]
    return produced


def _stage_fuse(config: PipelineConfig, out_dir: str):
    config.require("fusion", "inputs")
    paths = [p.strip() for p in config.get("fusion", "inputs").split(",")]
    for path in paths:
        _need(path, "fuse")
    enroll, test, _ = dataio.read_scores(paths[0])
    systems = _aligned_systems(paths, enroll, test)
    raw_weights = config.get("fusion", "weights")
    if raw_weights:
        model = backend.FusionModel(
            weights=np.array([float(w) for w in raw_weights.split(",")])
        )
    else:
        config.require("fusion", "dev_trials")
        d_enroll, d_test, labels = dataio.read_trials(config.get("fusion", "dev_trials"))
        if labels is None:
            raise DataError("degenerate labels: fusion dev trials must be labeled")
        dev = _aligned_systems(paths, d_enroll, d_test)
        model = backend.fit_fusion(dev, labels)
    fused = backend.fuse(systems, model)
    out_path = os.path.join(out_dir, "scores_fused.txt")
    dataio.write_scores(out_path, enroll, test, fused)
    return [out_path]


def cmd_pipeline(args) -> int:
    config = _load_config(args.config)
    seed = args.seed if args.seed is not None else config.get("global", "seed")
    out_dir = args.out_dir or config.get("global", "out_dir")
    if not out_dir:
        raise ConfigError("invalid config: out_dir is required (flag or [global] out_dir)")
    os.makedirs(out_dir, exist_ok=True)

    stages = [s.strip() for s in args.stages.split(",") if s.strip()]
    for stage in stages:
        if stage not in PIPELINE_STAGES:
            raise ConfigError(f"invalid config: unknown stage '{stage}'")
    if not stages:
        return 0

    produced: list[str] = []
    for stage in stages:
        log.info("pipeline stage: %s", stage)
        if stage == "featurize":
            cmd_featurize(argparse.Namespace(config=args.config, jobs=args.jobs))
            produced.append(config.get("paths", "features"))
        elif stage == "augment":
            cmd_augment(argparse.Namespace(config=args.config, jobs=args.jobs, seed=seed))
            wav_dir = config.get("paths", "wav_out_dir")
            produced.append(os.path.join(wav_dir, "manifest.txt"))
        elif stage in ("train1", "train2", "train3"):
            n = int(stage[-1])
            out_path = os.path.join(out_dir, f"params_stage{n}.bin")
            init_path = None
            if n > 1:
                init_path = _need(
                    os.path.join(out_dir, f"params_stage{n - 1}.bin"), stage
                )
            log_path = os.path.join(out_dir, f"train_stage{n}_log.csv")
            _train_stage(n, config, seed, out_path, init_path, log_path)
            produced += [out_path, log_path, report.sibling_png(log_path)]
            if n == 3:
                produced.append(out_path + ".report.txt")
        elif stage == "embed":
            produced += _stage_embed(config, out_dir, seed)
        elif stage == "score":
            produced += _stage_score(config, out_dir, seed)
        elif stage == "fuse":
            produced += _stage_fuse(config, out_dir)
        elif stage == "eval":
            produced += _stage_eval(config, out_dir)

    manifest_path = os.path.join(out_dir, "manifest.txt")
    with dataio.atomic_open(manifest_path, "w") as handle:
        for path in sorted(set(produced)):
            handle.write(f"{dataio.sha256_file(path)}  {path}\n")
    log.info("pipeline complete; artifact manifest at %s", manifest_path)
    return 0


# ------------------------------------------------------------------ main

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svpipe",
        description="Speaker-verification pipeline toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("featurize", help="WAV manifest -> feature archive")
    p.add_argument("--config", required=True)
    p.add_argument("--jobs", type=int, default=0)
    p.set_defaults(handler=cmd_featurize)

    p = sub.add_parser("augment", help="speed-perturb and corrupt a WAV manifest")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=0)
    p.set_defaults(handler=cmd_augment)

    p = sub.add_parser("train", help="run one training stage on synthetic speakers")
    p.add_argument("--stage", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--init", default=None, help="parameters from the previous stage")
    p.add_argument("--log", default=None, help="training log CSV (PNG rendered beside it)")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("embed", help="feature archive -> embedding archive")
    p.add_argument("--params", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--text", action="store_true", help="write text embeddings")
    p.set_defaults(handler=cmd_embed)

    p = sub.add_parser("score", help="score a trial list against embeddings")
    p.add_argument("--trials", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--sub-mean", dest="sub_mean", default=None,
                   help="file holding one mean embedding")
    p.add_argument("--compute-mean", dest="compute_mean", type=int, default=0,
                   help="sample N embeddings from the store to compute the mean")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--as-norm", dest="as_norm", action="store_true")
    p.add_argument("--cohort", default=None, help="cohort embedding archive")
    p.add_argument("--cohort-utt2spk", dest="cohort_utt2spk", default=None,
                   help="speaker grouping for building the cohort")
    p.add_argument("--top-k", dest="top_k", type=int, default=backend.DEFAULT_TOP_K)
    p.set_defaults(handler=cmd_score)

    p = sub.add_parser("fit-fusion", help="fit logistic-regression fusion weights")
    p.add_argument("--inputs", required=True, help="comma-separated score files")
    p.add_argument("--dev-labels", dest="dev_labels", required=True,
                   help="labeled trial list")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_fit_fusion)

    p = sub.add_parser("fuse", help="weighted-average fusion of score files")
    p.add_argument("--weights", required=True, help="comma-separated weights")
    p.add_argument("--inputs", required=True, help="comma-separated score files")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_fuse)

    p = sub.add_parser("eval", help="EER / minDCF over labeled trials")
    p.add_argument("--scores", required=True)
    p.add_argument("--trials", required=True)
    p.add_argument("--p-tar", dest="p_tar", type=float, default=0.01)
    p.add_argument("--c-miss", dest="c_miss", type=float, default=1.0)
    p.add_argument("--c-fa", dest="c_fa", type=float, default=1.0)
    p.add_argument("--det", default=None,
                   help="write DET sweep CSV (PNG rendered beside it)")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("pipeline", help="run an ordered subset of pipeline stages")
    p.add_argument("--config", required=True)
    p.add_argument("--stages", default=DEFAULT_STAGES)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", dest="out_dir", default=None)
    p.add_argument("--jobs", type=int, default=0)
    p.set_defaults(handler=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
