"""Sectioned key = value pipeline configuration.

Plain-text [section] / key = value files, schema-checked: unknown
sections or keys are rejected, and each stage validates its required
keys before running.
"""

import configparser
import os

from .errors import ConfigError

REQUIRED = object()

# key -> (type, default). Types: int, float, bool, str, floatpair, csv.
SCHEMA = {
    "global": {
        "seed": ("int", 0),
        "out_dir": ("str", None),
        "jobs": ("int", 1),
    },
    "data": {
        "n_source": ("int", 40),
        "n_target": ("int", 10),
        "utts_per_speaker": ("int", 10),
        "val_utts": ("int", 2),
        "frames": ("int", 25),
        "dim": ("int", 24),
        "center_scale": ("float", 1.0),
        "within_std": ("float", 0.6),
        "utt_jitter": ("float", 0.0),
        "shift_angle": ("float", 0.6),
        "shift_strength": ("float", 1.0),
        "eval_utts": ("int", 4),
    },
    "encoder": {
        "hidden_dim": ("int", 48),
        "channels": ("int", 16),
        "pooling": ("str", "gsp"),
        "queries": ("int", 1),
        "heads": ("int", 1),
    },
    "head": {
        "sub_centers": ("int", 1),
        "scale": ("float", 30.0),
    },
    "train1": {
        "lr": ("float", 0.08),
        "momentum": ("float", 0.9),
        "weight_decay": ("float", 1e-3),
        "batch": ("int", 32),
        "epochs": ("int", 8),
        "chunk_len": ("int", 200),
        "loss": ("str", "am"),
        "margin_start": ("float", 0.0),
        "margin_end": ("float", 0.2),
        "margin_curve": ("str", "linear"),
        "plateau_factor": ("float", 0.1),
        "plateau_patience": ("int", 2),
        "min_lr": ("float", 1e-6),
        "val_every": ("int", 0),
    },
    "train2": {
        "lr": ("float", 2e-5),
        "momentum": ("float", 0.9),
        "weight_decay": ("float", 1e-3),
        "batch": ("int", 32),
        "epochs": ("int", 4),
        "chunk_len": ("int", 200),
        "loss": ("str", "am"),
        "margin_start": ("float", 0.0),
        "margin_end": ("float", 0.2),
        "margin_curve": ("str", "linear"),
        "plateau_factor": ("float", 0.1),
        "plateau_patience": ("int", 2),
        "min_lr": ("float", 1e-6),
        "val_every": ("int", 0),
        "init": ("str", "reserved"),
    },
    "train3": {
        "lr": ("float", 2e-5),
        "momentum": ("float", 0.9),
        "weight_decay": ("float", 1e-3),
        "batch": ("int", 32),
        "epochs": ("int", 1),
        "chunk_len": ("int", 400),
        "loss": ("str", "aam"),
        "margin_start": ("float", 0.2),
        "margin_end": ("float", 0.5),
        "margin_curve": ("str", "exponential"),
        "plateau_factor": ("float", 0.1),
        "plateau_patience": ("int", 2),
        "min_lr": ("float", 1e-6),
        "val_every": ("int", 0),
    },
    "backend": {
        "sub_mean": ("bool", False),
        "compute_mean_n": ("int", 0),
        "as_norm": ("bool", False),
        "top_k": ("int", 300),
        "cohort_per_speaker": ("int", 2),
    },
    "metrics": {
        "p_tar": ("float", 0.01),
        "c_miss": ("float", 1.0),
        "c_fa": ("float", 1.0),
        "det": ("bool", True),
    },
    "frontend": {
        "frame_len_ms": ("float", 25.0),
        "frame_shift_ms": ("float", 10.0),
        "n_fft": ("int", 512),
        "n_mels": ("int", 80),
        "fmin": ("float", 20.0),
        "fmax": ("float", 7600.0),
        "pre_emphasis": ("float", 0.97),
        "log_floor": ("float", 1e-10),
        "cmn": ("bool", True),
    },
    "augment": {
        "recipes": ("csv", "clean,reverb,music,noise,babble"),
        "music_snr": ("floatpair", (5.0, 15.0)),
        "noise_snr": ("floatpair", (0.0, 15.0)),
        "babble_snr": ("floatpair", (13.0, 20.0)),
        "interval_s": ("float", 1.0),
        "babble_min": ("int", 3),
        "babble_max": ("int", 7),
    },
    "paths": {
        "manifest": ("str", None),
        "features": ("str", None),
        "wav_out_dir": ("str", None),
        "rir_dir": ("str", None),
        "music_dir": ("str", None),
        "noise_dir": ("str", None),
        "speech_dir": ("str", None),
    },
    "fusion": {
        "inputs": ("csv", None),
        "weights": ("csv", None),
        "dev_trials": ("str", None),
    },
}


def _parse_value(kind: str, raw: str, where: str):
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(raw)
        if kind == "floatpair":
            parts = [float(p) for p in raw.split(",")]
            if len(parts) != 2:
                raise ValueError(raw)
            return (parts[0], parts[1])
        if kind == "csv":
            return raw
        return raw
    except ValueError as exc:
        raise ConfigError(f"invalid config: bad value for {where}: {raw!r}") from exc


class PipelineConfig:
    """Typed, defaulted view of a parsed config file."""

    def __init__(self, sections: dict):
        self._sections = sections

    def get(self, section: str, key: str):
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"invalid config: unknown key {section}.{key}")
        return self._sections.get(section, {}).get(key, SCHEMA[section][key][1])

    def section(self, name: str) -> dict:
        if name not in SCHEMA:
            raise ConfigError(f"invalid config: unknown section [{name}]")
        out = {key: default for key, (_, default) in SCHEMA[name].items()}
        out.update(self._sections.get(name, {}))
        return out

    def require(self, section: str, *keys: str):
        """Validate that a stage's required keys are present and non-null."""
        for key in keys:
            if self.get(section, key) is None:
                raise ConfigError(f"invalid config: missing required key {section}.{key}")


def load_config(path: str) -> PipelineConfig:
    if not os.path.exists(path):
        raise ConfigError(f"invalid config: file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"invalid config: {exc}") from exc

    sections = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"invalid config: unknown section [{section}]")
        sections[section] = {}
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"invalid config: unknown key {section}.{key}")
            kind = SCHEMA[section][key][0]
            sections[section][key] = _parse_value(kind, raw, f"{section}.{key}")
    return PipelineConfig(sections)


def default_config() -> PipelineConfig:
    return PipelineConfig({})
