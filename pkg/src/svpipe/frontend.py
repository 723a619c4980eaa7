"""Feature frontend: log-mel filterbank with energy, CMN, and chunking.

Waveforms are mono float arrays at 16 kHz. Features are T x 81 matrices:
80 log triangular-mel-filter energies plus log frame energy appended as
the last column.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError

SAMPLE_RATE = 16000


@dataclass(frozen=True)
class Waveform:
    """Mono PCM samples (nominal range [-1, 1]) with their sample rate."""

    samples: np.ndarray
    sample_rate: int


@dataclass
class FrontendConfig:
    sample_rate: int = SAMPLE_RATE
    frame_len_ms: float = 25.0
    frame_shift_ms: float = 10.0
    n_fft: int = 512
    n_mels: int = 80
    fmin: float = 20.0
    fmax: float = 7600.0
    pre_emphasis: float = 0.97
    log_floor: float = 1e-10

    @property
    def frame_len(self) -> int:
        return int(round(self.sample_rate * self.frame_len_ms / 1000.0))

    @property
    def frame_shift(self) -> int:
        return int(round(self.sample_rate * self.frame_shift_ms / 1000.0))

    @property
    def dim(self) -> int:
        return self.n_mels + 1


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


def mel_filter_centers(config: FrontendConfig) -> np.ndarray:
    """Center frequency in Hz of each triangular mel filter."""
    pts = np.linspace(hz_to_mel(config.fmin), hz_to_mel(config.fmax), config.n_mels + 2)
    return mel_to_hz(pts[1:-1])


def mel_filterbank(config: FrontendConfig) -> np.ndarray:
    """Triangular filter weights, shape (n_fft // 2 + 1, n_mels).

    Triangles are linear in the mel domain between adjacent mel points,
    evaluated at the FFT bin frequencies.
    """
    pts = np.linspace(hz_to_mel(config.fmin), hz_to_mel(config.fmax), config.n_mels + 2)
    bin_mels = hz_to_mel(np.fft.rfftfreq(config.n_fft, d=1.0 / config.sample_rate))
    lower, center, upper = pts[:-2], pts[1:-1], pts[2:]
    up = (bin_mels[:, None] - lower) / (center - lower)
    down = (upper - bin_mels[:, None]) / (upper - center)
    return np.clip(np.minimum(up, down), 0.0, None)


def _frame(samples: np.ndarray, frame_len: int, frame_shift: int) -> np.ndarray:
    n_frames = (len(samples) - frame_len) // frame_shift + 1
    idx = np.arange(frame_len)[None, :] + frame_shift * np.arange(n_frames)[:, None]
    return samples[idx]


def logmel_fbank(wave: Waveform, config: FrontendConfig | None = None) -> np.ndarray:
    """Log-mel filterbank features with log frame energy as the last column.

    Frame count is floor((N - frame_len) / frame_shift) + 1; no padding.
    Frame energy is computed on the raw frame before pre-emphasis and
    windowing. Filter energies and frame energy are floored at
    config.log_floor before the log.
    """
    config = config or FrontendConfig()
    if config.sample_rate <= 0 or config.sample_rate != SAMPLE_RATE:
        raise ConfigError(f"invalid config: sample_rate must be {SAMPLE_RATE}")
    if wave.sample_rate != config.sample_rate:
        raise ConfigError(
            f"invalid config: waveform rate {wave.sample_rate} != {config.sample_rate}"
        )
    samples = np.asarray(wave.samples, dtype=np.float64)
    if samples.size < config.frame_len:
        raise DataError("audio too short")

    frames = _frame(samples, config.frame_len, config.frame_shift)
    log_energy = np.log(np.maximum(np.sum(frames**2, axis=1), config.log_floor))

    # Per-frame pre-emphasis; the first sample is scaled by (1 - alpha).
    emphasized = frames.copy()
    emphasized[:, 1:] -= config.pre_emphasis * frames[:, :-1]
    emphasized[:, 0] *= 1.0 - config.pre_emphasis

    windowed = emphasized * np.hamming(config.frame_len)
    power = np.abs(np.fft.rfft(windowed, n=config.n_fft, axis=1)) ** 2
    mel_energy = power @ mel_filterbank(config)
    log_mel = np.log(np.maximum(mel_energy, config.log_floor))
    return np.hstack([log_mel, log_energy[:, None]])


def cmn(features: np.ndarray) -> np.ndarray:
    """Cepstral mean normalization: subtract the per-column mean."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 1:
        raise DataError("features must be a nonempty T x D matrix")
    return features - features.mean(axis=0, keepdims=True)


def chunk(features: np.ndarray, chunk_len: int, rng: np.random.Generator) -> np.ndarray:
    """Extract a fixed-length chunk of frames.

    A uniformly random contiguous window when enough frames exist;
    wrap-around tiling when the input is shorter than chunk_len.
    """
    if chunk_len < 1:
        raise ConfigError("invalid config: chunk_len must be >= 1")
    features = np.asarray(features)
    n = features.shape[0]
    if n == chunk_len:
        return features.copy()
    if n > chunk_len:
        start = int(rng.integers(0, n - chunk_len + 1))
        return features[start : start + chunk_len].copy()
    return features[np.arange(chunk_len) % n]
