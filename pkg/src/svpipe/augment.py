"""Waveform augmentation: reverb, SNR mixing, interval noise, babble, speed.

All recipes are pure given an explicit generator; the corruption applied
to each training copy is drawn from a generator derived from the global
seed and the utterance id, so parallel order cannot change outputs.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .errors import ConfigError, DataError
from .frontend import Waveform

log = logging.getLogger(__name__)

SPEED_FACTORS = (1.0, 0.9, 1.1)
SNR_CAP_DB = 100.0

MUSIC_SNR_DB = (5.0, 15.0)
NOISE_SNR_DB = (0.0, 15.0)
BABBLE_SNR_DB = (13.0, 20.0)
BABBLE_TALKERS = (3, 7)
NOISE_INTERVAL_S = 1.0

RECIPES = ("clean", "reverb", "music", "noise", "babble")


@dataclass(frozen=True)
class SpeakerLabelMap:
    """Class indices for speed-expanded speakers.

    Classes are a contiguous range 0..3*n-1: all factor-1.0 classes first
    (input order), then the 0.9 block, then the 1.1 block.
    """

    speakers: tuple
    factors: tuple = SPEED_FACTORS
    index: dict = field(default_factory=dict)

    @property
    def n_classes(self) -> int:
        return len(self.factors) * len(self.speakers)

    def class_of(self, speaker: str, factor: float) -> int:
        return self.index[(speaker, factor)]

    def label_name(self, speaker: str, factor: float) -> str:
        return speaker if factor == 1.0 else f"sp{factor}-{speaker}"


def expand_speakers(speakers) -> SpeakerLabelMap:
    """Triple the speaker label space for 3-fold speed perturbation."""
    speakers = list(speakers)
    if not speakers:
        raise DataError("empty speaker list")
    if len(set(speakers)) != len(speakers):
        raise DataError("duplicate speaker")
    index = {}
    for block, factor in enumerate(SPEED_FACTORS):
        for i, speaker in enumerate(speakers):
            index[(speaker, factor)] = block * len(speakers) + i
    return SpeakerLabelMap(speakers=tuple(speakers), index=index)


def _tile_trim(samples: np.ndarray, length: int, rng: np.random.Generator) -> np.ndarray:
    """Match a clip to `length` samples: random crop if longer, tile if shorter."""
    n = samples.shape[0]
    if n == length:
        return samples
    if n > length:
        start = int(rng.integers(0, n - length + 1))
        return samples[start : start + length]
    reps = int(np.ceil(length / n))
    return np.tile(samples, reps)[:length]


def rescale_clipped(samples: np.ndarray) -> np.ndarray:
    """Rescale the whole signal into [-1, 1] if mixing pushed it outside."""
    peak = np.max(np.abs(samples)) if samples.size else 0.0
    if peak > 1.0:
        return samples / peak
    return samples


def apply_rir(wave: Waveform, rir: Waveform) -> Waveform:
    """Convolve with a room impulse response, truncated to the input length.

    The output is rescaled so its peak magnitude equals the input's peak.
    """
    if wave.sample_rate != rir.sample_rate:
        raise DataError("rate mismatch")
    if rir.samples.size == 0:
        raise DataError("empty impulse response")
    out = fftconvolve(wave.samples, rir.samples, mode="full")[: wave.samples.shape[0]]
    peak_in = np.max(np.abs(wave.samples))
    peak_out = np.max(np.abs(out))
    if peak_out > 0:
        out = out * (peak_in / peak_out)
    return Waveform(samples=out, sample_rate=wave.sample_rate)


def mix_at_snr(
    wave: Waveform,
    interferer: Waveform,
    snr_db: float,
    rng: np.random.Generator,
) -> Waveform:
    """Add the interferer, scaled so the mix hits the requested SNR.

    The interferer is tiled or randomly cropped to the input length first;
    SNR is capped at 100 dB.
    """
    if wave.sample_rate != interferer.sample_rate:
        raise DataError("rate mismatch")
    if wave.samples.size == 0 or interferer.samples.size == 0:
        raise DataError("empty waveform")
    snr_db = min(float(snr_db), SNR_CAP_DB)
    noise = _tile_trim(np.asarray(interferer.samples, dtype=np.float64), wave.samples.shape[0], rng)
    p_wave = np.mean(wave.samples**2)
    p_noise = np.mean(noise**2)
    if p_noise <= 0.0:
        raise DataError("silent interferer")
    gain = np.sqrt(p_wave / (p_noise * 10.0 ** (snr_db / 10.0)))
    return Waveform(samples=wave.samples + gain * noise, sample_rate=wave.sample_rate)


def add_music(
    wave: Waveform,
    music: Waveform,
    snr_range: tuple = MUSIC_SNR_DB,
    rng: np.random.Generator | None = None,
) -> Waveform:
    """One music clip, tiled/trimmed to duration, mixed at a random SNR."""
    rng = rng if rng is not None else np.random.default_rng()
    snr = float(rng.uniform(snr_range[0], snr_range[1]))
    return mix_at_snr(wave, music, snr, rng)


def add_interval_noise(
    wave: Waveform,
    noises,
    snr_range: tuple = NOISE_SNR_DB,
    interval_s: float = NOISE_INTERVAL_S,
    rng: np.random.Generator | None = None,
) -> Waveform:
    """Mix one randomly chosen noise clip into each successive interval.

    The SNR is drawn per interval and computed segment-locally; the final
    partial interval is corrupted the same way, truncated.
    """
    noises = list(noises)
    if not noises:
        raise DataError("no noise sources")
    rng = rng if rng is not None else np.random.default_rng()
    hop = int(round(interval_s * wave.sample_rate))
    if hop < 1:
        raise ConfigError("invalid config: interval too short")
    out = np.asarray(wave.samples, dtype=np.float64).copy()
    for start in range(0, out.shape[0], hop):
        seg = out[start : start + hop]
        clip = noises[int(rng.integers(0, len(noises)))]
        if clip.sample_rate != wave.sample_rate:
            raise DataError("rate mismatch")
        snr = float(rng.uniform(snr_range[0], snr_range[1]))
        noise = _tile_trim(np.asarray(clip.samples, dtype=np.float64), seg.shape[0], rng)
        p_seg = np.mean(seg**2)
        p_noise = np.mean(noise**2)
        if p_noise <= 0.0:
            raise DataError("silent interferer")
        gain = np.sqrt(p_seg / (p_noise * 10.0 ** (min(snr, SNR_CAP_DB) / 10.0)))
        out[start : start + hop] = seg + gain * noise
    return Waveform(samples=out, sample_rate=wave.sample_rate)


def add_babble(
    wave: Waveform,
    speech_clips,
    snr_range: tuple = BABBLE_SNR_DB,
    talkers: tuple = BABBLE_TALKERS,
    rng: np.random.Generator | None = None,
) -> Waveform:
    """Sum several speech clips and mix the aggregate at a single SNR."""
    speech_clips = list(speech_clips)
    if not speech_clips:
        raise DataError("no noise sources")
    rng = rng if rng is not None else np.random.default_rng()
    count = int(rng.integers(talkers[0], talkers[1] + 1))
    total = np.zeros(wave.samples.shape[0], dtype=np.float64)
    for _ in range(count):
        clip = speech_clips[int(rng.integers(0, len(speech_clips)))]
        if clip.sample_rate != wave.sample_rate:
            raise DataError("rate mismatch")
        total += _tile_trim(np.asarray(clip.samples, dtype=np.float64), total.shape[0], rng)
    snr = float(rng.uniform(snr_range[0], snr_range[1]))
    return mix_at_snr(wave, Waveform(samples=total, sample_rate=wave.sample_rate), snr, rng)


def speed_perturb(wave: Waveform, factor: float, taps: int = 32) -> Waveform:
    """Resample by 1/factor so both tempo and pitch shift together.

    Windowed-sinc interpolation with a Hann window of half-width `taps`;
    output length is round(N / factor).
    """
    if factor <= 0:
        raise ConfigError("invalid factor")
    if factor not in SPEED_FACTORS:
        log.warning("speed factor %s outside the usual {0.9, 1.0, 1.1}", factor)
    samples = np.asarray(wave.samples, dtype=np.float64)
    if factor == 1.0:
        return Waveform(samples=samples.copy(), sample_rate=wave.sample_rate)
    n_out = int(round(samples.shape[0] / factor))
    cutoff = min(1.0, 1.0 / factor)
    positions = np.arange(n_out) * factor
    base = np.floor(positions).astype(np.int64)
    offsets = np.arange(-taps + 1, taps + 1)
    idx = base[:, None] + offsets[None, :]
    delta = positions[:, None] - idx
    window = np.where(np.abs(delta) <= taps, 0.5 * (1.0 + np.cos(np.pi * delta / taps)), 0.0)
    kernel = cutoff * np.sinc(cutoff * delta) * window
    padded = np.zeros(samples.shape[0] + 2 * taps + 1, dtype=np.float64)
    padded[taps : taps + samples.shape[0]] = samples
    out = np.sum(padded[idx + taps] * kernel, axis=1)
    return Waveform(samples=out, sample_rate=wave.sample_rate)


def corrupt(
    wave: Waveform,
    recipe: str,
    rng: np.random.Generator,
    rirs=None,
    music=None,
    noises=None,
    speech=None,
) -> Waveform:
    """Apply one named corruption recipe, then guard against clipping."""
    if recipe == "clean":
        out = wave
    elif recipe == "reverb":
        if not rirs:
            raise DataError("no impulse responses")
        out = apply_rir(wave, rirs[int(rng.integers(0, len(rirs)))])
    elif recipe == "music":
        if not music:
            raise DataError("no music sources")
        out = add_music(wave, music[int(rng.integers(0, len(music)))], rng=rng)
    elif recipe == "noise":
        out = add_interval_noise(wave, noises or [], rng=rng)
    elif recipe == "babble":
        out = add_babble(wave, speech or [], rng=rng)
    else:
        raise ConfigError(f"invalid config: unknown recipe '{recipe}'")
    return Waveform(samples=rescale_clipped(out.samples), sample_rate=out.sample_rate)
