import numpy as np
import pytest

from svpipe.errors import ConfigError, DataError
from svpipe.frontend import (
    FrontendConfig,
    Waveform,
    chunk,
    cmn,
    logmel_fbank,
    mel_filter_centers,
)

from oracles import fbank_oracle

RATE = 16000


def make_wave(samples):
    return Waveform(samples=np.asarray(samples, dtype=np.float64), sample_rate=RATE)


class TestLogmelFbank:
    def test_frame_count_one_second(self):
        rng = np.random.default_rng(0)
        feats = logmel_fbank(make_wave(rng.normal(size=16000) * 0.1))
        assert feats.shape == (98, 81)

    def test_frame_count_formula_random_lengths(self):
        cfg = FrontendConfig()
        rng = np.random.default_rng(1)
        for n in rng.integers(cfg.frame_len, 40000, size=40):
            feats = logmel_fbank(make_wave(rng.normal(size=int(n)) * 0.1), cfg)
            expected = (int(n) - cfg.frame_len) // cfg.frame_shift + 1
            assert feats.shape == (expected, 81)

    @pytest.mark.parametrize("k", [5, 12, 25, 40, 55, 70])
    def test_sine_at_filter_center_peaks_at_that_filter(self, k):
        cfg = FrontendConfig()
        freq = mel_filter_centers(cfg)[k]
        t = np.arange(RATE) / RATE
        feats = logmel_fbank(make_wave(0.3 * np.sin(2 * np.pi * freq * t)), cfg)
        assert int(np.argmax(feats[:, :-1].mean(axis=0))) == k
        oracle = fbank_oracle(0.3 * np.sin(2 * np.pi * freq * t[:1600]), cfg)
        assert int(np.argmax(oracle[:, :-1].mean(axis=0))) == k

    def test_silence_hits_log_floor_everywhere(self):
        cfg = FrontendConfig()
        feats = logmel_fbank(make_wave(np.zeros(8000)), cfg)
        assert np.allclose(feats, np.log(cfg.log_floor))

    def test_matches_dft_sum_oracle(self):
        cfg = FrontendConfig()
        rng = np.random.default_rng(7)
        for _ in range(3):
            samples = rng.normal(size=1600) * 0.2  # 100 ms
            got = logmel_fbank(make_wave(samples), cfg)
            want = fbank_oracle(samples, cfg)
            rel = np.abs(got - want) / np.maximum(np.abs(want), 1e-8)
            assert rel.max() < 1e-4

    def test_too_short_audio(self):
        with pytest.raises(DataError, match="audio too short"):
            logmel_fbank(make_wave(np.zeros(399)))

    def test_rejects_other_sample_rates(self):
        wave = Waveform(samples=np.zeros(8000), sample_rate=8000)
        with pytest.raises(ConfigError, match="invalid config"):
            logmel_fbank(wave)
        with pytest.raises(ConfigError, match="invalid config"):
            logmel_fbank(make_wave(np.zeros(8000)), FrontendConfig(sample_rate=-1))


class TestCmn:
    def test_column_means_zero(self):
        rng = np.random.default_rng(2)
        out = cmn(rng.normal(size=(50, 9)))
        assert np.abs(out.mean(axis=0)).max() < 1e-6

    def test_constant_matrix_maps_to_zero(self):
        assert np.array_equal(cmn(np.full((4, 3), 2.5)), np.zeros((4, 3)))

    def test_hand_example(self):
        out = cmn(np.array([[1.0, 3.0], [3.0, 1.0]]))
        assert np.array_equal(out, np.array([[-1.0, 1.0], [1.0, -1.0]]))

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(30, 5)) * 10
        once = cmn(x)
        assert np.abs(cmn(once) - once).max() < 1e-12

    def test_single_frame_gives_zeros(self):
        assert np.array_equal(cmn(np.array([[4.0, -2.0]])), np.zeros((1, 2)))


class TestChunk:
    def test_exact_length_is_identity(self):
        x = np.arange(200 * 3, dtype=float).reshape(200, 3)
        rng = np.random.default_rng(0)
        assert np.array_equal(chunk(x, 200, rng), x)

    def test_random_window_bounds_and_reproducibility(self):
        x = np.arange(500)[:, None] * np.ones((1, 2))
        starts = set()
        for seed in range(40):
            out = chunk(x, 200, np.random.default_rng(seed))
            start = int(out[0, 0])
            starts.add(start)
            assert 0 <= start <= 300
            assert np.array_equal(out, x[start : start + 200])
            again = chunk(x, 200, np.random.default_rng(seed))
            assert np.array_equal(out, again)
        assert len(starts) > 5

    def test_tiling_wraps_rows(self):
        x = np.arange(150)[:, None].astype(float)
        out = chunk(x, 200, np.random.default_rng(0))
        assert out.shape == (200, 1)
        assert np.array_equal(out[150:200], x[0:50])

    def test_zero_chunk_len_rejected(self):
        with pytest.raises(ConfigError, match="invalid config"):
            chunk(np.zeros((10, 2)), 0, np.random.default_rng(0))
