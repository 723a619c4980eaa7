"""Independent brute-force oracles used to check the library implementations.

Everything here is written as plain loops and direct sums, deliberately
avoiding the vectorized code paths under test.
"""

import cmath
import math

import numpy as np


# ------------------------------------------------------------- frontend

def fbank_oracle(samples, config):
    """Log-mel + energy features by direct per-bin DFT sums."""
    win = config.frame_len
    hop = config.frame_shift
    n_frames = (len(samples) - win) // hop + 1
    nfft = config.n_fft
    n_bins = nfft // 2 + 1

    def mel(f):
        return 2595.0 * math.log10(1.0 + f / 700.0)

    def imel(m):
        return 700.0 * (10.0 ** (m / 2595.0) - 1.0)

    pts = [
        mel(config.fmin)
        + (mel(config.fmax) - mel(config.fmin)) * i / (config.n_mels + 1)
        for i in range(config.n_mels + 2)
    ]
    bin_hz = [k * config.sample_rate / nfft for k in range(n_bins)]
    weights = [[0.0] * n_bins for _ in range(config.n_mels)]
    for m in range(config.n_mels):
        lo, ce, hi = pts[m], pts[m + 1], pts[m + 2]
        for k in range(n_bins):
            bm = mel(bin_hz[k])
            w = min((bm - lo) / (ce - lo), (hi - bm) / (hi - ce))
            weights[m][k] = max(0.0, w)

    out = np.zeros((n_frames, config.n_mels + 1))
    for t in range(n_frames):
        frame = [float(samples[t * hop + i]) for i in range(win)]
        energy = sum(v * v for v in frame)
        out[t, -1] = math.log(max(energy, config.log_floor))
        emph = [0.0] * win
        emph[0] = frame[0] * (1.0 - config.pre_emphasis)
        for i in range(1, win):
            emph[i] = frame[i] - config.pre_emphasis * frame[i - 1]
        windowed = [
            emph[i] * (0.54 - 0.46 * math.cos(2.0 * math.pi * i / (win - 1)))
            for i in range(win)
        ]
        power = []
        for k in range(n_bins):
            acc = 0.0 + 0.0j
            for i in range(win):
                acc += windowed[i] * cmath.exp(-2j * math.pi * k * i / nfft)
            power.append(abs(acc) ** 2)
        for m in range(config.n_mels):
            e = sum(weights[m][k] * power[k] for k in range(n_bins))
            out[t, m] = math.log(max(e, config.log_floor))
    return out


# -------------------------------------------------------------- augment

def conv_oracle(x, h):
    """Direct O(N*M) convolution sum, full length."""
    n, m = len(x), len(h)
    out = np.zeros(n + m - 1)
    for i in range(n):
        for j in range(m):
            out[i + j] += x[i] * h[j]
    return out


def measured_snr_db(mixed, original):
    """SNR implied by the additive-noise residual of a mixed signal."""
    noise = np.asarray(mixed) - np.asarray(original)
    p_sig = float(np.mean(np.asarray(original) ** 2))
    p_noise = float(np.mean(noise**2))
    return 10.0 * math.log10(p_sig / p_noise)


def dominant_frequency(samples, sample_rate):
    spectrum = np.abs(np.fft.rfft(samples))
    freqs = np.fft.rfftfreq(len(samples), d=1.0 / sample_rate)
    return float(freqs[int(np.argmax(spectrum))]), float(freqs[1] - freqs[0])


# ------------------------------------------------------------ modelmath

def gsp_oracle(H):
    T, C = H.shape
    out = []
    for c in range(C):
        mu = sum(H[t, c] for t in range(T)) / T
        var = sum((H[t, c] - mu) ** 2 for t in range(T)) / T
        out.append(mu)
    for c in range(C):
        mu = sum(H[t, c] for t in range(T)) / T
        var = sum((H[t, c] - mu) ** 2 for t in range(T)) / T
        out.append(math.sqrt(max(var, 1e-10)))
    return np.array(out)


def mqmha_oracle(H, queries):
    """Per-(query, head) weighted mean/std by explicit loops."""
    T, C = H.shape
    Q, h, c = queries.shape
    out = []
    for q in range(Q):
        for i in range(h):
            block = H[:, i * c : (i + 1) * c]
            logits = [sum(block[t, d] * queries[q, i, d] for d in range(c)) for t in range(T)]
            mx = max(logits)
            expd = [math.exp(v - mx) for v in logits]
            total = sum(expd)
            a = [v / total for v in expd]
            mus = [sum(a[t] * block[t, d] for t in range(T)) for d in range(c)]
            out.extend(mus)
            for d in range(c):
                var = sum(a[t] * (block[t, d] - mus[d]) ** 2 for t in range(T))
                out.append(math.sqrt(max(var, 1e-10)))
    return np.array(out)


def subcenter_oracle(x, weights):
    """Max over sub-centers of normalized inner products, by loops."""
    J, K, E = weights.shape
    nx = math.sqrt(sum(v * v for v in x))
    cos = np.full(J, -np.inf)
    for j in range(J):
        for k in range(K):
            w = weights[j, k]
            nw = math.sqrt(sum(v * v for v in w))
            dot = sum(x[e] * w[e] for e in range(E)) / (nx * nw)
            cos[j] = max(cos[j], dot)
    return cos


def fd_gradient(func, array, h=1e-4):
    """Central finite differences of a scalar function wrt an array, in place."""
    grad = np.zeros_like(array, dtype=np.float64)
    flat = array.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        hi = func()
        flat[i] = orig - h
        lo = func()
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * h)
    return grad


def grad_rel_err(analytic, numeric):
    denom = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if denom == 0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / denom)


# -------------------------------------------------------------- backend

def asnorm_oracle(raw, e, t, centers, top_k):
    """Sort all cohort scores and take moments of the top_k, by loops."""

    def cos(a, b):
        na = math.sqrt(sum(v * v for v in a))
        nb = math.sqrt(sum(v * v for v in b))
        return sum(x * y for x, y in zip(a, b)) / (na * nb)

    def side(x):
        scores = sorted((cos(x, c) for c in centers), reverse=True)[:top_k]
        mu = sum(scores) / len(scores)
        var = sum((s - mu) ** 2 for s in scores) / len(scores)
        return mu, math.sqrt(var)

    mu_e, sd_e = side(e)
    mu_t, sd_t = side(t)
    return 0.5 * ((raw - mu_e) / sd_e + (raw - mu_t) / sd_t)


def mean_oracle(vectors):
    total = np.zeros_like(vectors[0], dtype=np.float64)
    for v in vectors:
        total = total + v
    return total / len(vectors)


# -------------------------------------------------------------- metrics

def det_points_oracle(scores, labels):
    """(threshold, p_miss, p_fa) at -inf, every midpoint, every score, +inf."""
    scores = [float(s) for s in scores]
    targets = [s for s, l in zip(scores, labels) if l == 1]
    nons = [s for s, l in zip(scores, labels) if l == 0]
    distinct = sorted(set(scores))
    candidates = [-math.inf]
    for i, s in enumerate(distinct):
        if i > 0:
            candidates.append((distinct[i - 1] + s) / 2.0)
        candidates.append(s)
    candidates.append(math.inf)
    points = []
    for thr in candidates:
        n_miss = sum(1 for s in targets if s < thr)
        n_fa = sum(1 for s in nons if s >= thr)
        points.append((thr, n_miss / len(targets), n_fa / len(nons)))
    return points


def eer_oracle(scores, labels):
    points = det_points_oracle(scores, labels)
    diffs = [pm - pf for _, pm, pf in points]
    idx = next(i for i, d in enumerate(diffs) if d >= 0)
    thr_b, pm_b, pf_b = points[idx]
    if diffs[idx] == 0.0:
        return pm_b, thr_b
    thr_a, pm_a, pf_a = points[idx - 1]
    frac = -diffs[idx - 1] / (diffs[idx] - diffs[idx - 1])
    return pm_a + frac * (pm_b - pm_a), None  # threshold convention not compared


def min_dcf_oracle(scores, labels, p_tar=0.01, c_miss=1.0, c_fa=1.0):
    points = det_points_oracle(scores, labels)
    norm = min(p_tar * c_miss, (1.0 - p_tar) * c_fa)
    best = math.inf
    for _, pm, pf in points:
        cost = (p_tar * c_miss * pm + (1.0 - p_tar) * c_fa * pf) / norm
        best = min(best, cost)
    return best
