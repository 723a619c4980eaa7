"""File formats: WAV, feature/embedding/parameter archives, trials, scores.

Binary layouts (all little-endian):
  feature archive   magic "FFKF", u32 dim, then per utterance:
                    u16 id-length, UTF-8 id, u32 T, T*dim float32
  embedding archive magic "FFKE", u32 dim, u64 count, then per record:
                    u16 id-length, UTF-8 id, dim float32
  parameter archive magic "FFKP", u64 count, then per record:
                    u16 id-length, UTF-8 id, u32 rows, u32 cols, rows*cols float32

Embeddings also round-trip through a plain-text form, one record per
line: ``id v1 v2 ... vE``.
"""

import hashlib
import os
import struct
import tempfile
import wave as _wave
from contextlib import contextmanager

import numpy as np

from .errors import DataError
from .frontend import Waveform

FEATURE_MAGIC = b"FFKF"
EMBEDDING_MAGIC = b"FFKE"
PARAMS_MAGIC = b"FFKP"


@contextmanager
def atomic_open(path, mode="wb"):
    """Write to a temp file in the target directory, then rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as handle:
            yield handle
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


# ---------------------------------------------------------------- WAV I/O

def read_wav(path) -> Waveform:
    """Read a mono 16-bit PCM RIFF file into floats in [-1, 1)."""
    with _wave.open(str(path), "rb") as handle:
        if handle.getnchannels() != 1:
            raise DataError(f"{path}: expected mono audio")
        if handle.getsampwidth() != 2:
            raise DataError(f"{path}: expected 16-bit PCM")
        rate = handle.getframerate()
        raw = handle.readframes(handle.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    if samples.size == 0:
        raise DataError(f"{path}: empty audio")
    return Waveform(samples=samples, sample_rate=rate)


def write_wav(path, wave_obj: Waveform) -> None:
    samples = np.clip(np.asarray(wave_obj.samples, dtype=np.float64), -1.0, 1.0)
    pcm = np.round(samples * 32767.0).astype("<i2")
    with atomic_open(path, "wb") as handle:
        with _wave.open(handle, "wb") as writer:
            writer.setnchannels(1)
            writer.setsampwidth(2)
            writer.setframerate(wave_obj.sample_rate)
            writer.writeframes(pcm.tobytes())


# ------------------------------------------------------- feature archives

def write_feature_archive(path, items) -> None:
    """Write (utt_id, T x dim matrix) pairs; all matrices share dim."""
    items = list(items)
    if not items:
        raise DataError("no features to write")
    dim = int(np.asarray(items[0][1]).shape[1])
    with atomic_open(path, "wb") as handle:
        handle.write(FEATURE_MAGIC)
        handle.write(struct.pack("<I", dim))
        for utt_id, feats in items:
            feats = np.ascontiguousarray(feats, dtype="<f4")
            if feats.shape[1] != dim:
                raise DataError(f"{utt_id}: feature dim {feats.shape[1]} != {dim}")
            encoded = utt_id.encode("utf-8")
            handle.write(struct.pack("<H", len(encoded)))
            handle.write(encoded)
            handle.write(struct.pack("<I", feats.shape[0]))
            handle.write(feats.tobytes())


def read_feature_archive(path) -> dict:
    with open(path, "rb") as handle:
        if handle.read(4) != FEATURE_MAGIC:
            raise DataError(f"{path}: not a feature archive")
        (dim,) = struct.unpack("<I", handle.read(4))
        out = {}
        while True:
            head = handle.read(2)
            if not head:
                break
            (id_len,) = struct.unpack("<H", head)
            utt_id = handle.read(id_len).decode("utf-8")
            (n_frames,) = struct.unpack("<I", handle.read(4))
            data = np.frombuffer(handle.read(4 * n_frames * dim), dtype="<f4")
            out[utt_id] = data.reshape(n_frames, dim).astype(np.float64)
    return out


# ----------------------------------------------------- embedding archives

def write_embeddings(path, items, text: bool = False) -> None:
    """Write (id, vector) pairs as a binary FFKE archive or plain text."""
    items = list(items)
    if not items:
        raise DataError("no embeddings to write")
    dim = int(np.asarray(items[0][1]).shape[0])
    if text:
        with atomic_open(path, "w") as handle:
            for rec_id, vec in items:
                vec = np.asarray(vec, dtype=np.float64)
                handle.write(rec_id + " " + " ".join(f"{v:.9e}" for v in vec) + "\n")
        return
    with atomic_open(path, "wb") as handle:
        handle.write(EMBEDDING_MAGIC)
        handle.write(struct.pack("<IQ", dim, len(items)))
        for rec_id, vec in items:
            vec = np.ascontiguousarray(vec, dtype="<f4")
            if vec.shape != (dim,):
                raise DataError(f"{rec_id}: embedding dim {vec.shape} != ({dim},)")
            encoded = rec_id.encode("utf-8")
            handle.write(struct.pack("<H", len(encoded)))
            handle.write(encoded)
            handle.write(vec.tobytes())


def read_embeddings(path) -> dict:
    """Read an embedding archive, auto-detecting binary vs text."""
    with open(path, "rb") as handle:
        magic = handle.read(4)
        if magic != EMBEDDING_MAGIC:
            return _read_embeddings_text(path)
        dim, count = struct.unpack("<IQ", handle.read(12))
        out = {}
        for _ in range(count):
            (id_len,) = struct.unpack("<H", handle.read(2))
            rec_id = handle.read(id_len).decode("utf-8")
            vec = np.frombuffer(handle.read(4 * dim), dtype="<f4")
            out[rec_id] = vec.astype(np.float64)
    return out


def _read_embeddings_text(path) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 2:
                raise DataError(f"{path}:{line_no}: expected 'id v1 ... vE'")
            out[parts[0]] = np.array([float(v) for v in parts[1:]], dtype=np.float64)
    if not out:
        raise DataError(f"{path}: no embeddings")
    return out


# ----------------------------------------------------- parameter archives

def write_params_archive(path, items) -> None:
    """Write named 2-D float32 records (u32 rows, u32 cols per record)."""
    items = list(items)
    with atomic_open(path, "wb") as handle:
        handle.write(PARAMS_MAGIC)
        handle.write(struct.pack("<Q", len(items)))
        for rec_id, mat in items:
            mat = np.ascontiguousarray(np.atleast_2d(mat), dtype="<f4")
            encoded = rec_id.encode("utf-8")
            handle.write(struct.pack("<H", len(encoded)))
            handle.write(encoded)
            handle.write(struct.pack("<II", mat.shape[0], mat.shape[1]))
            handle.write(mat.tobytes())


def read_params_archive(path) -> dict:
    with open(path, "rb") as handle:
        if handle.read(4) != PARAMS_MAGIC:
            raise DataError(f"{path}: not a parameter archive")
        (count,) = struct.unpack("<Q", handle.read(8))
        out = {}
        for _ in range(count):
            (id_len,) = struct.unpack("<H", handle.read(2))
            rec_id = handle.read(id_len).decode("utf-8")
            rows, cols = struct.unpack("<II", handle.read(8))
            data = np.frombuffer(handle.read(4 * rows * cols), dtype="<f4")
            out[rec_id] = data.reshape(rows, cols).astype(np.float64)
    return out


# ------------------------------------------------------------ text tables

def read_trials(path):
    """Trial list: ``enroll_id test_id [label]`` per line, label in {0,1}.

    Returns (enroll_ids, test_ids, labels) where labels is None if no line
    carried a label; mixing labeled and unlabeled lines is an error.
    """
    enroll, test, labels = [], [], []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) == 2:
                labels.append(None)
            elif len(parts) == 3:
                if parts[2] not in ("0", "1"):
                    raise DataError(f"{path}:{line_no}: label must be 0 or 1")
                labels.append(int(parts[2]))
            else:
                raise DataError(f"{path}:{line_no}: expected 'enroll test [label]'")
            enroll.append(parts[0])
            test.append(parts[1])
    if not enroll:
        raise DataError(f"{path}: no trials")
    if any(lab is None for lab in labels):
        if not all(lab is None for lab in labels):
            raise DataError(f"{path}: mixed labeled and unlabeled trials")
        return enroll, test, None
    return enroll, test, np.array(labels, dtype=np.int64)


def write_trials(path, enroll, test, labels=None) -> None:
    with atomic_open(path, "w") as handle:
        for i in range(len(enroll)):
            if labels is None:
                handle.write(f"{enroll[i]} {test[i]}\n")
            else:
                handle.write(f"{enroll[i]} {test[i]} {int(labels[i])}\n")


def read_scores(path):
    """Score file: ``enroll_id test_id score`` per line."""
    enroll, test, scores = [], [], []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise DataError(f"{path}:{line_no}: expected 'enroll test score'")
            enroll.append(parts[0])
            test.append(parts[1])
            scores.append(float(parts[2]))
    if not enroll:
        raise DataError(f"{path}: no scores")
    return enroll, test, np.array(scores, dtype=np.float64)


def write_scores(path, enroll, test, scores) -> None:
    with atomic_open(path, "w") as handle:
        for i in range(len(enroll)):
            handle.write(f"{enroll[i]} {test[i]} {scores[i]:.6f}\n")


def read_manifest(path):
    """Utterance manifest: ``utt_id wav_path speaker_id`` per line."""
    rows = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise DataError(f"{path}:{line_no}: expected 'utt_id wav_path speaker_id'")
            rows.append((parts[0], parts[1], parts[2]))
    if not rows:
        raise DataError(f"{path}: empty manifest")
    return rows


def write_manifest(path, rows) -> None:
    with atomic_open(path, "w") as handle:
        for utt_id, wav_path, speaker in rows:
            handle.write(f"{utt_id} {wav_path} {speaker}\n")


def read_utt2spk(path) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise DataError(f"{path}:{line_no}: expected 'utt_id speaker_id'")
            out[parts[0]] = parts[1]
    if not out:
        raise DataError(f"{path}: empty utt2spk")
    return out
