"""Loading of feature matrices, labels, posterior grids and manifests.

Array files use the NPY v1.0 binary format restricted to little-endian
float32/float64, C order, 1-D or 2-D.  Sequence features are stored one file
per utterance inside a directory, keyed by utterance id; labels live in a
JSONL sidecar, one ``{"utt_id": ..., "labels": [...]}`` object per line.
All matrices are widened to float64 on load.
"""

from __future__ import annotations

import ast
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import (
    BadMagic,
    DuplicateCandidateId,
    FortranOrderUnsupported,
    FrameCountMismatch,
    InvalidPosterior,
    MissingFile,
    NonFiniteInput,
    ParseError,
    TruncatedPayload,
    UnsupportedDtype,
    UnsupportedShape,
    UttIdMismatch,
)

_MAGIC = b"\x93NUMPY"
_VERSION = b"\x01\x00"
_DTYPES = {"<f4": np.dtype("<f4"), "<f8": np.dtype("<f8")}

UNIFORM_POSTERIORS = "uniform"

TASK_KINDS = ("classification", "sequence")
METRIC_DIRECTIONS = ("lower_better", "higher_better")


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureMatrix:
    """n x D matrix of real-valued representations, one row per sample/frame."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise UnsupportedShape(f"feature matrix must be 2-D and non-empty, got shape {data.shape}")
        if not np.isfinite(data).all():
            raise NonFiniteInput("feature matrix contains NaN or Inf")
        object.__setattr__(self, "data", np.ascontiguousarray(data))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class LabelData:
    """Per-utterance integer label sequences plus the vocabulary size."""

    utterances: tuple[tuple[str, tuple[int, ...]], ...]
    vocab_size: int

    def __post_init__(self):
        if self.vocab_size < 1:
            raise ParseError("vocab_size must be positive")
        for utt_id, labels in self.utterances:
            for lab in labels:
                if not 0 <= lab < self.vocab_size:
                    raise ParseError(
                        f"label {lab} of utterance {utt_id!r} outside [0, {self.vocab_size})")


@dataclass(frozen=True)
class PosteriorGrid:
    """T x (V+1) natural-log posterior matrix; the last column is the blank."""

    log_probs: np.ndarray

    def __post_init__(self):
        lp = np.asarray(self.log_probs, dtype=np.float64)
        if lp.ndim != 2 or lp.shape[0] < 1 or lp.shape[1] < 2:
            raise UnsupportedShape(f"posterior grid must be T x (V+1), got shape {lp.shape}")
        if np.isnan(lp).any() or (lp == np.inf).any():
            raise NonFiniteInput("posterior grid contains NaN or +Inf")
        if (lp > 1e-6).any():
            raise InvalidPosterior("log-probabilities must be <= 0")
        row_max = lp.max(axis=1)
        if (row_max == -np.inf).any():
            raise InvalidPosterior("posterior grid has a row of all -Inf")
        with np.errstate(invalid="ignore"):
            lse = row_max + np.log(np.exp(lp - row_max[:, None]).sum(axis=1))
        if np.abs(lse).max() > 1e-4:
            raise InvalidPosterior("posterior rows must log-sum-exp to 0 within 1e-4")
        object.__setattr__(self, "log_probs", np.ascontiguousarray(lp))

    @property
    def frames(self) -> int:
        return self.log_probs.shape[0]

    @property
    def blank(self) -> int:
        return self.log_probs.shape[1] - 1


@dataclass(frozen=True)
class CandidateSpec:
    candidate_id: str
    features: Path
    labels: Path
    posteriors: Path | str | None = None  # path, UNIFORM_POSTERIORS, or None
    ground_truth_metric: float | None = None
    metric_direction: str | None = None


@dataclass(frozen=True)
class Manifest:
    task_kind: str
    candidates: tuple[CandidateSpec, ...]
    source_features: Path | None = None

    def candidate(self, candidate_id: str) -> CandidateSpec:
        for cand in self.candidates:
            if cand.candidate_id == candidate_id:
                return cand
        raise KeyError(f"no candidate {candidate_id!r} in manifest")


class Dataset(NamedTuple):
    features: list[FeatureMatrix]
    labels: LabelData
    posteriors: list[PosteriorGrid] | None


# ---------------------------------------------------------------------------
# NPY v1.0 read / write
# ---------------------------------------------------------------------------

def read_array(path) -> FeatureMatrix:
    """Read an NPY v1.0 file into a 2-D float64 matrix (1-D becomes n x 1)."""
    raw = Path(path).read_bytes()
    if len(raw) < 10 or raw[:6] != _MAGIC:
        raise BadMagic(f"{path}: not an NPY file")
    if raw[6:8] != _VERSION:
        raise BadMagic(f"{path}: unsupported NPY version {raw[6]}.{raw[7]} (only 1.0)")
    (header_len,) = struct.unpack("<H", raw[8:10])
    if len(raw) < 10 + header_len:
        raise TruncatedPayload(f"{path}: header promises {header_len} bytes, file too short")
    header = raw[10:10 + header_len].decode("latin1")
    try:
        meta = ast.literal_eval(header.strip())
        descr = meta["descr"]
        fortran = meta["fortran_order"]
        shape = meta["shape"]
    except (ValueError, SyntaxError, KeyError, TypeError) as exc:
        raise BadMagic(f"{path}: malformed NPY header: {exc}") from exc
    if descr not in _DTYPES:
        raise UnsupportedDtype(f"{path}: dtype {descr!r} not supported (use '<f4' or '<f8')")
    if fortran:
        raise FortranOrderUnsupported(f"{path}: fortran_order arrays are not supported")
    if (not isinstance(shape, tuple) or not 1 <= len(shape) <= 2
            or any(not isinstance(d, int) or d < 1 for d in shape)):
        raise UnsupportedShape(f"{path}: shape {shape} not a non-empty 1-D or 2-D shape")
    dtype = _DTYPES[descr]
    expected = math.prod(shape) * dtype.itemsize
    payload = raw[10 + header_len:]
    if len(payload) != expected:
        raise TruncatedPayload(
            f"{path}: payload has {len(payload)} bytes, header promises {expected}")
    data = np.frombuffer(payload, dtype=dtype).reshape(shape).astype(np.float64)
    if data.ndim == 1:
        data = data.reshape(-1, 1)
    if not np.isfinite(data).all():
        raise NonFiniteInput(f"{path}: array contains NaN or Inf")
    return FeatureMatrix(data)


def write_array(path, data, dtype: str = "<f8") -> None:
    """Write a 1-D or 2-D array as NPY v1.0, header padded to a multiple of 64."""
    if dtype not in _DTYPES:
        raise UnsupportedDtype(f"dtype {dtype!r} not supported (use '<f4' or '<f8')")
    arr = np.ascontiguousarray(np.asarray(data), dtype=_DTYPES[dtype])
    if arr.ndim not in (1, 2):
        raise UnsupportedShape(f"can only write 1-D or 2-D arrays, got ndim={arr.ndim}")
    header = f"{{'descr': '{dtype}', 'fortran_order': False, 'shape': {arr.shape!r}, }}"
    pad = (64 - (10 + len(header) + 1) % 64) % 64
    header = header + " " * pad + "\n"
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(_VERSION)
        fh.write(struct.pack("<H", len(header)))
        fh.write(header.encode("latin1"))
        fh.write(arr.tobytes(order="C"))


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------

def load_manifest(path) -> Manifest:
    """Load and validate an experiment manifest (JSON)."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(f"manifest {path} does not exist")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: manifest must be a JSON object")
    task_kind = doc.get("task_kind")
    if task_kind not in TASK_KINDS:
        raise ParseError(f"{path}: task_kind must be one of {TASK_KINDS}, got {task_kind!r}")
    raw_candidates = doc.get("candidates")
    if not isinstance(raw_candidates, list) or not raw_candidates:
        raise ParseError(f"{path}: manifest needs a non-empty candidate list")

    base = path.parent

    def _resolve(p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else base / q

    candidates = []
    seen = set()
    for entry in raw_candidates:
        if not isinstance(entry, dict):
            raise ParseError(f"{path}: candidate entries must be objects")
        try:
            cid = entry["id"]
            features = _resolve(entry["features"])
            labels = _resolve(entry["labels"])
        except KeyError as exc:
            raise ParseError(f"{path}: candidate missing required key {exc}") from exc
        if cid in seen:
            raise DuplicateCandidateId(f"{path}: duplicate candidate id {cid!r}")
        seen.add(cid)
        posteriors = entry.get("posteriors")
        if posteriors is not None and posteriors != UNIFORM_POSTERIORS:
            posteriors = _resolve(posteriors)
            if not posteriors.exists():
                raise MissingFile(f"{path}: posteriors path {posteriors} does not exist")
        metric = entry.get("ground_truth_metric")
        if metric is not None and not isinstance(metric, (int, float)):
            raise ParseError(f"{path}: ground_truth_metric of {cid!r} must be a number")
        direction = entry.get("metric_direction")
        if direction is not None and direction not in METRIC_DIRECTIONS:
            raise ParseError(f"{path}: metric_direction must be one of {METRIC_DIRECTIONS}")
        for p in (features, labels):
            if not p.exists():
                raise MissingFile(f"{path}: referenced path {p} does not exist")
        candidates.append(CandidateSpec(
            candidate_id=cid, features=features, labels=labels, posteriors=posteriors,
            ground_truth_metric=None if metric is None else float(metric),
            metric_direction=direction))

    source_features = doc.get("source_features")
    if source_features is not None:
        source_features = _resolve(source_features)
        if not source_features.exists():
            raise MissingFile(f"{path}: source_features path {source_features} does not exist")

    return Manifest(task_kind=task_kind, candidates=tuple(candidates),
                    source_features=source_features)


def _load_labels_jsonl(path: Path, task_kind: str) -> list[tuple[str, tuple[int, ...]]]:
    utterances = []
    seen = set()
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            utt_id = obj["utt_id"]
            labels = obj["labels"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ParseError(f"{path}:{lineno}: bad label line: {exc}") from exc
        if not isinstance(labels, list) or any(not isinstance(x, int) or x < 0 for x in labels):
            raise ParseError(f"{path}:{lineno}: labels must be non-negative integers")
        if utt_id in seen:
            raise ParseError(f"{path}:{lineno}: duplicate utt_id {utt_id!r}")
        seen.add(utt_id)
        if task_kind == "classification" and len(labels) != 1:
            raise ParseError(f"{path}:{lineno}: classification utterances need exactly one label")
        if not labels:
            raise ParseError(f"{path}:{lineno}: empty label sequence")
        utterances.append((utt_id, tuple(labels)))
    if not utterances:
        raise ParseError(f"{path}: no utterances")
    return utterances


def load_feature_dir(path) -> list[FeatureMatrix]:
    """Read every .npy file of a directory in sorted name order."""
    files = sorted(Path(path).glob("*.npy"))
    if not files:
        raise MissingFile(f"{path}: no .npy files found")
    return [read_array(f) for f in files]


def uniform_grid(frames: int, vocab_size: int) -> PosteriorGrid:
    """Uniform posterior fallback: every symbol equally likely at every frame."""
    lp = np.full((frames, vocab_size + 1), -np.log(vocab_size + 1))
    return PosteriorGrid(lp)


def assemble_dataset(manifest: Manifest, candidate_id: str,
                     pool_mean: bool = False) -> Dataset:
    """Pair per-utterance features with labels (and posteriors) for a candidate.

    Utterances appear in label-sidecar order.  With ``pool_mean`` each
    utterance's frames are collapsed to their arithmetic mean (one 1 x D row),
    which only makes sense for classification-style scoring and is therefore
    rejected when posterior grids are configured.
    """
    cand = manifest.candidate(candidate_id)
    utterances = _load_labels_jsonl(cand.labels, manifest.task_kind)
    utt_ids = [u for u, _ in utterances]

    features: list[FeatureMatrix] = []
    if cand.features.is_dir():
        for utt_id in utt_ids:
            f = cand.features / f"{utt_id}.npy"
            if not f.exists():
                raise UttIdMismatch(f"no feature file for utterance {utt_id!r} in {cand.features}")
            features.append(read_array(f))
    else:
        table = read_array(cand.features)
        if table.n != len(utt_ids):
            raise UttIdMismatch(
                f"{cand.features}: {table.n} rows for {len(utt_ids)} labelled utterances")
        features = [FeatureMatrix(table.data[i:i + 1]) for i in range(table.n)]

    if pool_mean:
        if cand.posteriors is not None:
            raise ParseError("mean pooling cannot be combined with posterior grids")
        features = [FeatureMatrix(f.data.mean(axis=0, keepdims=True)) for f in features]

    # vocabulary size: posterior width wins, otherwise inferred from labels
    max_label = max(max(labs) for _, labs in utterances)
    posteriors: list[PosteriorGrid] | None = None
    if cand.posteriors == UNIFORM_POSTERIORS:
        vocab_size = max_label + 1
        posteriors = [uniform_grid(f.n, vocab_size) for f in features]
    elif cand.posteriors is not None:
        posteriors = []
        for utt_id in utt_ids:
            f = Path(cand.posteriors) / f"{utt_id}.npy"
            if not f.exists():
                raise UttIdMismatch(f"no posterior file for utterance {utt_id!r} in {cand.posteriors}")
            posteriors.append(PosteriorGrid(read_array(f).data))
        widths = {g.log_probs.shape[1] for g in posteriors}
        if len(widths) != 1:
            raise InvalidPosterior(f"posterior grids disagree on width: {sorted(widths)}")
        vocab_size = widths.pop() - 1
        if max_label >= vocab_size:
            raise ParseError(f"label {max_label} outside posterior vocabulary of size {vocab_size}")
        for utt_id, feat, grid in zip(utt_ids, features, posteriors):
            if grid.frames != feat.n:
                raise FrameCountMismatch(
                    f"utterance {utt_id!r}: posterior has {grid.frames} frames, features {feat.n}")
    else:
        vocab_size = max_label + 1

    labels = LabelData(utterances=tuple(utterances), vocab_size=vocab_size)
    return Dataset(features=features, labels=labels, posteriors=posteriors)
