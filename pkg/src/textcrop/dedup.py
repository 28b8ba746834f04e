"""Embedding storage (TCEM files) and greedy near-duplicate removal."""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    DimensionMismatch,
    EmptyInput,
    FormatError,
    RangeError,
    ZeroVector,
)

TCEM_MAGIC = b"TCEM"
TCEM_VERSION = 1
DEFAULT_DEDUP_THRESHOLD = 0.95

_HEADER = struct.Struct("<4sHII")


@dataclass(frozen=True)
class EmbeddingSet:
    """Unit-normalized embedding vectors with one id per row."""

    ids: tuple[str, ...]
    vectors: np.ndarray  # (n, dim) float64, rows unit-norm

    def __post_init__(self):
        vectors = np.ascontiguousarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise DimensionMismatch(f"vectors must be 2-D, got shape {vectors.shape}")
        if len(self.ids) != vectors.shape[0]:
            raise DimensionMismatch(
                f"{len(self.ids)} ids for {vectors.shape[0]} vectors"
            )
        if not np.isfinite(vectors).all():
            raise RangeError("embedding vectors contain non-finite entries")
        norms = np.linalg.norm(vectors, axis=1)
        zero = np.nonzero(norms == 0.0)[0]
        if zero.size:
            raise ZeroVector(f"vector {int(zero[0])} has zero norm")
        vectors = vectors / norms[:, None]
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def write_embeddings(embeds: EmbeddingSet, path, ids_path=None) -> None:
    """Write a TCEM file (little-endian float32 rows) plus optional id sidecar."""
    n, dim = embeds.vectors.shape
    buf = io.BytesIO()
    buf.write(_HEADER.pack(TCEM_MAGIC, TCEM_VERSION, n, dim))
    buf.write(np.ascontiguousarray(embeds.vectors, dtype="<f4").tobytes())
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())
    if ids_path is not None:
        with open(ids_path, "w", encoding="utf-8") as fh:
            for item_id in embeds.ids:
                fh.write(json.dumps({"id": item_id}) + "\n")


def _load_ids(ids_path, n: int) -> tuple[str, ...]:
    ids = []
    with open(ids_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{ids_path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(rec, dict) or "id" not in rec:
                raise FormatError(f"{ids_path}:{lineno}: expected an object with an 'id' key")
            ids.append(str(rec["id"]))
    if len(ids) != n:
        raise DimensionMismatch(f"{len(ids)} ids in {ids_path} for {n} vectors")
    return tuple(ids)


def load_raw_vectors(path) -> np.ndarray:
    """Decode a TCEM file to its stored (n, dim) float64 rows, un-normalized."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise FormatError(f"file too short for a TCEM header ({len(data)} bytes)")
    magic, version, n, dim = _HEADER.unpack_from(data, 0)
    if magic != TCEM_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {TCEM_MAGIC!r}")
    if version != TCEM_VERSION:
        raise FormatError(f"unsupported TCEM version {version}")
    if dim < 1:
        raise DimensionMismatch("embedding dimension must be positive")
    expected = _HEADER.size + n * dim * 4
    if len(data) != expected:
        raise FormatError(f"payload is {len(data)} bytes, expected {expected}")
    vectors = np.frombuffer(data, dtype="<f4", count=n * dim, offset=_HEADER.size)
    return vectors.reshape(n, dim).astype(np.float64)


def load_embeddings(path, ids_path=None) -> EmbeddingSet:
    """Read a TCEM file; ids come from the sidecar or default to row indices.

    Vectors are unit-normalized on load; a zero vector is rejected.
    """
    vectors = load_raw_vectors(path)
    n = vectors.shape[0]
    ids = _load_ids(ids_path, n) if ids_path is not None else tuple(
        str(i) for i in range(n)
    )
    return EmbeddingSet(ids=ids, vectors=vectors)


@dataclass(frozen=True)
class DedupResult:
    """Outcome of a greedy duplicate scan in input order."""

    ids: tuple[str, ...]
    kept: tuple[int, ...]
    representative: tuple[int, ...]  # -1 for kept rows, else index of the keeper
    threshold: float

    @property
    def kept_ids(self) -> tuple[str, ...]:
        return tuple(self.ids[i] for i in self.kept)

    def duplicates(self) -> list[tuple[str, str]]:
        """(duplicate id, representative id) pairs in input order."""
        return [
            (self.ids[i], self.ids[rep])
            for i, rep in enumerate(self.representative)
            if rep >= 0
        ]

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "total": len(self.ids),
            "kept": list(self.kept_ids),
            "duplicates": [
                {"id": dup, "duplicate_of": rep} for dup, rep in self.duplicates()
            ],
        }


def dedup(embeds: EmbeddingSet, threshold: float = DEFAULT_DEDUP_THRESHOLD) -> DedupResult:
    """Drop items whose cosine similarity to any already-kept item reaches
    the threshold. The scan runs in input order; a duplicate records the
    first kept item that matched it.
    """
    if len(embeds) == 0:
        raise EmptyInput("no embeddings to deduplicate")
    if not (-1.0 <= threshold <= 1.0):
        raise RangeError(f"cosine threshold must be in [-1, 1], got {threshold}")
    rep = _kernels.greedy_dedup(embeds.vectors, float(threshold))
    rep = np.asarray(rep)
    kept = tuple(int(i) for i in np.nonzero(rep < 0)[0])
    return DedupResult(
        ids=embeds.ids,
        kept=kept,
        representative=tuple(int(r) for r in rep),
        threshold=float(threshold),
    )
