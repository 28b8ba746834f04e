"""Attention dumps, relative attention and salient-layer selection.

An attention dump carries, for one image/question pair, the head-averaged
attention row of the first generated answer token over all image tokens,
one row per language-model layer, recorded twice: once for the actual
question and once for a fixed generic instruction. Dividing the two maps
elementwise suppresses sink tokens that soak up attention regardless of
the query; the most salient of a window of layers is then picked by the
max-minus-mean divergence of its map.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, RangeError, ShapeError

GENERIC_INSTRUCTION = "Write a general description of the image."

TCAD_MAGIC = b"TCAD"
TCAD_VERSION = 1

DEFAULT_EPSILON = 1e-12
DEFAULT_LAYER_START = 22
DEFAULT_LAYER_COUNT = 5

_HEADER = struct.Struct("<4sH9I")


@dataclass(frozen=True)
class AttentionDump:
    """Validated contents of a TCAD attention-dump file.

    ``attn_q`` and ``attn_generic`` are (layers, tokens) float32 arrays;
    the grid is ``grid_h`` x ``grid_w`` patches of ``patch_px`` processed
    pixels each, and ``orig_*`` are the original image dimensions the
    final crop is expressed in.
    """

    layers: int
    tokens: int
    grid_h: int
    grid_w: int
    proc_w: int
    proc_h: int
    orig_w: int
    orig_h: int
    patch_px: int
    attn_q: np.ndarray
    attn_generic: np.ndarray
    metadata: str = ""

    def __post_init__(self):
        for name in ("layers", "tokens", "grid_h", "grid_w", "proc_w", "proc_h",
                     "orig_w", "orig_h", "patch_px"):
            if getattr(self, name) <= 0:
                raise ShapeError(f"{name} must be positive, got {getattr(self, name)}")
        if self.grid_h * self.grid_w != self.tokens:
            raise ShapeError(
                f"grid {self.grid_h}x{self.grid_w} does not cover {self.tokens} tokens"
            )
        # processed dims must match the patch grid up to one patch of rounding
        if abs(self.proc_w - self.grid_w * self.patch_px) >= self.patch_px:
            raise ShapeError(
                f"proc_w={self.proc_w} inconsistent with "
                f"{self.grid_w} patches of {self.patch_px}px"
            )
        if abs(self.proc_h - self.grid_h * self.patch_px) >= self.patch_px:
            raise ShapeError(
                f"proc_h={self.proc_h} inconsistent with "
                f"{self.grid_h} patches of {self.patch_px}px"
            )
        for name in ("attn_q", "attn_generic"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float32)
            if arr.shape != (self.layers, self.tokens):
                raise ShapeError(
                    f"{name} has shape {arr.shape}, expected "
                    f"({self.layers}, {self.tokens})"
                )
            if not np.isfinite(arr).all():
                raise RangeError(f"{name} contains NaN or infinite entries")
            if (arr < 0).any():
                raise RangeError(f"{name} contains negative entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class RelativeAttentionStack:
    """Elementwise ratio of question attention to generic-instruction attention."""

    maps: np.ndarray  # (layers, tokens) float64

    def __post_init__(self):
        maps = np.ascontiguousarray(self.maps, dtype=np.float64)
        if maps.ndim != 2:
            raise ShapeError(f"expected a 2-D stack, got shape {maps.shape}")
        if not np.isfinite(maps).all():
            raise RangeError("relative attention contains non-finite entries")
        maps.setflags(write=False)
        object.__setattr__(self, "maps", maps)

    @property
    def layers(self) -> int:
        return self.maps.shape[0]


@dataclass(frozen=True)
class LayerSelection:
    """Outcome of scanning a window of layers for the most salient map."""

    window_start: int
    window_len: int
    divergences: tuple[float, ...] = field(repr=False)
    chosen: int = 0

    def __post_init__(self):
        if not (self.window_start <= self.chosen < self.window_start + self.window_len):
            raise RangeError(
                f"chosen layer {self.chosen} outside window "
                f"[{self.window_start}, {self.window_start + self.window_len})"
            )


def relative_attention(dump: AttentionDump, epsilon: float = DEFAULT_EPSILON) -> RelativeAttentionStack:
    """Divide question attention by generic attention, flooring the denominator.

    The floor guards against float32 underflow in the stored generic map;
    softmax outputs are mathematically positive but tiny entries can round
    to zero on disk.
    """
    if epsilon <= 0:
        raise RangeError(f"epsilon must be positive, got {epsilon}")
    num = dump.attn_q.astype(np.float64)
    den = np.maximum(dump.attn_generic.astype(np.float64), epsilon)
    return RelativeAttentionStack(maps=num / den)


def select_salient_layer(
    stack: RelativeAttentionStack,
    window_start: int = DEFAULT_LAYER_START,
    window_len: int = DEFAULT_LAYER_COUNT,
) -> LayerSelection:
    """Pick the layer whose map has the largest max-minus-mean divergence.

    Ties resolve to the lowest layer index in the window.
    """
    if window_len < 1:
        raise RangeError(f"window_len must be >= 1, got {window_len}")
    if window_start < 0 or window_start + window_len > stack.layers:
        raise RangeError(
            f"layer window [{window_start}, {window_start + window_len}) exceeds "
            f"{stack.layers} layers"
        )
    window = stack.maps[window_start:window_start + window_len]
    div = window.max(axis=1) - window.mean(axis=1)
    chosen = window_start + int(np.argmax(div))
    return LayerSelection(
        window_start=window_start,
        window_len=window_len,
        divergences=tuple(float(d) for d in div),
        chosen=chosen,
    )


# ---------------------------------------------------------------------------
# TCAD binary format

def write_dump(dump: AttentionDump, path) -> None:
    """Serialize a dump to the TCAD binary format (little-endian throughout)."""
    meta = dump.metadata.encode("utf-8")
    if len(meta) > 0xFFFF:
        raise FormatError(f"metadata blob too long ({len(meta)} bytes, max 65535)")
    buf = io.BytesIO()
    buf.write(_HEADER.pack(
        TCAD_MAGIC, TCAD_VERSION,
        dump.layers, dump.tokens, dump.grid_h, dump.grid_w,
        dump.proc_w, dump.proc_h, dump.orig_w, dump.orig_h, dump.patch_px,
    ))
    buf.write(struct.pack("<H", len(meta)))
    buf.write(meta)
    buf.write(np.ascontiguousarray(dump.attn_q, dtype="<f4").tobytes())
    buf.write(np.ascontiguousarray(dump.attn_generic, dtype="<f4").tobytes())
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def load_dump(path) -> AttentionDump:
    """Read and fully validate a TCAD attention-dump file."""
    with open(path, "rb") as fh:
        data = fh.read()
    return decode_dump(data)


def decode_dump(data: bytes) -> AttentionDump:
    if len(data) < _HEADER.size + 2:
        raise FormatError(f"file too short for a TCAD header ({len(data)} bytes)")
    magic, version, layers, tokens, grid_h, grid_w, proc_w, proc_h, orig_w, orig_h, patch_px = \
        _HEADER.unpack_from(data, 0)
    if magic != TCAD_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {TCAD_MAGIC!r}")
    if version != TCAD_VERSION:
        raise FormatError(f"unsupported TCAD version {version}")
    offset = _HEADER.size
    (meta_len,) = struct.unpack_from("<H", data, offset)
    offset += 2
    if len(data) < offset + meta_len:
        raise FormatError("truncated metadata blob")
    try:
        metadata = data[offset:offset + meta_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"metadata is not valid UTF-8: {exc}") from exc
    offset += meta_len
    matrix_bytes = layers * tokens * 4
    expected = offset + 2 * matrix_bytes
    if len(data) < expected:
        raise FormatError(
            f"truncated payload: {len(data)} bytes, expected {expected}"
        )
    if len(data) > expected:
        raise FormatError(
            f"trailing bytes after payload: {len(data)} bytes, expected {expected}"
        )
    attn_q = np.frombuffer(data, dtype="<f4", count=layers * tokens, offset=offset)
    attn_generic = np.frombuffer(
        data, dtype="<f4", count=layers * tokens, offset=offset + matrix_bytes
    )
    return AttentionDump(
        layers=layers, tokens=tokens, grid_h=grid_h, grid_w=grid_w,
        proc_w=proc_w, proc_h=proc_h, orig_w=orig_w, orig_h=orig_h,
        patch_px=patch_px,
        attn_q=attn_q.reshape(layers, tokens),
        attn_generic=attn_generic.reshape(layers, tokens),
        metadata=metadata,
    )


def metadata_dict(dump: AttentionDump) -> dict:
    """Parse the metadata blob as JSON, returning {} when it is not JSON."""
    try:
        parsed = json.loads(dump.metadata)
    except (json.JSONDecodeError, TypeError):
        return {}
    return parsed if isinstance(parsed, dict) else {}
