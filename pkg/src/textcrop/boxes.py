"""Axis-aligned boxes, word-box refinement and crop-plan construction."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import DegenerateBox, FormatError

DEFAULT_ENLARGE = 1.5


class Box(NamedTuple):
    """Axis-aligned rectangle as (x0, y0, x1, y1) with x1 > x0 and y1 > y0."""

    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    def is_degenerate(self) -> bool:
        return self.x1 <= self.x0 or self.y1 <= self.y0

    def clipped(self, width: float, height: float) -> "Box":
        return Box(
            min(max(self.x0, 0.0), width),
            min(max(self.y0, 0.0), height),
            min(max(self.x1, 0.0), width),
            min(max(self.y1, 0.0), height),
        )


@dataclass(frozen=True)
class WordBox:
    """One recognized word with its bounding box in original-image pixels.

    ``conf`` is a detector confidence in [0, 1]; it never influences
    refinement but is carried through to plan provenance.
    """

    box: Box
    text: str = ""
    conf: float | None = None


def intersection_area(a: Box, b: Box) -> float:
    w = min(a.x1, b.x1) - max(a.x0, b.x0)
    h = min(a.y1, b.y1) - max(a.y0, b.y0)
    if w <= 0 or h <= 0:
        return 0.0
    return w * h


def iou(a: Box, b: Box) -> float:
    """Intersection over union of two boxes. Both must have positive area."""
    if a.is_degenerate():
        raise DegenerateBox(f"box {tuple(a)} has no area")
    if b.is_degenerate():
        raise DegenerateBox(f"box {tuple(b)} has no area")
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    return inter / (a.area + b.area - inter)


def overlapping_indices(rough: Box, words: Sequence[WordBox]) -> list[int]:
    """Indices of words whose boxes strictly overlap the rough crop.

    Edge-touching boxes have zero intersection area and do not count.
    """
    if rough.is_degenerate():
        raise DegenerateBox(f"rough box {tuple(rough)} has no area")
    hits = []
    for i, word in enumerate(words):
        if word.box.is_degenerate():
            raise DegenerateBox(f"word box {i} {tuple(word.box)} has no area")
        if intersection_area(rough, word.box) > 0.0:
            hits.append(i)
    return hits


def refine_box(
    rough: Box,
    words: Sequence[WordBox],
    bounds: tuple[float, float] | None = None,
) -> tuple[Box, list[int]]:
    """Snap a rough crop to the words it overlaps.

    Returns the minimum bounding rectangle of every overlapping word box
    (clipped to ``bounds`` when given) plus the contributing word indices.
    With no overlapping words the rough box is returned unchanged.
    """
    hits = overlapping_indices(rough, words)
    if not hits:
        return rough, []
    x0 = min(words[i].box.x0 for i in hits)
    y0 = min(words[i].box.y0 for i in hits)
    x1 = max(words[i].box.x1 for i in hits)
    y1 = max(words[i].box.y1 for i in hits)
    refined = Box(x0, y0, x1, y1)
    if bounds is not None:
        refined = refined.clipped(bounds[0], bounds[1])
        if refined.is_degenerate():
            # every contributing word lay outside the image; keep the rough crop
            return rough, []
    return refined, hits


@dataclass(frozen=True)
class CropPlan:
    """Final crop rectangle plus the size it should be rendered at."""

    refined: Box
    out_w: int
    out_h: int
    enlarge: float
    rough: Box | None = None
    word_indices: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        d = {
            "refined": [float(v) for v in self.refined],
            "out_w": self.out_w,
            "out_h": self.out_h,
            "enlarge": self.enlarge,
            "word_indices": list(self.word_indices),
        }
        if self.rough is not None:
            d["rough"] = [float(v) for v in self.rough]
        return d


def make_crop_plan(
    refined: Box,
    enlarge: float = DEFAULT_ENLARGE,
    *,
    rough: Box | None = None,
    word_indices: Sequence[int] = (),
) -> CropPlan:
    """Build a crop plan whose render size is the box scaled by ``enlarge``.

    Rounding is banker's rounding, matching Python round().
    """
    if refined.is_degenerate():
        raise DegenerateBox(f"crop box {tuple(refined)} has no area")
    if enlarge <= 0:
        raise DegenerateBox(f"enlarge factor must be positive, got {enlarge}")
    out_w = int(round(enlarge * refined.width))
    out_h = int(round(enlarge * refined.height))
    if out_w < 1 or out_h < 1:
        raise DegenerateBox(
            f"crop {refined.width}x{refined.height} at enlarge {enlarge} "
            "renders to an empty image"
        )
    return CropPlan(
        refined=refined, out_w=out_w, out_h=out_h, enlarge=enlarge,
        rough=rough, word_indices=tuple(word_indices),
    )


def load_word_boxes(path, bounds: tuple[float, float] | None = None) -> list[WordBox]:
    """Read word boxes from JSONL records {"box": [x0, y0, x1, y1], ...}.

    Records may carry an optional "conf" (real in [0, 1]) and an optional
    "text" string. Boxes are clipped to ``bounds`` when given; boxes that
    are degenerate before or after clipping are dropped with a warning
    rather than failing the whole file.
    """
    words: list[WordBox] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(rec, dict) or "box" not in rec:
                raise FormatError(f"{path}:{lineno}: expected an object with a 'box' key")
            raw = rec["box"]
            if not isinstance(raw, (list, tuple)) or len(raw) != 4:
                raise FormatError(f"{path}:{lineno}: 'box' must be [x0, y0, x1, y1]")
            try:
                box = Box(*(float(v) for v in raw))
            except (TypeError, ValueError) as exc:
                raise FormatError(f"{path}:{lineno}: non-numeric box entry") from exc
            if bounds is not None:
                box = box.clipped(bounds[0], bounds[1])
            if box.is_degenerate():
                warnings.warn(
                    f"{path}:{lineno}: dropping degenerate word box {tuple(box)}",
                    stacklevel=2,
                )
                continue
            text = rec.get("text", "")
            if not isinstance(text, str):
                raise FormatError(f"{path}:{lineno}: 'text' must be a string")
            conf = rec.get("conf")
            if conf is not None:
                if not isinstance(conf, (int, float)) or isinstance(conf, bool) \
                        or not 0.0 <= float(conf) <= 1.0:
                    raise FormatError(
                        f"{path}:{lineno}: 'conf' must be a number in [0, 1]")
                conf = float(conf)
            words.append(WordBox(box=box, text=text, conf=conf))
    return words
