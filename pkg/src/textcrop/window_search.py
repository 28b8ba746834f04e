"""Sliding-window search for the most salient crop over a patch grid.

Candidate windows come from a fixed menu of pixel heights and aspect
ratios, quantized to whole grid cells. Every candidate is slid over the
grid with 2-D prefix sums; the winning window is the one whose best
placement most exceeds the mean of its one-cell-shifted neighbors, which
rewards peaked saliency over diffuse background mass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .attention import AttentionDump
from .boxes import Box
from .errors import RangeError, ShapeError

BASE_HEIGHT_PX = 224
HEIGHT_MULTIPLIERS = (1.0, 1.2, 1.4, 1.6, 1.8, 2.0)
ASPECT_RATIOS = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)


class WindowSpec(NamedTuple):
    """Window size in whole grid cells."""

    h_cells: int
    w_cells: int


@dataclass(frozen=True)
class Placement:
    """Best location found for one window size."""

    spec: WindowSpec
    row: int
    col: int
    inner_sum: float


@dataclass(frozen=True)
class WindowChoice:
    """Winning placement plus the full per-candidate score table."""

    placement: Placement
    deviation: float
    deviations: tuple[float, ...]
    neighbor_counts: tuple[int, ...]
    placements: tuple[Placement, ...]


def _as_grid(grid) -> np.ndarray:
    arr = np.ascontiguousarray(grid, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"saliency grid must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"saliency grid must be non-empty, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise RangeError("saliency grid contains non-finite entries")
    return arr


def reshape_to_grid(map_1d, grid_h: int, grid_w: int) -> np.ndarray:
    """Lay a flat token map out as its (grid_h, grid_w) patch grid, row-major."""
    arr = np.asarray(map_1d, dtype=np.float64).ravel()
    if arr.size != grid_h * grid_w:
        raise ShapeError(
            f"map has {arr.size} entries, expected {grid_h}x{grid_w}={grid_h * grid_w}"
        )
    return _as_grid(arr.reshape(grid_h, grid_w))


def window_set(grid_h: int, grid_w: int, patch_px: int) -> list[WindowSpec]:
    """Quantize the pixel-size menu to unique cell-size windows, order kept.

    Each height multiplier scales the base height; each aspect ratio then
    sets the width. Cell counts are clamped to the grid, and duplicate
    (h_cells, w_cells) pairs keep their first occurrence.
    """
    if grid_h < 1 or grid_w < 1 or patch_px < 1:
        raise ShapeError(
            f"grid {grid_h}x{grid_w} with patch {patch_px}px is not usable"
        )
    seen: set[WindowSpec] = set()
    out: list[WindowSpec] = []
    for mult in HEIGHT_MULTIPLIERS:
        h_px = mult * BASE_HEIGHT_PX
        h_cells = min(max(round(h_px / patch_px), 1), grid_h)
        for aspect in ASPECT_RATIOS:
            w_px = h_px * aspect
            w_cells = min(max(round(w_px / patch_px), 1), grid_w)
            spec = WindowSpec(h_cells, w_cells)
            if spec not in seen:
                seen.add(spec)
                out.append(spec)
    return out


def best_position(grid, spec: WindowSpec) -> Placement:
    """Slide one window over the grid, returning its highest-sum placement.

    Ties go to the smallest row, then the smallest column.
    """
    arr = _as_grid(grid)
    if not (1 <= spec.h_cells <= arr.shape[0] and 1 <= spec.w_cells <= arr.shape[1]):
        raise ShapeError(f"window {spec} does not fit grid {arr.shape}")
    prefix = _kernels.padded_prefix(arr)
    row, col, total = _kernels.best_position(prefix, spec.h_cells, spec.w_cells)
    return Placement(spec=spec, row=int(row), col=int(col), inner_sum=float(total))


def search_all(grid, windows: Sequence[WindowSpec] | None = None,
               patch_px: int | None = None) -> list[Placement]:
    """Find the best placement for every window in the menu."""
    arr = _as_grid(grid)
    if windows is None:
        if patch_px is None:
            raise ShapeError("windows or patch_px must be given")
        windows = window_set(arr.shape[0], arr.shape[1], patch_px)
    prefix = _kernels.padded_prefix(arr)
    out = []
    for spec in windows:
        if not (1 <= spec.h_cells <= arr.shape[0] and 1 <= spec.w_cells <= arr.shape[1]):
            raise ShapeError(f"window {spec} does not fit grid {arr.shape}")
        row, col, total = _kernels.best_position(prefix, spec.h_cells, spec.w_cells)
        out.append(Placement(spec=spec, row=int(row), col=int(col),
                             inner_sum=float(total)))
    return out


def _neighbor_stats(prefix: np.ndarray, grid_h: int, grid_w: int,
                    placement: Placement) -> tuple[float, int]:
    """Mean window sum over the up-to-8 one-cell-shifted placements that fit."""
    h, w = placement.spec
    total = 0.0
    count = 0
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            r = placement.row + dr
            c = placement.col + dc
            if r < 0 or c < 0 or r + h > grid_h or c + w > grid_w:
                continue
            total += _kernels.window_sum(prefix, r, c, h, w)
            count += 1
    if count == 0:
        return 0.0, 0
    return total / count, count


def select_best_window(grid, windows: Sequence[WindowSpec] | None = None,
                       patch_px: int | None = None) -> WindowChoice:
    """Rank every candidate placement by peakedness and pick the winner.

    Each placement scores inner_sum minus the mean of its shifted
    neighbors; a window with no in-bounds neighbor (it fills the whole
    grid) scores 0. Ties resolve to the smaller window area, then to the
    earlier candidate in menu order.
    """
    arr = _as_grid(grid)
    placements = search_all(arr, windows=windows, patch_px=patch_px)
    prefix = _kernels.padded_prefix(arr)
    grid_h, grid_w = arr.shape

    deviations: list[float] = []
    counts: list[int] = []
    for p in placements:
        mean, count = _neighbor_stats(prefix, grid_h, grid_w, p)
        deviations.append(p.inner_sum - mean if count else 0.0)
        counts.append(count)

    best = 0
    for i in range(1, len(placements)):
        if deviations[i] > deviations[best]:
            best = i
        elif deviations[i] == deviations[best]:
            area_i = placements[i].spec.h_cells * placements[i].spec.w_cells
            area_b = placements[best].spec.h_cells * placements[best].spec.w_cells
            if area_i < area_b:
                best = i
    return WindowChoice(
        placement=placements[best],
        deviation=deviations[best],
        deviations=tuple(deviations),
        neighbor_counts=tuple(counts),
        placements=tuple(placements),
    )


def grid_to_pixels(placement: Placement, dump: AttentionDump) -> Box:
    """Map a cell placement to original-image pixel coordinates.

    Cells live in the processed-pixel frame (patch_px per cell); the box
    is scaled by the processed-to-original ratio and clipped to the image.
    """
    h, w = placement.spec
    px0 = placement.col * dump.patch_px
    py0 = placement.row * dump.patch_px
    px1 = (placement.col + w) * dump.patch_px
    py1 = (placement.row + h) * dump.patch_px
    sx = dump.orig_w / dump.proc_w
    sy = dump.orig_h / dump.proc_h
    box = Box(px0 * sx, py0 * sy, px1 * sx, py1 * sy)
    return box.clipped(float(dump.orig_w), float(dump.orig_h))
