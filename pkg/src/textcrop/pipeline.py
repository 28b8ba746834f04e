"""End-to-end crop planning from an attention dump to a crop-plan dict."""

from __future__ import annotations

import json
from typing import Sequence

from .attention import (
    DEFAULT_EPSILON,
    DEFAULT_LAYER_COUNT,
    DEFAULT_LAYER_START,
    AttentionDump,
    load_dump,
    relative_attention,
    select_salient_layer,
)
from .boxes import DEFAULT_ENLARGE, WordBox, load_word_boxes, make_crop_plan, refine_box
from .window_search import grid_to_pixels, reshape_to_grid, select_best_window


def plan_crop(
    dump: AttentionDump,
    words: Sequence[WordBox] = (),
    *,
    window_start: int = DEFAULT_LAYER_START,
    window_len: int = DEFAULT_LAYER_COUNT,
    epsilon: float = DEFAULT_EPSILON,
    enlarge: float = DEFAULT_ENLARGE,
) -> dict:
    """Run the full pipeline and return a provenance-complete plan dict.

    Layer picking, window placement, pixel mapping and word-box snapping
    all leave their intermediate scores in the output so a plan can be
    audited without rerunning the model.
    """
    stack = relative_attention(dump, epsilon=epsilon)
    selection = select_salient_layer(stack, window_start=window_start,
                                     window_len=window_len)
    grid = reshape_to_grid(stack.maps[selection.chosen], dump.grid_h, dump.grid_w)
    choice = select_best_window(grid, patch_px=dump.patch_px)
    rough = grid_to_pixels(choice.placement, dump)
    refined, hit_indices = refine_box(
        rough, words, bounds=(float(dump.orig_w), float(dump.orig_h))
    )
    plan = make_crop_plan(refined, enlarge=enlarge, rough=rough,
                          word_indices=hit_indices)
    return {
        "plan": plan.to_dict(),
        "words": [
            {
                "index": i,
                "box": [float(v) for v in words[i].box],
                "text": words[i].text,
                "conf": words[i].conf,
            }
            for i in hit_indices
        ],
        "layer": {
            "window_start": selection.window_start,
            "window_len": selection.window_len,
            "chosen": selection.chosen,
            "divergences": list(selection.divergences),
        },
        "window": {
            "spec": [choice.placement.spec.h_cells, choice.placement.spec.w_cells],
            "row": choice.placement.row,
            "col": choice.placement.col,
            "inner_sum": choice.placement.inner_sum,
            "deviation": choice.deviation,
            "candidates": [
                {
                    "spec": [p.spec.h_cells, p.spec.w_cells],
                    "row": p.row,
                    "col": p.col,
                    "inner_sum": p.inner_sum,
                    "deviation": choice.deviations[i],
                    "neighbors": choice.neighbor_counts[i],
                }
                for i, p in enumerate(choice.placements)
            ],
        },
        "grid": {"h": dump.grid_h, "w": dump.grid_w, "patch_px": dump.patch_px},
        "image": {
            "proc_w": dump.proc_w, "proc_h": dump.proc_h,
            "orig_w": dump.orig_w, "orig_h": dump.orig_h,
        },
        "params": {
            "epsilon": epsilon,
            "enlarge": enlarge,
            "window_start": window_start,
            "window_len": window_len,
        },
    }


def plan_crop_from_paths(dump_path, words_path=None, **kwargs) -> dict:
    dump = load_dump(dump_path)
    words = []
    if words_path is not None:
        words = load_word_boxes(
            words_path, bounds=(float(dump.orig_w), float(dump.orig_h))
        )
    return plan_crop(dump, words, **kwargs)


def plan_to_json(plan: dict) -> str:
    """Canonical JSON rendering: stable key order, two-space indent."""
    return json.dumps(plan, sort_keys=True, indent=2) + "\n"
