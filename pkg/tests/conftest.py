import json

import numpy as np
import pytest

from textcrop import AttentionDump, Box, WordBox


def make_fixture_dump() -> AttentionDump:
    """6x6 grid, two layers: layer 0 flat, layer 1 has a planted peak.

    Uniform softmax mass is 1/16 per token scaled so values stay exact in
    float32: 0.0625 everywhere, 0.5625 at the peak. The relative map is
    then exactly 1.0 with a 9.0 spike at grid cell (3, 3).
    """
    tokens = 36
    generic = np.full((2, tokens), 0.0625, dtype=np.float32)
    q = np.full((2, tokens), 0.0625, dtype=np.float32)
    q[1, 3 * 6 + 3] = 0.5625
    return AttentionDump(
        layers=2, tokens=tokens, grid_h=6, grid_w=6,
        proc_w=672, proc_h=672, orig_w=1344, orig_h=1344, patch_px=112,
        attn_q=q, attn_generic=generic,
    )


def make_fixture_words() -> list[WordBox]:
    return [
        WordBox(Box(430.0, 430.0, 700.0, 520.0), "alpha"),
        WordBox(Box(100.0, 100.0, 200.0, 140.0), "beta"),
        WordBox(Box(860.0, 880.0, 1100.0, 950.0), "gamma"),
    ]


@pytest.fixture
def fixture_dump() -> AttentionDump:
    return make_fixture_dump()


@pytest.fixture
def fixture_words() -> list[WordBox]:
    return make_fixture_words()


def write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
