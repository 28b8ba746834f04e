import numpy as np
import pytest
from PIL import Image

from textcrop import (
    GEN_TAGS,
    REAL_TAGS,
    ResponseRecord,
    Sample,
    answer_distribution,
    extract_choice,
    extract_final_answer,
    load_manifest,
    load_responses,
    manifest_stats,
    rotate_image,
    score_run,
)
from textcrop.errors import (
    DuplicateResponse,
    EmptyInput,
    FormatError,
    UnknownSample,
    UnsupportedAngle,
)

from conftest import write_jsonl


def test_tag_vocabularies():
    assert GEN_TAGS == ("categorical", "sufficient", "necessary",
                        "disjunctive", "conjunctive")
    assert REAL_TAGS == ("numerical", "temporal", "decision", "conditional")


# ---------------------------------------------------------------------------
# manifest and response loading

def gen_record(i, **overrides):
    rec = {"id": f"g{i}", "split": "gen", "answer": "A",
           "tags": ["categorical"], "layout": "interleaved", "font": "plain"}
    rec.update(overrides)
    return rec


def test_load_manifest_happy_path(tmp_path):
    path = tmp_path / "m.jsonl"
    write_jsonl(path, [
        gen_record(0, tags=["categorical", "necessary"], question="Is it?",
                   context="Two friends share a flat.",
                   options=["yes", "no", "maybe", "unknown"],
                   image_ref="img/g0.png"),
        {"id": "r0", "split": "real", "answer": "40 km", "tags": ["numerical"]},
    ])
    samples = load_manifest(path)
    assert samples[0].tags == ("categorical", "necessary")
    assert samples[0].question == "Is it?"
    assert samples[0].context == "Two friends share a flat."
    assert samples[0].options == ("yes", "no", "maybe", "unknown")
    assert samples[0].image_ref == "img/g0.png"
    assert samples[1].split == "real"
    assert samples[1].answer == "40 km"  # free-form gold, kept verbatim
    assert samples[1].layout is None and samples[1].font is None


def test_load_manifest_validation(tmp_path):
    path = tmp_path / "m.jsonl"
    cases = [
        gen_record(0, split="weird"),
        gen_record(0, answer="E"),
        gen_record(0, tags=[]),
        gen_record(0, tags=["bogus"]),
        gen_record(0, tags=["categorical", "categorical"]),
        gen_record(0, layout="diagonal"),
        gen_record(0, font="comic"),
        gen_record(0, options=["only", "three", "choices"]),
        gen_record(0, options=["a", "b", "c", 4]),
        {"id": "r0", "split": "real", "answer": "A", "tags": ["temporal", "decision"]},
        {"id": "r1", "split": "real", "answer": "A", "tags": []},
        {"id": "r2", "split": "real", "answer": "A", "tags": ["categorical"]},
        {"id": "r3", "split": "real", "answer": "  ", "tags": ["temporal"]},
        {"id": "r4", "split": "real", "answer": "A", "tags": ["temporal"],
         "options": ["a", "b", "c", "d"]},
    ]
    for rec in cases:
        write_jsonl(path, [rec])
        with pytest.raises(FormatError):
            load_manifest(path)
    write_jsonl(path, [gen_record(0), gen_record(0)])
    with pytest.raises(FormatError, match="duplicate"):
        load_manifest(path)


def test_load_responses(tmp_path):
    path = tmp_path / "r.jsonl"
    write_jsonl(path, [
        {"id": "g0", "text": "Answer: A", "mode": "cot", "usage": 184},
        {"id": "g1", "text": "B"},
    ])
    records = load_responses(path)
    assert records[0].mode == "cot"
    assert records[0].usage == 184
    assert records[1].mode is None and records[1].usage is None
    write_jsonl(path, [{"id": "g0", "text": "x"}, {"id": "g0", "text": "y"}])
    with pytest.raises(DuplicateResponse):
        load_responses(path)
    write_jsonl(path, [{"id": "g0", "text": "x", "mode": "stream"}])
    with pytest.raises(FormatError, match="mode"):
        load_responses(path)
    for bad_usage in (-3, 2.5, "lots", True):
        write_jsonl(path, [{"id": "g0", "text": "x", "usage": bad_usage}])
        with pytest.raises(FormatError, match="usage"):
            load_responses(path)


# ---------------------------------------------------------------------------
# answer extraction

def test_extract_choice_marker_wins_over_trailing_letter():
    text = "I considered option B.\nAnswer: C\nHope that helps with D"
    assert extract_choice(text) == "C"


def test_extract_choice_last_marker_wins():
    assert extract_choice("Answer: A\n...rethinking...\nAnswer: D") == "D"


def test_extract_choice_fallback_reads_final_line_only():
    assert extract_choice("A is tempting\nbut it is (B)") == "B"
    # fallback letters on earlier lines never count
    assert extract_choice("B\nno letter here") is None


def test_extract_choice_fallback_is_uppercase_only():
    assert extract_choice("the answer is b") is None
    assert extract_choice("the answer is B") == "B"


def test_extract_final_answer():
    assert extract_final_answer("working...\nAnswer: 42 days") == "42 days"
    assert extract_final_answer("just text\nfinal line") == "final line"
    assert extract_final_answer("") == ""
    assert extract_final_answer("ANSWER:   spaced   ") == "spaced"


# ---------------------------------------------------------------------------
# scoring

def two_split_fixture():
    samples = [
        Sample("g0", "gen", "A", ("categorical",), "interleaved", "plain"),
        Sample("g1", "gen", "B", ("sufficient", "necessary"), "background", "handwritten"),
        Sample("r0", "real", "C", ("numerical",)),
    ]
    responses = [
        ResponseRecord("g0", "Answer: A"),
        ResponseRecord("g1", "Answer: C"),
        ResponseRecord("r0", "mumble"),
    ]
    return samples, responses


def test_score_run_basic_counts():
    samples, responses = two_split_fixture()
    report = score_run(samples, responses)
    assert report.total == 3
    assert report.correct == 1
    assert report.unparsed == 1  # "mumble"
    assert report.missing == 0
    assert report.mean_completion_tokens is None
    assert report.by_split["gen"].total == 2
    assert report.by_split["real"].correct == 0
    assert report.by_tag["categorical"].correct == 1
    assert report.by_tag["sufficient"].total == 1
    assert report.by_tag_count["1"].total == 1
    assert report.by_tag_count["2"].total == 1
    assert report.by_layout["interleaved"].correct == 1
    assert report.by_font["handwritten"].correct == 0


def test_score_run_mean_completion_tokens():
    samples, _ = two_split_fixture()
    responses = [
        ResponseRecord("g0", "Answer: A", usage=120),
        ResponseRecord("g1", "Answer: C", usage=80),
        ResponseRecord("r0", "mumble"),  # no usage reported
    ]
    report = score_run(samples, responses)
    assert report.mean_completion_tokens == pytest.approx(100.0)
    assert report.to_dict()["mean_completion_tokens"] == pytest.approx(100.0)


def test_score_run_missing_and_unknown():
    samples, responses = two_split_fixture()
    report = score_run(samples, responses[:2])
    assert report.missing == 1 and report.total == 2
    with pytest.raises(UnknownSample):
        score_run(samples, [ResponseRecord("ghost", "Answer: A")])
    with pytest.raises(EmptyInput):
        score_run([], [])


def test_score_run_duplicate_response_rejected():
    samples, _ = two_split_fixture()
    dupes = [ResponseRecord("g0", "Answer: A"), ResponseRecord("g0", "Answer: B")]
    with pytest.raises(DuplicateResponse):
        score_run(samples, dupes)


def test_score_run_mode_filter():
    samples, _ = two_split_fixture()
    responses = [
        ResponseRecord("g0", "Answer: A", mode="cot"),
        ResponseRecord("g0", "Answer: B", mode="direct"),
        ResponseRecord("g1", "Answer: B"),  # untagged matches any mode
    ]
    report = score_run(samples, responses, mode="cot")
    assert report.total == 2 and report.correct == 2
    report = score_run(samples, responses, mode="direct")
    assert report.total == 2 and report.correct == 1


def test_score_run_verdicts_decide_and_exclude():
    samples, responses = two_split_fixture()
    verdicts = {"g0": False, "r0": True}
    report = score_run(samples, responses, verdicts=verdicts)
    # g1 responded but was never judged: excluded from totals
    assert report.total == 2
    assert report.correct == 1
    assert report.excluded == 1
    assert report.unparsed == 0


def test_tag_count_bucket_over_three():
    samples = [
        Sample("g0", "gen", "A", ("categorical", "sufficient", "necessary", "disjunctive")),
    ]
    report = score_run(samples, [ResponseRecord("g0", "Answer: A")])
    assert report.by_tag_count[">3"].total == 1


# ---------------------------------------------------------------------------
# distribution stats

def test_answer_distribution_counts():
    samples = [
        Sample(f"s{i}", "gen", letter, ("categorical",))
        for i, letter in enumerate("AABBCD")
    ]
    dist = answer_distribution(samples)
    assert dist["counts"] == {"A": 2, "B": 2, "C": 1, "D": 1}
    assert dist["fractions"]["A"] == pytest.approx(2 / 6)
    with pytest.raises(EmptyInput):
        answer_distribution([])


def test_manifest_stats_rollup():
    samples = [
        Sample("g0", "gen", "A", ("categorical",), "interleaved", "plain",
               question="one two three"),
        Sample("g1", "gen", "B", ("sufficient", "necessary", "disjunctive",
                                  "conjunctive"), "background", "handwritten",
               question="four words exactly here",
               context="some context text",
               options=("alpha", "beta", "gamma", "delta")),
        Sample("r0", "real", "forty", ("decision",)),
    ]
    stats = manifest_stats(samples)
    assert stats["total"] == 3
    assert stats["splits"] == {"gen": 2, "real": 1}
    assert stats["tag_count_hist"] == {"1": 1, "2": 0, "3": 0, ">3": 1}
    assert stats["tag_count_fractions"][">3"] == pytest.approx(0.5)
    assert stats["layout_fractions"]["interleaved"] == pytest.approx(0.5)
    assert stats["font_fractions"]["plain"] == pytest.approx(0.5)
    # rendered-text words: g0 counts its 3 question words; g1 counts
    # 4 (question) + 3 (context) + 4 (options) = 11; r0 has no text
    assert stats["avg_words"] == pytest.approx((3 + 11) / 2)
    assert stats["tags"]["decision"] == 1


# ---------------------------------------------------------------------------
# rotation

def checker_image() -> Image.Image:
    rng = np.random.default_rng(2)
    arr = rng.integers(0, 256, size=(13, 17, 3), dtype=np.uint8)
    return Image.fromarray(arr, "RGB")


def test_rotate_90_moves_pixels_clockwise():
    img = Image.new("RGB", (2, 1))
    img.putpixel((0, 0), (255, 0, 0))
    img.putpixel((1, 0), (0, 255, 0))
    out = rotate_image(img, 90)
    assert out.size == (1, 2)
    # clockwise: the left pixel of the top row ends up at the top of the right column
    assert out.getpixel((0, 0)) == (255, 0, 0)
    assert out.getpixel((0, 1)) == (0, 255, 0)


def test_rotate_180_reverses_both_axes():
    img = checker_image()
    out = rotate_image(img, 180)
    assert np.array_equal(np.asarray(out), np.asarray(img)[::-1, ::-1])


def test_rotate_90_and_270_are_inverse():
    img = checker_image()
    back = rotate_image(rotate_image(img, 90), 270)
    assert np.asarray(back).tobytes() == np.asarray(img).tobytes()


def test_rotate_zero_copies():
    img = checker_image()
    out = rotate_image(img, 0)
    assert out is not img
    assert np.asarray(out).tobytes() == np.asarray(img).tobytes()


def test_rotate_rejects_other_angles():
    img = checker_image()
    for bad in (45, -90, 360, 91):
        with pytest.raises(UnsupportedAngle):
            rotate_image(img, bad)
