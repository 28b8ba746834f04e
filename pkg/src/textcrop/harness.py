"""Benchmark evaluation: manifests, responses, answer extraction, scoring
breakdowns, answer-distribution stats and image-orientation tooling."""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from PIL import Image

from .errors import (
    DuplicateResponse,
    EmptyInput,
    FormatError,
    UnknownSample,
    UnsupportedAngle,
)

GEN_TAGS = ("categorical", "sufficient", "necessary", "disjunctive", "conjunctive")
REAL_TAGS = ("numerical", "temporal", "decision", "conditional")
SPLITS = ("gen", "real")
MODES = ("cot", "direct")
LAYOUTS = ("interleaved", "background")
FONTS = ("plain", "handwritten")
LETTERS = ("A", "B", "C", "D")

# e.g. "Answer: C" anywhere in the response; the last occurrence wins
_ANSWER_RE = re.compile(r"answer\s*:\s*([A-Da-d])", re.IGNORECASE)
# a lone capital letter bounded by non-alphanumerics, e.g. "(B)" or "B."
_LONE_LETTER_RE = re.compile(r"(?<![A-Za-z0-9])([A-D])(?![A-Za-z0-9])")


@dataclass(frozen=True)
class Sample:
    """One benchmark item: gold answer plus its grouping attributes.

    Gen samples answer with a letter A-D over exactly four options; real
    samples carry a free-form gold answer scored by a judge.
    """

    id: str
    split: str
    answer: str
    tags: tuple[str, ...]
    layout: str | None = None
    font: str | None = None
    question: str | None = None
    context: str | None = None
    options: tuple[str, ...] | None = None
    image_ref: str | None = None


@dataclass(frozen=True)
class ResponseRecord:
    """One model response to a sample, optionally tagged with its prompt
    mode and the completion-token count reported by the model server."""

    id: str
    text: str
    mode: str | None = None
    usage: int | None = None


def _check_tags(split: str, tags: Sequence[str], where: str) -> tuple[str, ...]:
    allowed = GEN_TAGS if split == "gen" else REAL_TAGS
    tags = tuple(str(t).lower() for t in tags)
    for t in tags:
        if t not in allowed:
            raise FormatError(f"{where}: unknown {split} tag {t!r}")
    if len(set(tags)) != len(tags):
        raise FormatError(f"{where}: repeated tag")
    if split == "gen" and not tags:
        raise FormatError(f"{where}: gen samples need at least one reasoning tag")
    if split == "real" and len(tags) != 1:
        raise FormatError(f"{where}: real samples carry exactly one tag, got {len(tags)}")
    return tags


def load_manifest(path) -> list[Sample]:
    """Read benchmark samples from JSONL and validate their attributes."""
    samples: list[Sample] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{where}: invalid JSON: {exc}") from exc
            if not isinstance(rec, dict):
                raise FormatError(f"{where}: expected an object")
            try:
                sample_id = str(rec["id"])
                split = str(rec["split"]).lower()
                answer = str(rec["answer"])
            except KeyError as exc:
                raise FormatError(f"{where}: missing key {exc}") from exc
            if not sample_id:
                raise FormatError(f"{where}: empty id")
            if sample_id in seen:
                raise FormatError(f"{where}: duplicate sample id {sample_id!r}")
            seen.add(sample_id)
            if split not in SPLITS:
                raise FormatError(f"{where}: split must be one of {SPLITS}, got {split!r}")
            if split == "gen":
                answer = answer.upper()
                if answer not in LETTERS:
                    raise FormatError(
                        f"{where}: gen answer must be one of {LETTERS}, got {answer!r}")
            elif not answer.strip():
                raise FormatError(f"{where}: real samples need a non-empty answer")
            tags = _check_tags(split, rec.get("tags", []), where)
            options = rec.get("options")
            if options is not None:
                if split != "gen":
                    raise FormatError(f"{where}: options are gen-only")
                if (not isinstance(options, list) or len(options) != 4
                        or not all(isinstance(o, str) for o in options)):
                    raise FormatError(f"{where}: options must be 4 strings")
                options = tuple(options)
            layout = rec.get("layout")
            if layout is not None:
                layout = str(layout).lower()
                if layout not in LAYOUTS:
                    raise FormatError(f"{where}: layout must be one of {LAYOUTS}")
            font = rec.get("font")
            if font is not None:
                font = str(font).lower()
                if font not in FONTS:
                    raise FormatError(f"{where}: font must be one of {FONTS}")
            question = rec.get("question")
            if question is not None:
                question = str(question)
            context = rec.get("context")
            if context is not None:
                context = str(context)
            image_ref = rec.get("image_ref")
            if image_ref is not None:
                image_ref = str(image_ref)
            samples.append(Sample(
                id=sample_id, split=split, answer=answer, tags=tags,
                layout=layout, font=font, question=question,
                context=context, options=options, image_ref=image_ref,
            ))
    return samples


def load_responses(path) -> list[ResponseRecord]:
    """Read model responses from JSONL; a repeated id is an error."""
    records: list[ResponseRecord] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{where}: invalid JSON: {exc}") from exc
            if not isinstance(rec, dict) or "id" not in rec or "text" not in rec:
                raise FormatError(f"{where}: expected an object with 'id' and 'text'")
            rec_id = str(rec["id"])
            if rec_id in seen:
                raise DuplicateResponse(f"{where}: second response for id {rec_id!r}")
            seen.add(rec_id)
            mode = rec.get("mode")
            if mode is not None:
                mode = str(mode).lower()
                if mode not in MODES:
                    raise FormatError(f"{where}: mode must be one of {MODES}")
            usage = rec.get("usage")
            if usage is not None:
                if not isinstance(usage, int) or isinstance(usage, bool) or usage < 0:
                    raise FormatError(f"{where}: usage must be a non-negative integer")
            records.append(ResponseRecord(
                id=rec_id, text=str(rec["text"]), mode=mode, usage=usage,
            ))
    return records


def extract_choice(text: str) -> str | None:
    """Pull the chosen option letter out of a model response.

    The last "Answer: X" marker anywhere in the text wins, case
    insensitively. Without a marker, the last standalone capital A-D in
    the final non-empty line is taken. Returns None when neither rule
    fires; callers count that as unparsed.
    """
    matches = _ANSWER_RE.findall(text)
    if matches:
        return matches[-1].upper()
    for line in reversed(text.splitlines()):
        if line.strip():
            lone = _LONE_LETTER_RE.findall(line)
            if lone:
                return lone[-1]
            return None
    return None


def extract_final_answer(text: str) -> str:
    """Final free-form answer: the last non-empty line, minus any
    leading "Answer:" marker."""
    for line in reversed(text.splitlines()):
        line = line.strip()
        if line:
            m = re.match(r"answer\s*:\s*", line, re.IGNORECASE)
            return line[m.end():].strip() if m else line
    return ""


@dataclass
class Bucket:
    """Running correct/total tally for one report row."""

    correct: int = 0
    total: int = 0

    def add(self, ok: bool) -> None:
        self.total += 1
        self.correct += int(ok)

    def to_dict(self) -> dict:
        return {
            "correct": self.correct,
            "total": self.total,
            "accuracy": (self.correct / self.total) if self.total else None,
        }


@dataclass
class MetricReport:
    """Scored run with accuracy broken down by grouping attributes."""

    total: int
    correct: int
    unparsed: int
    missing: int
    excluded: int
    mode: str | None
    mean_completion_tokens: float | None = None
    by_split: dict[str, Bucket] = field(default_factory=dict)
    by_tag: dict[str, Bucket] = field(default_factory=dict)
    by_tag_count: dict[str, Bucket] = field(default_factory=dict)
    by_layout: dict[str, Bucket] = field(default_factory=dict)
    by_font: dict[str, Bucket] = field(default_factory=dict)

    @property
    def accuracy(self) -> float | None:
        return (self.correct / self.total) if self.total else None

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "correct": self.correct,
            "accuracy": self.accuracy,
            "unparsed": self.unparsed,
            "missing": self.missing,
            "excluded": self.excluded,
            "mode": self.mode,
            "mean_completion_tokens": self.mean_completion_tokens,
            "by_split": {k: b.to_dict() for k, b in self.by_split.items()},
            "by_tag": {k: b.to_dict() for k, b in self.by_tag.items()},
            "by_tag_count": {k: b.to_dict() for k, b in self.by_tag_count.items()},
            "by_layout": {k: b.to_dict() for k, b in self.by_layout.items()},
            "by_font": {k: b.to_dict() for k, b in self.by_font.items()},
        }


def _tag_count_key(n: int) -> str:
    return str(n) if n <= 3 else ">3"


def score_run(
    samples: Sequence[Sample],
    responses: Iterable[ResponseRecord],
    verdicts: Mapping[str, bool] | None = None,
    mode: str | None = None,
) -> MetricReport:
    """Score one run of responses against the manifest.

    Letter extraction decides correctness; when a verdict map is given
    (free-form judging) it decides instead, and responded samples absent
    from the map are excluded from the totals. Samples with no response
    are counted missing and excluded from the totals. ``mode`` keeps only
    responses tagged with that prompt mode.
    """
    if not samples:
        raise EmptyInput("no samples to score")
    if mode is not None:
        mode = mode.lower()
        if mode not in MODES:
            raise FormatError(f"mode must be one of {MODES}, got {mode!r}")
    by_id = {s.id: s for s in samples}
    picked: dict[str, ResponseRecord] = {}
    for rec in responses:
        if rec.id not in by_id:
            raise UnknownSample(f"response for unknown sample id {rec.id!r}")
        if mode is not None and rec.mode is not None and rec.mode != mode:
            continue
        if rec.id in picked:
            raise DuplicateResponse(f"second response for id {rec.id!r}")
        picked[rec.id] = rec

    report = MetricReport(total=0, correct=0, unparsed=0, missing=0,
                          excluded=0, mode=mode)
    usage_total = 0
    usage_seen = 0
    for sample in samples:
        rec = picked.get(sample.id)
        if rec is None:
            report.missing += 1
            continue
        if verdicts is not None:
            if sample.id not in verdicts:
                report.excluded += 1
                continue
            ok = bool(verdicts[sample.id])
        else:
            choice = extract_choice(rec.text)
            if choice is None:
                report.unparsed += 1
                ok = False
            else:
                ok = choice == sample.answer
        report.total += 1
        report.correct += int(ok)
        if rec.usage is not None:
            usage_total += rec.usage
            usage_seen += 1
        report.by_split.setdefault(sample.split, Bucket()).add(ok)
        for tag in sample.tags:
            report.by_tag.setdefault(tag, Bucket()).add(ok)
        if sample.split == "gen":
            key = _tag_count_key(len(sample.tags))
            report.by_tag_count.setdefault(key, Bucket()).add(ok)
        if sample.layout is not None:
            report.by_layout.setdefault(sample.layout, Bucket()).add(ok)
        if sample.font is not None:
            report.by_font.setdefault(sample.font, Bucket()).add(ok)
    if usage_seen:
        report.mean_completion_tokens = usage_total / usage_seen
    return report


def answer_distribution(samples: Sequence[Sample]) -> dict:
    """Gold-letter counts and fractions over a manifest.

    Meant for multiple-choice (gen) samples; free-form answers do not
    land in any letter bucket.
    """
    if not samples:
        raise EmptyInput("no samples")
    counts = Counter(s.answer for s in samples)
    n = len(samples)
    return {
        "total": n,
        "counts": {letter: counts.get(letter, 0) for letter in LETTERS},
        "fractions": {letter: counts.get(letter, 0) / n for letter in LETTERS},
    }


def manifest_stats(samples: Sequence[Sample]) -> dict:
    """Composition report: splits, answers, tags, tag-count histogram,
    layout/font fractions and mean rendered-text length in words
    (whitespace tokens of context + question + options)."""
    if not samples:
        raise EmptyInput("no samples")
    split_counts = Counter(s.split for s in samples)
    tag_counts: Counter = Counter()
    tag_count_hist: Counter = Counter()
    layout_counts: Counter = Counter()
    font_counts: Counter = Counter()
    word_counts = []
    for s in samples:
        tag_counts.update(s.tags)
        if s.split == "gen":
            tag_count_hist[_tag_count_key(len(s.tags))] += 1
        if s.layout is not None:
            layout_counts[s.layout] += 1
        if s.font is not None:
            font_counts[s.font] += 1
        parts = [s.context, s.question, *(s.options or ())]
        text = " ".join(p for p in parts if p)
        if text:
            word_counts.append(len(text.split()))

    def fractions(counter: Counter, keys: Sequence[str]) -> dict:
        total = sum(counter.values())
        if total == 0:
            return {}
        return {k: counter.get(k, 0) / total for k in keys}

    gen_total = split_counts.get("gen", 0)
    return {
        "total": len(samples),
        "splits": dict(split_counts),
        "answers": answer_distribution(samples),
        "tags": dict(tag_counts),
        "tag_count_hist": {k: tag_count_hist.get(k, 0) for k in ("1", "2", "3", ">3")},
        "tag_count_fractions": {
            k: (tag_count_hist.get(k, 0) / gen_total) if gen_total else 0.0
            for k in ("1", "2", "3", ">3")
        },
        "layout_fractions": fractions(layout_counts, LAYOUTS),
        "font_fractions": fractions(font_counts, FONTS),
        "avg_words": (
            sum(word_counts) / len(word_counts) if word_counts else None
        ),
    }


# ---------------------------------------------------------------------------
# image orientation

_CLOCKWISE = {
    90: Image.Transpose.ROTATE_270,
    180: Image.Transpose.ROTATE_180,
    270: Image.Transpose.ROTATE_90,
}


def rotate_image(img: Image.Image, degrees_clockwise: int) -> Image.Image:
    """Rotate by a right angle, clockwise. Always returns a new image.

    Right-angle rotation is a pixel permutation, so four 90-degree turns
    reproduce the original bytes exactly.
    """
    if degrees_clockwise == 0:
        return img.copy()
    op = _CLOCKWISE.get(degrees_clockwise)
    if op is None:
        raise UnsupportedAngle(
            f"rotation must be 0, 90, 180 or 270 degrees, got {degrees_clockwise}"
        )
    return img.transpose(op)
