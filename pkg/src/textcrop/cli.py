"""Command-line interface: crop planning, scoring, judging, OCR metrics,
dedup, rotation, manifest stats and artifact inspection.

All subcommands print a JSON report to stdout, or write it atomically
with --out. Exit codes: 0 ok, 1 format or I/O problems, 2 shape/range
problems, 3 degenerate or empty inputs, 64 usage, 70 anything else.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .attention import (
    DEFAULT_EPSILON,
    DEFAULT_LAYER_COUNT,
    DEFAULT_LAYER_START,
    load_dump,
)
from .boxes import DEFAULT_ENLARGE
from .dedup import DEFAULT_DEDUP_THRESHOLD, dedup, load_embeddings, load_raw_vectors
from .errors import (
    DegenerateBox,
    DimensionMismatch,
    DuplicateResponse,
    EmptyInput,
    FormatError,
    JudgeParseError,
    JudgeTransportError,
    RangeError,
    ShapeError,
    UnknownSample,
    UnsupportedAngle,
    ZeroVector,
)
from .harness import (
    load_manifest,
    load_responses,
    manifest_stats,
    rotate_image,
    score_run,
)
from .judge import JudgeClient, JudgeConfig, judge_run
from .ocr_metrics import TextPair, edit_distance_norm, meteor, score_pairs, word_prf
from .pipeline import plan_crop_from_paths, plan_to_json
from .prompts import all_templates

EXIT_OK = 0
EXIT_FORMAT = 1
EXIT_SHAPE = 2
EXIT_DEGENERATE = 3
EXIT_USAGE = 64
EXIT_UNEXPECTED = 70

_FORMAT_ERRORS = (FormatError, DuplicateResponse, UnknownSample,
                  JudgeTransportError, JudgeParseError, OSError)
_SHAPE_ERRORS = (ShapeError, RangeError, DimensionMismatch, UnsupportedAngle)
_DEGENERATE_ERRORS = (DegenerateBox, ZeroVector, EmptyInput)


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage failures exit 64 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    tmp = f"{out}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, out)


def _emit_json(payload: dict, out: str | None) -> None:
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", out)


def _load_pairs(path) -> tuple[list[TextPair], list[str]]:
    pairs = []
    ids = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(rec, dict) or "pred" not in rec or "ref" not in rec:
                raise FormatError(f"{path}:{lineno}: expected an object with 'pred' and 'ref'")
            pairs.append(TextPair(pred=str(rec["pred"]), ref=str(rec["ref"])))
            ids.append(str(rec.get("id", lineno)))
    return pairs, ids


def _load_verdicts(path) -> dict[str, bool]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    if isinstance(data, dict) and isinstance(data.get("verdicts"), dict):
        data = data["verdicts"]
    if not isinstance(data, dict):
        raise FormatError(f"{path}: expected an object of id -> verdict")
    return {str(k): bool(v) for k, v in data.items()}


# ---------------------------------------------------------------------------
# subcommand bodies

def _cmd_crop(args) -> int:
    plan = plan_crop_from_paths(
        args.dump, args.words,
        window_start=args.m, window_len=args.n,
        epsilon=args.epsilon, enlarge=args.enlarge,
    )
    _emit(plan_to_json(plan), args.out)
    return EXIT_OK


def _cmd_eval(args) -> int:
    samples = load_manifest(args.manifest)
    responses = load_responses(args.responses)
    verdicts = _load_verdicts(args.verdicts) if args.verdicts else None
    report = score_run(samples, responses, verdicts=verdicts, mode=args.mode)
    _emit_json(report.to_dict(), args.out)
    return EXIT_OK


def _cmd_judge(args) -> int:
    samples = load_manifest(args.manifest)
    responses = load_responses(args.responses)
    config = JudgeConfig(endpoint=args.judge_endpoint, model=args.judge_model,
                         timeout=args.timeout)
    client = JudgeClient(config)
    result = judge_run(client, samples, responses, workers=args.workers)
    _emit_json(result.to_dict(), args.out)
    return EXIT_OK


def _cmd_ocr(args) -> int:
    pairs, ids = _load_pairs(args.pairs)
    report = score_pairs(pairs)
    if args.per_pair:
        detail = []
        for pair_id, pair in zip(ids, pairs):
            p, r, f1 = word_prf(pair.pred, pair.ref)
            detail.append({
                "id": pair_id,
                "edit_distance_norm": edit_distance_norm(pair.pred, pair.ref),
                "precision": p,
                "recall": r,
                "f1": f1,
                "meteor": meteor(pair.pred, pair.ref),
            })
        report["per_pair"] = detail
    _emit_json(report, args.out)
    return EXIT_OK


def _cmd_dedup(args) -> int:
    embeds = load_embeddings(args.embeddings, ids_path=args.ids)
    result = dedup(embeds, threshold=args.threshold)
    _emit_json(result.to_dict(), args.out)
    return EXIT_OK


def _cmd_rotate(args) -> int:
    from PIL import Image

    with Image.open(args.image) as img:
        img.load()
        rotated = rotate_image(img, args.degrees)
    rotated.save(args.to)
    _emit_json({
        "image": args.to,
        "degrees_clockwise": args.degrees,
        "size": [rotated.width, rotated.height],
    }, args.out)
    return EXIT_OK


def _cmd_stats(args) -> int:
    samples = load_manifest(args.manifest)
    _emit_json(manifest_stats(samples), args.out)
    return EXIT_OK


def _inspect_tcad(path, full: bool) -> dict:
    dump = load_dump(path)

    def summary(arr) -> dict:
        return {
            "min": float(arr.min()),
            "max": float(arr.max()),
            "sum": float(arr.sum(dtype="float64")),
        }

    info = {
        "kind": "tcad",
        "layers": dump.layers,
        "tokens": dump.tokens,
        "grid": [dump.grid_h, dump.grid_w],
        "proc": [dump.proc_w, dump.proc_h],
        "orig": [dump.orig_w, dump.orig_h],
        "patch_px": dump.patch_px,
        "metadata": dump.metadata,
        "attn_q": summary(dump.attn_q),
        "attn_generic": summary(dump.attn_generic),
    }
    if full:
        info["attn_q_values"] = dump.attn_q.tolist()
        info["attn_generic_values"] = dump.attn_generic.tolist()
    return info


def _inspect_tcem(path, ids_path, full: bool) -> dict:
    raw = load_raw_vectors(path)
    embeds = load_embeddings(path, ids_path=ids_path)
    norms = [float(n) for n in (raw * raw).sum(axis=1) ** 0.5]
    info = {
        "kind": "tcem",
        "count": len(embeds),
        "dim": embeds.dim,
        "ids": list(embeds.ids),
        "norms": norms,
    }
    if full:
        info["vectors"] = [[float(v) for v in row] for row in embeds.vectors]
    return info


def _cmd_inspect(args) -> int:
    if args.target == "prompts":
        _emit_json({"kind": "prompts", "templates": all_templates()}, args.out)
        return EXIT_OK
    with open(args.target, "rb") as fh:
        magic = fh.read(4)
    if magic == b"TCAD":
        info = _inspect_tcad(args.target, args.full)
    elif magic == b"TCEM":
        info = _inspect_tcem(args.target, args.ids, args.full)
    else:
        raise FormatError(f"{args.target}: unrecognized magic {magic!r}")
    _emit_json(info, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser wiring

def build_parser() -> _Parser:
    parser = _Parser(prog="textcrop",
                     description="Attention-guided crop planning and benchmark scoring.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("crop", help="plan a crop from an attention dump")
    p.add_argument("--dump", required=True, help="TCAD attention-dump file")
    p.add_argument("--words", help="word-box JSONL for refinement")
    p.add_argument("--m", type=int, default=DEFAULT_LAYER_START,
                   help="first layer of the selection window")
    p.add_argument("--n", type=_positive_int, default=DEFAULT_LAYER_COUNT,
                   help="number of layers in the selection window")
    p.add_argument("--epsilon", type=_positive_float, default=DEFAULT_EPSILON,
                   help="denominator floor for relative attention")
    p.add_argument("--enlarge", type=_positive_float, default=DEFAULT_ENLARGE,
                   help="render-size scale factor for the final crop")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_crop)

    p = sub.add_parser("eval", help="score responses against a manifest")
    p.add_argument("--manifest", required=True, help="sample manifest JSONL")
    p.add_argument("--responses", required=True, help="model responses JSONL")
    p.add_argument("--mode", choices=["cot", "direct"], help="keep only this prompt mode")
    p.add_argument("--verdicts", help="judge verdicts JSON for free-form scoring")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("judge", help="grade free-form answers with a judge model")
    p.add_argument("--manifest", required=True, help="sample manifest JSONL")
    p.add_argument("--responses", required=True, help="model responses JSONL")
    p.add_argument("--judge-endpoint", required=True, help="chat-completions URL")
    p.add_argument("--judge-model", required=True, help="judge model name")
    p.add_argument("--workers", type=_positive_int, default=1,
                   help="parallel judge requests")
    p.add_argument("--timeout", type=_positive_float, default=60.0,
                   help="per-request timeout in seconds")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_judge)

    p = sub.add_parser("ocr", help="text-similarity metrics over pred/ref pairs")
    p.add_argument("--pairs", required=True, help="JSONL with 'pred' and 'ref' fields")
    p.add_argument("--per-pair", action="store_true", help="include per-pair rows")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_ocr)

    p = sub.add_parser("dedup", help="drop near-duplicate embeddings")
    p.add_argument("--embeddings", required=True, help="TCEM embedding file")
    p.add_argument("--ids", help="id sidecar JSONL")
    p.add_argument("--threshold", type=float, default=DEFAULT_DEDUP_THRESHOLD,
                   help="cosine similarity at or above which items are duplicates")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_dedup)

    p = sub.add_parser("rotate", help="rotate an image by a right angle, clockwise")
    p.add_argument("--image", required=True, help="input image path")
    p.add_argument("--degrees", type=int, choices=[0, 90, 180, 270], required=True)
    p.add_argument("--to", required=True, help="output image path")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=_cmd_rotate)

    p = sub.add_parser("stats", help="composition stats for a manifest")
    p.add_argument("--manifest", required=True, help="sample manifest JSONL")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("inspect", help="decode a TCAD/TCEM file, or dump prompt templates")
    p.add_argument("target", help="path to a .tcad/.tcem file, or the word 'prompts'")
    p.add_argument("--ids", help="id sidecar JSONL for TCEM targets")
    p.add_argument("--full", action="store_true", help="include full value arrays")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed the message; surface its code (64 usage, 0 help)
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except _DEGENERATE_ERRORS as exc:
        print(f"textcrop: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except _SHAPE_ERRORS as exc:
        print(f"textcrop: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except _FORMAT_ERRORS as exc:
        print(f"textcrop: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"textcrop: unexpected error: {exc!r}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
