"""Text-similarity metrics for OCR output: edit distance, word P/R/F1,
corpus BLEU and a unigram METEOR variant."""

from __future__ import annotations

import math
import string
from collections import Counter
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import EmptyInput

_EDGE_PUNCT = string.punctuation


class TextPair(NamedTuple):
    """A prediction and its reference transcription."""

    pred: str
    ref: str


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip leading/trailing punctuation.

    Interior punctuation survives, so hyphenated words and contractions
    stay whole. Tokens that are all punctuation vanish.
    """
    out = []
    for tok in text.lower().split():
        tok = tok.strip(_EDGE_PUNCT)
        if tok:
            out.append(tok)
    return out


def _codepoints(text: str) -> np.ndarray:
    return np.array([ord(c) for c in text], dtype=np.int64)


def edit_distance(pred: str, ref: str) -> int:
    """Character-level Levenshtein distance."""
    return int(_kernels.levenshtein(_codepoints(pred), _codepoints(ref)))


def edit_distance_norm(pred: str, ref: str) -> float:
    """Levenshtein distance divided by the longer length; 0.0 when both empty."""
    longest = max(len(pred), len(ref))
    if longest == 0:
        return 0.0
    return edit_distance(pred, ref) / longest


def word_prf(pred: str, ref: str) -> tuple[float, float, float]:
    """Bag-of-words precision, recall and F1 with clipped counts.

    Each shared word counts at most min(pred count, ref count) times.
    Empty sides yield 0 for the affected measure; F1 is 0 when P+R is 0.
    """
    pred_toks = tokenize(pred)
    ref_toks = tokenize(ref)
    pred_counts = Counter(pred_toks)
    ref_counts = Counter(ref_toks)
    matched = sum(min(n, ref_counts[w]) for w, n in pred_counts.items())
    precision = matched / len(pred_toks) if pred_toks else 0.0
    recall = matched / len(ref_toks) if ref_toks else 0.0
    if precision + recall == 0.0:
        return precision, recall, 0.0
    f1 = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(pairs: Sequence[TextPair], max_n: int = 4) -> float:
    """Corpus-level BLEU with add-one smoothed modified n-gram precisions.

    p_n = (matched_n + 1) / (total_n + 1) pooled over the corpus, combined
    with uniform 1/max_n weights and the usual brevity penalty.
    """
    if not pairs:
        raise EmptyInput("BLEU needs at least one text pair")
    matched = [0] * max_n
    total = [0] * max_n
    pred_len = 0
    ref_len = 0
    for pair in pairs:
        pred_toks = tokenize(pair.pred)
        ref_toks = tokenize(pair.ref)
        pred_len += len(pred_toks)
        ref_len += len(ref_toks)
        for n in range(1, max_n + 1):
            pred_ngrams = _ngram_counts(pred_toks, n)
            ref_ngrams = _ngram_counts(ref_toks, n)
            total[n - 1] += sum(pred_ngrams.values())
            matched[n - 1] += sum(
                min(c, ref_ngrams[g]) for g, c in pred_ngrams.items()
            )
    if pred_len == 0:
        return 0.0
    log_p = 0.0
    for n in range(max_n):
        log_p += math.log((matched[n] + 1) / (total[n] + 1)) / max_n
    bp = math.exp(min(0.0, 1.0 - ref_len / pred_len))
    return bp * math.exp(log_p)


def _match_pairs(pred_toks: list[str], ref_toks: list[str]) -> list[tuple[int, int]]:
    """Align the k-th occurrence of each shared word on both sides."""
    ref_positions: dict[str, list[int]] = {}
    for j, tok in enumerate(ref_toks):
        ref_positions.setdefault(tok, []).append(j)
    seen: Counter = Counter()
    pairs = []
    for i, tok in enumerate(pred_toks):
        k = seen[tok]
        positions = ref_positions.get(tok)
        if positions is not None and k < len(positions):
            pairs.append((i, positions[k]))
        seen[tok] += 1
    return pairs


def meteor(pred: str, ref: str) -> float:
    """Unigram METEOR: recall-weighted harmonic mean with a chunk penalty.

    Matches are exact unigrams paired occurrence-by-occurrence. The chunk
    count is the number of matches whose diagonal predecessor is not also
    a match, so contiguous aligned runs count once.
    """
    pred_toks = tokenize(pred)
    ref_toks = tokenize(ref)
    pairs = _match_pairs(pred_toks, ref_toks)
    m = len(pairs)
    if m == 0:
        return 0.0
    precision = m / len(pred_toks)
    recall = m / len(ref_toks)
    fmean = precision * recall / (0.9 * precision + 0.1 * recall)
    pair_set = set(pairs)
    chunks = sum(1 for (i, j) in pairs if (i - 1, j - 1) not in pair_set)
    penalty = 0.5 * (chunks / m) ** 3
    return fmean * (1.0 - penalty)


def score_pairs(pairs: Sequence[TextPair]) -> dict:
    """Corpus report: mean edit distance / F1 / METEOR plus corpus BLEU."""
    if not pairs:
        raise EmptyInput("no text pairs to score")
    edits = [edit_distance_norm(p.pred, p.ref) for p in pairs]
    prfs = [word_prf(p.pred, p.ref) for p in pairs]
    meteors = [meteor(p.pred, p.ref) for p in pairs]
    return {
        "pairs": len(pairs),
        "edit_distance_norm": sum(edits) / len(edits),
        "precision": sum(p for p, _, _ in prfs) / len(prfs),
        "recall": sum(r for _, r, _ in prfs) / len(prfs),
        "f1": sum(f for _, _, f in prfs) / len(prfs),
        "bleu": bleu(pairs),
        "meteor": sum(meteors) / len(meteors),
    }
