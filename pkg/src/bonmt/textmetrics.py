"""Native corpus BLEU and chrF++, convention-compatible with standard WMT
tooling, plus corpus-level curve aggregation.

Neural evaluation metrics are never reimplemented here; they arrive through
the remote scorer client. These string metrics are the interference-free
evaluation signals.
"""

from __future__ import annotations

import math
import re
import sys
import unicodedata
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError
from .selection import CurvePoint


@dataclass(frozen=True)
class BleuConfig:
    max_ngram: int = 4
    smoothing: str = "none"  # "none" or "add_k"
    smooth_k: float = 1.0
    tokenizer: str = "intl_13a_compatible"  # or "char_level"
    case_sensitive: bool = True

    def __post_init__(self):
        if self.max_ngram < 1:
            raise ValidationError("max_ngram must be >= 1")
        if self.smoothing not in ("none", "add_k"):
            raise ValidationError(f"unknown smoothing {self.smoothing!r}")
        if self.tokenizer not in ("intl_13a_compatible", "char_level"):
            raise ValidationError(f"unknown tokenizer {self.tokenizer!r}")

    @property
    def signature(self) -> str:
        case = "mixed" if self.case_sensitive else "lc"
        return f"bleu|n:{self.max_ngram}|smooth:{self.smoothing}|tok:{self.tokenizer}|case:{case}"


@dataclass(frozen=True)
class ChrfConfig:
    char_order: int = 6
    word_order: int = 2
    beta: float = 2.0

    def __post_init__(self):
        if self.char_order < 1 or self.word_order < 0:
            raise ValidationError("chrF orders must be >= 1 (word order >= 0)")
        if self.beta <= 0:
            raise ValidationError("beta must be > 0")

    @property
    def signature(self) -> str:
        return f"chrfpp|c:{self.char_order}|w:{self.word_order}|beta:{self.beta:g}"


# --- tokenization -----------------------------------------------------------


def tokenize_13a(line: str) -> list[str]:
    """Minimal tokenization equivalent to the WMT mteval-v13a conventions."""
    norm = line.replace("<skipped>", "")
    norm = norm.replace("-\n", "").replace("\n", " ")
    norm = norm.replace("&quot;", '"').replace("&amp;", "&")
    norm = norm.replace("&lt;", "<").replace("&gt;", ">")
    norm = f" {norm} "
    norm = re.sub(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])", r" \1 ", norm)
    norm = re.sub(r"([^0-9])([\.,])", r"\1 \2 ", norm)
    norm = re.sub(r"([\.,])([^0-9])", r" \1 \2", norm)
    norm = re.sub(r"([0-9])(-)", r"\1 \2 ", norm)
    return norm.split()


def tokenize_chars(line: str) -> list[str]:
    """Every non-space character is its own token (zh/ja evaluation)."""
    return [ch for ch in line if not ch.isspace()]


def _tokenize(line: str, cfg: BleuConfig) -> list[str]:
    if not cfg.case_sensitive:
        line = line.lower()
    if cfg.tokenizer == "char_level":
        return tokenize_chars(line)
    return tokenize_13a(line)


@lru_cache(maxsize=1)
def _punct_chars() -> frozenset:
    return frozenset(
        chr(cp) for cp in range(sys.maxunicode + 1) if unicodedata.category(chr(cp)).startswith("P")
    )


def chrf_words(line: str) -> list[str]:
    """Word tokens for the chrF++ word-ngram component.

    Punctuation characters become standalone tokens; everything else splits on
    whitespace.
    """
    punct = _punct_chars()
    out = []
    for chunk in line.split():
        word = []
        for ch in chunk:
            if ch in punct:
                if word:
                    out.append("".join(word))
                    word = []
                out.append(ch)
            else:
                word.append(ch)
        if word:
            out.append("".join(word))
    return out


# --- BLEU -------------------------------------------------------------------


def _ngram_counts(tokens: list[str], max_order: int) -> Counter:
    counts: Counter = Counter()
    for n in range(1, max_order + 1):
        for i in range(len(tokens) - n + 1):
            counts[tuple(tokens[i : i + n])] += 1
    return counts


def _closest_ref_len(hyp_len: int, ref_lens: list[int]) -> int:
    return min(ref_lens, key=lambda rl: (abs(rl - hyp_len), rl))


def bleu_corpus(hyps: list[str], refs: list[list[str]], cfg: BleuConfig | None = None) -> float:
    """Corpus BLEU in [0, 100]: brevity penalty times the geometric mean of
    modified n-gram precisions.
    """
    cfg = cfg or BleuConfig()
    if len(hyps) != len(refs):
        raise ValidationError(f"{len(hyps)} hypotheses vs {len(refs)} reference lists")
    if not hyps:
        raise ValidationError("empty corpus")
    correct = [0] * cfg.max_ngram
    total = [0] * cfg.max_ngram
    hyp_len = 0
    ref_len = 0
    for hyp, ref_list in zip(hyps, refs):
        if not ref_list:
            raise ValidationError("segment with empty reference list")
        hyp_tokens = _tokenize(hyp, cfg)
        ref_token_lists = [_tokenize(r, cfg) for r in ref_list]
        hyp_len += len(hyp_tokens)
        ref_len += _closest_ref_len(len(hyp_tokens), [len(r) for r in ref_token_lists])

        hyp_ngrams = _ngram_counts(hyp_tokens, cfg.max_ngram)
        ref_ngrams: Counter = Counter()
        for rt in ref_token_lists:
            for ngram, count in _ngram_counts(rt, cfg.max_ngram).items():
                ref_ngrams[ngram] = max(ref_ngrams[ngram], count)
        for ngram, count in hyp_ngrams.items():
            n = len(ngram)
            correct[n - 1] += min(count, ref_ngrams.get(ngram, 0))
            total[n - 1] += count

    log_sum = 0.0
    for n in range(1, cfg.max_ngram + 1):
        c, t = correct[n - 1], total[n - 1]
        if cfg.smoothing == "add_k" and n > 1:
            c += cfg.smooth_k
            t += cfg.smooth_k
        if t == 0 or c == 0:
            return 0.0
        log_sum += math.log(c / t)
    bp = 1.0
    if hyp_len < ref_len:
        bp = math.exp(1 - ref_len / hyp_len) if hyp_len > 0 else 0.0
    return 100.0 * bp * math.exp(log_sum / cfg.max_ngram)


# --- chrF++ -----------------------------------------------------------------


def _chrf_stats(hyp: str, ref: str, cfg: ChrfConfig) -> list[int]:
    """Per-order (hyp total, ref total, matched) for char then word n-grams."""
    stats = []
    hyp_chars = re.sub(r"\s+", "", hyp)
    ref_chars = re.sub(r"\s+", "", ref)
    for n in range(1, cfg.char_order + 1):
        h = Counter(tuple(hyp_chars[i : i + n]) for i in range(len(hyp_chars) - n + 1))
        r = Counter(tuple(ref_chars[i : i + n]) for i in range(len(ref_chars) - n + 1))
        common = h & r
        stats.extend([sum(h.values()), sum(r.values()), sum(common.values())])
    hyp_words = chrf_words(hyp)
    ref_words = chrf_words(ref)
    for n in range(1, cfg.word_order + 1):
        h = Counter(tuple(hyp_words[i : i + n]) for i in range(len(hyp_words) - n + 1))
        r = Counter(tuple(ref_words[i : i + n]) for i in range(len(ref_words) - n + 1))
        common = h & r
        stats.extend([sum(h.values()), sum(r.values()), sum(common.values())])
    return stats


def _chrf_from_stats(stats: list[int], cfg: ChrfConfig) -> float:
    avg_p = 0.0
    avg_r = 0.0
    effective = 0
    for i in range(cfg.char_order + cfg.word_order):
        h, r, c = stats[3 * i], stats[3 * i + 1], stats[3 * i + 2]
        if h > 0 and r > 0:
            avg_p += c / h
            avg_r += c / r
            effective += 1
    if effective == 0:
        return 0.0
    avg_p /= effective
    avg_r /= effective
    if avg_p + avg_r == 0:
        return 0.0
    b2 = cfg.beta**2
    return 100.0 * (1 + b2) * avg_p * avg_r / (b2 * avg_p + avg_r)


def chrfpp_corpus(hyps: list[str], refs: list[list[str]], cfg: ChrfConfig | None = None) -> float:
    """Corpus chrF++ in [0, 100]: F_beta over corpus-summed char 1..6 and word
    1..2 n-gram statistics.

    With multiple references, each segment contributes the statistics of its
    best-matching reference (highest sentence-level score).
    """
    cfg = cfg or ChrfConfig()
    if len(hyps) != len(refs):
        raise ValidationError(f"{len(hyps)} hypotheses vs {len(refs)} reference lists")
    if not hyps:
        raise ValidationError("empty corpus")
    n_orders = cfg.char_order + cfg.word_order
    corpus = [0] * (3 * n_orders)
    for hyp, ref_list in zip(hyps, refs):
        if not ref_list:
            raise ValidationError("segment with empty reference list")
        best = max(
            (_chrf_stats(hyp, ref, cfg) for ref in ref_list),
            key=lambda s: _chrf_from_stats(s, cfg),
        )
        corpus = [a + b for a, b in zip(corpus, best)]
    return _chrf_from_stats(corpus, cfg)


# --- corpus-level curve aggregation ----------------------------------------


def curve_eval_corpus(
    selections_per_draw: list[dict[str, str]],
    refs: dict[str, list[str]],
    metric_name: str,
    n: int,
    bleu_cfg: BleuConfig | None = None,
    chrf_cfg: ChrfConfig | None = None,
) -> CurvePoint:
    """One curve point for a corpus metric: recompute the corpus score per
    draw over the selected hypotheses, then mean/std (population) over draws.
    """
    if not selections_per_draw:
        raise ValidationError("no draws")
    seg_ids = sorted(refs)
    scores = []
    for draw in selections_per_draw:
        missing = [s for s in seg_ids if s not in draw]
        if missing:
            raise ValidationError(f"draw is missing selections for segments {missing[:5]}")
        hyps = [draw[s] for s in seg_ids]
        ref_lists = [refs[s] for s in seg_ids]
        if metric_name == "bleu":
            scores.append(bleu_corpus(hyps, ref_lists, bleu_cfg))
        elif metric_name == "chrfpp":
            scores.append(chrfpp_corpus(hyps, ref_lists, chrf_cfg))
        else:
            raise ValidationError(f"unknown corpus metric {metric_name!r}")
    arr = np.array(scores)
    return CurvePoint(
        n=n, metric=metric_name, mean=float(arr.mean()), std=float(arr.std()), n_draws=len(scores)
    )


def default_bleu_config(tgt_lang: str) -> BleuConfig:
    """WMT convention: character-level evaluation for zh and ja targets."""
    if tgt_lang in ("zh", "ja"):
        return BleuConfig(tokenizer="char_level")
    return BleuConfig()
