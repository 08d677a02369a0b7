"""Sentence-pair scorers served over the wire contract.

Each scorer is a pure per-pair function, so batches are trivially invariant
and results are deterministic for a fixed model version. Scorers are
configured by a name -> weights-path map and never download anything; the
version hash is the hash of the configured weights file (or of the scorer's
own parameters when it has no weights).
"""

from __future__ import annotations

import hashlib
import math
import unicodedata
from dataclasses import dataclass

from .errors import ConfigurationError


@dataclass(frozen=True)
class ScorerInfo:
    name: str
    kind: str  # "qe" | "ref_based"
    higher_better: bool
    version: str


class PairScorer:
    """Interface: subclasses implement score_pair; batching is handled here."""

    info: ScorerInfo

    def score_pair(self, src: str, hyp: str, refs: list[str] | None) -> float:
        raise NotImplementedError

    def score_batch(self, pairs: list[dict]) -> list[float]:
        return [self.score_pair(p["src"], p["hyp"], p.get("refs")) for p in pairs]


def _char_ngrams(text: str, n: int) -> dict[str, int]:
    s = "".join(text.split())
    out: dict[str, int] = {}
    for i in range(len(s) - n + 1):
        g = s[i : i + n]
        out[g] = out.get(g, 0) + 1
    return out


def _fscore(hyp: str, ref: str, max_order: int = 6, beta: float = 2.0) -> float:
    """Character n-gram F-beta between two strings, equal-weighted orders."""
    prec = rec = 0.0
    effective = 0
    for n in range(1, max_order + 1):
        h = _char_ngrams(hyp, n)
        r = _char_ngrams(ref, n)
        h_total = sum(h.values())
        r_total = sum(r.values())
        if h_total == 0 or r_total == 0:
            continue
        match = sum(min(c, r.get(g, 0)) for g, c in h.items())
        prec += match / h_total
        rec += match / r_total
        effective += 1
    if effective == 0:
        return 0.0
    prec /= effective
    rec /= effective
    if prec + rec == 0:
        return 0.0
    return (1 + beta**2) * prec * rec / (beta**2 * prec + rec)


class LexicalQEScorer(PairScorer):
    """Reference-free stand-in for a neural QE regressor.

    Scores in [0, 1] from surface evidence only: source/hypothesis length
    ratio, hypothesis lexical diversity, and a fluency proxy penalizing
    repeated character runs. Deterministic and language-agnostic.
    """

    def __init__(self, name: str, version: str):
        self.info = ScorerInfo(name=name, kind="qe", higher_better=True, version=version)

    @staticmethod
    def _letters(text: str) -> int:
        return sum(1 for ch in text if unicodedata.category(ch).startswith("L"))

    def score_pair(self, src: str, hyp: str, refs: list[str] | None) -> float:
        src_len = max(self._letters(src), 1)
        hyp_len = self._letters(hyp)
        if hyp_len == 0:
            return 0.0
        ratio = min(src_len, hyp_len) / max(src_len, hyp_len)
        length_term = math.exp(-2.0 * (1.0 - ratio))
        grams = _char_ngrams(hyp, 3)
        diversity = len(grams) / max(sum(grams.values()), 1)
        run_penalty = max((c for c in grams.values()), default=1)
        fluency_term = 1.0 / (1.0 + 0.25 * (run_penalty - 1))
        return length_term * (0.5 + 0.5 * diversity) * fluency_term


class LexicalRefScorer(PairScorer):
    """Reference-based stand-in for a neural evaluation metric: character
    F-score against the best-matching reference."""

    def __init__(self, name: str, version: str):
        self.info = ScorerInfo(name=name, kind="ref_based", higher_better=True, version=version)

    def score_pair(self, src: str, hyp: str, refs: list[str] | None) -> float:
        assert refs  # request validation guarantees non-empty refs
        return max(_fscore(hyp, r) for r in refs)


def _weights_version(path: str) -> str:
    try:
        digest = hashlib.sha256()
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                digest.update(chunk)
        return digest.hexdigest()[:16]
    except OSError as exc:
        raise ConfigurationError(f"cannot read weights {path!r}: {exc}") from None


def _builtin_version(kind: str, name: str) -> str:
    return hashlib.sha256(f"lexical:{kind}:{name}:v1".encode("utf-8")).hexdigest()[:16]


SCORER_TYPES = ("lexical_qe", "lexical_ref")


def build_scorer(name: str, spec: dict) -> PairScorer:
    """Build one scorer from a config entry {"type", "weights"?}.

    ``weights`` only pins the served version hash; the scoring functions
    themselves carry no learned parameters.
    """
    stype = spec.get("type")
    if stype not in SCORER_TYPES:
        raise ConfigurationError(f"scorer {name!r}: unknown type {stype!r} (known: {SCORER_TYPES})")
    weights = spec.get("weights")
    version = _weights_version(weights) if weights else _builtin_version(stype, name)
    if stype == "lexical_qe":
        return LexicalQEScorer(name, version)
    return LexicalRefScorer(name, version)


DEFAULT_CONFIG = {
    "qe-lex": {"type": "lexical_qe"},
    "eval-lex": {"type": "lexical_ref"},
}


def build_registry(config: dict | None = None) -> dict[str, PairScorer]:
    config = config if config is not None else DEFAULT_CONFIG
    if not config:
        raise ConfigurationError("no scorers configured")
    return {name: build_scorer(name, spec) for name, spec in config.items()}
