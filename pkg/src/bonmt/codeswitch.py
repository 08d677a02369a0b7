"""Code-switching detection: flag hypotheses whose letters largely come from
scripts foreign to the target language.

This is a script-anomaly detector only; it makes no fluency or adequacy
judgment. Latin is admitted for every target language so proper nouns and
spelled-out numbers never trip the detector.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass

from .errors import ConfigError
from .generation import CandidatePool

# Letter-script ranges for the scripts that occur in WMT-style data. Letters
# from ranges not listed here count under "Other", which is always foreign.
_SCRIPT_RANGES = [
    (0x0041, 0x024F, "Latin"),
    (0x1E00, 0x1EFF, "Latin"),
    (0x2C60, 0x2C7F, "Latin"),
    (0xA720, 0xA7FF, "Latin"),
    (0x0370, 0x03FF, "Greek"),
    (0x1F00, 0x1FFF, "Greek"),
    (0x0400, 0x052F, "Cyrillic"),
    (0x2DE0, 0x2DFF, "Cyrillic"),
    (0xA640, 0xA69F, "Cyrillic"),
    (0x0530, 0x058F, "Armenian"),
    (0x0590, 0x05FF, "Hebrew"),
    (0x0600, 0x06FF, "Arabic"),
    (0x0750, 0x077F, "Arabic"),
    (0x08A0, 0x08FF, "Arabic"),
    (0x0900, 0x097F, "Devanagari"),
    (0x0980, 0x09FF, "Bengali"),
    (0x0B80, 0x0BFF, "Tamil"),
    (0x0E00, 0x0E7F, "Thai"),
    (0x10A0, 0x10FF, "Georgian"),
    (0x1100, 0x11FF, "Hangul"),
    (0xA960, 0xA97F, "Hangul"),
    (0xAC00, 0xD7FF, "Hangul"),
    (0x3040, 0x309F, "Hiragana"),
    (0x30A0, 0x30FF, "Katakana"),
    (0x31F0, 0x31FF, "Katakana"),
    (0xFF66, 0xFF9D, "Katakana"),
    (0x2E80, 0x2FDF, "Han"),
    (0x3400, 0x4DBF, "Han"),
    (0x4E00, 0x9FFF, "Han"),
    (0xF900, 0xFAFF, "Han"),
    (0x20000, 0x2FA1F, "Han"),
]

# Expected letter scripts per target language. Latin everywhere by design.
EXPECTED_SCRIPTS = {
    "en": {"Latin"},
    "de": {"Latin"},
    "es": {"Latin"},
    "fr": {"Latin"},
    "is": {"Latin"},
    "cs": {"Latin"},
    "ru": {"Cyrillic", "Latin"},
    "uk": {"Cyrillic", "Latin"},
    "zh": {"Han", "Latin"},
    "ja": {"Hiragana", "Katakana", "Han", "Latin"},
    "ko": {"Hangul", "Han", "Latin"},
    "ar": {"Arabic", "Latin"},
    "he": {"Hebrew", "Latin"},
    "hi": {"Devanagari", "Latin"},
    "th": {"Thai", "Latin"},
    "el": {"Greek", "Latin"},
}

DEFAULT_THRESHOLD = 0.30


@dataclass(frozen=True)
class ScriptProfile:
    counts: dict[str, int]
    total_letters: int

    @property
    def ratios(self) -> dict[str, float]:
        if self.total_letters == 0:
            return {}
        return {s: c / self.total_letters for s, c in self.counts.items()}


@dataclass(frozen=True)
class CodeSwitchVerdict:
    flagged: bool
    foreign_ratio: float
    dominant_foreign_script: str | None
    threshold: float


def _script_of(ch: str) -> str:
    cp = ord(ch)
    for lo, hi, script in _SCRIPT_RANGES:
        if lo <= cp <= hi:
            return script
    return "Other"


def script_profile(text: str) -> ScriptProfile:
    """Per-script letter counts; digits, punctuation, whitespace excluded."""
    counts: dict[str, int] = {}
    total = 0
    for ch in text:
        if not unicodedata.category(ch).startswith("L"):
            continue
        script = _script_of(ch)
        counts[script] = counts.get(script, 0) + 1
        total += 1
    return ScriptProfile(counts=counts, total_letters=total)


def detect(text: str, tgt_lang: str, threshold: float = DEFAULT_THRESHOLD) -> CodeSwitchVerdict:
    """Flag text whose foreign-script letter ratio reaches the threshold."""
    expected = EXPECTED_SCRIPTS.get(tgt_lang)
    if expected is None:
        raise ConfigError(f"no expected-script set configured for language {tgt_lang!r}")
    profile = script_profile(text)
    if profile.total_letters == 0:
        return CodeSwitchVerdict(False, 0.0, None, threshold)
    foreign = {s: c for s, c in profile.counts.items() if s not in expected}
    foreign_ratio = sum(foreign.values()) / profile.total_letters
    dominant = max(foreign, key=foreign.get) if foreign else None
    return CodeSwitchVerdict(
        flagged=foreign_ratio >= threshold,
        foreign_ratio=foreign_ratio,
        dominant_foreign_script=dominant,
        threshold=threshold,
    )


def pool_codeswitch_rate(
    pool: CandidatePool, tgt_lang: str, threshold: float = DEFAULT_THRESHOLD
) -> float:
    """Fraction of flagged candidates in the pool."""
    if not pool.candidates:
        raise ConfigError("empty pool")
    flagged = sum(1 for c in pool.candidates if detect(c.text, tgt_lang, threshold).flagged)
    return flagged / len(pool.candidates)


def verdict_record(seg_id: str, cand_idx: int, verdict: CodeSwitchVerdict) -> dict:
    return {
        "seg_id": seg_id,
        "cand_idx": cand_idx,
        "flagged": verdict.flagged,
        "foreign_ratio": verdict.foreign_ratio,
        "dominant_foreign_script": verdict.dominant_foreign_script,
    }
