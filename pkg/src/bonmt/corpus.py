"""WMT-style test sets: segments with language pair, domain tag, and references.

Datasets are immutable after load and safe for concurrent shared reads. Text is
stored unnormalized; any Unicode normalization is a metric-level concern.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError
from .ioutil import read_jsonl, write_jsonl


@dataclass(frozen=True)
class LangPair:
    src: str
    tgt: str

    def __post_init__(self):
        for code in (self.src, self.tgt):
            if not (2 <= len(code) <= 3 and code.isascii() and code.isalpha() and code.islower()):
                raise ValidationError(f"bad language code {code!r}: want lowercase ASCII, length 2-3")
        if self.src == self.tgt:
            raise ValidationError(f"source and target language are both {self.src!r}")

    @classmethod
    def parse(cls, s: str) -> "LangPair":
        parts = s.split("-")
        if len(parts) != 2:
            raise ValidationError(f"bad language pair {s!r}: want 'src-tgt'")
        return cls(parts[0], parts[1])

    def __str__(self) -> str:
        return f"{self.src}-{self.tgt}"


@dataclass(frozen=True)
class Segment:
    id: str
    pair: LangPair
    domain: str
    src: str
    refs: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise ValidationError("segment id must be non-empty")
        if not self.src:
            raise ValidationError(f"segment {self.id!r}: empty src")
        for i, ref in enumerate(self.refs):
            if not ref:
                raise ValidationError(f"segment {self.id!r}: empty reference at position {i}")


@dataclass(frozen=True)
class Dataset:
    name: str
    segments: tuple[Segment, ...]
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_id = {}
        for seg in self.segments:
            if seg.id in by_id:
                raise ValidationError(f"duplicate segment id {seg.id!r}")
            by_id[seg.id] = seg
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    def get(self, seg_id: str) -> Segment:
        try:
            return self._by_id[seg_id]
        except KeyError:
            raise ValidationError(f"unknown segment id {seg_id!r}") from None


_REQUIRED_KEYS = ("id", "src_lang", "tgt_lang", "domain", "src", "refs")


def load_dataset(path: str, name: str | None = None) -> Dataset:
    """Load a segments.jsonl file, validating each record.

    Errors carry the offending line number. Ordering is preserved and duplicate
    ids are rejected.
    """
    segments = []
    seen: set[str] = set()
    for lineno, rec in read_jsonl(path):
        missing = [k for k in _REQUIRED_KEYS if k not in rec]
        if missing:
            raise ValidationError(f"{path}:{lineno}: missing keys {missing}")
        try:
            seg = Segment(
                id=str(rec["id"]),
                pair=LangPair(rec["src_lang"], rec["tgt_lang"]),
                domain=str(rec["domain"]),
                src=rec["src"],
                refs=tuple(rec["refs"]),
            )
        except ValidationError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from None
        if seg.id in seen:
            raise ValidationError(f"{path}:{lineno}: duplicate id {seg.id!r}")
        seen.add(seg.id)
        segments.append(seg)
    if not segments:
        raise ValidationError(f"{path}: empty dataset")
    return Dataset(name=name or path, segments=tuple(segments))


def save_dataset(ds: Dataset, path: str) -> None:
    write_jsonl(path, (segment_record(seg) for seg in ds))


def segment_record(seg: Segment) -> dict:
    return {
        "id": seg.id,
        "src_lang": seg.pair.src,
        "tgt_lang": seg.pair.tgt,
        "domain": seg.domain,
        "src": seg.src,
        "refs": list(seg.refs),
    }


def filter_pair(ds: Dataset, pair: LangPair) -> Dataset:
    """Order-preserving subset on one language pair; empty result is allowed."""
    subset = tuple(seg for seg in ds if seg.pair == pair)
    return Dataset(name=f"{ds.name}[{pair}]", segments=subset)
