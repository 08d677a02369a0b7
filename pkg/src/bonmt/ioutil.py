"""JSONL and atomic-file helpers used by every pipeline stage."""

from __future__ import annotations

import json
import os
import tempfile
from typing import Any, Iterable, Iterator


def dumps_canonical(obj: Any) -> str:
    """Canonical single-line JSON: sorted keys, no ASCII escaping.

    Used everywhere so that reruns with identical inputs are byte-identical.
    """
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(", ", ": "))


def read_jsonl(path: str) -> Iterator[tuple[int, dict]]:
    """Yield (1-based line number, parsed record) for each non-blank line."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                from .errors import ValidationError

                raise ValidationError(f"{path}:{lineno}: malformed JSON record: {exc}") from exc


def write_jsonl(path: str, records: Iterable[dict]) -> None:
    """Write records atomically (temp file + rename), one canonical line each."""
    atomic_write_text(path, "".join(dumps_canonical(r) + "\n" for r in records))


def append_jsonl(path: str, records: Iterable[dict]) -> None:
    """Append records; used for append-only candidate pools."""
    with open(path, "a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(dumps_canonical(rec) + "\n")


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
