"""Labeled dataset ingestion: JSONL and two-column TSV."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

log = logging.getLogger(__name__)


class DatasetError(Exception):
    """Unreadable file, malformed line, or empty result."""


@dataclass(frozen=True)
class DatasetRecord:
    text: str
    label: str


def ingest(
    path: str,
    fmt: str = "jsonl",
    *,
    on_error: str = "raise",
    skip_header: bool = False,
) -> list[DatasetRecord]:
    """Read labeled texts from ``path``.

    JSONL: one object per line carrying "text" and "label". TSV: label TAB
    text, no header unless ``skip_header``. Bad lines raise with the line
    number, or are skipped with a warning under ``on_error="skip"``.
    """
    if fmt not in ("jsonl", "tsv"):
        raise ValueError(f"unknown dataset format {fmt!r}")
    if on_error not in ("raise", "skip"):
        raise ValueError(f"on_error must be 'raise' or 'skip', got {on_error!r}")

    def fail(lineno: int, message: str) -> None:
        if on_error == "raise":
            raise DatasetError(f"{path}:{lineno}: {message}")
        log.warning("%s:%d: %s (skipped)", path, lineno, message)

    records: list[DatasetRecord] = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if skip_header and lineno == 1:
                continue
            if not line.strip():
                continue
            if fmt == "jsonl":
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    fail(lineno, f"invalid JSON: {exc}")
                    continue
                if not isinstance(obj, dict) or "text" not in obj or "label" not in obj:
                    fail(lineno, 'object must carry "text" and "label"')
                    continue
                text, label = str(obj["text"]), str(obj["label"])
            else:
                parts = line.rstrip("\n").split("\t")
                if len(parts) != 2:
                    fail(lineno, f"expected 2 tab-separated columns, found {len(parts)}")
                    continue
                label, text = parts
            if not text.strip():
                fail(lineno, "empty text")
                continue
            if not label:
                fail(lineno, "empty label")
                continue
            records.append(DatasetRecord(text=text, label=label))

    if not records:
        raise DatasetError(f"{path}: no usable records")
    return records


def save_jsonl(records: list[DatasetRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps({"text": rec.text, "label": rec.label}, ensure_ascii=False) + "\n")
