"""Directory-per-case artifact store with atomic, crash-safe writes.

Layout:

    <root>/cases/<case_id>/record.json       (visibility sentinel)
                            prompt.txt
                            base_layout.svg
                            truth.svg
                            gen/<model_id>.<ext>
                            sheets/<rater_id>.csv
    <root>/cache/                             (backend response cache)
    <root>/runs/<run_id>.json                 (batch manifests)

Every file write goes to a temp name in the same directory followed by an
atomic rename; record.json is written last when a case is first
materialized, so a half-written case is never visible. Writes within one
case are serialized by an in-process lock.
"""
from __future__ import annotations

import hashlib
import json
import os
import re
import threading
from pathlib import Path
from typing import Iterator

from .backends import ResponseCache
from .errors import SchemaViolation
from .evaluation import ScoreSheet, SHEET_COLUMNS, ingest_sheets, sheet_to_row
from .records import CrashRecord, parse_record, serialize_record

RECORD_FILE = "record.json"
_SAFE_ID = re.compile(r"^[a-z0-9-]+$")


def case_slug(case_id: str) -> str:
    """Filesystem-safe directory name for a case id.

    Already-safe ids (lowercase alphanumerics and dashes) pass through;
    anything else is normalized and suffixed with a short content hash so
    distinct ids cannot collide.
    """
    if _SAFE_ID.match(case_id):
        return case_id
    base = re.sub(r"-+", "-", re.sub(r"[^a-z0-9-]+", "-", case_id.lower())).strip("-")
    suffix = hashlib.sha1(case_id.encode("utf-8")).hexdigest()[:6]
    return f"{base}-{suffix}" if base else f"case-{suffix}"


class CaseStore:
    def __init__(self, root: Path | str):
        self.root = Path(root)
        (self.root / "cases").mkdir(parents=True, exist_ok=True)
        (self.root / "runs").mkdir(parents=True, exist_ok=True)
        self._cache = ResponseCache(self.root / "cache")
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    @property
    def cache(self) -> ResponseCache:
        return self._cache

    def case_lock(self, case_id: str) -> threading.Lock:
        slug = case_slug(case_id)
        with self._locks_guard:
            lock = self._locks.get(slug)
            if lock is None:
                lock = threading.Lock()
                self._locks[slug] = lock
            return lock

    def case_dir(self, case_id: str) -> Path:
        return self.root / "cases" / case_slug(case_id)

    def list_cases(self) -> list[str]:
        """Slugs of all visible cases (those with a committed record)."""
        cases_dir = self.root / "cases"
        return sorted(
            entry.name
            for entry in cases_dir.iterdir()
            if entry.is_dir() and (entry / RECORD_FILE).is_file()
        )

    def has_case(self, case_id: str) -> bool:
        return (self.case_dir(case_id) / RECORD_FILE).is_file()

    def get_record(self, case_id: str) -> CrashRecord:
        return parse_record((self.case_dir(case_id) / RECORD_FILE).read_bytes())

    @staticmethod
    def _atomic_write(path: Path, payload: bytes) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(f".{path.name}.tmp-{os.getpid()}-{threading.get_ident()}")
        tmp.write_bytes(payload)
        os.replace(tmp, path)

    def _artifact_path(self, case_id: str, name: str) -> Path:
        rel = Path(name)
        if rel.is_absolute() or ".." in rel.parts:
            raise SchemaViolation("artifact", f"unsafe artifact path: {name!r}")
        return self.case_dir(case_id) / rel

    def write_artifact(self, case_id: str, name: str, payload: bytes) -> Path:
        path = self._artifact_path(case_id, name)
        with self.case_lock(case_id):
            self._atomic_write(path, payload)
        return path

    def write_record(self, record: CrashRecord) -> Path:
        return self.write_artifact(record.case_id, RECORD_FILE, serialize_record(record))

    def read_artifact(self, case_id: str, name: str) -> bytes:
        return self._artifact_path(case_id, name).read_bytes()

    def has_artifact(self, case_id: str, name: str) -> bool:
        return self._artifact_path(case_id, name).is_file()

    def list_artifacts(self, case_id: str) -> list[str]:
        base = self.case_dir(case_id)
        if not base.is_dir():
            return []
        found = []
        for path in sorted(base.rglob("*")):
            if path.is_file() and not path.name.startswith("."):
                found.append(path.relative_to(base).as_posix())
        return found

    # --- score sheets ---------------------------------------------------

    def append_sheet(self, sheet: ScoreSheet) -> Path:
        """Append one sheet row to sheets/<rater_id>.csv, creating the
        header on first write. Appends are serialized per case."""
        import csv
        import io

        path = self._artifact_path(sheet.case_id, f"sheets/{case_slug(sheet.rater_id)}.csv")
        with self.case_lock(sheet.case_id):
            path.parent.mkdir(parents=True, exist_ok=True)
            buffer = io.StringIO()
            writer = csv.writer(buffer, lineterminator="\n")
            if not path.is_file():
                writer.writerow(SHEET_COLUMNS)
            writer.writerow(sheet_to_row(sheet))
            with path.open("a", encoding="utf-8", newline="") as handle:
                handle.write(buffer.getvalue())
        return path

    def replace_sheets(self, case_id: str, rater_id: str, sheets: list[ScoreSheet]) -> Path:
        """Overwrite one rater's sheet file for a case (idempotent re-runs)."""
        from .evaluation import sheets_to_csv

        path = self._artifact_path(case_id, f"sheets/{case_slug(rater_id)}.csv")
        with self.case_lock(case_id):
            self._atomic_write(path, sheets_to_csv(sheets))
        return path

    def iter_sheets(self, case_id: str) -> Iterator[ScoreSheet]:
        sheets_dir = self.case_dir(case_id) / "sheets"
        if not sheets_dir.is_dir():
            return
        for path in sorted(sheets_dir.glob("*.csv")):
            yield from ingest_sheets(path.read_bytes())

    def all_sheets(self) -> list[ScoreSheet]:
        sheets: list[ScoreSheet] = []
        for slug in self.list_cases():
            sheets.extend(self.iter_sheets(slug))
        return sheets

    def report_sheets(self) -> list[ScoreSheet]:
        """Sheets feeding the benchmark report: for each (case, model),
        consensus rows replace the individual rater rows when present."""
        from .evaluation import CONSENSUS_RATER

        grouped: dict[tuple[str, str], list[ScoreSheet]] = {}
        for sheet in self.all_sheets():
            grouped.setdefault((sheet.case_id, sheet.model_id), []).append(sheet)
        selected: list[ScoreSheet] = []
        for key in sorted(grouped):
            rows = grouped[key]
            consensus = [s for s in rows if s.rater_id == CONSENSUS_RATER]
            selected.extend(consensus if consensus else rows)
        return selected
