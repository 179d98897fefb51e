"""Batch orchestration: run cases through prompt, truth diagram and backend
generation, with per-case isolation and a persisted run manifest."""
from __future__ import annotations

import json
import secrets
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .backends import (
    BackendConfig,
    MEDIA_EXTENSIONS,
    generate,
    mock_generate,
)
from .errors import BackendError, CrashvizError, ManifestWriteFailure
from .geometry import GeometryTemplate, standard_template
from .prompt import build_prompt
from .records import CrashRecord, parse_record
from .scene import RenderOptions, base_scene, build_scene, render_svg
from .store import CaseStore, case_slug

STATUS_OK = "ok"
STATUS_FAILED = "failed"
STATUS_SKIPPED = "skipped"


@dataclass(frozen=True)
class CaseOutcome:
    case_id: str
    backend_name: str
    model_id: str
    status: str
    reason: str | None = None
    from_cache: bool = False


@dataclass
class RunManifest:
    run_id: str
    backends: list[dict]
    entries: list[CaseOutcome] = field(default_factory=list)
    started_at: str = ""
    finished_at: str = ""

    @property
    def counts(self) -> dict[str, int]:
        tally = {STATUS_OK: 0, STATUS_FAILED: 0, STATUS_SKIPPED: 0}
        for entry in self.entries:
            tally[entry.status] += 1
        return tally

    @property
    def all_ok(self) -> bool:
        return all(entry.status == STATUS_OK for entry in self.entries)

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "backends": self.backends,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "counts": self.counts,
            "entries": [
                {
                    "case_id": e.case_id,
                    "backend": e.backend_name,
                    "model_id": e.model_id,
                    "status": e.status,
                    "reason": e.reason,
                    "from_cache": e.from_cache,
                }
                for e in sorted(self.entries, key=lambda e: (e.case_id, e.backend_name))
            ],
        }


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _backend_summary(config: BackendConfig) -> dict:
    return {
        "name": config.name,
        "endpoint_url": config.endpoint_url,
        "model_id": config.model_id,
        "max_retries": config.max_retries,
        "max_inflight": config.max_inflight,
    }


def run_case(
    record: CrashRecord,
    template: GeometryTemplate,
    backend: BackendConfig,
    store: CaseStore,
    *,
    skip_existing: bool = True,
) -> CaseOutcome:
    """Produce and persist all artifacts for one (case, backend) pair:
    prompt text, base layout, deterministic truth diagram, and the backend
    generation. The record file is committed last on first materialization
    so partially written cases stay invisible. Re-runs are idempotent: an
    existing generation short-circuits the backend call entirely."""
    case_id = record.case_id
    try:
        bundle = build_prompt(template, report_image=record.report_image_ref)
        truth_svg = render_svg(build_scene(record, template), RenderOptions())
        base_svg = render_svg(base_scene(template), RenderOptions())

        gen_name = f"gen/{case_slug(backend.model_id)}"
        existing = [
            f"{gen_name}.{ext}"
            for ext in MEDIA_EXTENSIONS.values()
            if store.has_artifact(case_id, f"{gen_name}.{ext}")
        ]
        if skip_existing and existing and store.has_case(case_id):
            return CaseOutcome(
                case_id, backend.name, backend.model_id, STATUS_OK, from_cache=True
            )

        if backend.is_mock:
            result = mock_generate(bundle, record, template)
        else:
            result = generate(bundle, backend, cache=store.cache)

        store.write_artifact(case_id, "prompt.txt", bundle.text.encode("utf-8"))
        store.write_artifact(case_id, "base_layout.svg", base_svg)
        store.write_artifact(case_id, "truth.svg", truth_svg)
        store.write_artifact(
            case_id, f"{gen_name}.{MEDIA_EXTENSIONS[result.media_kind]}", result.image_bytes
        )
        store.write_record(record)  # sentinel: case becomes visible here
        return CaseOutcome(
            case_id,
            backend.name,
            backend.model_id,
            STATUS_OK,
            from_cache=result.from_cache,
        )
    except BackendError as exc:
        return CaseOutcome(
            case_id, backend.name, backend.model_id, STATUS_FAILED, reason=str(exc)
        )
    except CrashvizError as exc:
        return CaseOutcome(
            case_id, backend.name, backend.model_id, STATUS_FAILED, reason=str(exc)
        )


def load_records_file(path: Path | str) -> list[CrashRecord | CrashvizError]:
    """Read a corpus file: a JSON array of record documents, or JSONL.

    Malformed entries come back as the error they raised, so a batch can
    skip them while processing the rest.
    """
    path = Path(path)
    raw = path.read_text("utf-8")
    docs: list[str]
    if path.suffix == ".jsonl":
        docs = [line for line in raw.splitlines() if line.strip()]
    else:
        parsed = json.loads(raw)
        if not isinstance(parsed, list):
            raise CrashvizError("records file must hold a JSON array (or use .jsonl)")
        docs = [json.dumps(doc) for doc in parsed]
    out: list[CrashRecord | CrashvizError] = []
    for doc in docs:
        try:
            out.append(parse_record(doc))
        except CrashvizError as exc:
            out.append(exc)
    return out


def run_batch(
    records: Sequence[CrashRecord | CrashvizError] | Path | str,
    template: GeometryTemplate | None,
    backends: Iterable[BackendConfig],
    store: CaseStore,
    *,
    parallelism: int = 4,
    run_id: str | None = None,
    skip_existing: bool = True,
) -> RunManifest:
    """Attempt every (case, backend) pair with bounded concurrency.

    Unparseable records are marked skipped per backend; backend failures
    mark only their own pair failed. The manifest lands in runs/.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    if isinstance(records, (str, Path)):
        records = load_records_file(records)
    template = template or standard_template()
    backend_list = list(backends)
    manifest = RunManifest(
        run_id=run_id or f"run-{datetime.now(timezone.utc):%Y%m%dT%H%M%S}-{secrets.token_hex(3)}",
        backends=[_backend_summary(b) for b in backend_list],
        started_at=_utc_now(),
    )

    work: list[tuple[CrashRecord, BackendConfig]] = []
    for index, item in enumerate(records):
        if isinstance(item, CrashvizError):
            for backend in backend_list:
                manifest.entries.append(
                    CaseOutcome(
                        case_id=f"<unparsed-{index}>",
                        backend_name=backend.name,
                        model_id=backend.model_id,
                        status=STATUS_SKIPPED,
                        reason=str(item),
                    )
                )
            continue
        for backend in backend_list:
            work.append((item, backend))

    if work:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = pool.map(
                lambda pair: run_case(
                    pair[0], template, pair[1], store, skip_existing=skip_existing
                ),
                work,
            )
            manifest.entries.extend(outcomes)

    manifest.finished_at = _utc_now()
    manifest_path = store.root / "runs" / f"{case_slug(manifest.run_id)}.json"
    try:
        store._atomic_write(
            manifest_path, (json.dumps(manifest.to_dict(), indent=2) + "\n").encode("utf-8")
        )
    except OSError as exc:
        raise ManifestWriteFailure(f"could not write manifest: {exc}") from exc
    return manifest
