"""HTTP serve layer: case browsing, artifact hosting, score submission,
consensus resolution, benchmark reports, and the static review UI."""
from __future__ import annotations

import json
import signal
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlparse

from .benchmark import aggregate, render_csv, render_markdown, report_to_dict
from .errors import BindFailure, CrashvizError, EmptyInput, MismatchedCase, SchemaViolation
from .evaluation import (
    METRIC_DESCRIPTIONS,
    METRIC_LABELS,
    METRIC_ORDER,
    MetricId,
    ScoreSheet,
    merge_ratings,
)
from .records import record_to_dict
from .store import CaseStore

_CONTENT_TYPES = {
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".jpg": "image/jpeg",
    ".jpeg": "image/jpeg",
    ".json": "application/json",
    ".txt": "text/plain; charset=utf-8",
    ".csv": "text/csv; charset=utf-8",
    ".html": "text/html; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".map": "application/json",
}

_FALLBACK_INDEX = b"""<!doctype html>
<html><head><meta charset="utf-8"><title>crashviz</title></head>
<body><h1>crashviz store</h1>
<p>No review UI bundle is installed. The API is live:</p>
<ul>
<li><a href="/api/cases">/api/cases</a></li>
<li><a href="/api/report?format=json">/api/report</a></li>
<li><a href="/healthz">/healthz</a></li>
</ul></body></html>
"""


def _metric_payload() -> list[dict]:
    return [
        {
            "id": metric.column,
            "label": METRIC_LABELS[metric],
            "description": METRIC_DESCRIPTIONS[metric],
        }
        for metric in METRIC_ORDER
    ]


def _sheet_payload(sheet: ScoreSheet) -> dict:
    return {
        "case_id": sheet.case_id,
        "model_id": sheet.model_id,
        "rater_id": sheet.rater_id,
        "scores": {m.column: sheet.scores[m] for m in METRIC_ORDER},
        "notes": {m.column: text for m, text in sheet.notes.items()},
        "total": sheet.total,
    }


def _parse_scores_body(body: dict) -> tuple[str, str, dict[MetricId, int], dict[MetricId, str]]:
    model_id = body.get("model_id")
    rater_id = body.get("rater_id")
    if not isinstance(model_id, str) or not model_id:
        raise SchemaViolation("model_id")
    if not isinstance(rater_id, str) or not rater_id:
        raise SchemaViolation("rater_id")
    raw_scores = body.get("scores")
    if not isinstance(raw_scores, dict):
        raise SchemaViolation("scores", "scores must be an object of m1..m10")
    by_column = {m.column: m for m in METRIC_ORDER}
    scores: dict[MetricId, int] = {}
    for key, value in raw_scores.items():
        metric = by_column.get(key)
        if metric is None:
            raise SchemaViolation(key, f"unknown metric: {key}")
        if value not in (0, 1):
            raise SchemaViolation(key, f"scores are binary, got {value!r}")
        scores[metric] = value
    notes: dict[MetricId, str] = {}
    raw_notes = body.get("notes", {})
    if raw_notes:
        if not isinstance(raw_notes, dict):
            raise SchemaViolation("notes")
        for key, value in raw_notes.items():
            metric = by_column.get(key)
            if metric is None or not isinstance(value, str):
                raise SchemaViolation("notes", f"bad notes entry: {key}")
            notes[metric] = value
    return model_id, rater_id, scores, notes


class CrashvizServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int], store: CaseStore, ui_dir: Path | None):
        self.store = store
        self.ui_dir = ui_dir
        try:
            super().__init__(address, ApiHandler)
        except OSError as exc:
            raise BindFailure(f"cannot bind {address[0]}:{address[1]}: {exc}") from exc


class ApiHandler(BaseHTTPRequestHandler):
    server: CrashvizServer
    protocol_version = "HTTP/1.1"

    def log_message(self, format: str, *args) -> None:  # quiet by default
        pass

    # --- plumbing ---------------------------------------------------------

    def _send(self, status: int, payload: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _send_json(self, status: int, obj) -> None:
        self._send(status, json.dumps(obj, indent=2).encode("utf-8"), "application/json")

    def _error(self, status: int, message: str) -> None:
        self._send_json(status, {"error": message})

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length) if length else b""
        try:
            body = json.loads(raw.decode("utf-8")) if raw else {}
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise SchemaViolation("body", f"request body must be JSON: {exc}") from exc
        if not isinstance(body, dict):
            raise SchemaViolation("body", "request body must be a JSON object")
        return body

    # --- routing ----------------------------------------------------------

    def do_GET(self) -> None:
        url = urlparse(self.path)
        parts = [unquote(p) for p in url.path.split("/") if p]
        try:
            if url.path == "/healthz":
                self._send_json(200, {"status": "ok"})
            elif parts[:2] == ["api", "metrics"] and len(parts) == 2:
                self._send_json(200, _metric_payload())
            elif parts[:2] == ["api", "cases"] and len(parts) == 2:
                self._get_cases()
            elif parts[:2] == ["api", "cases"] and len(parts) == 3:
                self._get_case(parts[2])
            elif parts[:2] == ["api", "cases"] and len(parts) >= 5 and parts[3] == "artifacts":
                self._get_artifact(parts[2], "/".join(parts[4:]))
            elif parts[:2] == ["api", "report"] and len(parts) == 2:
                self._get_report(parse_qs(url.query))
            elif not parts or parts[0] != "api":
                self._get_static(url.path)
            else:
                self._error(404, "not found")
        except CrashvizError as exc:
            self._error(400, str(exc))

    def do_POST(self) -> None:
        parts = [unquote(p) for p in urlparse(self.path).path.split("/") if p]
        try:
            if parts[:2] == ["api", "cases"] and len(parts) == 4 and parts[3] == "scores":
                self._post_scores(parts[2])
            elif parts[:2] == ["api", "cases"] and len(parts) == 4 and parts[3] == "consensus":
                self._post_consensus(parts[2])
            else:
                self._error(404, "not found")
        except (SchemaViolation, MismatchedCase) as exc:
            self._error(400, str(exc))
        except CrashvizError as exc:
            self._error(400, str(exc))

    # --- handlers -----------------------------------------------------------

    def _get_cases(self) -> None:
        store = self.server.store
        summaries = []
        for slug in store.list_cases():
            record = store.get_record(slug)
            artifacts = store.list_artifacts(slug)
            models = sorted(
                {
                    Path(a).stem
                    for a in artifacts
                    if a.startswith("gen/")
                }
            )
            sheets = list(store.iter_sheets(slug))
            summaries.append(
                {
                    "case_id": slug,
                    "source_case_id": record.case_id,
                    "location": record.location,
                    "collision_type": record.collision_type.display,
                    "models": models,
                    "sheet_count": len(sheets),
                }
            )
        self._send_json(200, summaries)

    def _get_case(self, slug: str) -> None:
        store = self.server.store
        if not store.has_case(slug):
            self._error(404, f"no such case: {slug}")
            return
        record = store.get_record(slug)
        artifacts = store.list_artifacts(slug)
        prompt_text = (
            store.read_artifact(slug, "prompt.txt").decode("utf-8")
            if store.has_artifact(slug, "prompt.txt")
            else None
        )
        self._send_json(
            200,
            {
                "case_id": slug,
                "record": record_to_dict(record),
                "artifacts": artifacts,
                "prompt_text": prompt_text,
                "sheets": [_sheet_payload(s) for s in store.iter_sheets(slug)],
            },
        )

    def _get_artifact(self, slug: str, name: str) -> None:
        store = self.server.store
        if not store.has_case(slug) or not store.has_artifact(slug, name):
            self._error(404, f"no such artifact: {name}")
            return
        payload = store.read_artifact(slug, name)
        content_type = _CONTENT_TYPES.get(Path(name).suffix, "application/octet-stream")
        self._send(200, payload, content_type)

    def _get_report(self, query: dict[str, list[str]]) -> None:
        fmt = (query.get("format") or ["json"])[0]
        sheets = self.server.store.report_sheets()
        try:
            report = aggregate(sheets)
        except EmptyInput:
            if fmt == "json":
                self._send_json(200, {"models": [], "notes": [], "thresholds": {"high": 0.9, "low": 0.3}})
            else:
                self._send(200, b"", "text/plain; charset=utf-8")
            return
        if fmt == "json":
            self._send_json(200, report_to_dict(report))
        elif fmt == "csv":
            self._send(200, render_csv(report).encode("utf-8"), "text/csv; charset=utf-8")
        elif fmt == "markdown":
            self._send(200, render_markdown(report).encode("utf-8"), "text/markdown; charset=utf-8")
        else:
            self._error(400, f"unknown report format: {fmt}")

    def _post_scores(self, slug: str) -> None:
        store = self.server.store
        if not store.has_case(slug):
            self._error(404, f"no such case: {slug}")
            return
        model_id, rater_id, scores, notes = _parse_scores_body(self._read_body())
        sheet = ScoreSheet(
            case_id=slug, model_id=model_id, rater_id=rater_id, scores=scores, notes=notes
        )
        store.append_sheet(sheet)
        self._send_json(201, _sheet_payload(sheet))

    def _post_consensus(self, slug: str) -> None:
        store = self.server.store
        if not store.has_case(slug):
            self._error(404, f"no such case: {slug}")
            return
        body = self._read_body()
        model_id = body.get("model_id")
        rater_a = body.get("rater_a")
        rater_b = body.get("rater_b")
        if not all(isinstance(v, str) and v for v in (model_id, rater_a, rater_b)):
            raise SchemaViolation("model_id/rater_a/rater_b")
        sheets = {
            s.rater_id: s
            for s in store.iter_sheets(slug)
            if s.model_id == model_id and s.rater_id in (rater_a, rater_b)
        }
        if rater_a not in sheets or rater_b not in sheets:
            raise MismatchedCase("both raters must have submitted sheets first")
        consensus = merge_ratings(sheets[rater_a], sheets[rater_b])
        by_column = {m.column: m for m in METRIC_ORDER}
        resolutions = body.get("resolutions", {})
        if not isinstance(resolutions, dict):
            raise SchemaViolation("resolutions")
        for key, entry in resolutions.items():
            metric = by_column.get(key)
            if metric is None or not isinstance(entry, dict):
                raise SchemaViolation("resolutions", f"bad resolution entry: {key}")
            consensus = consensus.resolve(
                metric, entry.get("value"), str(entry.get("note", ""))
            )
        sheet = consensus.to_score_sheet()
        store.append_sheet(sheet)
        self._send_json(
            201,
            {
                "conflicts": [m.column for m in consensus.conflicts],
                "sheet": _sheet_payload(sheet),
            },
        )

    def _get_static(self, path: str) -> None:
        ui_dir = self.server.ui_dir
        rel = path.lstrip("/") or "index.html"
        if ui_dir is not None:
            target = (ui_dir / rel).resolve()
            if (
                target.is_file()
                and ui_dir.resolve() in target.parents
            ):
                content_type = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
                self._send(200, target.read_bytes(), content_type)
                return
        if rel == "index.html":
            self._send(200, _FALLBACK_INDEX, "text/html; charset=utf-8")
        else:
            self._error(404, "not found")


def make_server(store: CaseStore, bind_address: str, ui_dir: Path | str | None = None) -> CrashvizServer:
    """Build (but do not start) the HTTP service. bind_address is host:port;
    port 0 picks a free port."""
    host, _, port_text = bind_address.rpartition(":")
    if not host:
        raise BindFailure(f"bind address must be host:port, got {bind_address!r}")
    try:
        port = int(port_text)
    except ValueError as exc:
        raise BindFailure(f"bad port in {bind_address!r}") from exc
    ui_path = Path(ui_dir) if ui_dir is not None else None
    return CrashvizServer((host, port), store, ui_path)


def serve(store: CaseStore, bind_address: str, ui_dir: Path | str | None = None) -> None:
    """Run the HTTP service until SIGINT/SIGTERM, then shut down cleanly."""
    server = make_server(store, bind_address, ui_dir)

    def _stop(signum, frame) -> None:
        threading.Thread(target=server.shutdown, daemon=True).start()

    if threading.current_thread() is threading.main_thread():
        signal.signal(signal.SIGINT, _stop)
        signal.signal(signal.SIGTERM, _stop)
    host, port = server.server_address[0], server.server_address[1]
    print(f"crashviz serving {store.root} on http://{host}:{port}/", flush=True)
    try:
        server.serve_forever()
    finally:
        server.server_close()
