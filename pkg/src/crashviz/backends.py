"""Image-generation backends: a generic HTTP client and a deterministic mock.

The HTTP backend posts a neutral multipart payload (prompt text plus
attachments) to a configurable endpoint; vendor-specific request mappings
belong in adapters layered on top. Responses are cached content-addressed
by (prompt fingerprint, model id), transient failures retry with
exponential backoff and full jitter, and per-backend concurrency is capped
by a semaphore.
"""
from __future__ import annotations

import hashlib
import json
import os
import random
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import requests

from .errors import (
    AuthMissing,
    BackendRejected,
    BackendUnreachable,
    InvalidResponse,
    NonLocalizedCode,
)
from .geometry import GeometryTemplate, standard_template
from .prompt import PromptBundle, prompt_fingerprint
from .records import CrashRecord
from .scene import RenderOptions, build_scene, render_svg

MOCK_ENDPOINT_PREFIX = "mock:"


@dataclass(frozen=True)
class BackendConfig:
    name: str
    endpoint_url: str
    auth_token_env: str
    model_id: str
    timeout_s: float = 30.0
    max_retries: int = 3
    backoff_base_ms: int = 250
    max_inflight: int = 4
    #: Free-form vendor parameters, posted alongside the prompt and recorded
    #: in the cache sidecar; no vendor defaults are assumed or invented.
    extra_params: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_inflight < 1:
            raise ValueError("max_inflight must be >= 1")

    @property
    def is_mock(self) -> bool:
        return self.endpoint_url.startswith(MOCK_ENDPOINT_PREFIX)


@dataclass(frozen=True)
class GenerationResult:
    image_bytes: bytes
    media_kind: str  # "svg" | "png" | "jpeg"
    backend_name: str
    model_id: str
    latency_ms: float
    from_cache: bool


def sniff_media_kind(payload: bytes, content_type: str = "") -> str | None:
    if payload.startswith(b"\x89PNG\r\n\x1a\n"):
        return "png"
    if payload.startswith(b"\xff\xd8\xff"):
        return "jpeg"
    head = payload.lstrip()[:256].lower()
    if head.startswith(b"<?xml") or head.startswith(b"<svg"):
        return "svg"
    if b"<svg" in head:
        return "svg"
    if "svg" in content_type:
        return "svg"
    if "png" in content_type:
        return "png"
    if "jpeg" in content_type or "jpg" in content_type:
        return "jpeg"
    return None

MEDIA_EXTENSIONS = {"svg": "svg", "png": "png", "jpeg": "jpg"}


class ResponseCache:
    """Append-only content-addressed file cache for backend responses.

    Each entry is a file named by the hex cache key plus a ``.json``
    sidecar with {model_id, media_kind, created_at}. Writes go through a
    temp file and an atomic rename, so concurrent readers never observe a
    partial entry.
    """

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(fingerprint: str, model_id: str) -> str:
        return hashlib.sha256(f"{fingerprint}\x00{model_id}".encode("utf-8")).hexdigest()

    def get(self, key: str) -> tuple[bytes, dict] | None:
        data_path = self.root / key
        meta_path = self.root / f"{key}.json"
        if not data_path.is_file() or not meta_path.is_file():
            return None
        return data_path.read_bytes(), json.loads(meta_path.read_text("utf-8"))

    def put(
        self,
        key: str,
        payload: bytes,
        model_id: str,
        media_kind: str,
        params: dict[str, str] | None = None,
    ) -> None:
        meta = {
            "model_id": model_id,
            "media_kind": media_kind,
            "created_at": datetime.now(timezone.utc).isoformat(),
        }
        if params:
            meta["params"] = params
        self._atomic_write(self.root / key, payload)
        self._atomic_write(self.root / f"{key}.json", json.dumps(meta, sort_keys=True).encode())

    @staticmethod
    def _atomic_write(path: Path, payload: bytes) -> None:
        tmp = path.with_name(f".{path.name}.tmp-{os.getpid()}-{threading.get_ident()}")
        tmp.write_bytes(payload)
        os.replace(tmp, path)


_inflight_lock = threading.Lock()
_inflight: dict[BackendConfig, threading.BoundedSemaphore] = {}


def _inflight_slot(config: BackendConfig) -> threading.BoundedSemaphore:
    with _inflight_lock:
        sem = _inflight.get(config)
        if sem is None:
            sem = threading.BoundedSemaphore(config.max_inflight)
            _inflight[config] = sem
        return sem


def _backoff_delays(config: BackendConfig, rng: random.Random) -> Callable[[int], float]:
    def delay(attempt: int) -> float:
        ceiling = config.backoff_base_ms * (2 ** attempt) / 1000.0
        return rng.uniform(0.0, ceiling)  # full jitter

    return delay


def generate(
    bundle: PromptBundle,
    config: BackendConfig,
    cache: ResponseCache | None = None,
    *,
    session: requests.Session | None = None,
    sleeper: Callable[[float], None] = time.sleep,
    rng: random.Random | None = None,
) -> GenerationResult:
    """Run one generation call against an HTTP backend.

    Cache hits return immediately with zero network activity. A missing
    auth token fails before any request. 5xx responses and transport
    errors retry up to max_retries with full-jitter exponential backoff;
    4xx responses never retry.
    """
    fingerprint = prompt_fingerprint(bundle)
    cache_key = ResponseCache.key(fingerprint, config.model_id)
    if cache is not None:
        hit = cache.get(cache_key)
        if hit is not None:
            payload, meta = hit
            return GenerationResult(
                image_bytes=payload,
                media_kind=meta["media_kind"],
                backend_name=config.name,
                model_id=config.model_id,
                latency_ms=0.0,
                from_cache=True,
            )

    token = os.environ.get(config.auth_token_env)
    if not token:
        raise AuthMissing(f"env var {config.auth_token_env} is not set")

    rng = rng or random.Random()
    delay = _backoff_delays(config, rng)
    http = session or requests.Session()
    headers = {"Authorization": f"Bearer {token}"}
    data = {"prompt": bundle.text, "model": config.model_id, **dict(config.extra_params)}
    files = [
        ("attachment", (item.media_ref, item.data or b"", "application/octet-stream"))
        for item in bundle.attachments
    ]

    started = time.monotonic()
    sem = _inflight_slot(config)
    attempt = 0
    last_error: Exception | None = None
    while attempt <= config.max_retries:
        try:
            with sem:
                response = http.post(
                    config.endpoint_url,
                    data=data,
                    files=files,
                    headers=headers,
                    timeout=config.timeout_s,
                )
        except requests.RequestException as exc:
            last_error = exc
        else:
            if 200 <= response.status_code < 300:
                payload = response.content
                kind = sniff_media_kind(payload, response.headers.get("Content-Type", ""))
                if kind is None or not payload:
                    raise InvalidResponse(
                        f"backend {config.name} returned a non-image payload"
                    )
                if cache is not None:
                    cache.put(
                        cache_key, payload, config.model_id, kind,
                        params=dict(config.extra_params),
                    )
                return GenerationResult(
                    image_bytes=payload,
                    media_kind=kind,
                    backend_name=config.name,
                    model_id=config.model_id,
                    latency_ms=(time.monotonic() - started) * 1000.0,
                    from_cache=False,
                )
            if 400 <= response.status_code < 500:
                raise BackendRejected(
                    f"backend {config.name} rejected the request: {response.status_code}"
                )
            last_error = BackendUnreachable(
                f"backend {config.name} answered {response.status_code}"
            )
        if attempt == config.max_retries:
            break
        sleeper(delay(attempt))
        attempt += 1
    raise BackendUnreachable(
        f"backend {config.name} unreachable after {config.max_retries + 1} attempts: {last_error}"
    )


def mock_generate(
    bundle: PromptBundle,
    sidecar: CrashRecord,
    template: GeometryTemplate | None = None,
) -> GenerationResult:
    """Deterministic offline backend: render the sidecar record's own
    reference diagram. Non-localized damage codes surface as a rejection,
    mirroring how a remote backend would refuse an unbuildable request."""
    template = template or standard_template()
    try:
        scene = build_scene(sidecar, template)
    except NonLocalizedCode as exc:
        raise BackendRejected(f"mock backend cannot place damage zones: {exc}") from exc
    payload = render_svg(scene, RenderOptions())
    return GenerationResult(
        image_bytes=payload,
        media_kind="svg",
        backend_name="mock",
        model_id="mock-reference",
        latency_ms=0.0,
        from_cache=False,
    )


def mock_config(name: str = "mock", model_id: str = "mock-reference") -> BackendConfig:
    return BackendConfig(
        name=name,
        endpoint_url=f"{MOCK_ENDPOINT_PREFIX}//local",
        auth_token_env="CRASHVIZ_MOCK_TOKEN",
        model_id=model_id,
    )
