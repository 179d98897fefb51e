"""Prompt bundles: the fixed three-section instruction text plus attachments.

The instruction text is a frozen template; only the four road names in the
layout section vary with the geometry template. Every bundle carries the
rendered base-layout diagram, and optionally the scanned crash report
image, as ordered attachments.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .geometry import GeometryTemplate
from .scene import RenderOptions, base_scene, render_svg

ROLE_BASE_LAYOUT = "base_layout"
ROLE_CRASH_REPORT = "crash_report"

SECTION_HEADERS = (
    "Roundabout Layout (Always Use This Configuration):",
    "From the Crash Report, Extract and Interpret:",
    "Final Output:",
)


def _template_text() -> str:
    return (
        resources.files("crashviz.assets").joinpath("prompt_template.txt").read_text("utf-8")
    )


@dataclass(frozen=True)
class Attachment:
    role: str
    media_ref: str
    data: bytes | None = None


@dataclass(frozen=True)
class PromptBundle:
    text: str
    attachments: tuple[Attachment, ...]
    template_fingerprint: str

    def attachment(self, role: str) -> Attachment | None:
        for item in self.attachments:
            if item.role == role:
                return item
        return None


def build_prompt(
    template: GeometryTemplate,
    report_image: str | None = None,
    report_image_bytes: bytes | None = None,
) -> PromptBundle:
    """Assemble the prompt bundle for one backend call.

    ``report_image`` is a media reference (store path); when it points at a
    readable file its bytes are attached, otherwise the reference rides
    along unresolved. The worked example sentence in the extraction section
    is illustrative and keeps its original road names regardless of the
    template.
    """
    text = _template_text().format(
        north=template.leg("North").road_name,
        east=template.leg("East").road_name,
        south=template.leg("South").road_name,
        west=template.leg("West").road_name,
    )
    layout_svg = render_svg(base_scene(template), RenderOptions())
    attachments = [Attachment(ROLE_BASE_LAYOUT, "base_layout.svg", layout_svg)]
    if report_image is not None or report_image_bytes is not None:
        ref = report_image or "report_image"
        data = report_image_bytes
        if data is None and report_image is not None:
            path = Path(report_image)
            if path.is_file():
                data = path.read_bytes()
        attachments.append(Attachment(ROLE_CRASH_REPORT, ref, data))
    return PromptBundle(
        text=text,
        attachments=tuple(attachments),
        template_fingerprint=template.fingerprint(),
    )


def prompt_fingerprint(bundle: PromptBundle) -> str:
    """Stable content hash over the prompt text and attachment bytes."""
    digest = hashlib.sha256()
    digest.update(bundle.text.encode("utf-8"))
    for item in bundle.attachments:
        digest.update(b"\x00")
        digest.update(item.role.encode("utf-8"))
        digest.update(b"\x00")
        if item.data is not None:
            digest.update(item.data)
        else:
            digest.update(item.media_ref.encode("utf-8"))
    return digest.hexdigest()
