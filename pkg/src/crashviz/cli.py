"""Command-line interface.

    crashviz ingest RECORDS [--store DIR]
    crashviz validate RECORDS | --store DIR
    crashviz prompt   [--store DIR] [--template FILE]
    crashviz render   [--store DIR] [--template FILE]
    crashviz generate [--store DIR] (--mock | --backend CFG.json ...)
    crashviz evaluate [--store DIR] --mode auto|ingest [--sheets FILE]
    crashviz benchmark [--store DIR] [--format markdown|csv|json] [--out FILE]
    crashviz serve    [--store DIR] --bind HOST:PORT [--ui-dir DIR]

Exit codes: 0 on full success, 2 when any case in a batch failed or was
skipped.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .backends import BackendConfig, mock_config
from .benchmark import aggregate, render_report, report_to_dict
from .errors import CrashvizError, EmptyInput, MissingAnnotation
from .evaluation import Tolerances, evaluate_auto, ingest_sheets
from .geometry import GeometryTemplate, standard_template
from .pipeline import load_records_file, run_batch
from .prompt import build_prompt
from .records import validate_record
from .scene import RenderOptions, base_scene, build_scene, parse_scene, render_svg
from .store import CaseStore
from .server import serve

DEFAULT_STORE_ENV = "CRASHVIZ_STORE"


def _store_path(args: argparse.Namespace) -> Path:
    if args.store:
        return Path(args.store)
    env = os.environ.get(DEFAULT_STORE_ENV)
    return Path(env) if env else Path("crashviz-store")


def _load_template(args: argparse.Namespace) -> GeometryTemplate:
    if not getattr(args, "template", None):
        return standard_template()
    doc = json.loads(Path(args.template).read_text("utf-8"))
    return GeometryTemplate.from_json_dict(doc)


def _load_backend(path: str) -> BackendConfig:
    doc = json.loads(Path(path).read_text("utf-8"))
    params = doc.get("params", {})
    return BackendConfig(
        name=doc["name"],
        endpoint_url=doc["endpoint_url"],
        auth_token_env=doc["auth_token_env"],
        model_id=doc["model_id"],
        timeout_s=float(doc.get("timeout_s", 30.0)),
        max_retries=int(doc.get("max_retries", 3)),
        backoff_base_ms=int(doc.get("backoff_base_ms", 250)),
        max_inflight=int(doc.get("max_inflight", 4)),
        extra_params=tuple(sorted((str(k), str(v)) for k, v in params.items())),
    )


def _cmd_ingest(args: argparse.Namespace) -> int:
    store = CaseStore(_store_path(args))
    items = load_records_file(args.records)
    failures = 0
    for index, item in enumerate(items):
        if isinstance(item, CrashvizError):
            print(f"record[{index}]: SKIPPED ({item})")
            failures += 1
            continue
        report = validate_record(item)
        store.write_record(item)
        flags = "" if report.ok else f" ({len(report.findings)} finding(s))"
        print(f"{item.case_id}: ingested{flags}")
        for finding in report.findings:
            print(f"  {finding.level}: {finding.field}: {finding.message}")
    print(f"ingested {len(items) - failures}/{len(items)} records into {store.root}")
    return 2 if failures else 0


def _cmd_validate(args: argparse.Namespace) -> int:
    errors = 0
    if args.records:
        items = load_records_file(args.records)
        for index, item in enumerate(items):
            if isinstance(item, CrashvizError):
                print(f"record[{index}]: ERROR {item}")
                errors += 1
                continue
            report = validate_record(item)
            status = "ok" if report.ok else f"{len(report.findings)} finding(s)"
            print(f"{item.case_id}: {status}")
            for finding in report.findings:
                print(f"  {finding.level}: {finding.field}: {finding.message}")
                if finding.level == "error":
                    errors += 1
    else:
        store = CaseStore(_store_path(args))
        for slug in store.list_cases():
            report = validate_record(store.get_record(slug))
            status = "ok" if report.ok else f"{len(report.findings)} finding(s)"
            print(f"{slug}: {status}")
            for finding in report.findings:
                print(f"  {finding.level}: {finding.field}: {finding.message}")
                if finding.level == "error":
                    errors += 1
    return 2 if errors else 0


def _cmd_prompt(args: argparse.Namespace) -> int:
    store = CaseStore(_store_path(args))
    template = _load_template(args)
    base_svg = render_svg(base_scene(template), RenderOptions())
    for slug in args.case or store.list_cases():
        record = store.get_record(slug)
        bundle = build_prompt(template, report_image=record.report_image_ref)
        store.write_artifact(slug, "prompt.txt", bundle.text.encode("utf-8"))
        store.write_artifact(slug, "base_layout.svg", base_svg)
        print(f"{slug}: prompt.txt, base_layout.svg")
    return 0


def _cmd_render(args: argparse.Namespace) -> int:
    store = CaseStore(_store_path(args))
    template = _load_template(args)
    failures = 0
    for slug in args.case or store.list_cases():
        record = store.get_record(slug)
        try:
            svg = render_svg(build_scene(record, template), RenderOptions())
        except CrashvizError as exc:
            print(f"{slug}: FAILED ({exc})")
            failures += 1
            continue
        store.write_artifact(slug, "truth.svg", svg)
        print(f"{slug}: truth.svg")
    return 2 if failures else 0


def _cmd_generate(args: argparse.Namespace) -> int:
    store = CaseStore(_store_path(args))
    template = _load_template(args)
    backends = [_load_backend(path) for path in args.backend or []]
    if args.mock:
        backends.append(mock_config())
    if not backends:
        print("no backends: pass --mock or --backend CFG.json", file=sys.stderr)
        return 2
    if args.records:
        records = load_records_file(args.records)
    else:
        records = [store.get_record(slug) for slug in store.list_cases()]
    manifest = run_batch(
        records,
        template,
        backends,
        store,
        parallelism=args.parallelism,
        run_id=args.run_id,
    )
    counts = manifest.counts
    print(
        f"run {manifest.run_id}: {counts['ok']} ok, "
        f"{counts['failed']} failed, {counts['skipped']} skipped"
    )
    for entry in manifest.entries:
        if entry.status != "ok":
            print(f"  {entry.case_id} x {entry.backend_name}: {entry.status} ({entry.reason})")
    return 0 if manifest.all_ok else 2


def _cmd_evaluate(args: argparse.Namespace) -> int:
    store = CaseStore(_store_path(args))
    if args.mode == "ingest":
        if not args.sheets:
            print("--mode ingest requires --sheets FILE", file=sys.stderr)
            return 2
        sheets = ingest_sheets(Path(args.sheets).read_bytes())
        for sheet in sheets:
            store.append_sheet(sheet)
        print(f"ingested {len(sheets)} sheet row(s)")
        return 0

    template = _load_template(args)
    tol = Tolerances()
    skipped = 0
    scored = 0
    for slug in args.case or store.list_cases():
        record = store.get_record(slug)
        gen_artifacts = [a for a in store.list_artifacts(slug) if a.startswith("gen/")]
        sheets = []
        for artifact in gen_artifacts:
            model_id = Path(artifact).stem
            if args.model and model_id != args.model:
                continue
            try:
                scene = parse_scene(store.read_artifact(slug, artifact))
            except MissingAnnotation:
                print(f"{slug}/{artifact}: no annotation, human channel required")
                skipped += 1
                continue
            sheet = evaluate_auto(scene, record, template, tol, model_id=model_id)
            sheets.append(sheet)
            scored += 1
            print(f"{slug}/{model_id}: {sheet.total}/10")
        if sheets:
            store.replace_sheets(slug, "auto", sheets)
    print(f"scored {scored}, skipped {skipped}")
    return 2 if skipped else 0


def _cmd_benchmark(args: argparse.Namespace) -> int:
    store = CaseStore(_store_path(args))
    try:
        report = aggregate(store.report_sheets())
    except EmptyInput:
        print("no score sheets in store", file=sys.stderr)
        return 2
    if args.format == "json":
        payload = (json.dumps(report_to_dict(report), indent=2) + "\n").encode("utf-8")
    else:
        payload = render_report(report, args.format)
    if args.out:
        Path(args.out).write_bytes(payload)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(payload.decode("utf-8"))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    store = CaseStore(_store_path(args))
    serve(store, args.bind, ui_dir=args.ui_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crashviz", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_store(p: argparse.ArgumentParser) -> None:
        p.add_argument("--store", help=f"store root (default ${DEFAULT_STORE_ENV} or ./crashviz-store)")

    def add_template(p: argparse.ArgumentParser) -> None:
        p.add_argument("--template", help="geometry template JSON (default: standard two-lane)")

    p = sub.add_parser("ingest", help="load a records file into the store")
    p.add_argument("records")
    add_store(p)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("validate", help="check records against inclusion criteria")
    p.add_argument("records", nargs="?", help="records file (default: validate the store)")
    add_store(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("prompt", help="write prompt bundles for stored cases")
    add_store(p)
    add_template(p)
    p.add_argument("--case", action="append", help="limit to specific case id(s)")
    p.set_defaults(func=_cmd_prompt)

    p = sub.add_parser("render", help="write deterministic truth diagrams")
    add_store(p)
    add_template(p)
    p.add_argument("--case", action="append")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("generate", help="run backends over cases (full pipeline)")
    add_store(p)
    add_template(p)
    p.add_argument("--records", help="records file (default: all stored cases)")
    p.add_argument("--backend", action="append", help="backend config JSON (repeatable)")
    p.add_argument("--mock", action="store_true", help="use the deterministic mock backend")
    p.add_argument("--parallelism", type=int, default=4)
    p.add_argument("--run-id")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("evaluate", help="score generated diagrams")
    add_store(p)
    add_template(p)
    p.add_argument("--mode", choices=("auto", "ingest"), default="auto")
    p.add_argument("--sheets", help="score-sheet CSV for --mode ingest")
    p.add_argument("--model", help="limit auto scoring to one model id")
    p.add_argument("--case", action="append")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("benchmark", help="aggregate sheets into a report")
    add_store(p)
    p.add_argument("--format", choices=("markdown", "csv", "json"), default="markdown")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("serve", help="serve the store, API and review UI")
    add_store(p)
    p.add_argument("--bind", default="127.0.0.1:8787")
    p.add_argument("--ui-dir", help="static review-ui bundle directory")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CrashvizError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
