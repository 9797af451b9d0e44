"""Command line entry point.

Subcommands mirror the API so every UI capability has a scriptable twin:

    gridsankey ingest --manifest m.toml --out scores.csv
    gridsankey serve  [--config cfg.toml] [--data-dir DIR] [--port N]
    gridsankey export --grid scores.csv --request req.json [--out doc.json]
    gridsankey stats  --grid scores.csv --axis stoplist --level indri --measure AP

Exit codes: 0 success, 1 usage error, 2 data/config error.  Diagnostics
go to standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import load_config
from .errors import GridSankeyError
from .grid import build_grid, export_scores, import_scores
from .ingest import load_collection, load_manifest
from .measures import default_registry
from .server import (
    diagram_response_text,
    parse_exploration_request,
    component_tooltip_dict,
)
from .stats import CriticalValueCache, DEFAULT_ALPHA


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this tool reserves 2 for data
    errors, so usage problems exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="gridsankey", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gridsankey {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("ingest", help="evaluate a collection's runs into a score CSV")
    p.add_argument("--manifest", required=True, help="collection manifest (TOML)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--workers", type=int, default=None, help="parallel run parsers")
    p.add_argument(
        "--measures",
        default=None,
        help="comma-separated measure ids (default: the full suite)",
    )
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("serve", help="serve the API and UI")
    p.add_argument("--config", default=None, help="service config (TOML)")
    p.add_argument("--data-dir", default=None, help="override the data directory")
    p.add_argument("--static-dir", default=None, help="override the UI bundle directory")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("export", help="write the diagram document for a request file")
    p.add_argument("--grid", required=True, help="score CSV (from ingest)")
    p.add_argument(
        "--manifest",
        default=None,
        help="collection manifest (default: manifest.toml next to the CSV)",
    )
    p.add_argument("--request", required=True, help="exploration request (JSON file)")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("stats", help="print component statistics (mean, top-5, Dunnett)")
    p.add_argument("--grid", required=True, help="score CSV (from ingest)")
    p.add_argument(
        "--manifest",
        default=None,
        help="collection manifest (default: manifest.toml next to the CSV)",
    )
    p.add_argument("--axis", required=True, choices=("stoplist", "stemmer", "model"))
    p.add_argument("--level", required=True)
    p.add_argument("--measure", required=True)
    p.add_argument("--topic", default=None, help="single topic (default: average)")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.set_defaults(func=_cmd_stats)

    return parser


def _load_grid(args):
    csv_path = Path(args.grid)
    manifest_path = Path(args.manifest) if args.manifest else csv_path.with_name("manifest.toml")
    manifest = load_manifest(manifest_path)
    return import_scores(csv_path, manifest)


def _cmd_ingest(args) -> int:
    manifest = load_manifest(args.manifest)
    loaded = load_collection(manifest, workers=args.workers)
    registry = default_registry(
        rbp_p=manifest.rbp_p if manifest.rbp_p is not None else 0.8,
        max_grade=manifest.max_grade,
    )
    measure_ids = args.measures.split(",") if args.measures else None
    grid = build_grid(loaded, measure_ids, registry)
    export_scores(grid, args.out)

    report = loaded.completeness_report()
    print(f"collection {report['collection_id']}: "
          f"{report['loaded']}/{report['declared']} systems "
          f"({report['completeness']:.1%} complete)")
    if report["missing"]:
        print(f"missing: {', '.join(report['missing'])}")
    print(f"wrote {grid.cell_count} cells "
          f"({len(grid.measure_ids)} measures x {len(grid.topic_ids)} topics) to {args.out}")
    return 0


def _cmd_serve(args) -> int:
    overrides = {
        "data_dir": args.data_dir,
        "static_dir": args.static_dir,
        "host": args.host,
        "port": args.port,
    }
    config = load_config(args.config, overrides=overrides)
    from .server import create_app

    app = create_app(config)
    print(f"serving {len(app.state.repository.collection_ids())} collection(s) "
          f"on http://{config.host}:{config.port}", file=sys.stderr)
    import uvicorn

    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


def _cmd_export(args) -> int:
    grid = _load_grid(args)
    try:
        payload = json.loads(Path(args.request).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GridSankeyError(f"request file is not valid JSON: {exc}") from exc
    text = diagram_response_text(grid, payload)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_stats(args) -> int:
    grid = _load_grid(args)
    state = {
        "collection_id": grid.collection_id,
        "measure_id": args.measure,
        "topic_id": args.topic,
    }
    # reuse the tooltip assembly so the CLI mirrors the API's numbers
    view, _, canonical = parse_exploration_request(grid, state)
    body = component_tooltip_dict(
        grid,
        state,
        args.axis,
        args.level,
        alpha=args.alpha,
        cv_cache=CriticalValueCache(),
    )

    topic_label = canonical["topic_id"] if canonical["topic_mode"] == "single" else "average"
    print(f"collection: {grid.collection_id}   measure: {canonical['measure_id']}   "
          f"topics: {topic_label}")
    print(f"component: {args.axis}={args.level}   systems: {body['systems']}")
    print(f"mean: {body['mean']:.6f}")
    print(f"best: {body['best']['system']}   {body['best']['score']:.6f}")
    print("top systems:")
    for i, entry in enumerate(body["top"], start=1):
        print(f"  {i}. {entry['system']}   {entry['score']:.6f}")
    dn = body["dunnett"]
    cv = "n/a" if dn["critical_value"] is None else f"{dn['critical_value']:.4f}"
    print(f"dunnett: alpha={dn['alpha']}  df={dn['df']}  critical={cv}  "
          f"control={dn['control']}")
    print(f"top group ({len(dn['top_group'])}): {', '.join(dn['top_group'])}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse --help/--version exit 0; our error() raises 1
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except GridSankeyError as exc:
        print(f"gridsankey: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"gridsankey: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
