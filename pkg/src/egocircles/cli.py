"""Command-line entry point.

Exit codes: 0 ok, 1 usage error, 2 data error, 3 missing upstream stage.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .ingest import IngestionError
from .pipeline import STAGES, DataError, DependencyError, Pipeline, load_config

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DEPENDENCY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--manifest", help="dataset manifest JSON")
    p.add_argument("--out", default="out", help="output directory (or primary CSV path)")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="egocircles", description="Ego-network circle analysis of timeline data.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in (*STAGES, "all"):
        p = sub.add_parser(name)
        _common(p)
        if name in ("label", "all"):
            p.add_argument("--expr", help='combinator such as "g|k"')
            p.add_argument("--providers", help="comma-separated provider CSVs")
            p.add_argument("--truth", help="user_id,is_journalist table")
            p.add_argument("--invert-b", action="store_true", help="read atom b as 'is a bot'")
        if name in ("dynamics", "all"):
            p.add_argument("--step", choices=("1m", "12m"))
            p.add_argument("--rings", type=int)
        if name in ("assortativity", "all"):
            p.add_argument("--labels", help="user_id,is_journalist table for alters")
            p.add_argument("--max-ring", type=int)
        if name in ("profiles", "all"):
            p.add_argument("--groups", help="user_id,group table")
    p = sub.add_parser("synth")
    p.add_argument("--spec", help="dataset spec JSON")
    p.add_argument("--egos", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _overrides(args) -> dict:
    over: dict = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.jobs is not None:
        over["jobs"] = args.jobs
    label = {}
    if getattr(args, "expr", None):
        label["expr"] = args.expr
    if getattr(args, "providers", None):
        label["providers"] = [p for p in args.providers.split(",") if p]
    if getattr(args, "truth", None):
        label["truth"] = args.truth
    if getattr(args, "invert_b", False):
        label["invert_b"] = True
    if label:
        over["label"] = label
    dyn = {}
    if getattr(args, "step", None):
        dyn["steps"] = [args.step]
    if getattr(args, "rings", None):
        dyn["n_rings"] = args.rings
    if dyn:
        over["dynamic"] = dyn
    ass = {}
    if getattr(args, "labels", None):
        ass["labels"] = args.labels
    if getattr(args, "max_ring", None):
        ass["max_ring"] = args.max_ring
    if ass:
        over["assortativity"] = ass
    if getattr(args, "groups", None):
        over["profiles"] = {"groups": args.groups}
    return over


PRIMARY = {"ingest": "ingest.csv", "filter": "filter.csv", "label": "verdicts.csv",
           "extract": "circles.csv", "dynamics": "dynamics.csv", "hashtags": "hashtags.csv",
           "assortativity": "assortativity.csv", "profiles": "type_profiles.csv"}


def _run_stage(args) -> dict:
    cfg = load_config(args.config, _overrides(args))
    out = Path(args.out)
    primary = {}
    if out.suffix == ".csv" and args.command in PRIMARY:
        primary[PRIMARY[args.command]] = out.name
        out = out.parent
    pipe = Pipeline(cfg, out, args.manifest)
    pipe.primary.update(primary)
    return pipe.run(args.command)


def _run_synth(args) -> dict:
    from .synth import DatasetSpec, write_dataset

    raw = json.loads(Path(args.spec).read_text()) if args.spec else {}
    if args.egos is not None:
        raw["n_egos"] = args.egos
    if args.seed is not None:
        raw["seed"] = args.seed
    spec = DatasetSpec.from_json(raw)
    manifest = write_dataset(spec, args.out, jobs=args.jobs)
    return {"egos": spec.n_egos, "manifest": str(Path(args.out) / "manifest.json"),
            "timelines": len(manifest.timeline_paths)}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            info = _run_synth(args)
        else:
            info = _run_stage(args)
    except DependencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEPENDENCY
    except (DataError, IngestionError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # bad option values (unknown config keys, malformed expressions)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(json.dumps(info, indent=2, sort_keys=True, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
