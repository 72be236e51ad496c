"""Command line entry points.

`run` answers one query document against a dataset on disk and writes the
report plus artifacts to a directory. `synth` writes a synthetic benchmark
dataset next to its schema. `report` summarizes a finished run directory.
Exit codes: 0 done, 2 done but no candidate satisfied the goals, 1 error
(the stderr line names the failing stage).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dataset import DatasetError, load_dataset, schema_from_json, write_csv
from .query import QueryError, execute_query, parse_query
from .synth import GENERATORS, synth_dataset


def _fail(stage: str, message) -> int:
    print(f"{stage}: {message}", file=sys.stderr)
    return 1


def _cmd_run(args) -> int:
    try:
        config = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        return _fail("config", exc)
    if not isinstance(config, dict):
        return _fail("config", "config must be a JSON object")
    for key in ("dataset", "schema", "query"):
        if key not in config:
            return _fail("config", f"missing {key!r}")

    try:
        schema_obj = config["schema"]
        if isinstance(schema_obj, str):
            schema_obj = json.loads(
                Path(Path(args.config).parent, schema_obj).read_text())
        schema = schema_from_json(schema_obj)
        ds_path = Path(Path(args.config).parent, config["dataset"])
        ds = load_dataset(ds_path, schema)
    except (OSError, json.JSONDecodeError, DatasetError) as exc:
        return _fail("dataset", exc)

    try:
        query = parse_query(config["query"])
        if args.seeds:
            query.seeds = [int(s) for s in args.seeds.split(",")]
        if args.workers:
            query.workers = args.workers
    except (QueryError, ValueError) as exc:
        return _fail("query", exc)

    def on_phase(name):
        print(f"phase: {name}", file=sys.stderr)

    try:
        result = execute_query(ds, query, on_phase=on_phase)
    except QueryError as exc:
        return _fail(exc.stage, exc)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, blob in result.artifacts.items():
        (out / name).write_bytes(blob)

    top = result.report["topk"]
    n_surviving = result.report["filtering"]["n_surviving"]
    print(f"wrote {len(result.artifacts)} artifacts to {out}")
    print(f"candidates surviving: {n_surviving}; top ranked: {len(top)}")
    if result.infeasible:
        print("no candidate satisfied every goal; see report.json")
        return 2
    return 0


def _cmd_synth(args) -> int:
    try:
        ds = synth_dataset(args.name, args.n, seed=args.seed)
    except DatasetError as exc:
        return _fail("synth", exc)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(ds, out)
    schema_out = Path(args.schema_out) if args.schema_out else out.with_suffix(
        ".schema.json")
    schema_out.write_text(json.dumps(
        [c.to_dict() for c in ds.schema], indent=2) + "\n")
    print(f"wrote {args.n} rows to {out}")
    print(f"wrote schema to {schema_out}")
    return 0


def _cmd_report(args) -> int:
    path = Path(args.path) / "report.json"
    try:
        report = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        return _fail("report", exc)

    print(f"status: {report['status']}"
          + (" (infeasible)" if report.get("infeasible") else ""))
    ds = report["dataset"]
    print(f"dataset: {ds['n_rows']} rows, "
          f"{len(ds['features'])} features, {len(ds['targets'])} targets")
    ev = report["evaluation"]
    if ev.get("consistency") is not None:
        print(f"causal consistency: {ev['consistency']:.3f}")
    elif ev.get("causal_skipped"):
        print(f"causal consistency skipped: {ev['causal_skipped']}")
    print(f"rules kept: {len(report['rules']['kept'])}, "
          f"rejected: {len(report['rules']['rejected'])}")
    for t in report["topk"]:
        feats = ", ".join(f"{k}={v if isinstance(v, str) else format(v, '.6g')}"
                          for k, v in t["features"].items())
        print(f"#{t['rank']} score={t['score']:.3f} {feats}")
        print(f"   {t['explanation']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfadvisor",
        description="Counterfactual decision support for tabular performance data")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="answer a query and write artifacts")
    run.add_argument("--config", required=True,
                     help="JSON file with dataset, schema, and query")
    run.add_argument("--seeds", default="",
                     help="comma separated seed overrides")
    run.add_argument("--workers", type=int, default=0,
                     help="thread count override")
    run.add_argument("--out", default="out", help="artifact directory")
    run.set_defaults(func=_cmd_run)

    synth = sub.add_parser("synth", help="write a synthetic benchmark dataset")
    synth.add_argument("--name", required=True, choices=sorted(GENERATORS))
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True, help="CSV path")
    synth.add_argument("--schema-out", default="",
                       help="schema path (default: <out>.schema.json)")
    synth.set_defaults(func=_cmd_synth)

    rep = sub.add_parser("report", help="summarize a finished run directory")
    rep.add_argument("--path", required=True)
    rep.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
