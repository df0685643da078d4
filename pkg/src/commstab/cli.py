"""Command-line entry point: ``commstab <subcommand> ...``.

Each subcommand is a thin wrapper over one library operation; every number
written by the CLI comes from the library. Errors go to stderr with a
nonzero exit status (1 for data/config errors, 2 for usage errors).
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import jsonschema

from . import __version__
from .blockmodel import BlockModel, fit_blockmodel
from .ingest import (
    activity_stats,
    default_periods,
    parse_activity_log,
    parse_periods,
    slice_periods,
    write_activity_log,
)
from .netmodel import (
    Partition,
    read_pajek_net,
    read_partition_clu,
    write_pajek_net,
    write_partition_clu,
)
from .pipeline import PipelineConfig, PipelineError, heatmap_svg, load_schema, run_pipeline
from .stability import AGGREGATES, stability_series
from .synth import SynthConfig, generate_planted, generate_temporal, synth_activity_log, truth_csv, default_synth_periods
from .trajectory import build_trajectories, flow_counts, trajectories_csv
from .transform import binarize, comment_network, log_normalize, reaction_network, reduce_network

__all__ = ["main", "build_parser"]


class CLIError(Exception):
    pass


def _read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _json_arg(value):
    """A JSON document given inline or as a path to a ``.json`` file."""
    if value is None:
        return None
    if value.endswith(".json") and Path(value).exists():
        return json.loads(_read(value))
    return json.loads(value)


def _load_log(args):
    return parse_activity_log(
        _read(args.input),
        _json_arg(args.schema) or {},
        merge_reactions=args.merge_reactions,
        on_dangling=args.on_dangling,
    )


def _periods(value):
    return default_periods() if value is None else parse_periods(value)


# --- subcommands -------------------------------------------------------------


def cmd_ingest(args) -> None:
    log = _load_log(args)
    spec = _periods(args.periods)
    stats = activity_stats(slice_periods(log, spec), spec)
    out = Path(args.out_dir)
    _write(out / "activity.csv", write_activity_log(log))
    _write(out / "stats.csv", stats.to_csv())
    sys.stdout.write(stats.to_csv())


def cmd_project(args) -> None:
    log = _load_log(args)
    project = comment_network if args.relation == "comments" else reaction_network
    if args.periods is None:
        if not args.out:
            raise CLIError("--out is required without --periods")
        net = project(log, transpose=args.transpose)
        _write(args.out, write_pajek_net(net))
        print(f"{args.relation}: {net.n} actors, {len(net.arcs)} arcs -> {args.out}")
        return
    if not args.out_dir:
        raise CLIError("--out-dir is required with --periods")
    spec = parse_periods(args.periods)
    for label, part in zip(spec.labels, slice_periods(log, spec)):
        net = project(part, transpose=args.transpose)
        path = Path(args.out_dir) / f"{args.relation}_{label}.net"
        _write(path, write_pajek_net(net))
        print(f"{label}: {net.n} actors, {len(net.arcs)} arcs -> {path}")


def cmd_reduce(args) -> None:
    net = read_pajek_net(_read(args.input))
    out = reduce_network(net, args.top_n)
    _write(args.out, write_pajek_net(out))
    print(f"kept {out.n} of {net.n} actors")


def cmd_normalize(args) -> None:
    net = read_pajek_net(_read(args.input))
    out = binarize(net) if args.binary else log_normalize(net)
    _write(args.out, write_pajek_net(out))


def cmd_blockmodel(args) -> None:
    net = read_pajek_net(_read(args.input))
    bm = fit_blockmodel(net, args.k, args.alpha, args.p)
    _write(args.out, json.dumps(bm.to_dict(), indent=2, sort_keys=True) + "\n")
    if args.clu:
        _write(args.clu, write_partition_clu(bm.partition))
    sizes = ", ".join(f"{c}:{bm.positions[c]}({n})" for c, n in sorted(bm.sizes().items()))
    print(f"structure: {bm.structure}; clusters {sizes}")


def _load_model(path) -> BlockModel:
    return BlockModel.from_dict(json.loads(_read(path)))


def _stability_partitions(args) -> list[Partition]:
    if args.models:
        return [_load_model(p).partition for p in args.models]
    if not args.net or len(args.net) != len(args.clu):
        raise CLIError("--clu needs one --net per partition to name its units")
    return [read_partition_clu(_read(c), read_pajek_net(_read(n)).actors) for c, n in zip(args.clu, args.net)]


def cmd_stability(args) -> None:
    parts = _stability_partitions(args)
    series = stability_series(parts, args.aggregate)
    text = json.dumps(series.to_dict(), indent=2, sort_keys=True) + "\n"
    if args.out:
        _write(args.out, text)
    print(f"{args.aggregate}: {series.series:.6g}")


def cmd_trajectories(args) -> None:
    models = [_load_model(p) for p in args.models]
    labels = args.labels.split(",") if args.labels else [f"T{i + 1}" for i in range(len(models))]
    if len(labels) != len(models):
        raise CLIError(f"{len(labels)} labels for {len(models)} models")
    records = build_trajectories(models, three_state=args.three_state)
    _write(args.out, trajectories_csv(records, labels))
    if args.flows:
        if len(models) < 2:
            raise CLIError("flows need at least 2 models")
        _write(args.flows, flow_counts(records, labels).to_csv())
    if args.svg:
        doc = {"relations": {"models": {"periods": [
            {"label": lab, "blockmodel": m.to_dict()} for lab, m in zip(labels, models)
        ]}}}
        _write(args.svg, heatmap_svg(doc))
    print(f"{len(records)} trajectories -> {args.out}")


def cmd_synth(args) -> None:
    params = _json_arg(args.config) or {}
    if args.seed is not None:
        params["seed"] = args.seed
    cfg = SynthConfig.from_dict(params)
    out = Path(args.out_dir)
    if cfg.n_periods == 1:
        net, part = generate_planted(cfg)
        _write(out / "T1.net", write_pajek_net(net))
        _write(out / "T1.clu", write_partition_clu(part))
        print(f"planted network: {net.n} actors, {len(net.arcs)} arcs")
        return
    sample = generate_temporal(cfg)
    spec = default_synth_periods(cfg.n_periods)
    for label, net, part in zip(spec.labels, sample.networks, sample.partitions):
        _write(out / f"{label}.net", write_pajek_net(net))
        _write(out / f"{label}.clu", write_partition_clu(part))
    _write(out / "truth.csv", truth_csv(sample, spec.labels))
    if args.activity:
        _write(out / "activity.csv", write_activity_log(synth_activity_log(sample, spec, seed=cfg.seed)))
    print(f"{cfg.n_periods} periods, {len(sample.truth)} actors -> {out}")


_OVERRIDES = ("input", "output_dir", "seed", "top_n", "alpha", "p", "aggregate", "periods")


def cmd_pipeline(args) -> None:
    doc = _json_arg(args.config) if args.config else {}
    for key in _OVERRIDES:
        value = getattr(args, key)
        if value is not None:
            doc[key] = value
    if args.k is not None:
        doc["k"] = args.k
    if args.relations is not None:
        doc["relations"] = [r for r in args.relations.split(",") if r]
    for key in ("svg", "three_state", "transpose", "normalize"):
        value = getattr(args, key)
        if value is not None:
            doc[key] = value
    cfg = PipelineConfig.from_dict(doc)
    report = run_pipeline(cfg)
    for rel, sec in sorted(report.data["relations"].items()):
        stab = sec["stability"]
        score = f"{stab['series']:.6g}" if stab["status"] == "ok" else f"skipped ({stab['reason']})"
        print(f"{rel}: stability {score}")
    print(f"report written to {cfg.output_dir}")


def cmd_report(args) -> None:
    doc = json.loads(_read(args.input))
    jsonschema.validate(doc, load_schema())
    prov = doc["provenance"]
    print(f"{prov['tool']} {prov['version']} config {prov['config_sha256'][:12]}")
    for rel, sec in sorted(doc["relations"].items()):
        print(f"[{rel}]")
        for period in sec["periods"]:
            bm = period["blockmodel"]
            sizes = ", ".join(f"{bm['positions'][c]} {n}" for c, n in sorted(bm["sizes"].items()))
            print(f"  {period['label']}: {period['n_actors']} actors, {bm['structure']} ({sizes})")
        stab = sec["stability"]
        if stab["status"] == "ok":
            print(f"  stability ({stab['aggregate']}): {stab['series']:.6g}")
        else:
            print(f"  stability skipped: {stab['reason']}")
        counts = sec["trajectories"].get("type_counts", {})
        print("  trajectories: " + ", ".join(f"{t} {n}" for t, n in counts.items()))
    if args.svg:
        _write(args.svg, heatmap_svg(doc))


# --- parser ------------------------------------------------------------------


def _log_options(p) -> None:
    p.add_argument("--input", required=True, help="delimited activity export")
    p.add_argument("--schema", help="JSON (inline or .json file) mapping field names to column names")
    p.add_argument("--merge-reactions", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--on-dangling", choices=("error", "drop"), default="error")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="commstab", description="Blockmodel stability of online community networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse an activity export; write stats.csv and a normalized log")
    _log_options(p)
    p.add_argument("--periods", help="label:YYYY-MM:YYYY-MM,... or a .json file (default: built-in periods)")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("project", help="one-mode actor network from an activity log")
    _log_options(p)
    p.add_argument("--relation", choices=("comments", "reactions"), default="comments")
    p.add_argument("--transpose", action="store_true", help="owner -> commenter orientation")
    p.add_argument("--periods", help="write one network per period into --out-dir")
    p.add_argument("--out", help="output .net (whole log)")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("reduce", help="keep the top-N actors by total strength")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--top-n", type=int, default=80)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("normalize", help="ln(1 + w) weights, or binary with --binary")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--log", dest="binary", action="store_false", help="ln(1 + w) (default)")
    g.add_argument("--binary", dest="binary", action="store_true")
    p.set_defaults(func=cmd_normalize, binary=False)

    p = sub.add_parser("blockmodel", help="Ward clustering on structural dissimilarity, then the image")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--p", type=int, default=1, choices=(0, 1, 2))
    p.add_argument("--out", required=True, help="model JSON")
    p.add_argument("--clu", help="also write the partition as .clu")
    p.set_defaults(func=cmd_blockmodel)

    p = sub.add_parser("stability", help="modified Rand index across periods")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--models", nargs="+", help="model JSON files in period order")
    src.add_argument("--clu", nargs="+", help=".clu files in period order (needs --net)")
    p.add_argument("--net", nargs="+", help=".net files naming the units of each --clu")
    p.add_argument("--aggregate", choices=AGGREGATES, default="consecutive-mean")
    p.add_argument("--out", help="write the matrix and series score as JSON")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("trajectories", help="per-actor position trajectories and flows")
    p.add_argument("--models", nargs="+", required=True)
    p.add_argument("--labels", help="comma-separated period labels")
    p.add_argument("--out", required=True)
    p.add_argument("--flows")
    p.add_argument("--three-state", action="store_true", help="keep semi-periphery separate")
    p.add_argument("--svg", help="block-density heatmap")
    p.set_defaults(func=cmd_trajectories)

    p = sub.add_parser("synth", help="planted core-periphery networks with churn")
    p.add_argument("--config", help="generator parameters as JSON (inline or .json file)")
    p.add_argument("--seed", type=int)
    p.add_argument("--activity", action="store_true", help="also write a matching activity log")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pipeline", help="config-driven end-to-end run")
    p.add_argument("--config", help="pipeline config JSON (inline or .json file)")
    p.add_argument("--input")
    p.add_argument("--output-dir")
    p.add_argument("--seed", type=int, help="synth mode seed")
    p.add_argument("--periods")
    p.add_argument("--relations", help="comma-separated subset of comments,reactions")
    p.add_argument("--top-n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--p", type=int)
    p.add_argument("--aggregate", choices=AGGREGATES)
    for flag in ("svg", "three-state", "transpose", "normalize"):
        p.add_argument(f"--{flag}", action=argparse.BooleanOptionalAction, default=None)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("report", help="validate and summarize a report.json")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            args.func(args)
    except PipelineError as exc:
        print(f"commstab {args.command}: {exc}", file=sys.stderr)
        return 1
    except jsonschema.ValidationError as exc:
        print(f"commstab {args.command}: report does not match schema: {exc.message}", file=sys.stderr)
        return 1
    except (CLIError, ValueError, KeyError, OSError) as exc:
        print(f"commstab {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
