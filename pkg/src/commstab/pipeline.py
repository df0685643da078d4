"""End-to-end analysis: activity log to report.

Stages run in order: ingest, project, reduce/normalize, blockmodel,
stability, trajectories. :func:`analyze` computes everything in memory;
:func:`emit_report` writes the fixed file set; :func:`run_pipeline` does
both and leaves no partial output behind on failure.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import warnings
from contextlib import contextmanager
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Mapping

import jsonschema

from . import __version__
from .blockmodel import BlockModel, fit_blockmodel
from .ingest import (
    activity_stats,
    default_periods,
    parse_activity_log,
    parse_periods,
    slice_periods,
)
from .netmodel import OneModeNetwork, write_pajek_net, write_partition_clu
from .stability import AGGREGATES, modified_rand, stability_series
from .synth import SynthConfig, default_synth_periods, generate_temporal, synth_activity_log
from .trajectory import PERSPECTIVES, TYPES, build_trajectories, flow_counts, trajectories_csv
from .transform import ReductionWarning, comment_network, log_normalize, reaction_network, reduce_network

__all__ = [
    "PipelineConfig",
    "PipelineError",
    "Report",
    "analyze",
    "emit_report",
    "run_pipeline",
    "load_schema",
    "FILE_SET",
]

RELATIONS = ("comments", "reactions")
FIXED_FILES = ("report.json", "stats.csv", "flows.csv", "trajectories.csv")
FILE_SET = FIXED_FILES  # plus <relation>_<period>.net/.clu and optional heatmap.svg


class PipelineError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"stage '{stage}': {message}")
        self.stage = stage


@contextmanager
def _stage(name: str):
    try:
        yield
    except PipelineError:
        raise
    except (ValueError, KeyError, OSError) as exc:
        raise PipelineError(name, str(exc)) from exc


@dataclass
class PipelineConfig:
    """Everything a run depends on; loaded from one JSON document.

    Exactly one of ``input`` (path to a delimited activity export) and
    ``synth`` (generator parameters, see :class:`~commstab.synth.SynthConfig`)
    is set. ``k`` is one cluster count for all relations or a mapping per
    relation.
    """

    output_dir: str = "out"
    input: str | None = None
    schema: dict = field(default_factory=dict)
    periods: object = None
    relations: list = field(default_factory=lambda: list(RELATIONS))
    top_n: int = 80
    k: object = 2
    alpha: float = 0.5
    p: int = 1
    aggregate: str = "consecutive-mean"
    normalize: bool = True
    merge_reactions: bool = True
    on_dangling: str = "error"
    transpose: bool = False
    three_state: bool = False
    svg: bool = False
    synth: dict | None = None
    seed: int | None = None

    @classmethod
    def from_dict(cls, d: Mapping) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**dict(d))

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    @property
    def mode(self) -> str:
        return "input" if self.input is not None else "synth"

    def k_for(self, relation: str) -> int:
        if isinstance(self.k, Mapping):
            return int(self.k.get(relation, 2))
        return int(self.k)

    def synth_config(self) -> SynthConfig:
        params = dict(self.synth or {})
        if self.seed is not None:
            params["seed"] = self.seed
        return SynthConfig.from_dict(params)

    def period_spec(self):
        if self.periods is not None:
            return parse_periods(self.periods)
        if self.mode == "synth":
            return default_synth_periods(self.synth_config().n_periods)
        return default_periods()

    def validate(self) -> None:
        if not self.relations:
            raise ValueError("relations list is empty")
        bad = [r for r in self.relations if r not in RELATIONS]
        if bad:
            raise ValueError(f"unknown relations {bad}; expected a subset of {RELATIONS}")
        if len(set(self.relations)) != len(self.relations):
            raise ValueError("relations must not repeat")
        if (self.input is None) == (self.synth is None and self.seed is None):
            raise ValueError("set exactly one of 'input' or 'synth'/'seed'")
        if self.input is not None and Path(self.input).resolve() == Path(self.output_dir).resolve():
            raise ValueError("input path and output directory must differ")
        if int(self.top_n) < 1:
            raise ValueError("top_n must be >= 1")
        for r in self.relations:
            if self.k_for(r) < 1:
                raise ValueError(f"k for {r} must be >= 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.p not in (0, 1, 2):
            raise ValueError("p must be 0, 1 or 2")
        if self.aggregate not in AGGREGATES:
            raise ValueError(f"aggregate must be one of {AGGREGATES}")
        if self.on_dangling not in ("error", "drop"):
            raise ValueError("on_dangling must be 'error' or 'drop'")
        if self.mode == "synth":
            self.synth_config()
        self.period_spec()

    def canonical(self) -> dict:
        """Analysis-relevant settings; the output location is left out."""
        spec = self.period_spec()
        d = {
            "mode": self.mode,
            "schema": dict(sorted(self.schema.items())),
            "periods": spec.to_dict(),
            "relations": list(self.relations),
            "top_n": int(self.top_n),
            "k": {r: self.k_for(r) for r in self.relations},
            "alpha": float(self.alpha),
            "p": int(self.p),
            "aggregate": self.aggregate,
            "normalize": bool(self.normalize),
            "merge_reactions": bool(self.merge_reactions),
            "on_dangling": self.on_dangling,
            "transpose": bool(self.transpose),
            "three_state": bool(self.three_state),
            "svg": bool(self.svg),
        }
        if self.mode == "synth":
            d["synth"] = self.synth_config().to_dict()
        return d


@dataclass
class Report:
    """Report document plus the text artifacts written next to it."""

    data: dict
    artifacts: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(_fixed(self.data), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _fixed(obj):
    """Round floats to 6 significant digits, recursively."""
    if isinstance(obj, float):
        return float(f"{obj:.6g}")
    if isinstance(obj, dict):
        return {k: _fixed(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_fixed(v) for v in obj]
    return obj


def load_schema() -> dict:
    return json.loads(resources.files("commstab").joinpath("data/report_schema.json").read_text())


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _prepare(raw: OneModeNetwork, cfg: PipelineConfig) -> tuple[OneModeNetwork, bool]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ReductionWarning)
        net = reduce_network(raw, int(cfg.top_n))
    reduced = net.n < raw.n
    if cfg.normalize:
        net = log_normalize(net)
    return net, reduced


def _cells(records) -> dict:
    cells = {t: {p: 0 for p in PERSPECTIVES} for t in TYPES}
    for r in records:
        for p in r.perspectives:
            cells[r.type][p] += 1
    return cells


def analyze(cfg: PipelineConfig) -> Report:
    with _stage("config"):
        cfg.validate()
        spec = cfg.period_spec()
        canonical = cfg.canonical()

    sample = None
    with _stage("ingest"):
        if cfg.mode == "input":
            text = Path(cfg.input).read_text(encoding="utf-8")
            log = parse_activity_log(text, cfg.schema, merge_reactions=cfg.merge_reactions,
                                     on_dangling=cfg.on_dangling)
            source = {"input_sha256": _sha256(text)}
        else:
            sample = generate_temporal(cfg.synth_config())
            log = synth_activity_log(sample, spec, seed=cfg.synth_config().seed)
            source = {"synth_seed": cfg.synth_config().seed}
        slices = slice_periods(log, spec)
        stats = activity_stats(slices, spec)

    labels = spec.labels
    relations = {}
    artifacts: dict[str, str] = {}
    flow_rows, traj_blocks = [], []
    for rel in cfg.relations:
        project = comment_network if rel == "comments" else reaction_network
        nets, models = [], []
        period_docs = []
        with _stage("project"):
            raws = [project(s, transpose=cfg.transpose) for s in slices]
        with _stage("reduce"):
            prepared = [_prepare(r, cfg) for r in raws]
        with _stage("blockmodel"):
            for label, raw, (net, reduced) in zip(labels, raws, prepared):
                if net.n < max(2, cfg.k_for(rel)):
                    raise ValueError(f"{rel} network for {label} has {net.n} actors, too few for k={cfg.k_for(rel)}")
                bm = fit_blockmodel(net, cfg.k_for(rel), cfg.alpha, cfg.p)
                nets.append(net)
                models.append(bm)
                period_docs.append({
                    "label": label,
                    "n_actors_raw": raw.n,
                    "n_arcs_raw": len(raw.arcs),
                    "n_actors": net.n,
                    "n_arcs": len(net.arcs),
                    "reduced": reduced,
                    "blockmodel": bm.to_dict(),
                })
                artifacts[f"{rel}_{label}.net"] = write_pajek_net(net)
                artifacts[f"{rel}_{label}.clu"] = write_partition_clu(bm.partition)
        with _stage("stability"):
            if len(models) < 2:
                stab = {"status": "skipped", "reason": "fewer than 2 periods"}
            else:
                try:
                    series = stability_series([m.partition for m in models], cfg.aggregate)
                except ValueError as exc:
                    stab = {"status": "skipped", "reason": str(exc)}
                else:
                    stab = {"status": "ok", **series.to_dict()}
        with _stage("trajectories"):
            records = build_trajectories(models, three_state=cfg.three_state)
            flows = flow_counts(records, labels) if len(labels) > 1 else None
            traj = {
                "status": "ok",
                "n_actors": len(records),
                "type_counts": {t: sum(r.type == t for r in records) for t in TYPES},
                "cells": _cells(records),
                "flows": [
                    {"period_pair": pp, "from": f, "to": t, "count": n} for pp, f, t, n in (flows.rows() if flows else [])
                ],
            }
            if flows:
                flow_rows.extend((rel, *row) for row in flows.rows())
            traj_blocks.append((rel, records))
        doc = {"periods": period_docs, "stability": stab, "trajectories": traj}
        if sample is not None:
            doc["truth_agreement"] = _truth_agreement(models, sample)
        relations[rel] = doc

    data = {
        "provenance": {
            "tool": "commstab",
            "version": __version__,
            "config_sha256": _sha256(json.dumps(canonical, sort_keys=True)),
            **source,
        },
        "config": canonical,
        "stats": {"status": "ok", **stats.to_dict()},
        "relations": relations,
    }

    artifacts["stats.csv"] = stats.to_csv()
    artifacts["flows.csv"] = _flows_csv(flow_rows)
    artifacts["trajectories.csv"] = _trajectories_csv(traj_blocks, labels)
    if cfg.svg:
        artifacts["heatmap.svg"] = heatmap_svg(data)
    return Report(data, artifacts)


def _truth_agreement(models: list[BlockModel], sample) -> list[dict]:
    out = []
    for bm, truth in zip(models, sample.partitions):
        fitted = bm.partition
        try:
            score = modified_rand(fitted, truth)
        except ValueError:
            score = None
        out.append({"n_shared": len(set(fitted.units) & set(truth.units)), "rand": score})
    return out


def _flows_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["relation", "period_pair", "from", "to", "count"])
    w.writerows(rows)
    return buf.getvalue()


def _trajectories_csv(blocks, labels) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["relation", "actor", *labels, "type", "perspectives"])
    for rel, records in blocks:
        body = trajectories_csv(records, labels).splitlines()[1:]
        for line in csv.reader(body):
            w.writerow([rel, *line])
    return buf.getvalue()


def heatmap_svg(data: Mapping, cell: int = 24, gap: int = 16) -> str:
    """Block-density heatmaps, one row per relation, one panel per period."""
    panels = []
    y = gap
    width = gap
    for rel, doc in sorted(data["relations"].items()):
        x = gap
        panels.append(f'<text x="{x}" y="{y + 10}" font-size="12">{rel}</text>')
        y += 16
        row_h = 0
        for period in doc["periods"]:
            dens = period["blockmodel"]["density"]
            k = len(dens)
            panels.append(f'<text x="{x}" y="{y + 10}" font-size="10">{period["label"]}</text>')
            for i, row in enumerate(dens):
                for j, v in enumerate(row):
                    shade = int(round(255 * (1 - min(max(v, 0.0), 1.0))))
                    panels.append(
                        f'<rect x="{x + j * cell}" y="{y + 14 + i * cell}" width="{cell}" height="{cell}" '
                        f'fill="rgb({shade},{shade},{shade})" stroke="#888"/>'
                    )
            x += k * cell + gap
            row_h = max(row_h, k * cell + 14)
        width = max(width, x)
        y += row_h + gap
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{y}" '
            f'viewBox="0 0 {width} {y}" font-family="sans-serif">')
    return "\n".join([head, *panels, "</svg>"]) + "\n"


def emit_report(report: Report, directory) -> list[Path]:
    """Write ``report.json`` and all artifacts; validate against the bundled schema."""
    doc = json.loads(report.to_json())
    jsonschema.validate(doc, load_schema())
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        for name in sorted(report.artifacts):
            path = out / name
            path.write_text(report.artifacts[name], encoding="utf-8")
            written.append(path)
        path = out / "report.json"
        path.write_text(report.to_json(), encoding="utf-8")
        written.append(path)
    except OSError:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    return written


def run_pipeline(cfg: PipelineConfig) -> Report:
    report = analyze(cfg)
    with _stage("report"):
        emit_report(report, cfg.output_dir)
    return report
