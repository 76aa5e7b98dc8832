"""Command-line interface: ``lpminer {discover,evaluate,segment,export,gen-synthetic}``.

A run is described by a YAML/JSON config; flags override single keys.
Config keys::

    input: log.xes                 # or .csv
    format: xes                    # optional, from the extension otherwise
    mapping: {...} | mapping.yaml  # CSV column mapping
    spec: spec.yaml | {...}        # utility spec
    discovery: {max_activities, top_k, beam_width, budget,
                cooccurrence_prefilter, prune_zero_utility, prune_model, workers}
    output: out_dir
    exports: {report, dot, pnml}
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import shutil
import sys
import tempfile
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping, Sequence

import yaml

from . import __version__
from .discovery import discover
from .dot import net_to_dot
from .errors import ConfigError, LogFormatError, LPMError
from .log import ColumnMapping, EventLog, parse_csv, parse_xes, write_csv, write_xes
from .petri import AcceptingPetriNet
from .pnml import pnml_string, read_pnml
from .report import breakdown_lines, log_summary, ranking_json, ranking_text
from .segmentation import Replay
from .synthetic import SYNTHETIC_CSV_MAPPING, CostModel, gen_synthetic
from .tree import parse_tree, tree_to_apn
from .utility.core import breakdown
from .utility.spec import UtilitySpec, load_spec

logger = logging.getLogger("lpminer")


class CLIError(LPMError):
    module = "cli"


# ---------------------------------------------------------------------------
# configuration


@dataclass
class DiscoveryParams:
    max_activities: int = 4
    top_k: int = 10
    beam_width: int = 200
    budget: int = 100_000
    cooccurrence_prefilter: bool = True
    prune_zero_utility: bool = True
    prune_model: bool = True
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)


@dataclass
class Exports:
    report: bool = True
    dot: bool = True
    pnml: bool = True


@dataclass
class RunConfig:
    input: str | None = None
    format: str | None = None
    mapping: Any = None
    spec: Any = None
    discovery: DiscoveryParams = field(default_factory=DiscoveryParams)
    output: str | None = None
    exports: Exports = field(default_factory=Exports)
    base_dir: Path = field(default=Path("."), repr=False)


def _typed(cls, raw: Mapping[str, Any], where: str):
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{where} must be a mapping", module="cli")
    known = {f.name: f for f in fields(cls)}
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}", module="cli")
    out = cls()
    for k, v in raw.items():
        default = getattr(out, k)
        if isinstance(default, bool):
            if not isinstance(v, bool):
                raise ConfigError(f"{where}.{k} must be true or false", module="cli")
        elif isinstance(default, int):
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"{where}.{k} must be an integer", module="cli")
        setattr(out, k, v)
    return out


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    p = Path(path)
    try:
        raw = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}", module="cli") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: {exc}", module="cli") from None
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{p}: config must be a mapping", module="cli")
    allowed = {f.name for f in fields(RunConfig)} - {"base_dir"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"{p}: unknown config key(s) {sorted(unknown)}", module="cli")
    cfg = RunConfig(base_dir=p.parent)
    for k in ("input", "format", "mapping", "spec", "output"):
        if k in raw:
            setattr(cfg, k, raw[k])
    if "discovery" in raw:
        cfg.discovery = _typed(DiscoveryParams, raw["discovery"] or {}, "discovery")
    if "exports" in raw:
        cfg.exports = _typed(Exports, raw["exports"] or {}, "exports")
    return cfg


def _resolve(cfg: RunConfig, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else cfg.base_dir / p


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    here = Path(".")
    for k in ("input", "mapping", "spec", "output"):
        v = getattr(args, k, None)
        if v is not None:
            # paths given on the command line are relative to the working directory
            setattr(cfg, k, str((here / v).resolve()) if not Path(v).is_absolute() else v)
    if getattr(args, "format", None):
        cfg.format = args.format
    d = cfg.discovery
    for k in ("max_activities", "top_k", "beam_width", "budget", "workers"):
        v = getattr(args, k, None)
        if v is not None:
            setattr(d, k, v)
    for flag, key in (("no_prefilter", "cooccurrence_prefilter"), ("no_zero_pruning", "prune_zero_utility"), ("no_model_pruning", "prune_model")):
        if getattr(args, flag, False):
            setattr(d, key, False)
    for k in ("report", "dot", "pnml"):
        if getattr(args, f"no_{k}", False):
            setattr(cfg.exports, k, False)
    return cfg


def _validate(cfg: RunConfig, *, need_spec: bool, need_output: bool) -> None:
    if not cfg.input:
        raise ConfigError("no input log given (config key 'input' or --input)", module="cli")
    fmt = cfg.format or Path(cfg.input).suffix.lower().lstrip(".")
    if fmt not in ("xes", "csv"):
        raise ConfigError(f"unknown log format {fmt!r}; use xes or csv", module="cli")
    cfg.format = fmt
    if need_spec and cfg.spec is None:
        raise ConfigError("no utility spec given (config key 'spec' or --spec)", module="cli")
    if need_output and not cfg.output:
        raise ConfigError("no output directory given (config key 'output' or --output)", module="cli")
    d = cfg.discovery
    if d.max_activities < 2 or d.max_activities > 5:
        raise ConfigError("discovery.max_activities must be between 2 and 5", module="cli")
    if d.top_k < 1 or d.beam_width < 1 or d.budget < 1 or d.workers < 1:
        raise ConfigError("discovery.top_k, beam_width, budget and workers must be positive", module="cli")


# ---------------------------------------------------------------------------
# inputs


def _load_mapping(cfg: RunConfig, header: Sequence[str], rows: list[dict]) -> ColumnMapping:
    m = cfg.mapping
    if isinstance(m, str):
        p = _resolve(cfg, m)
        try:
            m = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read column mapping {p}: {exc}", module="event_log") from None
    if m is not None:
        if not isinstance(m, Mapping):
            raise ConfigError("column mapping must be a mapping", module="event_log")
        return ColumnMapping.from_dict(m)
    return infer_mapping(header, rows)


def infer_mapping(header: Sequence[str], rows: list[dict]) -> ColumnMapping:
    """Default mapping: columns case/activity/time (and id if present); every
    other column is an event property, real when all its values parse as numbers."""
    base = ColumnMapping()
    reserved = {base.case, base.activity, base.timestamp, "id"}
    props = {}
    for col in header:
        if col in reserved:
            continue
        vals = [r[col] for r in rows if r.get(col)]
        try:
            for v in vals:
                float(v)
            props[col] = "real"
        except ValueError:
            props[col] = "text"
    return ColumnMapping.from_dict({"event_id": "id" if "id" in header else None, "properties": props})


def load_log(cfg: RunConfig) -> EventLog:
    path = _resolve(cfg, cfg.input)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise LogFormatError(f"cannot read input log: {exc.strerror}", location=str(path)) from None
    try:
        if cfg.format == "xes":
            return parse_xes(data)
        text = data.decode("utf-8-sig")
        reader = csv.DictReader(io.StringIO(text))
        rows = list(reader)
        mapping = _load_mapping(cfg, reader.fieldnames or [], rows)
        return parse_csv(text, mapping)
    except LogFormatError as exc:
        raise LogFormatError(str(exc), location=str(path)) from None


def load_spec_from(cfg: RunConfig) -> UtilitySpec:
    spec = cfg.spec
    if isinstance(spec, Mapping):
        return load_spec(spec)
    return load_spec(_resolve(cfg, spec))


def load_model(args: argparse.Namespace) -> tuple[AcceptingPetriNet, Any]:
    if getattr(args, "tree", None):
        tree = parse_tree(args.tree)
        return tree_to_apn(tree), tree
    if getattr(args, "model", None):
        return read_pnml(args.model), None
    raise CLIError("give a model with --model FILE.pnml or --tree TEXT")


# ---------------------------------------------------------------------------
# commands


def _atomic_dir(final: Path):
    """Write into a temporary sibling directory; rename on success only."""
    final.parent.mkdir(parents=True, exist_ok=True)
    return Path(tempfile.mkdtemp(prefix=f".{final.name}.", dir=final.parent))


def cmd_discover(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    _validate(cfg, need_spec=True, need_output=True)
    spec = load_spec_from(cfg)
    log = load_log(cfg)
    d = cfg.discovery
    ranking = discover(
        log,
        spec,
        max_activities=d.max_activities,
        top_k=d.top_k,
        beam_width=d.beam_width,
        budget=d.budget,
        prune_zero_utility=d.prune_zero_utility,
        prune_model=d.prune_model,
        cooccurrence_prefilter=d.cooccurrence_prefilter,
        workers=d.workers,
    )
    header = {
        "lpminer": __version__,
        "input": Path(cfg.input).name,
        "format": cfg.format,
        "utility_spec": {
            "constraints": [c.name for c in spec.constraints],
            "utilities": [f"{f.name} x {f.weight:g}" for f in spec.utilities],
        },
        "parameters": {k: v for k, v in asdict(d).items() if k != "workers"},
    }
    final = _resolve(cfg, cfg.output)
    tmp = _atomic_dir(final)
    try:
        if cfg.exports.report:
            (tmp / "report.txt").write_text(ranking_text(ranking, log, header=header), encoding="utf-8")
        (tmp / "scores.json").write_text(ranking_json(ranking, log, header=header), encoding="utf-8")
        if cfg.exports.dot or cfg.exports.pnml:
            (tmp / "models").mkdir()
        for i, c in enumerate(ranking, start=1):
            stem = tmp / "models" / f"rank{i:02d}"
            if cfg.exports.pnml:
                stem.with_suffix(".pnml").write_text(pnml_string(c.apn, net_id=f"rank{i:02d}", name=c.text), encoding="utf-8")
            if cfg.exports.dot:
                stem.with_suffix(".dot").write_text(net_to_dot(c.apn, title=f"#{i} {c.text} score={c.score:g}"), encoding="utf-8")
        if final.exists():
            shutil.rmtree(final)
        tmp.rename(final)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    print(f"{len(ranking)} LPMs written to {final}")
    if ranking.truncated:
        print("warning: evaluation budget exhausted; the ranking is partial", file=sys.stderr)
    for i, c in enumerate(ranking, start=1):
        print(f"#{i} {c.score:g} {c.text}")
    return 0


def _segment_lines(log: EventLog, apn: AcceptingPetriNet) -> list[str]:
    rp = Replay(log, apn)
    out = []
    for t, seg in enumerate(rp.segmentations()):
        out.append(f"{log.traces[t].case_id}: {seg.render()}")
        out.append(f"  {seg.describe()}")
    return out


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    _validate(cfg, need_spec=True, need_output=False)
    spec = load_spec_from(cfg)
    apn, tree = load_model(args)
    log = load_log(cfg)
    from .utility.core import Model

    bd = breakdown(log, Model(apn, tree), spec.composite)
    print(f"log: {log_summary(log)}")
    print(f"model: {tree.text if tree is not None else args.model}")
    print(f"score: {bd.score:g}")
    print("\n".join(breakdown_lines(bd)))
    if args.segments:
        print("segmentation:")
        print("\n".join("  " + line for line in _segment_lines(log, apn)))
    return 0


def cmd_segment(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    _validate(cfg, need_spec=False, need_output=False)
    apn, _ = load_model(args)
    log = load_log(cfg)
    print("\n".join(_segment_lines(log, apn)))
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    apn, tree = load_model(args)
    fmt = args.to
    if fmt is None and args.output:
        fmt = Path(args.output).suffix.lstrip(".").lower()
    if fmt not in ("dot", "pnml"):
        raise CLIError("export format must be dot or pnml (use --to or an output file extension)")
    name = tree.text if tree is not None else Path(args.model).stem
    text = net_to_dot(apn, title=name) if fmt == "dot" else pnml_string(apn, name=name)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_gen_synthetic(args: argparse.Namespace) -> int:
    noise = [a for a in args.noise_activities.split(",") if a]
    costs = CostModel(args.cost_low, args.cost_high)
    log = gen_synthetic(parse_tree(args.pattern), args.n_traces, args.noise_rate, args.seed, cost_model=costs, noise_activities=noise)
    out = Path(args.output)
    fmt = args.format or out.suffix.lstrip(".").lower()
    buf = io.StringIO()
    if fmt == "xes":
        write_xes(log, buf)
    elif fmt == "csv":
        write_csv(log, buf, SYNTHETIC_CSV_MAPPING)
        mapping = {
            "case": "case",
            "activity": "activity",
            "timestamp": "time",
            "event_id": "id",
            "properties": {"cost": "real"},
            "case_properties": {"total_cost": "real"},
        }
        out.with_name(out.stem + ".mapping.yaml").write_text(yaml.safe_dump(mapping, sort_keys=True), encoding="utf-8")
    else:
        raise CLIError(f"unknown output format {fmt!r}; use xes or csv")
    out.write_text(buf.getvalue(), encoding="utf-8")
    print(f"wrote {len(log)} traces, {log.n_events} events to {out}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _log_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="run config (YAML or JSON)")
    p.add_argument("--input", help="event log (.xes or .csv)")
    p.add_argument("--format", choices=["xes", "csv"], help="log format (default: from extension)")
    p.add_argument("--mapping", help="CSV column mapping file")


def _model_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--model", help="PNML file")
    g.add_argument("--tree", help="process tree text, e.g. 'seq(A, and(loop(B), C))'")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lpminer", description="Utility-driven Local Process Model mining.")
    ap.add_argument("--version", action="version", version=f"lpminer {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discover", help="rank LPMs by composite utility")
    _log_args(p)
    p.add_argument("--spec", help="utility spec (YAML or JSON)")
    p.add_argument("--output", help="output directory")
    p.add_argument("--max-activities", type=int)
    p.add_argument("--top-k", type=int)
    p.add_argument("--beam-width", type=int)
    p.add_argument("--budget", type=int, help="maximum number of utility evaluations")
    p.add_argument("--workers", type=int)
    p.add_argument("--no-prefilter", action="store_true", help="seed from all activity pairs")
    p.add_argument("--no-zero-pruning", action="store_true")
    p.add_argument("--no-model-pruning", action="store_true")
    p.add_argument("--no-report", action="store_true")
    p.add_argument("--no-dot", action="store_true")
    p.add_argument("--no-pnml", action="store_true")
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("evaluate", help="score one model and list every term")
    _log_args(p)
    _model_args(p)
    p.add_argument("--spec", help="utility spec (YAML or JSON)")
    p.add_argument("--segments", action="store_true", help="also print each trace's segmentation")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("segment", help="print the fitting/non-fitting segmentation of every trace")
    _log_args(p)
    _model_args(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("export", help="convert a model to DOT or PNML")
    _model_args(p)
    p.add_argument("--to", choices=["dot", "pnml"])
    p.add_argument("--output", help="output file (default: stdout)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("gen-synthetic", help="write a synthetic log with a planted pattern")
    p.add_argument("--pattern", required=True, help="process tree text")
    p.add_argument("--n-traces", type=int, default=50)
    p.add_argument("--noise-rate", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-activities", default="X,Y,Z", help="comma-separated")
    p.add_argument("--cost-low", type=int, default=10)
    p.add_argument("--cost-high", type=int, default=100)
    p.add_argument("--format", choices=["xes", "csv"])
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_gen_synthetic)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except LPMError as exc:
        print(f"error [{exc.module}]: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error [cli]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
