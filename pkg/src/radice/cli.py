"""Command-line interface: ``radice diagnose | simulate | evaluate``.

Exit codes: 0 success, 1 invalid input or I/O failure, 2 no anomaly detected,
3 no root cause found (the report is still written).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from . import evaluation
from .anomaly_window import AnomalyWindow, NoAnomalyError, WindowError
from .dataset import DataError, load_csv, save_csv
from .domain_knowledge import DomainKnowledgeModel, KnowledgeError, load_dk
from .graph import GraphError
from .pipeline import PipelineConfig, diagnose
from .plot import plot_csv, plot_rows, plot_svg
from .simulator import GroundTruthGraph, SimulationError, load_fixture, simulate_run

log = logging.getLogger("radice")

EXIT_OK, EXIT_ERROR, EXIT_NO_ANOMALY, EXIT_NO_ROOT_CAUSE = 0, 1, 2, 3

# pipeline options shared by diagnose and evaluate
PIPELINE_FLAGS = {
    "z_threshold": float, "tau_max": int, "alpha": float, "min_sim": float,
    "max_shift": int, "max_width": int, "shift_penalty": float, "smooth_penalty": float,
    "entropy_bins": int, "entropy_min_gap": float,
}
DEFAULTS = {"runs": 50, "seed": 0, "jobs": 1, "out": ".",
            "fixtures": "5,10,15,25", "variants": ",".join(evaluation.STANDARD_VARIANTS)}


class UsageError(Exception):
    pass


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    for name, kind in PIPELINE_FLAGS.items():
        p.add_argument("--" + name.replace("_", "-"), type=kind, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radice", description="Causal root cause analysis of performance drops.")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("diagnose", help="find the root causes of a drop in a metrics CSV")
    d.add_argument("--data")
    d.add_argument("--target")
    d.add_argument("--dk", help="domain knowledge JSON")
    d.add_argument("--out")
    d.add_argument("--config", help="JSON file with default values for any flag")
    d.add_argument("--window", help="anomaly window START:END (sample indices, inclusive)")
    _add_pipeline_flags(d)

    s = sub.add_parser("simulate", help="write simulated runs with a known root cause")
    s.add_argument("--graph", help="fixture size (5, 10, 15, 25) or ground-truth JSON path")
    s.add_argument("--runs", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.add_argument("--config")

    e = sub.add_parser("evaluate", help="recall and precision of knowledge variants on simulated runs")
    e.add_argument("--fixtures", help="comma-separated fixture sizes or ground-truth JSON paths")
    e.add_argument("--variants", help="comma-separated variant names, e.g. nodk,L,L50E,P_nodk")
    e.add_argument("--runs", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--out")
    e.add_argument("--jobs", type=int)
    e.add_argument("--compare", nargs="?", const="", default=None,
                   help="reference CSV (graph_size,variant,recall,precision); bundled table when no path")
    e.add_argument("--config")
    _add_pipeline_flags(e)
    return parser


def merge_options(args: argparse.Namespace) -> dict[str, Any]:
    """Flags override the config file, which overrides the defaults."""
    opts = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        known = set(vars(args)) - {"command", "config"}
        for key, value in cfg.items():
            key = key.replace("-", "_")
            if key not in known:
                raise UsageError(f"unknown config key {key!r}")
            opts[key] = value
    for key, value in vars(args).items():
        if key not in ("command", "config") and value is not None:
            opts[key] = value
    return opts


def pipeline_config(opts: dict[str, Any]) -> PipelineConfig:
    try:
        return PipelineConfig().updated({k: opts.get(k) for k in PIPELINE_FLAGS})
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid pipeline option: {exc}") from exc


def _require(opts, *names):
    missing = [n for n in names if opts.get(n) in (None, "")]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def cmd_diagnose(opts: dict[str, Any]) -> int:
    _require(opts, "data", "target")
    config = pipeline_config(opts)
    inp = load_csv(opts["data"], opts["target"])
    dk = load_dk(opts["dk"], inp.dataset.metric_names) if opts.get("dk") else DomainKnowledgeModel.empty()
    window = AnomalyWindow.parse(opts["window"]) if opts.get("window") else None
    out = Path(opts["out"])
    try:
        result = diagnose(inp, dk, config, window)
    except NoAnomalyError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NO_ANOMALY
    report = result.report
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "report.json", json.dumps(report.to_dict(), indent=1) + "\n")
    _write(out / "graph.dot", report.to_dot())
    rows = plot_rows(inp.dataset, report.sub_graph.vertices, report.window)
    _write(out / "plot.csv", plot_csv(rows))
    _write(out / "plot.svg", plot_svg(rows, report.window, f"{report.target}: window "
                                      f"{report.window.start}-{report.window.end}"))
    print(summary(report))
    if not report.root_causes:
        print("no root cause found", file=sys.stderr)
        return EXIT_NO_ROOT_CAUSE
    return EXIT_OK


def summary(report) -> str:
    w = report.window
    lines = [f"target {report.target}, anomaly window {w.start}-{w.end} (n={w.n})"]
    if report.root_causes:
        lines.append("root causes:")
        for m, s in report.root_causes.items():
            lines.append(f"  {m:<24} score {s.score:.3f}  corr {s.corr:+.3f}  width {s.width}  shift {s.shift}")
    else:
        lines.append("root causes: none")
    if report.intermediates:
        lines.append("intermediate metrics: " + ", ".join(report.intermediates))
    reasons = (("below min_sim", report.below_min_sim), ("sign rule", report.sign_rule),
               ("no causal path to target", report.no_causal_path))
    for label, items in reasons:
        if items:
            lines.append(f"filtered ({label}): " + ", ".join(items))
    return "\n".join(lines)


def _load_graph(spec: str) -> GroundTruthGraph:
    spec = str(spec).strip()
    size = spec[1:] if spec.lower().startswith("n") else spec
    if size.isdigit():
        try:
            return load_fixture(int(size))
        except FileNotFoundError:
            raise UsageError(f"no bundled fixture of size {size}") from None
    return GroundTruthGraph.load(spec)


def cmd_simulate(opts: dict[str, Any]) -> int:
    _require(opts, "graph")
    gt = _load_graph(opts["graph"])
    runs, seed = int(opts["runs"]), int(opts["seed"])
    if runs < 0:
        raise UsageError("--runs must be >= 0")
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"graph": gt.name or str(opts["graph"]), "performance": gt.performance,
                "length": evaluation.DEFAULT_LENGTH, "seed": seed, "runs": []}
    for r in range(runs):
        sim = simulate_run(gt, evaluation.DEFAULT_LENGTH, evaluation.run_seed(seed, gt.size, r))
        name = f"run_{r:03d}.csv"
        save_csv(sim.dataset, out / name)
        manifest["runs"].append(sim.to_manifest(name))
    _write(out / "manifest.json", json.dumps(manifest, indent=1) + "\n")
    print(f"wrote {runs} run(s) to {out}")
    return EXIT_OK


def cmd_evaluate(opts: dict[str, Any]) -> int:
    try:
        variants = evaluation.parse_variants(opts["variants"])
    except evaluation.VariantError as exc:
        raise UsageError(str(exc)) from exc
    if not variants:
        raise UsageError("no variants given")
    fixtures = [_load_graph(f) for f in str(opts["fixtures"]).split(",") if f.strip()]
    runs, seed, jobs = int(opts["runs"]), int(opts["seed"]), int(opts["jobs"])
    if runs < 1 or jobs < 1:
        raise UsageError("--runs and --jobs must be >= 1")
    config = pipeline_config(opts)
    results, _ = evaluation.run_experiment(fixtures, variants, runs, seed, config, jobs=jobs)
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "results.csv", evaluation.results_to_csv(results))
    _write(out / "timings.csv", evaluation.timings_to_csv(results))
    print(evaluation.results_to_csv(results), end="")
    if opts.get("compare") is not None:
        ref = evaluation.load_reference(opts["compare"] or None)
        rows = evaluation.compare(results, ref)
        print("\ngraph_size variant   recall (ref, delta)        precision (ref, delta)")
        for r in rows:
            print(f"{r['graph_size']:>10} {r['variant']:<8} {r['recall']:.2f} ({r['ref_recall']:.2f}, "
                  f"{r['d_recall']:+.2f})   {r['precision']:.2f} ({r['ref_precision']:.2f}, {r['d_precision']:+.2f})")
    return EXIT_OK


COMMANDS = {"diagnose": cmd_diagnose, "simulate": cmd_simulate, "evaluate": cmd_evaluate}


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        opts = merge_options(args)
        return COMMANDS[args.command](opts)
    except (UsageError, DataError, KnowledgeError, GraphError, WindowError, SimulationError,
            OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
