"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .analysis import fit_both, indegree_histogram
from .engine import simulate
from .errors import ConfigError, KKPSError, ParamError, UsageError
from .experiments import PRESETS, SweepConfig, preset, run_sweep, trend_tests, versions
from .io import (
    fits_to_json,
    load_config,
    read_histogram_csv,
    run_manifest,
    write_edges,
    write_histogram_csv,
    write_trajectory_csv,
)
from .model import InitDist, ModelParams, SaturationWarning, validate_params, world_to_dict
from .plots import KINDS, emit_plots

log = logging.getLogger("kkps")

SUBCOMMANDS = ("run", "sweep", "preset", "fit", "plot")
# CLI flag -> ModelParams field
OVERRIDES = {
    "k": "k", "m": "m", "n": "n", "a": "a", "b": "b", "init_dist": "init_dist",
    "q_dist": "q_dist", "seed": "seed", "max_iter": "max_iterations", "scope": "scope",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        token = None
        if "unrecognized arguments:" in message:
            token = message.split(":", 1)[1].split()[0]
        raise UsageError(message, token)


@dataclass
class CliCommand:
    subcommand: str
    overrides: dict[str, Any] = field(default_factory=dict)
    inputs: list[str] = field(default_factory=list)
    config: str | None = None
    preset: str | None = None
    kind: str | None = None
    out: str | None = None
    seeds: list[int] | None = None
    fmt: str = "text"
    verbosity: int = 0


def _count(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return v


def _init_dist(text: str) -> InitDist:
    try:
        return InitDist.parse(text).check()
    except ParamError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_seeds(text: str) -> list[int]:
    """``"0-9"``, ``"1,5,7"`` or a mix such as ``"0-2,10"``."""
    seeds: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            lo, sep, hi = part.partition("-")
            if sep:
                seeds.extend(range(int(lo), int(hi) + 1))
            else:
                seeds.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError(f"empty seed list {text!r}")
    return seeds


def _param_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model parameters")
    g.add_argument("--k", type=_count, help="number of topics")
    g.add_argument("--m", type=_count, help="number of user-queries")
    g.add_argument("--n", type=_count, help="number of documents")
    g.add_argument("--a", type=_count, help="documents recommended per user and iteration")
    g.add_argument("--b", type=_count, help="documents endorsed per user and iteration")
    g.add_argument("--init-dist", type=_init_dist, dest="init_dist",
                   help="initial pseudo in-degree: uniform[:umax] | poisson[:lam] | normal[:mu,sigma]")
    g.add_argument("--q-dist", dest="q_dist", choices=("uniform01", "ones", "exponential"),
                   help="distribution of nonzero D and R entries")
    g.add_argument("--seed", type=_nonneg, help="PRNG seed")
    g.add_argument("--max-iter", type=_nonneg, dest="max_iter", help="iteration cap")
    g.add_argument("--scope", choices=("topic-relevant", "global"),
                   help="recommendation candidate set")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kkps", description="Simulate and analyse the KKPS recommend-and-endorse link model.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="simulate one parameter set")
    p.add_argument("--config", help="JSON parameter file; flags override its values")
    _param_flags(p)
    p.add_argument("--out", help="directory for trajectory, edges, histogram, fits, manifest")
    p.add_argument("--format", choices=("text", "json"), default="text", help="stdout format")

    p = sub.add_parser("sweep", help="run a sweep described by a JSON file")
    p.add_argument("config", help="sweep JSON file")
    _param_flags(p)
    p.add_argument("--seeds", type=parse_seeds, help="seed list, e.g. 0-9 or 1,4,7")
    p.add_argument("--out", help="results directory")
    p.add_argument("--format", choices=("text", "json"), default="text", help="stdout format")

    p = sub.add_parser("preset", help="run a named preset grid (fig2 .. fig7)")
    p.add_argument("name", choices=PRESETS)
    p.add_argument("--seeds", type=parse_seeds, help="seed list, e.g. 0-9 or 1,4,7")
    p.add_argument("--out", help="results directory")
    p.add_argument("--format", choices=("text", "json"), default="text", help="stdout format")

    p = sub.add_parser("fit", help="fit a power law to a degree,count CSV")
    p.add_argument("input", help="histogram CSV with header degree,count")
    p.add_argument("--out", help="write the fit records to this JSON file")
    p.add_argument("--format", choices=("text", "json"), default="json", help="stdout format")

    p = sub.add_parser("plot", help="render SVG figures from result CSVs")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("inputs", nargs="+", help="histogram CSVs or trajectory CSVs")
    p.add_argument("--out", default=".", help="output directory")
    return parser


def parse_cli(argv: list[str]) -> CliCommand:
    ns = build_parser().parse_args(argv)
    cmd = CliCommand(subcommand=ns.subcommand, verbosity=ns.verbose)
    for flag, name in OVERRIDES.items():
        value = getattr(ns, flag, None)
        if value is not None:
            cmd.overrides[name] = value
    cmd.out = getattr(ns, "out", None)
    cmd.fmt = getattr(ns, "format", "text")
    cmd.seeds = getattr(ns, "seeds", None)
    if ns.subcommand == "run":
        cmd.config = ns.config
    elif ns.subcommand == "sweep":
        cmd.config = ns.config
    elif ns.subcommand == "preset":
        cmd.preset = ns.name
    elif ns.subcommand == "fit":
        cmd.inputs = [ns.input]
    elif ns.subcommand == "plot":
        cmd.kind = ns.kind
        cmd.inputs = list(ns.inputs)
    return cmd


def resolve_params(cmd: CliCommand) -> ModelParams:
    if cmd.config:
        base = load_config(cmd.config)
        if not isinstance(base, ModelParams):
            raise ConfigError(f"{cmd.config} is a sweep file; use `kkps sweep`")
        p = base.replace(**cmd.overrides)
    else:
        missing = [x for x in ("k", "m", "n", "a", "b") if x not in cmd.overrides]
        if missing:
            raise UsageError("run needs --config or all of --k --m --n --a --b; missing "
                             + " ".join(f"--{x}" for x in missing))
        p = ModelParams(**cmd.overrides)
    return validate_params(p)


def _cmd_run(cmd: CliCommand) -> dict[str, Any]:
    p = resolve_params(cmd)
    world, state, traj = simulate(p)
    hist = indegree_histogram(state)
    try:
        fits = list(fit_both(hist).values())
    except KKPSError as exc:
        log.warning("power-law fit failed: %s", exc)
        fits = []
    summary = {
        "params": p.to_dict(),
        "iterations": len(traj),
        "converged": traj.converged,
        "links": state.n_links,
        "distinct_phase": traj.distinct_phase,
        "final_efficiency": traj.records[-1].efficiency if len(traj) else None,
        "fits": [f.to_dict() for f in fits],
    }
    if cmd.out:
        out = Path(cmd.out)
        out.mkdir(parents=True, exist_ok=True)
        write_trajectory_csv(traj, out / "trajectory.csv")
        write_edges(state, out / "edges.csv")
        write_histogram_csv(hist, out / "histogram.csv")
        (out / "fits.json").write_text(fits_to_json(fits))
        (out / "world.json").write_text(json.dumps(world_to_dict(world)) + "\n")
        (out / "manifest.json").write_text(json.dumps(run_manifest(p, versions()), indent=2) + "\n")
    return summary


def _sweep_summary(result, with_trends: bool) -> dict[str, Any]:
    out: dict[str, Any] = {"name": result.config.name, "aggregate": result.aggregate()}
    if with_trends:
        out["trends"] = [o.line() for o in trend_tests(result)]
    return out


def _cmd_sweep(cmd: CliCommand) -> dict[str, Any]:
    cfg = load_config(cmd.config)
    if isinstance(cfg, ModelParams):
        cfg = SweepConfig(base=cfg, axes=[], seeds=[cfg.seed])
    if cmd.overrides:
        cfg = SweepConfig(base=cfg.base.replace(**cmd.overrides), axes=cfg.axes,
                          seeds=cfg.seeds, name=cfg.name)
    if cmd.seeds:
        cfg.seeds = list(cmd.seeds)
    validate_params(cfg.base)
    result = run_sweep(cfg)
    if cmd.out:
        result.write(cmd.out)
    return _sweep_summary(result, with_trends=False)


def _cmd_preset(cmd: CliCommand) -> dict[str, Any]:
    cfg = preset(cmd.preset, cmd.seeds)
    result = run_sweep(cfg)
    summary = _sweep_summary(result, with_trends=True)
    if cmd.out:
        out = result.write(cmd.out)
        (out / "trends.txt").write_text("\n".join(summary["trends"]) + "\n")
    return summary


def _cmd_fit(cmd: CliCommand) -> dict[str, Any]:
    hist = read_histogram_csv(cmd.inputs[0])
    fits = list(fit_both(hist).values())
    if cmd.out:
        Path(cmd.out).write_text(fits_to_json(fits))
    return {"fits": [f.to_dict() for f in fits]}


def _print(summary: dict[str, Any], fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(summary, indent=2, default=str))
        return
    for key, value in summary.items():
        if key == "trends":
            for line in value:
                print(line)
        elif key == "aggregate":
            for row in value:
                print("  ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}"
                                for k, v in row.items() if not k.endswith("_iqr")))
        elif key == "fits":
            for f in value:
                print(f"{f['method']}: exponent={f['exponent']:.4f} xmin={f['xmin']} "
                      f"goodness={f['goodness']:.4f} n={f['sample_size']}")
        elif key != "params":
            print(f"{key}: {value}")


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd = parse_cli(argv)
    except UsageError as exc:
        print(f"kkps: usage error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.WARNING - 10 * min(cmd.verbosity, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    warnings.simplefilter("always", SaturationWarning)
    logging.captureWarnings(True)
    try:
        if cmd.subcommand == "plot":
            for path in emit_plots(cmd.inputs, cmd.kind, cmd.out):
                print(path)
            return 0
        handler = {"run": _cmd_run, "sweep": _cmd_sweep, "preset": _cmd_preset,
                   "fit": _cmd_fit}[cmd.subcommand]
        _print(handler(cmd), cmd.fmt)
    except (UsageError, ConfigError, ParamError) as exc:
        print(f"kkps: error: {exc}", file=sys.stderr)
        return 1
    except (KKPSError, OSError) as exc:
        print(f"kkps: runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
