"""Seeded parameter sweeps, figure presets and qualitative trend checks."""

from __future__ import annotations

import csv
import itertools
import json
import os
import platform
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import scipy
from scipy import stats

from . import __version__
from .analysis import fit_power_law, improvement_captured
from .engine import simulate
from .errors import InsufficientCells, KKPSError, UnknownPreset
from .model import InitDist, ModelParams, validate_params

FIG_SIZES = dict(m=750, n=1500)
DEFAULT_SEEDS = tuple(range(10))
INIT_DISTS = ("uniform", "poisson", "normal")

RECORD_FIELDS = (
    "cell", "seed", "k", "m", "n", "a", "b", "init_dist", "scope", "status",
    "iterations", "converged", "saturates", "links", "distinct_phase",
    "first_efficiency", "final_efficiency", "captured_3",
    "mle_exponent", "mle_xmin", "mle_goodness", "mle_sample_size",
    "ls_exponent", "ls_goodness", "ls_sample_size", "error",
)
METRICS = (
    "final_efficiency", "captured_3", "iterations", "mle_exponent", "mle_goodness",
    "ls_exponent", "ls_goodness",
)
TRAJECTORY_FIELDS = ("seed", "iteration", "new_links", "cumulative_links",
                     "attained_utility", "efficiency")


def _set(params: ModelParams, name: str, value) -> ModelParams:
    names = name.split("=")
    changes = {}
    for nm in names:
        if nm == "init_dist" and isinstance(value, str):
            changes[nm] = InitDist.parse(value)
        elif nm == "init_dist" and isinstance(value, dict):
            changes[nm] = InitDist(**value)
        else:
            changes[nm] = value
    return params.replace(**changes)


@dataclass
class SweepConfig:
    """A base parameter set crossed with one or more axes, over a list of seeds.

    An axis name may tie several parameters together, e.g. ``"a=b"`` sets
    both ``a`` and ``b`` to each value.
    """

    base: ModelParams
    axes: list[tuple[str, list]] = field(default_factory=list)
    seeds: list[int] = field(default_factory=lambda: list(DEFAULT_SEEDS))
    name: str = "custom"

    def __post_init__(self):
        self.axes = [(str(nm), list(vals)) for nm, vals in self.axes]
        self.seeds = [int(s) for s in self.seeds]
        known = set(ModelParams.__dataclass_fields__) - {"seed"}
        for nm, vals in self.axes:
            for part in nm.split("="):
                if part not in known:
                    raise KKPSError(f"unknown sweep axis parameter {part!r}")
            if not vals:
                raise KKPSError(f"axis {nm!r} has no values")
        if not self.seeds:
            raise KKPSError("a sweep needs at least one seed")

    @property
    def replicates(self) -> int:
        return len(self.seeds)

    def cells(self) -> list[dict[str, Any]]:
        """Axis assignments in canonical order (last axis varies fastest)."""
        names = [nm for nm, _ in self.axes]
        return [dict(zip(names, combo)) for combo in
                itertools.product(*(vals for _, vals in self.axes))]

    def cell_params(self, cell: dict[str, Any], seed: int) -> ModelParams:
        p = self.base.replace(seed=seed)
        for nm, value in cell.items():
            p = _set(p, nm, value)
        return p

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "base": self.base.to_dict(),
            "axes": [[nm, vals] for nm, vals in self.axes],
            "seeds": list(self.seeds),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SweepConfig:
        return cls(
            base=ModelParams.from_dict(d["base"]),
            axes=[(nm, vals) for nm, vals in d.get("axes", [])],
            seeds=d.get("seeds", list(DEFAULT_SEEDS)),
            name=d.get("name", "custom"),
        )


@dataclass
class SweepResult:
    config: SweepConfig
    records: list[dict[str, Any]]
    trajectories: dict[int, list[dict[str, Any]]]

    def cell_records(self, cell: int) -> list[dict[str, Any]]:
        return [r for r in self.records if r["cell"] == cell]

    def aggregate(self) -> list[dict[str, Any]]:
        """Median and interquartile range of each metric per cell."""
        rows = []
        for idx, cell in enumerate(self.config.cells()):
            recs = [r for r in self.cell_records(idx) if r["status"] == "ok"]
            row: dict[str, Any] = {"cell": idx}
            row.update({nm: _label(v) for nm, v in cell.items()})
            row["n_ok"] = len(recs)
            for metric in METRICS:
                vals = np.array([r[metric] for r in recs], dtype=float)
                vals = vals[~np.isnan(vals)]
                if vals.size:
                    q25, q50, q75 = np.percentile(vals, [25, 50, 75])
                else:
                    q25 = q50 = q75 = float("nan")
                row[f"{metric}_median"] = float(q50)
                row[f"{metric}_iqr"] = float(q75 - q25)
            rows.append(row)
        return rows

    def write(self, out_dir: str | Path) -> Path:
        """Write manifest, per-record table, aggregate table and per-cell trajectories."""
        out = Path(out_dir)
        (out / "cells").mkdir(parents=True, exist_ok=True)
        manifest = {
            "format": "kkps-sweep/1",
            "config": self.config.to_dict(),
            "seeds": list(self.config.seeds),
            "cells": [{nm: _label(v) for nm, v in c.items()} for c in self.config.cells()],
            "versions": versions(),
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
        _write_csv(out / "records.csv", RECORD_FIELDS, self.records)
        agg = self.aggregate()
        agg_fields = list(agg[0].keys()) if agg else ["cell"]
        _write_csv(out / "aggregate.csv", agg_fields, agg)
        for idx in range(len(self.config.cells())):
            _write_csv(out / "cells" / f"cell_{idx:03d}.csv", TRAJECTORY_FIELDS,
                       self.trajectories.get(idx, []))
        return out


def versions() -> dict[str, str]:
    return {"kkps": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def _label(v) -> Any:
    if isinstance(v, InitDist):
        return v.label()
    return v


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    return "" if v is None else str(v)


def _write_csv(path: Path, fields: Sequence[str], rows: list[dict[str, Any]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([_fmt(r.get(f)) for f in fields])


def _nan_fit() -> dict[str, Any]:
    return {"mle_exponent": float("nan"), "mle_xmin": None, "mle_goodness": float("nan"),
            "mle_sample_size": None, "ls_exponent": float("nan"),
            "ls_goodness": float("nan"), "ls_sample_size": None}


def run_one(p: ModelParams) -> tuple[dict[str, Any], list[dict[str, Any]]]:
    """Simulate and analyse a single parameter set; errors land in the record."""
    rec: dict[str, Any] = {
        "k": p.k, "m": p.m, "n": p.n, "a": p.a, "b": p.b, "seed": p.seed,
        "init_dist": p.init_dist.label(), "scope": p.scope,
    }
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            validate_params(p)
            _, state, traj = simulate(p)
    except KKPSError as exc:
        rec.update(status="error", error=str(exc), **_nan_fit())
        return rec, []
    eff = traj.column("efficiency")
    rec.update(
        status="ok", error="",
        iterations=len(traj), converged=traj.converged, saturates=p.saturates,
        links=state.n_links, distinct_phase=traj.distinct_phase,
        first_efficiency=float(eff[0]) if eff.size else float("nan"),
        final_efficiency=float(eff[-1]) if eff.size else float("nan"),
        captured_3=improvement_captured(eff, 3),
    )
    rec.update(_nan_fit())
    fit_errors = []
    for method, prefix in (("mle", "mle"), ("loglog-ls", "ls")):
        try:
            fit = fit_power_law(state.indegree, method)
        except KKPSError as exc:
            fit_errors.append(f"{method}: {exc}")
            continue
        rec[f"{prefix}_exponent"] = fit.exponent
        rec[f"{prefix}_goodness"] = fit.goodness
        rec[f"{prefix}_sample_size"] = fit.sample_size
        if prefix == "mle":
            rec["mle_xmin"] = fit.xmin
    rec["error"] = "; ".join(fit_errors)
    rows = [{"seed": p.seed, "iteration": r.iteration, "new_links": r.new_links,
             "cumulative_links": r.cumulative_links, "attained_utility": r.attained_utility,
             "efficiency": r.efficiency} for r in traj]
    return rec, rows


def _workers(max_workers: int | None) -> int:
    if max_workers is not None:
        return max(1, int(max_workers))
    try:
        return max(1, int(os.environ.get("KKPS_SIM_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(cfg: SweepConfig, max_workers: int | None = None) -> SweepResult:
    """Run every (cell, seed) pair; output order is canonical whatever the parallelism.

    Parallelism defaults to ``$KKPS_SIM_THREADS`` (1 when unset).
    """
    tasks = []
    for idx, cell in enumerate(cfg.cells()):
        for seed in cfg.seeds:
            try:
                p = cfg.cell_params(cell, seed)
            except (KKPSError, TypeError, ValueError) as exc:
                p = exc
            tasks.append((idx, seed, p))
    runnable = [p for _, _, p in tasks if isinstance(p, ModelParams)]
    workers = _workers(max_workers)
    if workers > 1 and len(runnable) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = iter(list(pool.map(run_one, runnable, chunksize=4)))
    else:
        outputs = map(run_one, runnable)
    records = []
    trajectories: dict[int, list[dict[str, Any]]] = {}
    for idx, seed, p in tasks:
        if isinstance(p, ModelParams):
            rec, rows = next(outputs)
        else:
            rec, rows = {"seed": seed, "status": "error", "error": str(p), **_nan_fit()}, []
        rec["cell"] = idx
        records.append(rec)
        trajectories.setdefault(idx, []).extend(rows)
    return SweepResult(config=cfg, records=records, trajectories=trajectories)


def preset(name: str, seeds: Sequence[int] | None = None) -> SweepConfig:
    """Parameter grid of a named preset sweep (fig2 .. fig7)."""
    seeds = list(DEFAULT_SEEDS if seeds is None else seeds)
    b_grid = [1, 3, 5, 10, 20]
    if name == "fig2":
        base = ModelParams(k=80, a=1, b=1, **FIG_SIZES)
        axes = [("init_dist", list(INIT_DISTS)), ("k", [80, 120]), ("a=b", b_grid)]
    elif name == "fig3":
        base = ModelParams(k=80, a=20, b=1, **FIG_SIZES)
        axes = [("init_dist", list(INIT_DISTS)), ("k", [80, 120]), ("b", b_grid)]
    elif name == "fig4":
        base = ModelParams(k=80, a=2, b=2, **FIG_SIZES)
        axes = [("a", [2, 4, 6, 8, 20])]
    elif name == "fig5":
        base = ModelParams(k=30, a=1, b=1, **FIG_SIZES)
        axes = [("k", [30, 60, 90, 120])]
    elif name == "fig6":
        base = ModelParams(k=20, a=8, b=2, **FIG_SIZES)
        axes = [("k", [20, 80, 160])]
    elif name == "fig7":
        base = ModelParams(k=160, a=8, b=2, **FIG_SIZES)
        axes = [("b", [2, 4, 6, 8])]
    else:
        raise UnknownPreset(f"unknown preset {name!r}; expected one of {PRESETS}")
    return SweepConfig(base=base, axes=axes, seeds=seeds, name=name)


PRESETS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7")


@dataclass
class TrendOutcome:
    claim: str
    axis: str
    metric: str
    group: dict[str, Any]
    axis_values: list
    medians: list[float]
    spearman: float
    inversions: int
    passed: bool
    gated: bool = True

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if not self.gated:
            status += " (not gated)"
        grp = ", ".join(f"{k}={v}" for k, v in self.group.items())
        meds = ", ".join(f"{m:.4g}" for m in self.medians)
        return (f"{status}: {self.claim} [{grp}] {self.metric} vs {self.axis}: "
                f"medians ({meds}), spearman={self.spearman:+.3f}, inversions={self.inversions}")


def monotone_check(medians: Sequence[float], sign: int) -> tuple[float, int, bool]:
    """Spearman correlation with position, adjacent inversions, and the verdict.

    Passes when the correlation has the sign ``sign`` and at most one adjacent
    pair moves against it. A constant or undefined series fails with rho=0.
    """
    y = np.asarray(medians, dtype=float)
    if y.size < 3:
        raise InsufficientCells(f"need at least 3 axis values, got {y.size}")
    if np.isnan(y).any() or np.ptp(y) == 0:
        rho = 0.0
    else:
        rho = float(stats.spearmanr(np.arange(y.size), y)[0])
    inversions = int((sign * np.diff(y) < 0).sum())
    return rho, inversions, bool(rho * sign > 0 and inversions <= 1)


def _axis_series(result: SweepResult, axis: str, metric: str, group: dict[str, Any]):
    agg = result.aggregate()
    rows = [r for r in agg if all(r.get(k) == v for k, v in group.items())]
    xs = [r[axis] for r in rows]
    meds = [r[f"{metric}_median"] for r in rows]
    return xs, meds


def trend_test(result: SweepResult, axis: str, metric: str, sign: int, claim: str,
               group: dict[str, Any] | None = None, gated: bool = True) -> TrendOutcome:
    group = dict(group or {})
    xs, meds = _axis_series(result, axis, metric, group)
    rho, inv, ok = monotone_check(meds, sign)
    return TrendOutcome(claim, axis, metric, group, xs, meds, rho, inv, ok, gated)


def exponent_k_trend(result: SweepResult, axis: str, init_dist: str,
                     k_low: int = 80, k_high: int = 120) -> TrendOutcome:
    """Is the exponent-vs-b curve at ``k_high`` below, or falling faster than, ``k_low``?

    Passes when every per-b difference (high minus low) is negative or the
    differences are negatively rank-correlated with b.
    """
    xs, lo = _axis_series(result, axis, "mle_exponent", {"init_dist": init_dist, "k": k_low})
    _, hi = _axis_series(result, axis, "mle_exponent", {"init_dist": init_dist, "k": k_high})
    diff = np.asarray(hi, dtype=float) - np.asarray(lo, dtype=float)
    rho, inv, _ = monotone_check(diff, -1)
    below = bool(np.all(diff < 0))
    return TrendOutcome(f"k={k_high} exponent curve below or decaying faster than k={k_low}",
                        axis, "mle_exponent difference", {"init_dist": init_dist}, xs,
                        diff.tolist(), rho, inv, bool(below or rho < 0))


def early_convergence(result: SweepResult, by: int = 3, threshold: float = 0.8) -> list[TrendOutcome]:
    out = []
    for row in result.aggregate():
        med = row["captured_3_median"]
        group = {k: v for k, v in row.items() if k in dict(result.config.axes)}
        out.append(TrendOutcome(f"efficiency gain captured by iteration {by} >= {threshold}",
                                "-", "captured_3", group, [], [med], float("nan"), 0,
                                bool(med >= threshold)))
    return out


def trend_tests(result: SweepResult) -> list[TrendOutcome]:
    """Check the qualitative claims attached to the preset that produced ``result``."""
    name = result.config.name
    out: list[TrendOutcome] = []
    if name in ("fig2", "fig3"):
        axis = "a=b" if name == "fig2" else "b"
        for dist in INIT_DISTS:
            for k in (80, 120):
                out.append(trend_test(result, axis, "mle_goodness", -1,
                                      "power-law validity decreases as b grows",
                                      {"init_dist": dist, "k": k}))
            out.append(exponent_k_trend(result, axis, dist))
    elif name == "fig4":
        out.append(trend_test(result, "a", "final_efficiency", +1,
                              "efficiency increases with a"))
        xs, meds = _axis_series(result, "a", "final_efficiency", {})
        gain = dict(zip(xs, meds))
        early, late = gain[4] - gain[2], gain[20] - gain[8]
        out.append(TrendOutcome("diminishing returns: gain a=8->20 below gain a=2->4", "a",
                                "final_efficiency", {}, [2, 4, 8, 20], [early, late],
                                float("nan"), 0, bool(late < early)))
    elif name in ("fig5", "fig6"):
        out.append(trend_test(result, "k", "final_efficiency", +1,
                              "efficiency increases with k", gated=(name == "fig6")))
    elif name == "fig7":
        out.append(trend_test(result, "b", "final_efficiency", +1,
                              "efficiency increases with b"))
    else:
        raise UnknownPreset(f"no trend claims registered for sweep {name!r}")
    out.extend(early_convergence(result))
    return out
