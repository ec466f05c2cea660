"""Static SVG figures from result CSVs; identical input gives identical bytes."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from scipy import special  # noqa: E402

from .analysis import fit_power_law  # noqa: E402
from .errors import FitError, SchemaMismatch  # noqa: E402
from .io import read_histogram_csv, read_trajectory_csv  # noqa: E402

KINDS = ("loglog-degree", "efficiency-curve")

_RC = {"svg.hashsalt": "kkps", "svg.fonttype": "none", "font.size": 9}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": "kkps"})
    plt.close(fig)
    return path


def loglog_degree(hist_csv, out_path) -> Path:
    hist = read_histogram_csv(hist_csv)
    pos = {d: c for d, c in hist.counts.items() if d >= 1 and c > 0}
    if not pos:
        raise SchemaMismatch(f"{hist_csv}: no positive degrees to plot")
    x = np.array(sorted(pos))
    y = np.array([pos[d] for d in x])
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.loglog(x, y, "o", ms=4, label="documents")
        try:
            fit = fit_power_law(hist, "mle")
        except FitError as exc:
            ax.plot([], [], " ", label=f"no fit: {exc}")
        else:
            xs = np.arange(fit.xmin, x.max() + 1)
            expected = fit.sample_size * xs ** -fit.exponent / special.zeta(fit.exponent, fit.xmin)
            ax.loglog(xs, expected, "-",
                      label=f"mle exponent {fit.exponent:.3f}, goodness {fit.goodness:.3f}")
        ax.set_xlabel("in-degree")
        ax.set_ylabel("documents")
        ax.set_title(Path(hist_csv).stem)
        ax.legend()
        return _save(fig, Path(out_path))


def efficiency_curve(traj_csvs, out_path) -> Path:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 4))
        for path in traj_csvs:
            cols = read_trajectory_csv(path)
            it = cols["iteration"].astype(int)
            iters = np.unique(it)
            # across seeds, plot the median per iteration
            med = np.array([np.median(cols["efficiency"][it == r]) for r in iters])
            ax.plot(iters, med, marker="o", ms=3, label=Path(path).stem)
        ax.set_xlabel("iteration")
        ax.set_ylabel("efficiency")
        ax.set_ylim(0, 1.05)
        ax.legend()
        return _save(fig, Path(out_path))


def emit_plots(paths, kind: str, out_dir) -> list[Path]:
    """Write SVGs for ``kind``: one per histogram, or one overlay of all trajectories."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [Path(p) for p in paths]
    if kind == "loglog-degree":
        return [loglog_degree(p, out / f"{p.stem}.svg") for p in paths]
    if kind == "efficiency-curve":
        return [efficiency_curve(paths, out / "efficiency.svg")]
    raise SchemaMismatch(f"unknown plot kind {kind!r}; expected one of {KINDS}")
