"""File formats: JSON configs and manifests, CSV tables, JSON fit records.

Trajectory CSV  ``iteration,new_links,cumulative_links,attained_utility,efficiency``
                (sweep cell files prepend a ``seed`` column)
Edge list CSV   ``user,document``
Histogram CSV   ``degree,count``
Fit JSON        list of ``{exponent, xmin, goodness, method, sample_size}``
Run manifest    ``{"format": "kkps-run/1", "params": {...}, "versions": {...}}``

Floats are written with ``repr`` so files round-trip exactly.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path
from typing import Any

import numpy as np

from .analysis import DegreeHistogram, PowerLawFit
from .errors import ParseError, SchemaMismatch, UnknownKey
from .model import InitDist, ModelParams

TRAJECTORY_HEADER = ["iteration", "new_links", "cumulative_links", "attained_utility", "efficiency"]
EDGE_HEADER = ["user", "document"]
HISTOGRAM_HEADER = ["degree", "count"]

INT_KEYS = ("k", "m", "n", "a", "b", "seed", "max_iterations")
STR_KEYS = ("q_dist", "scope", "update_mode", "tie_break")
SWEEP_KEYS = ("name", "base", "axes", "seeds")


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _read_table(path, header: list[str], leading: str | None = None):
    """Body rows of a CSV whose header is ``header``, optionally preceded by ``leading``.

    Returns ``(rows, lead)`` where ``lead`` holds the leading column or None.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaMismatch(f"{path}: empty file, expected header {','.join(header)}")
    lead = None
    if leading is not None and rows[0][:1] == [leading]:
        lead = [r[0] for r in rows[1:]]
        rows = [r[1:] for r in rows]
    if rows[0] != header:
        raise SchemaMismatch(f"{path}: header {','.join(rows[0])} != {','.join(header)}")
    body = rows[1:]
    if any(len(r) != len(header) for r in body):
        raise SchemaMismatch(f"{path}: ragged rows")
    return body, lead


def _read_rows(path, header: list[str]):
    return _read_table(path, header)[0]


def write_trajectory_csv(traj, path) -> None:
    _write_rows(path, TRAJECTORY_HEADER,
                ([r.iteration, r.new_links, r.cumulative_links, r.attained_utility, r.efficiency]
                 for r in traj))


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    """Columns of a trajectory CSV; a leading ``seed`` column is kept if present."""
    body, seeds = _read_table(path, TRAJECTORY_HEADER, leading="seed")
    if not body:
        raise SchemaMismatch(f"{path}: trajectory has no rows")
    try:
        cols = {name: np.array([float(r[j]) for r in body])
                for j, name in enumerate(TRAJECTORY_HEADER)}
        if seeds is not None:
            cols["seed"] = np.array([int(x) for x in seeds])
    except ValueError as exc:
        raise SchemaMismatch(f"{path}: {exc}") from None
    return cols


def write_edges(state, path) -> None:
    _write_rows(path, EDGE_HEADER, state.edges().tolist())


def read_edges(path) -> np.ndarray:
    body = _read_rows(path, EDGE_HEADER)
    return np.array([[int(u), int(d)] for u, d in body], dtype=np.int64).reshape(-1, 2)


def write_histogram_csv(hist: DegreeHistogram, path) -> None:
    _write_rows(path, HISTOGRAM_HEADER, sorted(hist.counts.items()))


def read_histogram_csv(path) -> DegreeHistogram:
    body = _read_rows(path, HISTOGRAM_HEADER)
    try:
        counts = {int(d): int(c) for d, c in body}
    except ValueError as exc:
        raise SchemaMismatch(f"{path}: {exc}") from None
    if any(d < 0 or c < 0 for d, c in counts.items()):
        raise SchemaMismatch(f"{path}: negative degree or count")
    return DegreeHistogram(counts=dict(sorted(counts.items())), total=sum(counts.values()))


def fits_to_json(fits) -> str:
    return json.dumps([f.to_dict() for f in fits], indent=2) + "\n"


def fits_from_json(text: str) -> list[PowerLawFit]:
    return [PowerLawFit(**d) for d in json.loads(text)]


def _locate(text: str, key: str) -> tuple[int | None, int | None]:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    if not m:
        return None, None
    line = text.count("\n", 0, m.start()) + 1
    col = m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1
    return line, col


def params_from_mapping(d: dict[str, Any], text: str = "") -> ModelParams:
    """Type-check a parameter mapping and fill defaults."""
    known = set(ModelParams.__dataclass_fields__)
    for key in d:
        if key not in known:
            raise UnknownKey(f"unknown parameter {key!r}")
    missing = [k for k in ("k", "m", "n", "a", "b") if k not in d]
    if missing:
        raise ParseError(f"missing required parameters {missing}")
    for key in INT_KEYS:
        if key in d and (isinstance(d[key], bool) or not isinstance(d[key], int)):
            raise ParseError(f"{key} must be an integer, got {d[key]!r}", *_locate(text, key))
    for key in STR_KEYS:
        if key in d and not isinstance(d[key], str):
            raise ParseError(f"{key} must be a string, got {d[key]!r}", *_locate(text, key))
    out = dict(d)
    init = out.get("init_dist")
    if init is not None:
        if isinstance(init, str):
            out["init_dist"] = InitDist.parse(init)
        elif isinstance(init, dict):
            extra = set(init) - set(InitDist.__dataclass_fields__)
            if extra:
                raise UnknownKey(f"unknown init_dist keys {sorted(extra)}")
            out["init_dist"] = InitDist(**init)
        else:
            raise ParseError(f"init_dist must be a string or object, got {init!r}",
                             *_locate(text, "init_dist"))
    return ModelParams(**out)


def load_config(path):
    """Read a JSON parameter file, sweep file or run/sweep manifest.

    Returns :class:`ModelParams` for flat parameter files and run manifests,
    and a ``SweepConfig`` for sweep files and sweep manifests.
    """
    from .experiments import SweepConfig

    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object", 1, 1)
    fmt = doc.get("format")
    if fmt == "kkps-run/1":
        return params_from_mapping(doc["params"], text)
    if fmt == "kkps-sweep/1":
        doc = doc["config"]
    if "base" in doc:
        for key in doc:
            if key not in SWEEP_KEYS:
                raise UnknownKey(f"unknown sweep key {key!r}")
        base = params_from_mapping(doc["base"], text)
        seeds = doc.get("seeds", list(range(10)))
        if not isinstance(seeds, list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in seeds):
            raise ParseError("seeds must be a list of integers", *_locate(text, "seeds"))
        axes = doc.get("axes", [])
        if not isinstance(axes, list) or not all(isinstance(a, list) and len(a) == 2 for a in axes):
            raise ParseError("axes must be a list of [name, values] pairs", *_locate(text, "axes"))
        return SweepConfig(base=base, axes=[(a[0], a[1]) for a in axes], seeds=seeds,
                           name=doc.get("name", "custom"))
    return params_from_mapping(doc, text)


def run_manifest(p: ModelParams, versions: dict[str, str]) -> dict[str, Any]:
    return {"format": "kkps-run/1", "params": p.to_dict(), "versions": versions}
