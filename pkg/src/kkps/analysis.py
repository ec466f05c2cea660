"""Degree histograms, power-law fits and the efficiency ("price of anarchy")."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Any, Iterable

import numpy as np
from scipy import optimize, special, stats

from .errors import DegenerateDistribution, InsufficientData, ZeroTotalUtility

MIN_TAIL = 10
METHODS = ("mle", "loglog-ls")


@dataclass(frozen=True)
class DegreeHistogram:
    counts: dict[int, int]
    total: int

    @classmethod
    def from_degrees(cls, degrees: Iterable[int]) -> DegreeHistogram:
        degrees = np.asarray(list(degrees) if not isinstance(degrees, np.ndarray) else degrees)
        if degrees.size and degrees.min() < 0:
            raise ValueError("degrees must be nonnegative")
        c = Counter(int(x) for x in degrees)
        return cls(counts=dict(sorted(c.items())), total=int(degrees.size))

    def degrees(self) -> np.ndarray:
        """Expand back to one degree per document, ascending."""
        if not self.counts:
            return np.zeros(0, dtype=np.int64)
        vals = np.fromiter(self.counts.keys(), dtype=np.int64)
        reps = np.fromiter(self.counts.values(), dtype=np.int64)
        return np.repeat(vals, reps)


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    xmin: int
    goodness: float
    method: str
    sample_size: int

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def indegree_histogram(state) -> DegreeHistogram:
    """Exact histogram of ``state.indegree`` including the zero bucket."""
    return DegreeHistogram.from_degrees(np.asarray(state.indegree))


def _positive_degrees(data) -> np.ndarray:
    if isinstance(data, DegreeHistogram):
        x = data.degrees()
    else:
        x = np.asarray(data)
        if x.size and not np.all(x == np.round(x)):
            raise ValueError("degrees must be integers")
        x = x.astype(np.int64)
    x = np.sort(x[x >= 1])
    if x.size < MIN_TAIL:
        raise InsufficientData(f"need at least {MIN_TAIL} positive degrees, got {x.size}")
    if x[0] == x[-1]:
        raise DegenerateDistribution(f"all positive degrees equal {x[0]}")
    return x


def _discrete_mle(n: int, sum_log: float, xmin: int) -> float:
    def nll(alpha):
        return alpha * sum_log + n * math.log(special.zeta(alpha, xmin))

    # continuous approximation as the bracket centre
    guess = 1.0 + n / max(sum_log - n * math.log(xmin - 0.5), 1e-12)
    hi = max(20.0, 2 * guess)
    res = optimize.minimize_scalar(nll, bounds=(1.0 + 1e-6, hi), method="bounded",
                                   options={"xatol": 1e-7})
    return float(res.x)


def _ks_distance(tail: np.ndarray, alpha: float, xmin: int) -> float:
    """Sup distance between the tail's empirical CDF and the fitted discrete CDF.

    Both step functions are compared at every observed value and one step
    before it, which covers every place either CDF can jump.
    """
    vals, cnt = np.unique(tail, return_counts=True)
    emp = np.cumsum(cnt) / tail.size
    z0 = special.zeta(alpha, xmin)
    model = 1.0 - special.zeta(alpha, vals + 1.0) / z0
    d_at = np.abs(emp - model).max()
    emp_before = np.concatenate(([0.0], emp[:-1]))
    model_before = 1.0 - special.zeta(alpha, vals.astype(float)) / z0
    d_before = np.abs(emp_before - model_before).max()
    return float(max(d_at, d_before))


def _fit_mle(x: np.ndarray) -> PowerLawFit:
    logs = np.log(x)
    # suffix sums over the sorted sample give every tail in O(1)
    suffix_log = np.cumsum(logs[::-1])[::-1]
    uniq, first = np.unique(x, return_index=True)
    best = None
    for xmin, start in zip(uniq, first):
        n_tail = x.size - start
        if n_tail < MIN_TAIL:
            break
        tail = x[start:]
        if tail[0] == tail[-1]:
            break
        alpha = _discrete_mle(n_tail, float(suffix_log[start]), int(xmin))
        ks = _ks_distance(tail, alpha, int(xmin))
        if best is None or ks < best[0]:
            best = (ks, alpha, int(xmin), int(n_tail))
    assert best is not None
    ks, alpha, xmin, n_tail = best
    return PowerLawFit(exponent=alpha, xmin=xmin, goodness=1.0 - ks, method="mle",
                       sample_size=n_tail)


def _fit_loglog(x: np.ndarray) -> PowerLawFit:
    vals, cnt = np.unique(x, return_counts=True)
    res = stats.linregress(np.log(vals), np.log(cnt))
    r2 = float(res.rvalue ** 2) if vals.size > 2 else 1.0
    return PowerLawFit(exponent=float(-res.slope), xmin=int(vals[0]), goodness=r2,
                       method="loglog-ls", sample_size=int(x.size))


def fit_power_law(data, method: str = "mle") -> PowerLawFit:
    """Fit a power law to the positive part of a degree sample.

    ``mle`` fits the discrete power law ``p(x) ~ x**-alpha`` for
    ``x >= xmin`` by maximum likelihood, choosing ``xmin`` to minimise the
    Kolmogorov-Smirnov distance; goodness is ``1 - KS``. ``loglog-ls``
    regresses log count on log degree; goodness is ``R**2``.

    ``data`` is a :class:`DegreeHistogram` or a sequence of integer degrees.
    Zero degrees are ignored.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    x = _positive_degrees(data)
    return _fit_mle(x) if method == "mle" else _fit_loglog(x)


def fit_both(data) -> dict[str, PowerLawFit]:
    return {m: fit_power_law(data, m) for m in METHODS}


def top_b_values(U: np.ndarray, b: int) -> np.ndarray:
    """The ``min(b, n)`` largest entries of every row of ``U``, shape ``(m, b')``."""
    b = min(int(b), U.shape[1])
    return -np.partition(-U, b - 1, axis=1)[:, :b]


def max_total_utility(world, b: int) -> float:
    """Utility when every user endorses its own ``b`` best documents.

    Zero entries add nothing, so this equals the sum of each row's
    ``min(b, #positive)`` largest utilities.
    """
    if b < 1:
        raise ValueError(f"b must be >= 1, got {b}")
    U = world.U if hasattr(world, "U") else np.asarray(world)
    return math.fsum(top_b_values(U, b).ravel())


def efficiency(record, total_utility: float) -> float:
    """Attained utility of one iteration as a fraction of ``total_utility``.

    ``record`` is an iteration record or the attained utility itself.
    """
    if not total_utility > 0:
        raise ZeroTotalUtility(f"total utility must be positive, got {total_utility}")
    attained = getattr(record, "attained_utility", record)
    return float(attained) / float(total_utility)


def improvement_captured(efficiencies, by: int = 3) -> float:
    """Share of the total efficiency gain already present after ``by`` iterations.

    The gain is measured from the first iteration to the last one. Runs with
    no gain count as fully captured.
    """
    e = np.asarray(efficiencies, dtype=float)
    if e.size == 0:
        return float("nan")
    total = e[-1] - e[0]
    if total <= 1e-12:
        return 1.0
    early = e[min(by, e.size) - 1] - e[0]
    return float(early / total)
