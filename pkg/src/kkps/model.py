"""Model parameters and the static topic world (documents, users, utility).

A world has ``k`` topics, ``m`` user-queries and ``n`` documents. Each topic
row of the document matrix ``D`` has exactly ``round(n/k)`` nonzero entries and
each user-query row of ``R`` has exactly one nonzero entry (its topic). The
utility matrix is ``U = R @ D``.
"""

from __future__ import annotations

import dataclasses
import json
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np

from .errors import IndexOutOfRange, InvalidDistParams, NonPositive, OrderingViolation, ParamError

Q_DISTS = ("uniform01", "ones", "exponential")
INIT_KINDS = ("uniform", "poisson", "normal")
SCOPES = ("topic-relevant", "global")
UPDATE_MODES = ("synchronous", "sequential")
TIE_BREAKS = ("index", "random")


class SaturationWarning(UserWarning):
    """b exceeds the number of documents a single topic can offer."""


@dataclass(frozen=True)
class InitDist:
    """Distribution of the pseudo in-degree used to rank at iteration 0."""

    kind: str = "uniform"
    u_max: float = 1.0
    lam: float = 5.0
    mu: float = 5.0
    sigma: float = 2.0

    def check(self) -> InitDist:
        if self.kind not in INIT_KINDS:
            raise InvalidDistParams(f"unknown init distribution {self.kind!r}")
        if self.kind == "uniform" and not self.u_max > 0:
            raise InvalidDistParams(f"uniform needs u_max > 0, got {self.u_max}")
        if self.kind == "poisson" and not self.lam > 0:
            raise InvalidDistParams(f"poisson needs lam > 0, got {self.lam}")
        if self.kind == "normal" and not self.sigma > 0:
            raise InvalidDistParams(f"normal needs sigma > 0, got {self.sigma}")
        return self

    @classmethod
    def parse(cls, text: str) -> InitDist:
        """Parse ``kind`` or ``kind:p1[,p2]``, e.g. ``poisson:3`` or ``normal:5,2``."""
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        if kind not in INIT_KINDS:
            raise InvalidDistParams(f"unknown init distribution {kind!r}")
        try:
            nums = [float(x) for x in rest.split(",")] if rest.strip() else []
        except ValueError:
            raise InvalidDistParams(f"bad parameters in {text!r}") from None
        names = {"uniform": ["u_max"], "poisson": ["lam"], "normal": ["mu", "sigma"]}[kind]
        if len(nums) > len(names):
            raise InvalidDistParams(f"too many parameters in {text!r}")
        return cls(kind=kind, **dict(zip(names, nums)))

    def label(self) -> str:
        if self.kind == "uniform":
            return f"uniform:{self.u_max:g}"
        if self.kind == "poisson":
            return f"poisson:{self.lam:g}"
        return f"normal:{self.mu:g},{self.sigma:g}"


@dataclass(frozen=True)
class ModelParams:
    """Sizes, per-iteration budgets and policy switches of one simulation.

    ``a`` documents are recommended to each user-query per iteration, of
    which at most ``b`` are endorsed.
    """

    k: int
    m: int
    n: int
    a: int
    b: int
    q_dist: str = "uniform01"
    init_dist: InitDist = field(default_factory=InitDist)
    seed: int = 0
    max_iterations: int = 50
    scope: str = "topic-relevant"
    update_mode: str = "synchronous"
    tie_break: str = "index"

    def __post_init__(self):
        if isinstance(self.init_dist, str):
            object.__setattr__(self, "init_dist", InitDist.parse(self.init_dist))

    @property
    def nu(self) -> int:
        """Nonzero documents per topic, ``round(n/k)`` with halves rounded up."""
        return max(1, min(self.n, (2 * self.n + self.k) // (2 * self.k)))

    @property
    def saturates(self) -> bool:
        """True when ``b > ceil(n/k)``: some endorsement slots cannot be filled."""
        return self.b > -(-self.n // self.k)

    def replace(self, **changes: Any) -> ModelParams:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["init_dist"] = dataclasses.asdict(self.init_dist)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ModelParams:
        d = dict(d)
        init = d.get("init_dist")
        if isinstance(init, str):
            d["init_dist"] = InitDist.parse(init)
        elif isinstance(init, dict):
            d["init_dist"] = InitDist(**init)
        return cls(**d)


def validate_params(p: ModelParams) -> ModelParams:
    """Check ``k <= m <= n`` and ``b <= a <= n``; return ``p`` unchanged.

    A :class:`SaturationWarning` is issued (not raised) when
    ``b > ceil(n/k)``.
    """
    for name in ("k", "m", "n", "a", "b", "max_iterations"):
        value = getattr(p, name)
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise ParamError(f"{name} must be an integer, got {value!r}")
        if name == "max_iterations":
            if value < 0:
                raise NonPositive(f"max_iterations must be >= 0, got {value}")
        elif value <= 0:
            raise NonPositive(f"{name} must be positive, got {value}")
    if not p.k <= p.m:
        raise OrderingViolation("k <= m", {"k": p.k, "m": p.m})
    if not p.m <= p.n:
        raise OrderingViolation("m <= n", {"m": p.m, "n": p.n})
    if not p.b <= p.a:
        raise OrderingViolation("b <= a", {"b": p.b, "a": p.a})
    if not p.a <= p.n:
        raise OrderingViolation("a <= n", {"a": p.a, "n": p.n})
    for name, allowed in (("q_dist", Q_DISTS), ("scope", SCOPES),
                          ("update_mode", UPDATE_MODES), ("tie_break", TIE_BREAKS)):
        if getattr(p, name) not in allowed:
            raise ParamError(f"{name} must be one of {allowed}, got {getattr(p, name)!r}")
    if p.saturates:
        warnings.warn(
            f"b={p.b} exceeds ceil(n/k)={-(-p.n // p.k)}; endorsements will saturate",
            SaturationWarning,
            stacklevel=2,
        )
    return p


def rng_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent generators for world construction and the initial ranking."""
    world_ss, init_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(world_ss), np.random.default_rng(init_ss)


def draw_q(q_dist: str, rng: np.random.Generator, size: int) -> np.ndarray:
    if q_dist == "uniform01":
        return 1.0 - rng.random(size)  # (0, 1]
    if q_dist == "ones":
        return np.ones(size)
    if q_dist == "exponential":
        return rng.exponential(1.0, size) + np.finfo(float).tiny
    raise ParamError(f"unknown q_dist {q_dist!r}")


@dataclass
class TopicWorld:
    D: np.ndarray
    R: np.ndarray
    topic_of: np.ndarray
    U: np.ndarray

    @property
    def k(self) -> int:
        return self.D.shape[0]

    @property
    def m(self) -> int:
        return self.R.shape[0]

    @property
    def n(self) -> int:
        return self.D.shape[1]

    @cached_property
    def topic_docs(self) -> list[np.ndarray]:
        """Sorted nonzero document indices of each topic row of ``D``."""
        return [np.flatnonzero(row) for row in self.D]

    @cached_property
    def topic_users(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.topic_of == t) for t in range(self.k)]

    def nnz_utility(self) -> int:
        return int(np.count_nonzero(self.U))


def utility_matrix(D: np.ndarray, R: np.ndarray) -> np.ndarray:
    """``U[i, d] = sum_t R[i, t] * D[t, d]`` for arbitrary (multi-topic) ``R``."""
    return np.asarray(R, dtype=float) @ np.asarray(D, dtype=float)


def build_world(D: np.ndarray, R: np.ndarray) -> TopicWorld:
    """Assemble a world from explicit matrices; each row of ``R`` needs one nonzero."""
    D = np.array(D, dtype=float, ndmin=2)
    R = np.array(R, dtype=float, ndmin=2)
    if R.shape[1] != D.shape[0]:
        raise ParamError(f"R is {R.shape}, D is {D.shape}: topic counts differ")
    if (D < 0).any() or (R < 0).any():
        raise ParamError("D and R must be nonnegative")
    nz = R > 0
    if not (nz.sum(axis=1) == 1).all():
        raise ParamError("every user row of R needs exactly one nonzero entry")
    topic_of = nz.argmax(axis=1)
    rows = np.arange(R.shape[0])
    U = R[rows, topic_of][:, None] * D[topic_of]
    return TopicWorld(D=D, R=R, topic_of=topic_of, U=U)


def generate_world(p: ModelParams, rng: np.random.Generator) -> TopicWorld:
    """Draw a world with exactly ``round(n/k)`` relevant documents per topic.

    Users are dealt to topics round-robin and then shuffled, so topic sizes
    differ by at most one.
    """
    k, m, n, nu = p.k, p.m, p.n, p.nu
    topic_of = rng.permutation(np.arange(m) % k)
    D = np.zeros((k, n))
    for t in range(k):
        cols = rng.choice(n, size=nu, replace=False)
        D[t, cols] = draw_q(p.q_dist, rng, nu)
    R = np.zeros((m, k))
    R[np.arange(m), topic_of] = draw_q(p.q_dist, rng, m)
    U = R[np.arange(m), topic_of][:, None] * D[topic_of]
    return TopicWorld(D=D, R=R, topic_of=topic_of, U=U)


def utility_of(world: TopicWorld, i: int, d: int) -> float:
    if not (0 <= i < world.m):
        raise IndexOutOfRange(f"user index {i} outside [0, {world.m})")
    if not (0 <= d < world.n):
        raise IndexOutOfRange(f"document index {d} outside [0, {world.n})")
    return float(world.U[i, d])


def _triplets(a: np.ndarray) -> list[list[Any]]:
    rows, cols = np.nonzero(a)
    return [[int(r), int(c), float(a[r, c])] for r, c in zip(rows, cols)]


def world_to_dict(world: TopicWorld) -> dict[str, Any]:
    return {
        "format": "kkps-world/1",
        "k": world.k,
        "m": world.m,
        "n": world.n,
        "topic_of": [int(t) for t in world.topic_of],
        "D": _triplets(world.D),
        "R": _triplets(world.R),
    }


def world_from_dict(d: dict[str, Any]) -> TopicWorld:
    k, m, n = int(d["k"]), int(d["m"]), int(d["n"])
    D = np.zeros((k, n))
    R = np.zeros((m, k))
    for r, c, v in d["D"]:
        D[r, c] = v
    for r, c, v in d["R"]:
        R[r, c] = v
    world = build_world(D, R)
    if list(world.topic_of) != list(d.get("topic_of", world.topic_of)):
        raise ParamError("topic_of disagrees with the nonzero pattern of R")
    return world


def save_world(world: TopicWorld, path: str | Path) -> None:
    Path(path).write_text(json.dumps(world_to_dict(world), indent=1) + "\n")


def load_world(path: str | Path) -> TopicWorld:
    return world_from_dict(json.loads(Path(path).read_text()))
