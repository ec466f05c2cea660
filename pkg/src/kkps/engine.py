"""Recommend/endorse dynamics of the search engine over a topic world.

Each iteration every user-query is shown the ``a`` top-ranked candidate
documents and endorses up to ``b`` of them, highest utility first. Ranking
uses the pseudo in-degree at iteration 0 and the accumulated in-degree after
that. Endorsements accumulate as a set of distinct (user, document) links.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import efficiency, max_total_utility
from .model import ModelParams, TopicWorld, generate_world, rng_streams, validate_params


@dataclass
class WwwState:
    """Bipartite endorsement graph stored as a boolean ``m x n`` adjacency."""

    adj: np.ndarray
    indegree: np.ndarray
    pseudo_scores: np.ndarray
    iteration: int = 0

    @classmethod
    def empty(cls, m: int, n: int, pseudo_scores: np.ndarray) -> WwwState:
        return cls(
            adj=np.zeros((m, n), dtype=bool),
            indegree=np.zeros(n, dtype=np.int64),
            pseudo_scores=np.asarray(pseudo_scores, dtype=float),
        )

    @property
    def n_links(self) -> int:
        return int(self.indegree.sum())

    @property
    def links(self) -> set[tuple[int, int]]:
        return {(int(i), int(d)) for i, d in zip(*np.nonzero(self.adj))}

    def edges(self) -> np.ndarray:
        """Links as an ``(L, 2)`` array sorted by user then document."""
        return np.argwhere(self.adj)

    def scores(self) -> np.ndarray:
        return self.pseudo_scores if self.iteration == 0 else self.indegree

    def copy(self) -> WwwState:
        return WwwState(self.adj.copy(), self.indegree.copy(), self.pseudo_scores, self.iteration)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    new_links: int
    cumulative_links: int
    attained_utility: float
    efficiency: float

    @property
    def changed(self) -> int:
        return self.new_links


@dataclass
class Trajectory:
    records: list[IterationRecord] = field(default_factory=list)
    converged: bool = False
    total_utility: float = float("nan")
    # largest r with cumulative_links(r) == r * m * b
    distinct_phase: int = 0

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def initial_scores(p: ModelParams, rng: np.random.Generator) -> np.ndarray:
    """Pseudo in-degree of every document, used only for the first ranking."""
    dist = p.init_dist.check()
    n = p.n
    if dist.kind == "uniform":
        return rng.uniform(0.0, dist.u_max, n)
    if dist.kind == "poisson":
        return rng.poisson(dist.lam, n).astype(float)
    # normal, truncated below at 0 by redrawing the negative values
    x = rng.normal(dist.mu, dist.sigma, n)
    bad = x < 0
    while bad.any():
        x[bad] = rng.normal(dist.mu, dist.sigma, int(bad.sum()))
        bad = x < 0
    return x


def _candidates(world: TopicWorld, i: int, scope: str) -> np.ndarray:
    if scope == "global":
        return np.arange(world.n)
    return world.topic_docs[world.topic_of[i]]


def _rank(cands: np.ndarray, scores: np.ndarray, tie_key: np.ndarray | None) -> np.ndarray:
    s = scores[cands]
    if tie_key is None:
        # cands is ascending, so a stable sort breaks ties by document index
        order = np.argsort(-s, kind="stable")
    else:
        order = np.lexsort((tie_key[cands], -s))
    return cands[order]


def recommend(
    state: WwwState,
    world: TopicWorld,
    i: int,
    p: ModelParams,
    tie_key: np.ndarray | None = None,
) -> np.ndarray:
    """Top ``a`` candidate documents for user ``i`` by descending score.

    ``tie_key`` replaces the document index as the secondary sort key.
    """
    cands = _candidates(world, i, p.scope)
    return _rank(cands, state.scores(), tie_key)[: p.a]


def endorse(recs, world: TopicWorld, i: int, b: int) -> np.ndarray:
    """Up to ``b`` recommended documents with the highest positive utility."""
    recs = np.asarray(recs, dtype=np.int64)
    u = world.U[i, recs]
    pos = u > 0
    recs, u = recs[pos], u[pos]
    order = np.lexsort((recs, -u))
    return recs[order[:b]]


def _tie_key(p: ModelParams, rng: np.random.Generator | None) -> np.ndarray | None:
    if p.tie_break == "index":
        return None
    if rng is None:
        raise ValueError("tie_break='random' needs an rng")
    return rng.permutation(p.n)


def _step_synchronous(state, world, p, tie_key):
    adj = state.adj.copy()
    scores = state.scores()
    if p.scope == "global":
        groups = [(np.arange(world.m), np.arange(world.n))]
    else:
        groups = [(users, world.topic_docs[t]) for t, users in enumerate(world.topic_users)]
    new_links = 0
    gained = []
    for users, cands in groups:
        if len(users) == 0:
            continue
        recs = np.sort(_rank(cands, scores, tie_key)[: p.a])
        sub = world.U[np.ix_(users, recs)]
        # stable sort over index-sorted columns gives utility desc, index asc
        order = np.argsort(-sub, axis=1, kind="stable")[:, : p.b]
        chosen = recs[order]
        util = np.take_along_axis(sub, order, axis=1)
        ok = util > 0
        rows = np.broadcast_to(users[:, None], chosen.shape)[ok]
        cols = chosen[ok]
        new_links += int((~adj[rows, cols]).sum())
        adj[rows, cols] = True
        gained.extend(util[ok].tolist())
    attained = math.fsum(gained)
    indegree = adj.sum(axis=0, dtype=np.int64)
    return WwwState(adj, indegree, state.pseudo_scores, state.iteration + 1), new_links, attained


def _step_sequential(state, world, p, tie_key):
    live = state.copy()
    new_links = 0
    gained = []
    for i in range(world.m):
        recs = recommend(live, world, i, p, tie_key)
        for d in endorse(recs, world, i, p.b):
            gained.append(float(world.U[i, d]))
            if not live.adj[i, d]:
                live.adj[i, d] = True
                live.indegree[d] += 1
                new_links += 1
    live.iteration += 1
    return live, new_links, math.fsum(gained)


def step(
    state: WwwState,
    world: TopicWorld,
    p: ModelParams,
    *,
    total_utility: float | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[WwwState, IterationRecord]:
    """Run one recommend/endorse round for every user-query.

    In synchronous mode all users rank against the scores frozen at the
    start of the iteration; in sequential mode each user sees the links
    added by lower-indexed users in the same iteration (from iteration 1 on).
    """
    tie_key = _tie_key(p, rng)
    if p.update_mode == "sequential":
        new, new_links, attained = _step_sequential(state, world, p, tie_key)
    else:
        new, new_links, attained = _step_synchronous(state, world, p, tie_key)
    if total_utility is None:
        total_utility = max_total_utility(world, p.b)
    rec = IterationRecord(
        iteration=new.iteration,
        new_links=new_links,
        cumulative_links=new.n_links,
        attained_utility=attained,
        efficiency=efficiency(attained, total_utility),
    )
    return new, rec


def run(
    world: TopicWorld,
    p: ModelParams,
    pseudo_scores: np.ndarray | None = None,
) -> tuple[WwwState, Trajectory]:
    """Iterate :func:`step` until no new link appears or ``max_iterations``."""
    _, init_rng = rng_streams(p.seed)
    if pseudo_scores is None:
        pseudo_scores = initial_scores(p, init_rng)
    state = WwwState.empty(world.m, world.n, pseudo_scores)
    tu = max_total_utility(world, p.b)
    traj = Trajectory(total_utility=tu)
    while state.iteration < p.max_iterations:
        state, rec = step(state, world, p, total_utility=tu, rng=init_rng)
        traj.records.append(rec)
        if rec.new_links == 0:
            traj.converged = True
            break
    per_iter = world.m * p.b
    r_star = 0
    for rec in traj.records:
        if rec.cumulative_links != rec.iteration * per_iter:
            break
        r_star = rec.iteration
    traj.distinct_phase = r_star
    return state, traj


def simulate(p: ModelParams) -> tuple[TopicWorld, WwwState, Trajectory]:
    """Generate the world for ``p.seed`` and run it to convergence."""
    validate_params(p)
    world_rng, _ = rng_streams(p.seed)
    world = generate_world(p, world_rng)
    state, traj = run(world, p)
    return world, state, traj
