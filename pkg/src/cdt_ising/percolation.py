"""Degree-dependent site percolation and locally geodesic path machinery.

Each vertex of a triangulation is open independently with probability
tanh(beta * d_v), the maximal total-variation distance between the two
extreme single-site spin conditionals.  The finite stand-in for "an infinite
open path exists" is the farthest level reached by the open cluster of the
root; the annealed estimator redraws both the triangulation and the marks
every trial.

Marks cover levels 0..top-1 of a triangulation sampled one level deeper than
the reach horizon, so every marked vertex has a full degree; the root uses
d = d_up + 2 (its self-loop supplies the two horizontal slots).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .branching import sample_spine_forest
from .rng import stream
from .triangulation import Triangulation, forest_to_triangulation


def open_probability(degree: int, beta: float) -> float:
    """tanh(beta * degree): the disagreement bound for a degree-d vertex."""
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    return math.tanh(beta * degree)


@lru_cache(maxsize=128)
def _mark_degrees(t: Triangulation) -> tuple[int, ...]:
    """Percolation degree of every vertex on levels 0..top-1, flat order."""
    degs: list[int] = [len(t.fans[0][0]) + 2]  # root: up-edges plus self-loop
    for n in range(1, t.top_level):
        for p in range(t.level_sizes[n]):
            d = t.vertex_degree(n, p)
            degs.append(d.total)
    return tuple(degs)


@lru_cache(maxsize=128)
def _simple_adjacency(t: Triangulation) -> tuple[tuple[int, ...], ...]:
    """Deduplicated vertex adjacency among levels 0..top-1 (loops dropped)."""
    n_marked = sum(t.level_sizes[:-1])
    adj: list[set[int]] = [set() for _ in range(n_marked)]
    for key, nbrs in zip(range(n_marked), t.primal_adjacency):
        for _, other in nbrs:
            if other != key and other < n_marked:
                adj[key].add(other)
    return tuple(tuple(sorted(s)) for s in adj)


@dataclass(frozen=True)
class OpenSet:
    """Independent open/closed marks on levels 0..top-1 of a triangulation."""

    beta: float
    marks: np.ndarray  # bool, flat over marked levels

    def is_open(self, flat: int) -> bool:
        return bool(self.marks[flat])


def sample_open_set(t: Triangulation, beta: float, rng: np.random.Generator) -> OpenSet:
    """Mark vertex v open with probability tanh(beta * d_v), independently."""
    degs = np.array(_mark_degrees(t), dtype=np.float64)
    marks = rng.random(len(degs)) < np.tanh(beta * degs)
    return OpenSet(float(beta), marks)


def open_set_from_uniforms(t: Triangulation, beta: float, uniforms: np.ndarray) -> OpenSet:
    """Open set from pre-drawn uniforms; shared uniforms couple different betas."""
    degs = np.array(_mark_degrees(t), dtype=np.float64)
    if uniforms.shape != degs.shape:
        raise ValueError("need one uniform per marked vertex")
    return OpenSet(float(beta), uniforms < np.tanh(beta * degs))


@dataclass(frozen=True)
class ReachResult:
    """Farthest level of the root's open cluster, with a path certificate.

    ``reach`` is 0 and ``path`` is None when the root itself is closed; the
    certificate is a self-avoiding open vertex path from the root to a vertex
    on the reached level.
    """

    reach: int
    path: tuple[tuple[int, int], ...] | None


def max_open_reach(t: Triangulation, open_set: OpenSet) -> ReachResult:
    root = 0
    if not open_set.marks[root]:
        return ReachResult(0, None)
    adj = _simple_adjacency(t)
    offsets = t.level_offsets
    marks = open_set.marks

    def level_of(flat: int) -> int:
        lvl = 0
        while offsets[lvl + 1] <= flat:
            lvl += 1
        return lvl

    parent = {root: None}
    queue = [root]
    best = root
    best_level = 0
    while queue:
        nxt = []
        for v in queue:
            for u in adj[v]:
                if u in parent or not marks[u]:
                    continue
                parent[u] = v
                lvl = level_of(u)
                if lvl > best_level:
                    best_level = lvl
                    best = u
                nxt.append(u)
        queue = nxt
    path = []
    v: int | None = best
    while v is not None:
        path.append(v)
        v = parent[v]
    path.reverse()
    verts = tuple((level_of(f), f - offsets[level_of(f)]) for f in path)
    return ReachResult(best_level, verts)


@dataclass(frozen=True)
class ReachEstimate:
    beta: float
    levels: int
    trials: int
    reach_count: int

    @property
    def estimate(self) -> float:
        return self.reach_count / self.trials

    @property
    def stderr(self) -> float:
        p = self.estimate
        return math.sqrt(p * (1.0 - p) / self.trials)


def _reach_trial(levels: int, beta: float, seed: int, trial: int) -> bool:
    rng = stream(seed, trial)
    t = forest_to_triangulation(sample_spine_forest(rng, levels + 1))
    opens = sample_open_set(t, beta, rng)
    return max_open_reach(t, opens).reach >= levels


def annealed_reach_probability(
    levels: int, beta: float, trials: int, seed: int
) -> ReachEstimate:
    """Fraction of trials whose root cluster reaches the target level.

    Each trial draws a fresh triangulation (one level past the horizon, so
    all marked degrees are defined) and fresh marks; trial RNG streams are
    keyed by the trial index, so the result is independent of scheduling.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    hits = sum(1 for i in range(trials) if _reach_trial(levels, beta, seed, i))
    return ReachEstimate(float(beta), levels, trials, hits)


def annealed_reach_curve(
    levels: int, betas: list[float], trials: int, seed: int
) -> list[ReachEstimate]:
    """Reach estimates over a beta grid, coupled by shared uniforms per trial.

    Within one trial every beta sees the same triangulation and the same
    uniform draws, so the per-trial reach indicator is monotone in beta and
    the estimates are exactly nondecreasing.
    """
    hits = [0] * len(betas)
    for i in range(trials):
        rng = stream(seed, i)
        t = forest_to_triangulation(sample_spine_forest(rng, levels + 1))
        uniforms = rng.random(sum(t.level_sizes[:-1]))
        for j, beta in enumerate(betas):
            opens = open_set_from_uniforms(t, beta, uniforms)
            if max_open_reach(t, opens).reach >= levels:
                hits[j] += 1
    return [ReachEstimate(float(b), levels, trials, h) for b, h in zip(betas, hits)]


# -- locally geodesic paths ---------------------------------------------------


def _check_path(t: Triangulation, path) -> list[int]:
    adj = _vertex_adjacency(t)
    flat = [t.flat_index(lvl, pos) for lvl, pos in path]
    for a, b in zip(flat, flat[1:]):
        if b not in adj[a]:
            raise ValueError(f"consecutive path vertices {a} and {b} are not adjacent")
    return flat


@lru_cache(maxsize=128)
def _vertex_adjacency(t: Triangulation) -> tuple[frozenset[int], ...]:
    """Deduplicated adjacency over all levels (self-loops ignored)."""
    adj: list[set[int]] = [set() for _ in range(t.vertex_count)]
    for v, nbrs in enumerate(t.primal_adjacency):
        for _, other in nbrs:
            if other != v:
                adj[v].add(other)
    return tuple(frozenset(s) for s in adj)


def is_locally_geodesic(t: Triangulation, path) -> bool:
    """True iff every adjacency between two path vertices is a path step.

    The check is at vertex level: parallel edges between consecutive path
    vertices do not count as detours, and self-loops are ignored.
    """
    flat = _check_path(t, path)
    if len(set(flat)) != len(flat):
        return False
    adj = _vertex_adjacency(t)
    index = {v: i for i, v in enumerate(flat)}
    for i, v in enumerate(flat):
        for u in adj[v]:
            j = index.get(u)
            if j is not None and abs(i - j) != 1:
                return False
    return True


def shortcut_to_locally_geodesic(t: Triangulation, path) -> list[tuple[int, int]]:
    """Shorten a self-avoiding path along chords until it is locally geodesic.

    Every vertex of the output lay on the input path, so openness of the
    input vertices carries over; the output is never longer.
    """
    adj = _vertex_adjacency(t)
    flat = _check_path(t, path)
    changed = True
    while changed:
        changed = False
        index = {v: i for i, v in enumerate(flat)}
        for i, v in enumerate(flat):
            best = None
            for u in adj[v]:
                j = index.get(u)
                if j is not None and j > i + 1 and (best is None or j > best):
                    best = j
            if best is not None:
                flat = flat[: i + 1] + flat[best:]
                changed = True
                break
    offsets = t.level_offsets

    def unflatten(f: int) -> tuple[int, int]:
        lvl = 0
        while offsets[lvl + 1] <= f:
            lvl += 1
        return (lvl, f - offsets[lvl])

    return [unflatten(f) for f in flat]


MAX_PATH_LENGTH = 12


def count_salg_paths(t: Triangulation, length: int) -> int:
    """Number of self-avoiding locally geodesic paths of the given edge count
    starting at the root (vertex paths; parallel edges do not multiply)."""
    if length < 0:
        raise ValueError("path length must be >= 0")
    if length > MAX_PATH_LENGTH:
        raise ValueError(f"exhaustive search capped at length {MAX_PATH_LENGTH}")
    adj = _vertex_adjacency(t)
    root = 0
    count = 0
    # a prefix of a locally geodesic path is locally geodesic, so prefixes
    # violating the chord condition are pruned outright
    stack: list[tuple[list[int], set[int]]] = [([root], {root})]
    while stack:
        path, members = stack.pop()
        if len(path) - 1 == length:
            count += 1
            continue
        last = path[-1]
        for u in adj[last]:
            if u in members:
                continue
            if any(w in adj[u] for w in path[:-1]):
                continue  # chord to a non-consecutive path vertex
            stack.append((path + [u], members | {u}))
    return count
