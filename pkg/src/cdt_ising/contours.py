"""Winding contours in the dual graph, the contour series, and spin inversion.

A contour is a simple cycle of triangles (dual vertices) that winds exactly
once around the cylinder; it separates the root from the top level.  Winding
numbers are exact integers: each strip has one wrap-around dual edge crossing
the anchored seam (the chain of fan-start edges from the root), and the
winding of a cycle is the signed count of such crossings.

Every dual edge crosses one primal edge, so a contour of length n crosses n
primal edges; removing them disconnects the root from the top boundary, and
inverting all spins on the root side changes the energy by +-2n depending on
whether the crossed edges agree or disagree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

from .branching import LevelForest
from .ising import SpinState
from .triangulation import PrimalKey, Triangulation, TriRef

MAX_EXHAUSTIVE_TRIANGLES = 40
MAX_BOUNDED_LENGTH = 14


@dataclass(frozen=True)
class Contour:
    """A simple dual cycle with winding number +1, in canonical rotation."""

    triangles: tuple[TriRef, ...]
    dual_edges: tuple[int, ...]  # edge indices into the dual graph, aligned with steps
    crossed: tuple[PrimalKey, ...]
    winding: int

    @property
    def length(self) -> int:
        return len(self.dual_edges)


@dataclass(frozen=True)
class ContourSet:
    contours: tuple[Contour, ...]

    @cached_property
    def by_length(self) -> dict[int, tuple[Contour, ...]]:
        out: dict[int, list[Contour]] = {}
        for c in self.contours:
            out.setdefault(c.length, []).append(c)
        return {n: tuple(v) for n, v in sorted(out.items())}

    @cached_property
    def counts(self) -> dict[int, int]:
        return {n: len(v) for n, v in self.by_length.items()}


def _canonical_cycle(
    tris: list[TriRef], edges: list[int], winding: int
) -> tuple[tuple[TriRef, ...], tuple[int, ...]]:
    # Orient so the winding is +1, then take the lexicographically minimal
    # rotation of the (triangle, edge) sequence.
    if winding < 0:
        n = len(tris)
        tris = [tris[0]] + [tris[n - i] for i in range(1, n)]
        edges = list(reversed(edges))
    seq = list(zip(tris, edges))
    n = len(seq)
    best = min(range(n), key=lambda r: [seq[(r + i) % n] for i in range(n)])
    rot = [seq[(best + i) % n] for i in range(n)]
    return tuple(t for t, _ in rot), tuple(e for _, e in rot)


def enumerate_contours(t: Triangulation, n_max: int | None = None) -> ContourSet:
    """All winding-one simple dual cycles, optionally capped at length ``n_max``.

    Exhaustive search (``n_max=None``) is guarded to small duals; bounded
    search is guarded to lengths <= 14.  Every winding cycle uses at least
    one wrap-around strip edge, so the search runs one DFS per strip, forcing
    that strip's wrap edge, and canonical deduplication merges rediscoveries.
    """
    dual = t.dual
    f = len(dual.vertices)
    if n_max is None:
        if f > MAX_EXHAUSTIVE_TRIANGLES:
            raise ValueError(
                f"{f} triangles exceed the exhaustive-search cap {MAX_EXHAUSTIVE_TRIANGLES};"
                " pass n_max for a bounded search"
            )
        n_max = f
    elif n_max > MAX_BOUNDED_LENGTH:
        raise ValueError(f"bounded search requires n_max <= {MAX_BOUNDED_LENGTH}")

    adjacency = dual.adjacency
    edges = dual.edges
    found: dict[tuple, Contour] = {}

    for strip in range(t.top_level):
        size = dual.strip_sizes[strip]
        wrap_idx = next(
            i
            for i, e in enumerate(edges)
            if e.seam_step == 1 and e.a == (strip, size - 1) and e.b == (strip, 0)
        )
        start = (strip, 0)
        goal = (strip, size - 1)
        # DFS over simple paths start -> goal avoiding the forced wrap edge;
        # closing with the wrap edge (goal -> start) adds one positive seam
        # crossing, so the cycle winding is the path's seam sum plus one.
        stack: list[tuple[TriRef, list[TriRef], list[int], int]] = [(start, [start], [], 0)]
        while stack:
            node, path, epath, seam = stack.pop()
            if node == goal:
                if epath and abs(seam + 1) == 1:
                    tris_c, edges_c = _canonical_cycle(path[:], epath + [wrap_idx], seam + 1)
                    key = (tris_c, edges_c)
                    if key not in found:
                        crossed = tuple(edges[i].primal for i in edges_c)
                        found[key] = Contour(tris_c, edges_c, crossed, 1)
                # a simple cycle visits the goal once, right before closing
                continue
            for eidx, nbr, step in adjacency[node]:
                if eidx == wrap_idx or eidx in epath:
                    continue
                if nbr in path:
                    continue
                need = 2 if nbr == goal else 3  # edges still required to close
                if len(epath) + need > n_max:
                    continue
                stack.append((nbr, path + [nbr], epath + [eidx], seam + step))
    return ContourSet(tuple(found.values()))


@dataclass(frozen=True)
class ContourSeries:
    """Partial sums of sum_n #C_n * exp(-2*beta*n)."""

    beta: float
    rows: tuple[tuple[int, int, float], ...]  # (length, count, partial sum)
    tail_below_one_from: int | None

    @property
    def total(self) -> float:
        return self.rows[-1][2] if self.rows else 0.0


def peierls_series(counts: Mapping[int, int], beta: float) -> ContourSeries:
    """Accumulate the contour series and locate where its tail drops below 1.

    ``tail_below_one_from`` is the smallest length L such that the tail sum
    over lengths >= L is < 1 (the uniqueness-breaking trigger); L is 0 when
    even the full sum is below 1.
    """
    items = sorted((int(n), int(c)) for n, c in counts.items())
    rows = []
    acc = 0.0
    for n, c in items:
        acc += c * math.exp(-2.0 * beta * n)
        rows.append((n, c, float(acc)))
    total = acc
    tail_from: int | None = None
    prefix = 0.0
    if total < 1.0:
        tail_from = 0
    else:
        for n, c, partial in rows:
            if total - prefix < 1.0:
                tail_from = n
                break
            prefix = partial
        else:
            tail_from = items[-1][0] + 1 if items else 0
    return ContourSeries(float(beta), tuple(rows), tail_from)


def below_vertices(t: Triangulation, contour: Contour) -> set[tuple[int, int]]:
    """Vertices on the root side of the contour.

    Computed as the connected component of the root after deleting the
    crossed primal edges; a winding contour leaves the top level entirely on
    the other side.
    """
    removed = set(contour.crossed)
    adjacency = t.primal_adjacency
    root = t.flat_index(0, 0)
    seen = {root}
    stack = [root]
    while stack:
        v = stack.pop()
        for key, other in adjacency[v]:
            if key in removed or other in seen:
                continue
            seen.add(other)
            stack.append(other)
    offsets = t.level_offsets
    out = set()
    for flat in seen:
        level = 0
        while offsets[level + 1] <= flat:
            level += 1
        out.add((level, flat - offsets[level]))
    return out


def flip_inside(t: Triangulation, state: SpinState, contour: Contour) -> SpinState:
    """Invert all spins on the root side of the contour; an involution.

    Raises if the contour fails to separate the root from the boundary (it
    always does for winding-one contours).
    """
    below = below_vertices(t, contour)
    top = t.top_level
    if any(level == top for level, _ in below):
        raise ValueError("contour does not separate the root from the boundary")
    new = state.copy()
    for level, pos in below:
        idx = t.flat_index(level, pos)
        new.spins[idx] = -new.spins[idx]
    return new


def survivors_statistic(forest: LevelForest, r_level: int, n: int) -> int:
    """Number of level (r_level - n) vertices with a descendant at level (r_level + n)."""
    if n < 0 or r_level - n < 0:
        raise ValueError("need 0 <= n <= r_level")
    lo, hi = r_level - n, r_level + n
    if hi > forest.levels:
        raise ValueError(f"forest must extend to level {hi}")
    sizes = forest.level_sizes
    alive = [True] * sizes[hi]
    for level in range(hi - 1, lo - 1, -1):
        degs = forest.out_degrees[level]
        nxt = []
        start = 0
        for d in degs:
            nxt.append(any(alive[start : start + d]))
            start += d
        alive = nxt
    return sum(alive)
