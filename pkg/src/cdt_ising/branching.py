"""Critical geometric branching process: laws, generating functions, samplers.

The offspring law is Geom(1/2) on {0, 1, 2, ...}, i.e. p_k = (1/2)^(k+1).
Its mean is exactly 1, so the process is critical.  Conditioning the process
to survive forever yields a tree with a single infinite spine; each spine
vertex carries an independent pair of finite-subtree lists, one list on each
side of the spine child.  Truncating everything at a finite height gives the
``SpineForest`` sampled here.

Two exact laws are exposed for validation:

* ``psi_n(n, s)``: generating function of the generation-n population of the
  unconditioned process, (n - (n-1)s) / (n+1 - ns).
* ``level_size_pmf(n, k)``: law of the generation-n size of the conditioned
  process, k * n^(k-1) / (n+1)^(k+1), the coefficient law of s * psi_n'(s).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


def offspring_pmf(k: int) -> float:
    """P(offspring count = k) for the critical geometric law, k >= 0."""
    if k < 0:
        raise ValueError(f"offspring count must be >= 0, got {k}")
    return 0.5 ** (k + 1)


def offspring_gf(s: float) -> float:
    """Generating function sum_k (1/2)^(k+1) s^k = 1 / (2 - s)."""
    return 1.0 / (2.0 - s)


def psi_n(n: int, s: float) -> float:
    """Generating function of the generation-n size, started from one particle.

    Closed form of the n-fold iterate of ``offspring_gf``:
    (n - (n-1)s) / (n+1 - ns).  In particular psi_n(0) = n/(n+1) is the
    probability of extinction by generation n.
    """
    if n < 1:
        raise ValueError(f"generation index must be >= 1, got {n}")
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"argument must lie in [0, 1], got {s}")
    return (n - (n - 1) * s) / (n + 1 - n * s)


def level_size_pmf(n: int, k: int) -> float:
    """P(generation-n size = k) for the process conditioned to survive.

    Equals k * n^(k-1) / (n+1)^(k+1), k >= 1: the size-biased version of the
    unconditioned generation-n law.  The conditioned process never dies, so
    k = 0 is rejected.
    """
    if n < 1:
        raise ValueError(f"generation index must be >= 1, got {n}")
    if k < 1:
        raise ValueError(f"conditioned level size must be >= 1, got {k}")
    # Big-int powers keep the ratio exact before the final float division.
    return k * pow(n, k - 1) / pow(n + 1, k + 1)


def size_biased_pmf(k: int) -> float:
    """Size-biased offspring law k * (1/2)^(k+1), k >= 1 (root law on the spine)."""
    if k < 1:
        raise ValueError(f"size-biased count must be >= 1, got {k}")
    return k * 0.5 ** (k + 1)


@dataclass(frozen=True)
class FiniteTree:
    """A finite rooted plane tree, nodes indexed in depth-first preorder.

    ``out_degrees[i]`` is the child count of node i and ``heights[i]`` its
    distance from the root.  The preorder out-degree sequence fully encodes
    the tree; heights are stored for convenience and validated on creation.
    """

    out_degrees: tuple[int, ...]
    heights: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.out_degrees:
            raise ValueError("a tree has at least its root")
        if len(self.out_degrees) != len(self.heights):
            raise ValueError("out_degrees and heights must have equal length")
        if self.heights[0] != 0:
            raise ValueError("root height must be 0")
        # Decode the preorder sequence with an explicit stack; this checks
        # that the encoding is a single well-formed tree and that each child
        # sits one level above its parent.
        stack = [(0, self.out_degrees[0])]
        for i in range(1, len(self.out_degrees)):
            while stack and stack[-1][1] == 0:
                stack.pop()
            if not stack:
                raise ValueError("out-degree sequence encodes more than one tree")
            parent, remaining = stack[-1]
            if self.heights[i] != self.heights[parent] + 1:
                raise ValueError("child height must be parent height + 1")
            stack[-1] = (parent, remaining - 1)
            stack.append((i, self.out_degrees[i]))
        while stack and stack[-1][1] == 0:
            stack.pop()
        if stack:
            raise ValueError("out-degree sequence is truncated")

    @classmethod
    def from_children(cls, children: list[list[int]], heights: list[int]) -> "FiniteTree":
        """Build from an adjacency list rooted at node 0, relabeling to preorder."""
        order: list[int] = []
        stack = [0]
        while stack:
            node = stack.pop()
            order.append(node)
            stack.extend(reversed(children[node]))
        return cls(
            tuple(len(children[v]) for v in order),
            tuple(heights[v] for v in order),
        )

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        """Preorder adjacency: children[i] lists child ids of node i."""
        kids: list[list[int]] = [[] for _ in self.out_degrees]
        stack = [(0, self.out_degrees[0])]
        for i in range(1, len(self.out_degrees)):
            while stack[-1][1] == 0:
                stack.pop()
            parent, remaining = stack[-1]
            kids[parent].append(i)
            stack[-1] = (parent, remaining - 1)
            stack.append((i, self.out_degrees[i]))
        return tuple(tuple(c) for c in kids)

    @property
    def node_count(self) -> int:
        return len(self.out_degrees)

    @property
    def max_height(self) -> int:
        return max(self.heights)

    def level_sizes(self) -> list[int]:
        sizes = [0] * (self.max_height + 1)
        for h in self.heights:
            sizes[h] += 1
        return sizes


def sample_gw_tree(rng: np.random.Generator, height_cap: int) -> FiniteTree:
    """Sample an unconditioned Geom(1/2) tree, generation by generation.

    Nodes at ``height_cap`` get no children: the tree is truncated (cut),
    not conditioned to die out by then.
    """
    if height_cap < 0:
        raise ValueError(f"height cap must be >= 0, got {height_cap}")
    children: list[list[int]] = [[]]
    heights = [0]
    frontier = [0]
    for h in range(height_cap):
        if not frontier:
            break
        counts = rng.geometric(0.5, size=len(frontier)) - 1
        nxt: list[int] = []
        for node, c in zip(frontier, counts):
            ids = list(range(len(children), len(children) + int(c)))
            children[node] = ids
            children.extend([] for _ in ids)
            heights.extend([h + 1] * len(ids))
            nxt.extend(ids)
        frontier = nxt
    return FiniteTree.from_children(children, heights)


@dataclass(frozen=True)
class SpineForest:
    """The survive-forever tree truncated at height ``levels``.

    One spine vertex per level 0..levels.  ``left[i]`` / ``right[i]`` are the
    finite trees hanging off spine vertex i, rooted at level i+1, to the left
    and right of the spine child, each truncated at absolute height ``levels``.
    """

    levels: int
    left: tuple[tuple[FiniteTree, ...], ...]
    right: tuple[tuple[FiniteTree, ...], ...]

    def __post_init__(self) -> None:
        if self.levels < 1:
            raise ValueError("need at least one level")
        if len(self.left) != self.levels or len(self.right) != self.levels:
            raise ValueError("need one attachment pair per spine vertex 0..levels-1")

    def spine_child_count(self, i: int) -> int:
        return len(self.left[i]) + 1 + len(self.right[i])

    @cached_property
    def _flat(self) -> tuple[tuple[tuple[int, ...], ...], tuple[int, ...], tuple[int, ...]]:
        # Nodes per level in planar (left-to-right) order.  Entry is either the
        # spine marker or a (tree, node) pair.
        out: list[tuple[int, ...]] = []
        spine_pos = [0]
        entries: list[tuple] = [("s",)]
        sizes = [1]
        for lvl in range(self.levels):
            degs: list[int] = []
            nxt: list[tuple] = []
            for e in entries:
                if e[0] == "s":
                    lt = self.left[lvl]
                    rt = self.right[lvl]
                    degs.append(len(lt) + 1 + len(rt))
                    nxt.extend(("t", t, 0) for t in lt)
                    spine_pos.append(len(nxt))
                    nxt.append(("s",))
                    nxt.extend(("t", t, 0) for t in rt)
                else:
                    _, tree, node = e
                    kids = tree.children[node]
                    degs.append(len(kids))
                    nxt.extend(("t", tree, c) for c in kids)
            out.append(tuple(degs))
            entries = nxt
            sizes.append(len(entries))
        return tuple(out), tuple(sizes), tuple(spine_pos)

    @property
    def level_sizes(self) -> tuple[int, ...]:
        return self._flat[1]

    @property
    def spine_positions(self) -> tuple[int, ...]:
        """Planar position of the spine vertex at each level 0..levels."""
        return self._flat[2]

    def to_forest(self) -> "LevelForest":
        return LevelForest(self._flat[0])


@dataclass(frozen=True)
class LevelForest:
    """A plane forest given by per-level out-degree lists (single level-0 root).

    ``out_degrees[n][i]`` is the child count of the i-th vertex at level n;
    the children of vertex i occupy consecutive positions at level n+1.
    """

    out_degrees: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.out_degrees or len(self.out_degrees[0]) != 1:
            raise ValueError("forest must have exactly one root at level 0")
        sizes = self.level_sizes
        for n, k in enumerate(sizes):
            if k < 1:
                raise ValueError(f"level {n} is empty")
        for n, lst in enumerate(self.out_degrees):
            if len(lst) != sizes[n]:
                raise ValueError(f"out-degree list at level {n} has wrong length")
            if any(d < 0 for d in lst):
                raise ValueError("out-degrees must be >= 0")

    @cached_property
    def level_sizes(self) -> tuple[int, ...]:
        sizes = [1]
        for lst in self.out_degrees:
            sizes.append(sum(lst))
        return tuple(sizes)

    @property
    def levels(self) -> int:
        return len(self.out_degrees)

    def child_range(self, n: int, i: int) -> tuple[int, int]:
        """Half-open position range of the children of vertex (n, i) at level n+1."""
        start = sum(self.out_degrees[n][:i])
        return start, start + self.out_degrees[n][i]


def sample_spine_forest(rng: np.random.Generator, levels: int) -> SpineForest:
    """Sample the conditioned tree up to ``levels``, spine plus side trees.

    At each spine vertex the number of left and right side trees are two
    independent Geom(1/2) draws; with the spine child in between, the total
    child count k = left + 1 + right is size-biased geometric and the spine
    child position is uniform among the k children, as required.  Side trees
    are independent unconditioned trees truncated at absolute height
    ``levels``.  Draw order per spine vertex: left count, right count, left
    trees, right trees (pinned for reproducibility).
    """
    if levels < 1:
        raise ValueError("need at least one level")
    lefts: list[tuple[FiniteTree, ...]] = []
    rights: list[tuple[FiniteTree, ...]] = []
    for i in range(levels):
        n_left = int(rng.geometric(0.5)) - 1
        n_right = int(rng.geometric(0.5)) - 1
        cap = levels - (i + 1)
        lefts.append(tuple(sample_gw_tree(rng, cap) for _ in range(n_left)))
        rights.append(tuple(sample_gw_tree(rng, cap) for _ in range(n_right)))
    return SpineForest(levels, tuple(lefts), tuple(rights))
