"""Uniform-attachment trees and the subtree-product centrality score.

For a tree T rooted at v, the score of v is the product over all other
vertices u of the size of the subtree hanging below u.  Central vertices
have small scores, and picking the K lowest-scoring vertices is a simple
root-finding rule for randomly grown trees.  Scores are kept exclusively
as natural logs: the raw product reaches n^(n-1)-ish magnitudes and
overflows fixed-width arithmetic for trees of a few hundred vertices.

Vertices are labeled 1..n in arrival order and arrays are 1-indexed with
slot 0 as padding.  The growth rule implemented here is uniform
attachment: each new vertex picks its parent uniformly among all existing
vertices.  (Other attachment rules would slot into
:func:`grow_uniform_attachment`'s place; nothing downstream depends on the
rule.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GrowingTree",
    "CentralityTable",
    "TrialResult",
    "grow_uniform_attachment",
    "log_phi_direct",
    "log_phi_all",
    "top_k_central",
    "root_finding_trial",
]


@dataclass(frozen=True, eq=False)
class GrowingTree:
    """Arrival-ordered tree on vertices 1..n.

    ``parent[v]`` is the attachment target of vertex v for v >= 2 and
    satisfies parent[v] < v; slots 0 and 1 are padding (vertex 1 is the
    first arrival and has no parent).
    """

    n: int
    parent: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"vertex count must be at least 1, got {self.n}")
        parent = np.asarray(self.parent)
        if parent.shape != (self.n + 1,) or not np.issubdtype(parent.dtype, np.integer):
            raise ValueError("parent must be an integer array of length n + 1")
        if self.n >= 2:
            v = np.arange(2, self.n + 1)
            if not ((parent[2:] >= 1) & (parent[2:] < v)).all():
                raise ValueError("parent[v] must lie in 1..v-1 for every v >= 2")


@dataclass(frozen=True, eq=False)
class CentralityTable:
    """Per-vertex log scores (1-indexed, slot 0 padding).

    ``subtree_size[v]`` is the size of v's subtree when the tree is rooted
    at vertex 1, the reference root used by the rerooting pass.
    """

    n: int
    log_phi: np.ndarray
    subtree_size: np.ndarray


@dataclass(frozen=True)
class TrialResult:
    """Empirical success record for one root-finding configuration.

    ``std_error`` is the binomial estimate sqrt(rate*(1-rate)/trials); it
    degenerates to 0 when every trial agreed, which emitters report as an
    undefined marker rather than a genuine zero uncertainty.
    """

    n: int
    k: int
    trials: int
    successes: int
    rate: float
    std_error: float


def grow_uniform_attachment(n: int, rng: np.random.Generator) -> GrowingTree:
    """Grow a uniform-attachment tree: vertex k >= 2 attaches to a vertex
    drawn uniformly from 1..k-1."""
    if n < 1:
        raise ValueError(f"vertex count must be at least 1, got {n}")
    parent = np.zeros(n + 1, dtype=np.int64)
    if n >= 2:
        parent[2:] = rng.integers(1, np.arange(2, n + 1))
    return GrowingTree(n, parent)


def _adjacency(tree: GrowingTree) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(tree.n + 1)]
    for v in range(2, tree.n + 1):
        p = int(tree.parent[v])
        adj[v].append(p)
        adj[p].append(v)
    return adj


def log_phi_direct(tree: GrowingTree, v: int) -> float:
    """Log score of one vertex by explicit traversal (the O(n) oracle).

    Roots the tree at v, computes every subtree size below v by iterative
    depth-first search, and returns the sum of their logs.
    """
    if not 1 <= v <= tree.n:
        raise ValueError(f"vertex {v} outside 1..{tree.n}")
    adj = _adjacency(tree)
    order: list[int] = []
    up = np.zeros(tree.n + 1, dtype=np.int64)
    seen = np.zeros(tree.n + 1, dtype=bool)
    stack = [v]
    seen[v] = True
    while stack:
        u = stack.pop()
        order.append(u)
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                up[w] = u
                stack.append(w)
    size = np.ones(tree.n + 1, dtype=np.int64)
    total = 0.0
    for u in reversed(order):
        if u != v:
            size[up[u]] += size[u]
            total += math.log(size[u])
    return total


def _subtree_sizes(tree: GrowingTree) -> np.ndarray:
    # arrival order makes parent[v] < v, so one reverse sweep suffices
    size = np.ones(tree.n + 1, dtype=np.int64)
    size[0] = 0
    parent = tree.parent
    for v in range(tree.n, 1, -1):
        size[parent[v]] += size[v]
    return size


def log_phi_all(tree: GrowingTree) -> CentralityTable:
    """Log scores of every vertex in O(n) total.

    One sweep rooted at vertex 1 yields all subtree sizes s(.) and the score
    of vertex 1; crossing the edge from a vertex to its child w then shifts
    the score by log(n - s(w)) - log(s(w)), because only the two subtrees
    separated by that edge change.  Children always carry larger labels than
    parents, so a single ascending pass propagates the shifts.
    """
    n = tree.n
    size = _subtree_sizes(tree)
    log_phi = np.zeros(n + 1)
    if n >= 2:
        child_logs = np.log(size[2:])
        log_phi[1] = float(child_logs.sum())
        shift = np.log(n - size[2:]) - child_logs
        parent = tree.parent
        for v in range(2, n + 1):
            log_phi[v] = log_phi[parent[v]] + shift[v - 2]
    return CentralityTable(n, log_phi, size)


def top_k_central(table: CentralityTable, k: int) -> list[int]:
    """The k vertices with smallest log score, ascending by (score, label);
    ties break toward the smaller label."""
    if not 1 <= k <= table.n:
        raise ValueError(f"k must lie in 1..{table.n}, got {k}")
    labels = np.arange(1, table.n + 1)
    order = np.lexsort((labels, table.log_phi[1:]))
    return [int(i) + 1 for i in order[:k]]


def root_finding_trial(n: int, k: int, trials: int,
                       rng: np.random.Generator) -> TrialResult:
    """Grow ``trials`` independent trees of size n and record how often the
    true root (vertex 1) lands among the k most central vertices."""
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}, got {k}")
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    successes = 0
    for _ in range(trials):
        tree = grow_uniform_attachment(n, rng)
        table = log_phi_all(tree)
        if 1 in top_k_central(table, k):
            successes += 1
    rate = successes / trials
    std_error = math.sqrt(rate * (1.0 - rate) / trials)
    return TrialResult(n, k, trials, successes, rate, std_error)
