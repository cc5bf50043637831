"""The fixed weighted digraph the agents walk on, and its random-walk matrix."""

from collections import deque
from dataclasses import dataclass
from math import gcd

import numpy as np

from ._validation import check_square
from .exceptions import NotStronglyConnected, ZeroOutDegree

__all__ = [
    "WeightedDigraph",
    "out_degrees",
    "is_strongly_connected",
    "cycle_gcd",
    "transition_matrix",
]


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Dense weighted digraph; arc ``(i, j)`` exists iff ``weights[i, j] > 0``.

    Loops are allowed. Nodes with no outgoing weight are accepted here so
    that they can be inspected; they are rejected by :func:`transition_matrix`.
    """

    weights: np.ndarray

    def __post_init__(self):
        W = check_square(self.weights, "weights", nonnegative=True).copy()
        W.setflags(write=False)
        object.__setattr__(self, "weights", W)

    @property
    def m(self):
        return self.weights.shape[0]

    @classmethod
    def from_arcs(cls, m, arcs):
        """Build from ``(i, j, w)`` triples; repeated arcs accumulate."""
        W = np.zeros((m, m))
        for i, j, w in arcs:
            W[i, j] += w
        return cls(W)

    def successors(self, i):
        return np.flatnonzero(self.weights[i] > 0)

    def permuted(self, perm):
        """Relabel node ``perm[k]`` as node ``k``."""
        perm = np.asarray(perm)
        return WeightedDigraph(self.weights[np.ix_(perm, perm)])

    def __eq__(self, other):
        return isinstance(other, WeightedDigraph) and np.array_equal(self.weights, other.weights)

    def __repr__(self):
        return f"WeightedDigraph(m={self.m}, arcs={int(np.count_nonzero(self.weights))})"


def out_degrees(g):
    """Weighted out-degree of every node; raises :class:`ZeroOutDegree` on an empty row."""
    d = g.weights.sum(axis=1)
    empty = np.flatnonzero(d <= 0)
    if empty.size:
        raise ZeroOutDegree(empty[0])
    return d


def _reachable(adj, root):
    seen = np.zeros(adj.shape[0], dtype=bool)
    seen[root] = True
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(adj[u]):
            if not seen[v]:
                seen[v] = True
                queue.append(v)
    return seen


def is_strongly_connected(g):
    adj = g.weights > 0
    return bool(_reachable(adj, 0).all() and _reachable(adj.T, 0).all())


def cycle_gcd(g):
    """Period of the walk: gcd of all directed cycle lengths.

    Uses BFS depths from node 0; every arc ``(u, v)`` contributes
    ``depth[u] + 1 - depth[v]`` to the gcd.
    """
    if not is_strongly_connected(g):
        raise NotStronglyConnected("cycle gcd is only defined for strongly connected graphs")
    adj = g.weights > 0
    depth = np.full(g.m, -1, dtype=np.int64)
    depth[0] = 0
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(adj[u]):
            if depth[v] < 0:
                depth[v] = depth[u] + 1
                queue.append(v)
    period = 0
    for u, v in zip(*np.nonzero(adj)):
        period = gcd(period, int(abs(depth[u] + 1 - depth[v])))
    return period


def transition_matrix(g):
    """Row-stochastic matrix ``q_ij = w_ij / d_i`` of the random walk on ``g``."""
    d = out_degrees(g)
    Q = g.weights / d[:, None]
    return Q
