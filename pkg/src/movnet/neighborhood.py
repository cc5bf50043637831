"""Agents walking on the underlying graph and the random network they induce.

Random-stream contract
----------------------
Every draw is a ``Generator.random`` uniform on ``[0, 1)``. Per time step the
walk consumes ``n`` uniforms (agent order), then arc sampling consumes one
uniform per candidate pair regardless of co-location:

* ``symmetric`` mode: one per unordered pair ``i < j`` in row-major order;
* ``independent`` mode: one per ordered pair ``i != j`` in row-major order.

An arc ``(i, j)`` is present iff the agents share a node and its uniform is
below ``p_ij``. Consuming a fixed count per step keeps a trial reproducible
from its seed and lets the simulator pre-draw uniforms in blocks.
"""

import warnings
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from ._validation import check_positions, check_square, check_stochastic
from .exceptions import ModeMismatch, ShapeMismatch

__all__ = [
    "MODES",
    "LinkageSpec",
    "NeighborhoodSnapshot",
    "cumulative_rows",
    "uniform_positions",
    "step_walks",
    "walk_block",
    "pair_indices",
    "arc_uniform_count",
    "sample_neighborhood",
    "is_balanced",
    "position_distributions",
    "expected_adjacency",
    "ergodic_adjacency",
    "ergodic_laplacian",
    "schur_product",
    "snapshot_record",
]

MODES = ("symmetric", "independent")


@dataclass(frozen=True, eq=False)
class LinkageSpec:
    """Weighting factors ``B`` and linkage probabilities ``P`` between agents.

    ``delta`` is the largest weighted row sum of ``B``; the protocol step
    size must stay below ``1 / delta``.
    """

    B: np.ndarray
    P: np.ndarray
    mode: str = "symmetric"

    def __post_init__(self):
        B = check_square(self.B, "B").copy()
        P = check_square(self.P, "P").copy()
        if B.shape != P.shape:
            raise ShapeMismatch(f"B has shape {B.shape} but P has shape {P.shape}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if np.any(np.diag(B) != 0) or np.any(np.diag(P) != 0):
            raise ValueError("B and P must have zero diagonals")
        off = ~np.eye(B.shape[0], dtype=bool)
        if np.any(B[off] <= 0):
            raise ValueError("off-diagonal weighting factors b_ij must be > 0")
        if np.any(P[off] <= 0) or np.any(P[off] > 1):
            raise ValueError("off-diagonal linkage probabilities p_ij must lie in (0, 1]")
        if self.mode == "symmetric" and not (np.array_equal(B, B.T) and np.array_equal(P, P.T)):
            raise ModeMismatch("symmetric mode requires B == B.T and P == P.T")
        B.setflags(write=False)
        P.setflags(write=False)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "P", P)
        if self.mode == "independent":
            warnings.warn(
                "independent arc sampling generally yields unbalanced snapshots; "
                "conservation of the state sum is not guaranteed",
                stacklevel=3,
            )

    @classmethod
    def uniform(cls, n, b=1.0, p=1.0, mode="symmetric"):
        """Constant ``b_ij = b`` and ``p_ij = p`` off the diagonal."""
        off = 1.0 - np.eye(n)
        return cls(b * off, p * off, mode)

    @property
    def n(self):
        return self.B.shape[0]

    @property
    def delta(self):
        return float(self.B.sum(axis=1).max())

    @property
    def weighted_probabilities(self):
        """Schur product ``B o P``."""
        return schur_product(self.B, self.P)

    @property
    def is_symmetric(self):
        return bool(np.array_equal(self.B, self.B.T) and np.array_equal(self.P, self.P.T))

    def __eq__(self, other):
        return (
            isinstance(other, LinkageSpec)
            and self.mode == other.mode
            and np.array_equal(self.B, other.B)
            and np.array_equal(self.P, other.P)
        )


@dataclass(frozen=True, eq=False)
class NeighborhoodSnapshot:
    """One realization of the moving network: ``L = D - A``."""

    A: np.ndarray
    D: np.ndarray
    L: np.ndarray
    t: int = 0

    @classmethod
    def from_adjacency(cls, A, t=0):
        A = np.asarray(A, dtype=float)
        D = np.diag(A.sum(axis=1))
        return cls(A, D, D - A, int(t))

    @property
    def n(self):
        return self.A.shape[0]

    def arcs(self):
        """``(i, j, a_ij)`` for every arc present."""
        rows, cols = np.nonzero(self.A)
        return [(int(i), int(j), float(self.A[i, j])) for i, j in zip(rows, cols)]

    def neighbors(self, i):
        return np.flatnonzero(self.A[i])


def cumulative_rows(Q):
    """Inverse-CDF table for sampling from each row of ``Q``.

    Rows are normalised so the final entry is exactly 1, and entries past a
    row's last positive probability are pinned to 1 so they are never drawn.
    """
    Q = check_stochastic(Q, atol=1e-9)
    cum = np.cumsum(Q, axis=1)
    cum /= cum[:, -1:]
    for i in range(Q.shape[0]):
        last = np.flatnonzero(Q[i] > 0)[-1]
        cum[i, last:] = 1.0
    return cum


def uniform_positions(n, m, rng):
    """Independent uniform starting nodes (consumes ``n`` uniforms)."""
    return np.minimum((rng.random(n) * m).astype(np.int64), m - 1)


def step_walks(pos, Q, rng, cum=None):
    """Move every agent one step along ``Q``; draws are independent across agents."""
    if cum is None:
        cum = cumulative_rows(Q)
    pos = check_positions(pos, cum.shape[0])
    u = rng.random(pos.shape[0])
    nxt = np.empty_like(pos)
    for i, (p, ui) in enumerate(zip(pos, u)):
        nxt[i] = np.searchsorted(cum[p], ui, side="right")
    return nxt


def walk_block(pos, cum, U):
    """Advance walkers through a block of steps.

    ``pos`` is a list of current nodes (updated in place), ``cum`` the
    :func:`cumulative_rows` table as nested lists and ``U`` a ``(steps, n)``
    array of walk uniforms. Returns the ``(steps, n)`` visited nodes. Same
    draws, same result as calling :func:`step_walks` once per row of ``U``.
    """
    steps, n = U.shape
    Y = np.empty((steps, n), dtype=np.int64)
    for i in range(n):
        p = pos[i]
        col = []
        for u in U[:, i].tolist():
            p = bisect_right(cum[p], u)
            col.append(p)
        Y[:, i] = col
        pos[i] = p
    return Y


def pair_indices(n, mode):
    """Row-major candidate pairs consumed by arc sampling in ``mode``."""
    if mode == "symmetric":
        return np.triu_indices(n, 1)
    return np.nonzero(~np.eye(n, dtype=bool))


def arc_uniform_count(n, mode):
    return n * (n - 1) // 2 if mode == "symmetric" else n * (n - 1)


def _adjacency_from_uniforms(pos, spec, u):
    n = spec.n
    rows, cols = pair_indices(n, spec.mode)
    present = (pos[rows] == pos[cols]) & (u < spec.P[rows, cols])
    A = np.zeros((n, n))
    r, c = rows[present], cols[present]
    A[r, c] = spec.B[r, c]
    if spec.mode == "symmetric":
        A[c, r] = spec.B[c, r]
    return A


def sample_neighborhood(pos, spec, rng, t=0):
    """Draw the moving network for agents at ``pos``.

    Only co-located agents can link. In ``symmetric`` mode one coin decides
    both arcs of a pair, which keeps every snapshot balanced.
    """
    if spec.mode == "symmetric" and not spec.is_symmetric:
        raise ModeMismatch("symmetric mode requires B == B.T and P == P.T")
    pos = np.asarray(pos)
    if pos.shape != (spec.n,):
        raise ShapeMismatch(f"expected {spec.n} positions, got shape {pos.shape}")
    u = rng.random(arc_uniform_count(spec.n, spec.mode))
    return NeighborhoodSnapshot.from_adjacency(_adjacency_from_uniforms(pos, spec, u), t)


def is_balanced(s, tol=0.0):
    A = s.A if isinstance(s, NeighborhoodSnapshot) else np.asarray(s, dtype=float)
    return bool(np.all(np.abs(A.sum(axis=1) - A.sum(axis=0)) <= tol))


def position_distributions(initial, Q, t):
    """Distribution of every agent's node after ``t`` steps.

    ``initial`` is an ``(n, m)`` array of starting distributions or a vector
    of ``n`` starting nodes.
    """
    Q = np.asarray(Q, dtype=float)
    init = np.asarray(initial)
    if init.ndim == 1:
        dist = np.zeros((init.shape[0], Q.shape[0]))
        dist[np.arange(init.shape[0]), init.astype(np.int64)] = 1.0
    else:
        dist = init.astype(float)
    return dist @ np.linalg.matrix_power(Q, int(t))


def expected_adjacency(dists, spec):
    """``E a_ij = b_ij p_ij sum_k pi_ik pi_jk`` for ``i != j``; zero diagonal."""
    dists = np.asarray(dists, dtype=float)
    if dists.ndim != 2 or dists.shape[0] != spec.n:
        raise ShapeMismatch(f"need one distribution per agent, got shape {dists.shape}")
    E = spec.weighted_probabilities * (dists @ dists.T)
    np.fill_diagonal(E, 0.0)
    return E


def _collision(pi):
    p = getattr(pi, "pi", pi)
    p = np.asarray(p, dtype=float)
    return float(p @ p)


def ergodic_adjacency(pi, spec):
    return _collision(pi) * spec.weighted_probabilities


def ergodic_laplacian(pi, spec):
    """Long-run expected Laplacian ``(sum_k pi_k^2) (diag(BoP 1) - BoP)``."""
    BP = spec.weighted_probabilities
    return _collision(pi) * (np.diag(BP.sum(axis=1)) - BP)


def schur_product(C, E):
    C = np.asarray(C, dtype=float)
    E = np.asarray(E, dtype=float)
    if C.shape != E.shape:
        raise ShapeMismatch(f"Schur product needs equal shapes, got {C.shape} and {E.shape}")
    return C * E


def snapshot_record(s, pos):
    """JSON-ready dump of one step: time, positions and arcs ``[i, j, b_ij]``."""
    return {
        "t": int(s.t),
        "positions": [int(p) for p in pos],
        "arcs": [[i, j, w] for i, j, w in s.arcs()],
    }
