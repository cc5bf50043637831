"""Discrete-time averaging over the moving network and its disagreement bookkeeping."""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._validation import check_positions, check_vector
from .digraph import cycle_gcd, is_strongly_connected, transition_matrix
from .exceptions import AssumptionViolated, DimensionMismatch, InvalidStepSize
from .neighborhood import (
    NeighborhoodSnapshot,
    arc_uniform_count,
    cumulative_rows,
    pair_indices,
    walk_block,
)

__all__ = [
    "ProtocolParams",
    "ConsensusTrace",
    "step_protocol",
    "step_protocol_dense",
    "disagreement",
    "decompose",
    "check_ergodic",
    "check_assumptions",
    "run_trial",
    "DEFAULT_THRESHOLD",
]

DEFAULT_THRESHOLD = 1e-8
# steps of uniforms drawn per block in run_trial
_BLOCK = 2048


@dataclass(frozen=True)
class ProtocolParams:
    """Step size ``epsilon`` and the weighting bound ``delta`` it is checked against.

    ``0 < epsilon < 1/delta`` is enforced unless ``force`` is set, which only
    exists to explore what happens outside the stable range.
    """

    epsilon: float
    delta: float
    force: bool = False

    def __post_init__(self):
        eps, delta = float(self.epsilon), float(self.delta)
        if not (math.isfinite(eps) and math.isfinite(delta)) or delta < 0:
            raise InvalidStepSize(f"invalid epsilon={self.epsilon!r} / delta={self.delta!r}")
        if not self.force and not (eps > 0 and eps * delta < 1):
            raise InvalidStepSize(f"epsilon={eps} outside (0, 1/delta) with delta={delta}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "delta", delta)

    @classmethod
    def for_spec(cls, spec, epsilon, force=False):
        return cls(epsilon, spec.delta, force)

    @property
    def in_stable_range(self):
        return self.epsilon > 0 and self.epsilon * self.delta < 1


@dataclass
class ConsensusTrace:
    """Per-step record of one simulated trial.

    ``xi[t]`` and ``conservation_residual[t]`` refer to the state before step
    ``t``, so both hold ``t_max + 1`` entries.
    """

    xi: np.ndarray
    conservation_residual: np.ndarray
    consensus_time: Optional[int]
    final_state: np.ndarray
    seed: Optional[int] = None
    threshold: float = DEFAULT_THRESHOLD
    snapshots_active: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def t_max(self):
        return self.xi.shape[0] - 1

    @property
    def reached(self):
        return self.consensus_time is not None


def _apply_arcs(x, arcs, eps):
    # arcs in row-major (i, j) order; x is a list of floats
    out = list(x)
    for i, j, b in arcs:
        out[i] += eps * b * (x[j] - x[i])
    return out


def _xi_rows(X):
    dev = X - X.mean(axis=1, keepdims=True)
    return np.maximum((dev * dev).sum(axis=1), 0.0)


def step_protocol(x, s, params):
    """One protocol step ``X_i + eps * sum_j a_ij (X_j - X_i)``, computed arc by arc."""
    x = check_vector(x, "state")
    if s.n != x.shape[0]:
        raise DimensionMismatch(f"snapshot has {s.n} agents, state has {x.shape[0]}")
    return np.array(_apply_arcs(x.tolist(), s.arcs(), params.epsilon))


def step_protocol_dense(x, s, params):
    """Matrix form ``(I - eps L) x``; used as the cross-check for :func:`step_protocol`."""
    x = check_vector(x, "state")
    if s.n != x.shape[0]:
        raise DimensionMismatch(f"snapshot has {s.n} agents, state has {x.shape[0]}")
    F = np.eye(s.n) - params.epsilon * s.L
    return F @ x


def disagreement(x):
    """Squared distance of ``x`` from the consensus line.

    Equal to ``x.x - n*mean(x)**2``, evaluated as ``sum((x - mean)**2)`` so it
    stays accurate close to consensus instead of cancelling two large terms.
    """
    return float(_xi_rows(check_vector(x, "state")[None, :])[0])


def decompose(x):
    """Split ``x`` into its consensus component and the orthogonal remainder."""
    x = check_vector(x, "state")
    parallel = np.full_like(x, x.mean())
    return parallel, x - parallel


def check_ergodic(g):
    """Raise :class:`AssumptionViolated` unless the walk on ``g`` is irreducible and aperiodic."""
    if not is_strongly_connected(g):
        raise AssumptionViolated("assumption-1", "underlying graph is not strongly connected")
    period = cycle_gcd(g)
    if period != 1:
        raise AssumptionViolated("assumption-1", f"underlying graph is periodic (gcd {period})")


def check_assumptions(g, spec):
    """:func:`check_ergodic`, plus symmetric arc sampling so every snapshot is balanced."""
    check_ergodic(g)
    if spec.mode != "symmetric":
        raise AssumptionViolated(
            "assumption-2", f"{spec.mode!r} arc sampling does not guarantee balanced snapshots"
        )


def run_trial(
    g,
    spec,
    params,
    x0,
    pos0,
    t_max,
    threshold=DEFAULT_THRESHOLD,
    seed=None,
    check=True,
    callback: Optional[Callable] = None,
):
    """Simulate walk, network sampling and protocol for ``t_max`` steps.

    Each step moves the agents, samples the network at the new positions and
    applies one protocol step. The trial owns a ``numpy`` generator seeded with
    ``seed`` and consumes it exactly as repeated calls of
    :func:`~movnet.neighborhood.step_walks` and
    :func:`~movnet.neighborhood.sample_neighborhood` would.

    ``callback(t, positions, snapshot)`` is invoked for every step when given;
    it slows the trial down considerably.

    Raises
    ------
    AssumptionViolated
        The graph is not ergodic or the linkage is not in symmetric mode, and
        ``check`` is true.
    """
    if check:
        check_assumptions(g, spec)
    n, t_max = spec.n, int(t_max)
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    x0 = check_vector(x0, "x0", size=n)
    pos = check_positions(pos0, g.m, n).tolist()
    if params.delta != spec.delta:
        raise ValueError(f"params.delta={params.delta} does not match spec.delta={spec.delta}")

    cum = [row.tolist() for row in cumulative_rows(transition_matrix(g))]
    rows, cols = pair_indices(n, spec.mode)
    prob = spec.P[rows, cols]
    symmetric = spec.mode == "symmetric"
    pair_arcs = []
    for i, j in zip(rows.tolist(), cols.tolist()):
        arcs = [(i, j, float(spec.B[i, j]))]
        if symmetric:
            arcs.append((j, i, float(spec.B[j, i])))
        pair_arcs.append(arcs)
    bits = 1 << np.arange(len(pair_arcs), dtype=object)
    arcs_by_mask = {}
    width = n + arc_uniform_count(n, spec.mode)
    eps = params.epsilon
    rng = np.random.default_rng(seed)

    x = x0.tolist()
    total0 = float(x0.sum())
    xi = np.empty(t_max + 1)
    resid = np.empty(t_max + 1)
    xi[0] = _xi_rows(x0[None, :])[0]
    resid[0] = 0.0
    active_steps = 0

    t = 0
    while t < t_max:
        size = min(_BLOCK, t_max - t)
        U = rng.random((size, width))
        Y = walk_block(pos, cum, U[:, :n])
        present = (Y[:, rows] == Y[:, cols]) & (U[:, n:] < prob)
        active = np.flatnonzero(present.any(axis=1))
        masks = present[active].astype(object) @ bits if active.size else []

        # inactive steps leave the state untouched
        states = np.empty((active.size, n))
        for r, mask in enumerate(masks):
            arcs = arcs_by_mask.get(mask)
            if arcs is None:
                arcs = sorted(a for q in range(len(pair_arcs)) if mask >> q & 1 for a in pair_arcs[q])
                arcs_by_mask[mask] = arcs
            x = _apply_arcs(x, arcs, eps)
            states[r] = x
        active_steps += active.size

        if callback is not None:
            for k in range(size):
                A = np.zeros((n, n))
                for q in np.flatnonzero(present[k]).tolist():
                    for i, j, b in pair_arcs[q]:
                        A[i, j] = b
                callback(t + k, Y[k].copy(), NeighborhoodSnapshot.from_adjacency(A, t + k))

        # step k of the block produces the state recorded at t + k + 1
        slot = np.full(size, -1)
        slot[active] = np.arange(active.size)
        slot = np.maximum.accumulate(slot)
        blk_xi = np.append(_xi_rows(states), xi[t])
        blk_res = np.append(np.abs(states.sum(axis=1) - total0), resid[t])
        xi[t + 1 : t + 1 + size] = blk_xi[slot]
        resid[t + 1 : t + 1 + size] = blk_res[slot]
        t += size

    below = np.flatnonzero(xi < threshold)
    return ConsensusTrace(
        xi=xi,
        conservation_residual=resid,
        consensus_time=int(below[0]) if below.size else None,
        final_state=np.array(x),
        seed=seed,
        threshold=threshold,
        snapshots_active=active_steps,
    )
