"""Brute-force reference computations, deliberately independent of movnet internals."""

import itertools
from functools import reduce
from math import gcd

import numpy as np


def transitive_closure(W):
    """Reachability by repeated boolean squaring of ``I + adj``."""
    m = W.shape[0]
    R = (np.asarray(W) > 0) | np.eye(m, dtype=bool)
    for _ in range(max(1, int(np.ceil(np.log2(m))) + 1)):
        R = (R.astype(int) @ R.astype(int)) > 0
    return R


def closed_walk_gcd(W):
    """gcd of all closed-walk lengths up to ``2 m^2``; equals the cycle gcd."""
    m = W.shape[0]
    A = (np.asarray(W) > 0).astype(np.int64)
    P = np.eye(m, dtype=np.int64)
    lengths = []
    for k in range(1, 2 * m * m + 1):
        P = np.minimum(P @ A, 1)
        if np.trace(P) > 0:
            lengths.append(k)
    return reduce(gcd, lengths, 0)


def path_enumeration_adjacency(Q, init, B, P, t):
    """Exact ``E a_ij(t)`` by summing over every joint walk trajectory.

    ``init`` is an ``(n, m)`` array of starting distributions.
    """
    Q = np.asarray(Q)
    init = np.asarray(init)
    n, m = init.shape
    E = np.zeros((n, n))
    paths = list(itertools.product(range(m), repeat=t + 1))
    weights = []
    for path in paths:
        w = 1.0
        for a, b in zip(path, path[1:]):
            w *= Q[a, b]
        weights.append(w)
    per_agent = []
    for i in range(n):
        per_agent.append([init[i, path[0]] * w for path, w in zip(paths, weights)])
    for combo in itertools.product(range(len(paths)), repeat=n):
        prob = 1.0
        for i, k in enumerate(combo):
            prob *= per_agent[i][k]
        if prob == 0.0:
            continue
        ends = [paths[k][-1] for k in combo]
        for i in range(n):
            for j in range(n):
                if i != j and ends[i] == ends[j]:
                    E[i, j] += prob * B[i, j] * P[i, j]
    return E


def one_step_expectation(x, y, Q, B, P, eps, mode="symmetric"):
    """Exact ``E[xi(t+1) | X(t)=x, Y(t)=y]`` plus the set of Laplacian realizations.

    Enumerates every joint walk destination and every arc coin outcome.
    Returns ``(expected_xi, realizations)`` where ``realizations`` maps the
    bytes of each distinct ``L`` to ``(L, probability)``.
    """
    x = np.asarray(x, dtype=float)
    n, m = x.shape[0], Q.shape[0]
    if mode == "symmetric":
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    expected = 0.0
    realizations = {}
    for dest in itertools.product(range(m), repeat=n):
        pw = np.prod([Q[y[i], dest[i]] for i in range(n)])
        if pw == 0:
            continue
        for coins in itertools.product((0, 1), repeat=len(pairs)):
            pc = pw
            A = np.zeros((n, n))
            for (i, j), c in zip(pairs, coins):
                pc *= P[i, j] if c else 1 - P[i, j]
                if c and dest[i] == dest[j]:
                    A[i, j] = B[i, j]
                    if mode == "symmetric":
                        A[j, i] = B[j, i]
            if pc == 0:
                continue
            L = np.diag(A.sum(axis=1)) - A
            x1 = x - eps * (L @ x)
            expected += pc * float(np.sum((x1 - x1.mean()) ** 2))
            key = L.tobytes()
            prev = realizations.get(key, (L, 0.0))[1]
            realizations[key] = (L, prev + pc)
    return expected, realizations


def schur_trace_rhs(C, E, x, y):
    """``tr(diag(y) C diag(x) E^T)`` evaluated with explicit diagonal matrices."""
    return float(np.trace(np.diag(y).T @ C @ np.diag(x) @ E.T))


def random_balanced_digraph(rng, m):
    """Sum of weighted directed cycles (always balanced) through a Hamiltonian cycle plus a loop."""
    W = np.zeros((m, m))
    order = rng.permutation(m)
    w = rng.uniform(0.5, 3.0)
    for a, b in zip(order, np.roll(order, -1)):
        W[a, b] += w
    W[order[0], order[0]] += rng.uniform(0.5, 3.0)
    for _ in range(rng.integers(0, 4)):
        k = rng.integers(2, m + 1) if m >= 2 else 1
        cyc = rng.choice(m, size=k, replace=False)
        w = rng.uniform(0.1, 2.0)
        for a, b in zip(cyc, np.roll(cyc, -1)):
            W[a, b] += w
    return W


def random_ergodic_digraph(rng, m, chords=2):
    """Directed ring with a few random chords and one self-loop."""
    W = np.zeros((m, m))
    for i in range(m):
        W[i, (i + 1) % m] = rng.uniform(0.5, 2.0)
    W[0, 0] = rng.uniform(0.5, 2.0)
    for _ in range(chords):
        a, b = rng.integers(0, m, size=2)
        W[a, b] += rng.uniform(0.1, 1.0)
    return W
