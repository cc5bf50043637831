"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

import numpy as np

from .exceptions import ShapeMismatch


def check_square(M, name="matrix", nonnegative=False):
    """Return ``M`` as a finite float ndarray of shape (k, k)."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {A.shape}")
    if A.shape[0] == 0:
        raise ShapeMismatch(f"{name} must be non-empty")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    if nonnegative and np.any(A < 0):
        raise ValueError(f"{name} contains negative entries")
    return A


def check_vector(x, name="vector", size=None):
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ShapeMismatch(f"{name} must be 1-d, got shape {v.shape}")
    if size is not None and v.shape[0] != size:
        raise ShapeMismatch(f"{name} has length {v.shape[0]}, expected {size}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def check_stochastic(Q, atol=1e-12):
    """Validate a row-stochastic matrix."""
    Q = check_square(Q, "transition matrix", nonnegative=True)
    rows = Q.sum(axis=1)
    if np.any(np.abs(rows - 1.0) > atol):
        bad = int(np.argmax(np.abs(rows - 1.0)))
        raise ValueError(f"row {bad} of transition matrix sums to {rows[bad]!r}, not 1")
    return Q


def check_probability_vector(p, name="distribution", atol=1e-12):
    v = check_vector(p, name)
    if np.any(v < 0) or abs(v.sum() - 1.0) > atol:
        raise ValueError(f"{name} is not a probability vector")
    return v


def check_positions(y, m, n=None):
    pos = np.asarray(y)
    if pos.ndim != 1 or (n is not None and pos.shape[0] != n):
        raise ShapeMismatch(f"positions must be a vector of length {n}, got shape {pos.shape}")
    if not np.issubdtype(pos.dtype, np.integer):
        if not np.all(np.equal(np.mod(pos, 1), 0)):
            raise ValueError("positions must be integer node indices")
    pos = pos.astype(np.int64)
    if np.any(pos < 0) or np.any(pos >= m):
        raise ValueError(f"positions must lie in [0, {m})")
    return pos
