"""Input checking shared by the estimator layer."""

from __future__ import annotations

import numpy as np

from .exceptions import InvalidInstanceError


def check_weight_matrix(weights, *, dtype=float) -> np.ndarray:
    """Coerce ``weights`` to a validated dense weight matrix.

    Accepts anything array-like; returns a float64 copy that is square,
    symmetric, finite, zero on the diagonal, and bounded in [0, 1].
    """
    w = np.array(weights, dtype=dtype, copy=True)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise InvalidInstanceError(f"weight matrix must be square, got shape {w.shape}")
    if w.shape[0] < 2:
        raise InvalidInstanceError("need at least two vertices")
    if not np.all(np.isfinite(w)):
        raise InvalidInstanceError("weight matrix contains non-finite entries")
    if not np.array_equal(w, w.T):
        raise InvalidInstanceError("weight matrix must be symmetric")
    if np.any(np.diag(w) != 0.0):
        raise InvalidInstanceError("self-loops are not allowed")
    if w.min() < 0.0 or w.max() > 1.0:
        raise InvalidInstanceError("weights must lie in [0, 1]")
    return w
