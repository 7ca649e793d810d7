"""Weighted Max-Cut instances: generation, scoring, brute force, file I/O.

Instances are complete graphs on n vertices with symmetric edge weights in
[0, 1] and zero diagonal.  Bitstrings assign each vertex to one side of the
cut; bit i of a basis index k is ``(k >> i) & 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidInstanceError, ResourceLimitError

# Hard cap for exhaustive enumeration; 2**24 indices is the most the
# vectorized sweep handles in reasonable time and memory.
BRUTE_FORCE_MAX_QUBITS = 24


@dataclass(frozen=True)
class MaxCutInstance:
    """A weighted Max-Cut problem on ``n`` vertices.

    Parameters
    ----------
    n : int
        Number of vertices, at least 2.
    weights : ndarray of shape (n, n)
        Symmetric weight matrix with zero diagonal and entries in [0, 1].
    seed : int or None
        RNG seed the instance was generated from, if any.  Carried along
        for provenance and serialization; not used after construction.
    """

    n: int
    weights: np.ndarray = field(repr=False)
    seed: int | None = None

    def __post_init__(self):
        if self.n < 2:
            raise InvalidInstanceError(f"need at least 2 vertices, got n={self.n}")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.n, self.n):
            raise InvalidInstanceError(
                f"weight matrix shape {w.shape} does not match n={self.n}"
            )
        if not np.array_equal(w, w.T):
            raise InvalidInstanceError("weight matrix must be symmetric")
        if np.any(np.diag(w) != 0.0):
            raise InvalidInstanceError("weight matrix must have zero diagonal")
        if np.any(w < 0.0) or np.any(w > 1.0):
            raise InvalidInstanceError("weights must lie in [0, 1]")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def total_weight(self) -> float:
        """Sum of the full weight matrix (each edge counted twice)."""
        return float(self.weights.sum())


@dataclass(frozen=True)
class Cut:
    """A vertex bipartition and its cut value."""

    bits: tuple[int, ...]
    value: float


def generate_instance(n: int, seed: int) -> MaxCutInstance:
    """Draw a random instance with i.i.d. uniform [0, 1) edge weights.

    Upper-triangle entries are drawn in row-major order from
    ``numpy.random.default_rng(seed)``, so the result is bit-identical
    for a given (n, seed) pair.
    """
    if n < 2:
        raise InvalidInstanceError(f"need at least 2 vertices, got n={n}")
    rng = np.random.default_rng(seed)
    w = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    w[iu] = rng.random(len(iu[0]))
    w += w.T
    return MaxCutInstance(n=n, weights=w, seed=seed)


def cut_value(inst: MaxCutInstance, bits) -> float:
    """Total weight of edges crossing the bipartition ``bits``."""
    b = np.asarray(bits)
    if b.shape != (inst.n,):
        raise InvalidInstanceError(f"expected {inst.n} bits, got shape {b.shape}")
    if not np.all((b == 0) | (b == 1)):
        raise InvalidInstanceError("bits must be 0 or 1")
    crossing = b[:, None] != b[None, :]
    # each unordered edge appears twice in the masked sum
    return float(np.sum(inst.weights, where=crossing) / 2.0)


def _spin_energies(inst: MaxCutInstance) -> np.ndarray:
    """Ising energies 0.5 * sum_{i<j} W_ij s_i s_j over all 2^n bitstrings."""
    n = inst.n
    k = np.arange(1 << n, dtype=np.int64)
    energies = np.zeros(1 << n)
    for i in range(n - 1):
        s_i = 1.0 - 2.0 * ((k >> i) & 1)
        for j in range(i + 1, n):
            w = inst.weights[i, j]
            if w == 0.0:
                continue
            s_j = 1.0 - 2.0 * ((k >> j) & 1)
            energies += (w / 2.0) * s_i * s_j
    return energies


def brute_force_max_cut(inst: MaxCutInstance) -> Cut:
    """Exhaustively find the maximum cut.

    Ties are broken toward the lowest binary value of the bitstring
    (bit i of the winning index is vertex i's side).  Limited to
    ``BRUTE_FORCE_MAX_QUBITS`` vertices.
    """
    if inst.n > BRUTE_FORCE_MAX_QUBITS:
        raise ResourceLimitError(
            f"brute force capped at n={BRUTE_FORCE_MAX_QUBITS}, got n={inst.n}"
        )
    values = inst.total_weight / 4.0 - _spin_energies(inst)
    best = int(np.argmax(values))  # argmax takes the first, hence lowest, index
    bits = tuple((best >> i) & 1 for i in range(inst.n))
    return Cut(bits=bits, value=float(values[best]))


def energy_to_cut(inst: MaxCutInstance, energy: float) -> float:
    """Map an Ising energy expectation to the matching mean cut value."""
    return inst.total_weight / 4.0 - energy


def save_instance(inst: MaxCutInstance, path) -> None:
    """Write an instance as JSON with round-trip-exact weight formatting."""
    weights = ", ".join(format(w, ".17g") for w in inst.weights.ravel())
    text = (
        "{\n"
        f'  "n": {inst.n},\n'
        f'  "seed": {json.dumps(inst.seed)},\n'
        f'  "weights": [{weights}]\n'
        "}\n"
    )
    with open(path, "w") as fh:
        fh.write(text)


def load_instance(path) -> MaxCutInstance:
    """Read an instance written by :func:`save_instance`."""
    with open(path) as fh:
        doc = json.load(fh)
    n = int(doc["n"])
    w = np.asarray(doc["weights"], dtype=float).reshape(n, n)
    seed = doc.get("seed")
    return MaxCutInstance(n=n, weights=w, seed=None if seed is None else int(seed))
