"""Goemans-Williamson baseline: low-rank relaxation plus hyperplane rounding.

The semidefinite relaxation of Max-Cut is solved in Burer-Monteiro form:
one unit vector per vertex, rank k >= ceil(sqrt(2n)) so the factorization
admits no spurious local maxima, maximized by projected (Riemannian)
gradient ascent with a backtracking step.  Random-hyperplane rounding then
converts the embedding to cuts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInstanceError, InvalidParameterError
from .instances import Cut, MaxCutInstance, brute_force_max_cut
from .seeding import derive_seed

DEFAULT_ROUNDS = 1000


@dataclass
class EmbeddingSolution:
    """Unit-vector embedding attaining the relaxation objective."""

    vectors: np.ndarray  # shape (n, rank), unit rows
    objective: float
    converged: bool

    @property
    def rank(self) -> int:
        return self.vectors.shape[1]


@dataclass
class RoundingResult:
    """Statistics of R random-hyperplane roundings of one embedding."""

    mean_value: float
    stderr: float
    best: Cut
    rounds: int


def _objective(weights: np.ndarray, vectors: np.ndarray) -> float:
    # sum_{i<j} W_ij (1 - v_i.v_j) / 2, written over the full matrix
    total = weights.sum() / 4.0
    return float(total - np.sum(vectors * (weights @ vectors)) / 4.0)


def _normalize_rows(vectors: np.ndarray) -> np.ndarray:
    return vectors / np.linalg.norm(vectors, axis=1, keepdims=True)


def min_relaxation_rank(n: int) -> int:
    """Smallest rank with a guaranteed benign optimization landscape."""
    return math.ceil(math.sqrt(2.0 * n))


def solve_relaxation(
    inst: MaxCutInstance,
    rank: int | None = None,
    restarts: int = 3,
    max_iters: int = 50000,
    grad_tol: float = 1e-9,
    seed: int = 0,
) -> EmbeddingSolution:
    """Maximize the relaxed cut objective over unit-vector embeddings.

    Runs ``restarts`` independent ascents from random starts (sub-seeded
    from ``seed``) and keeps the best.  Each ascent sweeps the rows
    cyclically, replacing v_i by its exact optimum given the others, so
    the objective is nondecreasing; ``max_iters`` counts sweeps and
    ``converged`` means the tangent gradient norm fell below ``grad_tol``.
    """
    n = inst.n
    k = n if rank is None else int(rank)
    if k < min_relaxation_rank(n):
        raise InvalidParameterError(
            f"rank {k} below the benign-landscape bound {min_relaxation_rank(n)}"
        )
    w = inst.weights
    best: EmbeddingSolution | None = None
    for r in range(max(1, restarts)):
        rng = np.random.default_rng(derive_seed(seed, r))
        vectors = _normalize_rows(rng.standard_normal((n, k)))
        converged = False
        for _ in range(max_iters):
            for i in range(n):
                # row optimum: minimize v_i . (w v)_i over the unit sphere
                c = w[i] @ vectors
                nrm = np.linalg.norm(c)
                if nrm > 0.0:
                    vectors[i] = -c / nrm
            grad = -0.5 * (w @ vectors)
            radial = np.sum(grad * vectors, axis=1, keepdims=True)
            tangent = grad - radial * vectors
            if np.linalg.norm(tangent) <= grad_tol:
                converged = True
                break
        sol = EmbeddingSolution(
            vectors=vectors, objective=_objective(w, vectors), converged=converged
        )
        if best is None or sol.objective > best.objective:
            best = sol
    return best


def hyperplane_round(
    inst: MaxCutInstance,
    embedding: EmbeddingSolution,
    rounds: int = DEFAULT_ROUNDS,
    seed: int = 0,
) -> RoundingResult:
    """Cut statistics from R random hyperplane normals (deterministic per seed)."""
    if rounds < 1:
        raise InvalidParameterError(f"need at least one round, got {rounds}")
    rng = np.random.default_rng(seed)
    w = inst.weights
    best_bits, best_value = None, -1.0
    total, total_sq, done = 0.0, 0.0, 0
    while done < rounds:
        chunk = min(rounds - done, 16384)
        normals = rng.standard_normal((chunk, embedding.rank))
        bits = (normals @ embedding.vectors.T >= 0.0).astype(np.int8)
        crossing = bits[:, :, None] != bits[:, None, :]
        values = np.sum(w[None, :, :] * crossing, axis=(1, 2)) / 2.0
        total += float(values.sum())
        total_sq += float((values**2).sum())
        top = int(np.argmax(values))
        if values[top] > best_value:
            best_value = float(values[top])
            best_bits = tuple(int(b) for b in bits[top])
        done += chunk
    mean = total / rounds
    var = max(total_sq / rounds - mean**2, 0.0)
    stderr = math.sqrt(var / rounds)
    return RoundingResult(
        mean_value=mean,
        stderr=stderr,
        best=Cut(bits=best_bits, value=best_value),
        rounds=rounds,
    )


def gw_ratio(
    inst: MaxCutInstance,
    rounds: int = DEFAULT_ROUNDS,
    seed: int = 0,
    rank: int | None = None,
    restarts: int = 3,
) -> float:
    """Mean rounded cut over the true optimum, in [0, 1]."""
    v_max = brute_force_max_cut(inst).value
    if v_max <= 0.0:
        raise InvalidInstanceError("instance has no positive-weight edge")
    embedding = solve_relaxation(inst, rank=rank, restarts=restarts, seed=seed)
    rounded = hyperplane_round(inst, embedding, rounds=rounds, seed=derive_seed(seed, 1))
    return rounded.mean_value / v_max


def cut_probability(embedding: EmbeddingSolution, i: int, j: int) -> float:
    """Probability a random hyperplane separates vertices i and j."""
    dots = float(np.clip(np.dot(embedding.vectors[i], embedding.vectors[j]), -1.0, 1.0))
    return math.acos(dots) / math.pi


def expected_cut(inst: MaxCutInstance, embedding: EmbeddingSolution) -> float:
    """Exact expectation of the rounded cut value for an embedding."""
    gram = np.clip(embedding.vectors @ embedding.vectors.T, -1.0, 1.0)
    probs = np.arccos(gram) / math.pi
    return float(np.sum(inst.weights * probs) / 2.0)
