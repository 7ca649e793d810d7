"""Estimator front end: fit a solver on a weight matrix, read off the cut.

Both solvers follow the scikit-learn clustering convention: ``fit`` takes
a precomputed symmetric weight matrix, ``labels_`` holds the two-sided
partition, and hyperparameters are constructor arguments so instances
work with ``clone``, ``get_params``, and grid-search tooling.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .adapt import AdaptConfig, run_adapt
from .bench import NOISY_GROWTH_MAX_QUBITS
from .exceptions import ResourceLimitError
from .gw import DEFAULT_ROUNDS, hyperplane_round, solve_relaxation
from .instances import (
    BRUTE_FORCE_MAX_QUBITS,
    MaxCutInstance,
    brute_force_max_cut,
    cut_value,
)
from .operators import build_hamiltonian
from .seeding import derive_seed
from .simulator import DensityBackend, evolve_ansatz_vec
from .validation import check_weight_matrix


class AdaptiveCutSolver(BaseEstimator):
    """Adaptive-ansatz QAOA Max-Cut solver.

    Parameters mirror AdaptConfig; ``p_gate`` > 0 grows on noisy density
    matrices.  After ``fit``, the most probable measurement outcome of the
    final state is exposed as ``labels_`` and scored as ``cut_value_``.
    """

    def __init__(
        self,
        variant: str = "dynamic",
        max_layers: int = 12,
        epsilon: float = 0.0,
        gamma_offset: float = 0.1,
        gamma_init: float = 0.01,
        delta1: float = 1e-9,
        delta2: float = 1e-5,
        p_gate: float = 0.0,
        optimizer_maxiter: int = 300,
        optimizer_restarts: int = 1,
        seed: int = 0,
    ):
        self.variant = variant
        self.max_layers = max_layers
        self.epsilon = epsilon
        self.gamma_offset = gamma_offset
        self.gamma_init = gamma_init
        self.delta1 = delta1
        self.delta2 = delta2
        self.p_gate = p_gate
        self.optimizer_maxiter = optimizer_maxiter
        self.optimizer_restarts = optimizer_restarts
        self.seed = seed

    def _config(self) -> AdaptConfig:
        return AdaptConfig(
            max_layers=self.max_layers,
            epsilon=self.epsilon,
            gamma_offset=self.gamma_offset,
            gamma_init=self.gamma_init,
            delta1=self.delta1,
            delta2=self.delta2,
            variant=self.variant,
            optimizer_maxiter=self.optimizer_maxiter,
            optimizer_restarts=self.optimizer_restarts,
            seed=self.seed,
        )

    def fit(self, X, y=None):
        """Grow and optimize an ansatz for the weight matrix ``X``."""
        w = check_weight_matrix(X)
        n = w.shape[0]
        if self.p_gate > 0.0 and n > NOISY_GROWTH_MAX_QUBITS:
            raise ResourceLimitError(
                f"noisy growth capped at {NOISY_GROWTH_MAX_QUBITS} qubits"
            )
        inst = MaxCutInstance(n, w)
        record = run_adapt(inst, self._config(), p_gate=self.p_gate)
        ham = build_hamiltonian(inst)
        ansatz = record.build_final()
        if self.p_gate > 0.0:
            rho = DensityBackend(ham, self.p_gate).evolve(ansatz)
            probs = np.real(np.diag(rho))
        else:
            psi = evolve_ansatz_vec(ansatz, ham)
            probs = np.abs(psi) ** 2
        best = int(np.argmax(probs))  # ties: lowest basis index

        self.record_ = record
        self.labels_ = np.array([(best >> i) & 1 for i in range(n)], dtype=int)
        self.cut_value_ = cut_value(inst, tuple(self.labels_))
        self.energy_ = record.final_energy
        self.alpha_ = record.alpha(len(record.iterations))
        self.n_iter_ = len(record.iterations)
        self.cnot_count_ = int(record.iterations[-1].cnots)
        return self

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).labels_


class GoemansWilliamsonSolver(BaseEstimator):
    """Relax-and-round Max-Cut solver.

    ``labels_`` is the best cut over ``rounds`` hyperplane roundings;
    ``mean_cut_value_`` and ``stderr_`` summarize the rounding ensemble.
    ``alpha_`` is filled when exhaustive scoring is feasible, else None.
    """

    def __init__(
        self,
        rounds: int = DEFAULT_ROUNDS,
        rank: int | None = None,
        restarts: int = 3,
        max_iters: int = 50000,
        seed: int = 0,
    ):
        self.rounds = rounds
        self.rank = rank
        self.restarts = restarts
        self.max_iters = max_iters
        self.seed = seed

    def fit(self, X, y=None):
        w = check_weight_matrix(X)
        inst = MaxCutInstance(w.shape[0], w)
        embedding = solve_relaxation(
            inst,
            rank=self.rank,
            restarts=self.restarts,
            max_iters=self.max_iters,
            seed=self.seed,
        )
        rounded = hyperplane_round(
            inst, embedding, rounds=self.rounds, seed=derive_seed(self.seed, 1)
        )
        self.embedding_ = embedding
        self.relaxation_objective_ = embedding.objective
        self.labels_ = np.array(rounded.best.bits, dtype=int)
        self.cut_value_ = rounded.best.value
        self.mean_cut_value_ = rounded.mean_value
        self.stderr_ = rounded.stderr
        if inst.n <= BRUTE_FORCE_MAX_QUBITS:
            self.alpha_ = rounded.mean_value / brute_force_max_cut(inst).value
        else:
            self.alpha_ = None
        return self

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).labels_
