"""Adaptive ansatz growth for the Max-Cut cost Hamiltonian.

One iteration appends a layer chosen by energy-gradient screening over a
fixed mixer pool, then re-optimizes every parameter of the enlarged circuit.
The standard variant always prepends the cost unitary to the new layer; the
dynamic variant first tests whether the energy variation of the candidate
layer already has a local minimum at zero cost angle and, when certified,
appends the mixer rotation alone, saving the cost layer's CNOTs.

States are either exact vectors (noiseless growth) or density matrices
(noisy growth); every routine here accepts both.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .exceptions import (
    DimensionError,
    InvalidParameterError,
    UnsupportedMixerError,
)
from .instances import MaxCutInstance, brute_force_max_cut
from .operators import (
    IsingHamiltonian,
    Mixer,
    PauliString,
    apply_mixer_vec,
    build_hamiltonian,
    pauli_action,
    split_hamiltonian,
)
from .simulator import (
    Ansatz,
    AnsatzLayer,
    DensityBackend,
    QuantumState,
    ansatz_cnot_count,
    evolve_ansatz_vec,
)

__version__ = "0.1.0"

VARIANTS = ("standard", "dynamic", "dynamic-nocost", "dynamic-noreselect")

_PAIR_LETTERS = ("XX", "XY", "XZ", "YX", "YY", "YZ", "ZX", "ZY", "ZZ")


def mixer_pool(n: int) -> tuple[Mixer, ...]:
    """The fixed screening pool for n qubits, in deterministic order.

    Global X and Y field sums, then single-qubit X and Y rotations, then
    every two-qubit Pauli pair on edges i < j (i > j duplicates are the
    same operator and are canonicalized away).  Size 2 + 2n + 9n(n-1)/2.
    """
    if n < 2:
        raise InvalidParameterError(f"pool needs n >= 2, got {n}")
    pool = [Mixer.global_x(), Mixer.global_y()]
    pool += [Mixer.pauli(PauliString(((q, "X"),))) for q in range(n)]
    pool += [Mixer.pauli(PauliString(((q, "Y"),))) for q in range(n)]
    for i in range(n - 1):
        for j in range(i + 1, n):
            for la, lb in _PAIR_LETTERS:
                pool.append(Mixer.pauli(PauliString(((i, la), (j, lb)))))
    return tuple(pool)


# ── gradients and skip-test coefficients ──────────────────────────────────


def _grad_on_vec(psi: np.ndarray, diag: np.ndarray, mixer: Mixer) -> float:
    """<[iA, H]> on a state vector: -2 Im <psi| A H |psi>."""
    return -2.0 * float(np.imag(np.vdot(psi, apply_mixer_vec(mixer, diag * psi))))


def _mixer_strings(mixer: Mixer, n: int):
    if mixer.kind == "pauli":
        return (mixer.string,)
    letter = "X" if mixer.kind == "global_x" else "Y"
    return tuple(PauliString(((q, letter),)) for q in range(n))


def _grad_on_dm(rho: np.ndarray, diag: np.ndarray, mixer: Mixer, n: int) -> float:
    """<[iA, H]> on a density matrix via the XOR-pair closed form."""
    idx = np.arange(rho.shape[0])
    total = 0.0j
    for string in _mixer_strings(mixer, n):
        mask, phases = pauli_action(string, n)
        flipped = idx ^ mask
        total += np.sum(rho[idx, flipped] * phases * (diag - diag[flipped]))
    return float(np.real(1.0j * total))


def gradient_at(state, ham: IsingHamiltonian, mixer: Mixer, gamma: float) -> float:
    """Energy gradient in the mixer angle at beta = 0, after a cost offset.

    Computes <[iA, H]> on exp(-i gamma H) applied to ``state`` (conjugation
    for density matrices).  ``state`` may be a QuantumState or a bare array.
    """
    data = state.data if isinstance(state, QuantumState) else state
    diag = ham.diagonal
    if data.ndim == 1:
        phi = data * np.exp(-1.0j * gamma * diag) if gamma != 0.0 else data
        return _grad_on_vec(phi, diag, mixer)
    if gamma != 0.0:
        ph = np.exp(-1.0j * gamma * diag)
        data = (ph[:, None] * data) * ph.conj()[None, :]
    return _grad_on_dm(data, diag, mixer, ham.n)


@dataclass(frozen=True)
class SkipCoefficients:
    """First three expansion coefficients of the candidate layer's energy
    variation in the cost angle, evaluated for the anticommuting part of H.

    b is the beta-slope term, c its half gamma-derivative, d the next
    derivative order; the cost unitary is certified redundant when c
    vanishes and b*d is safely positive.
    """

    b: float
    c: float
    d: float


def _pauli_weighted_expval(data: np.ndarray, string: PauliString, weights) -> complex:
    """<A diag(weights)> on a vector or density matrix."""
    n = data.shape[0].bit_length() - 1
    mask, phases = pauli_action(string, n)
    if data.ndim == 1:
        return complex(np.vdot(data, apply_mixer_vec(Mixer.pauli(string), weights * data)))
    idx = np.arange(data.shape[0])
    return complex(np.sum(weights * phases * data[idx, idx ^ mask]))


def skip_coefficients(
    state, mixer: Mixer, h_anti: IsingHamiltonian, gamma: float = 0.0
) -> SkipCoefficients:
    """b, c, d for the cost-layer skip test at cost offset ``gamma``.

    b = <i A H+ e^{-2i gamma H+}>, c = <A H+^2 e^{...}>,
    d = <i A H+^3 e^{...}>, with H+ the part of H anticommuting with the
    mixer string.  All three are real; tiny imaginary residue is dropped.
    """
    if mixer.is_global:
        raise UnsupportedMixerError("skip test is defined for Pauli-string mixers only")
    data = state.data if isinstance(state, QuantumState) else state
    d_anti = h_anti.diagonal
    phase = np.exp(-2.0j * gamma * d_anti) if gamma != 0.0 else 1.0
    string = mixer.string
    b = (1.0j * _pauli_weighted_expval(data, string, d_anti * phase)).real
    c = _pauli_weighted_expval(data, string, d_anti**2 * phase).real
    d = (1.0j * _pauli_weighted_expval(data, string, d_anti**3 * phase)).real
    return SkipCoefficients(b=b, c=c, d=d)


def skip_condition(coeffs: SkipCoefficients, delta1: float, delta2: float) -> bool:
    """True when the cost unitary may be dropped for this candidate layer."""
    return abs(coeffs.c) <= delta1 and coeffs.b * coeffs.d > delta2


def energy_variation(
    state, ham: IsingHamiltonian, mixer: Mixer, beta: float, gamma: float
) -> float:
    """<H> after applying exp(-i gamma H) then exp(-i beta A) to ``state``.

    Pure states only; used by screening diagnostics and the skip audit.
    """
    data = state.data if isinstance(state, QuantumState) else state
    if data.ndim != 1:
        raise InvalidParameterError("energy_variation expects a state vector")
    diag = ham.diagonal
    phi = data * np.exp(-1.0j * gamma * diag)
    if mixer.kind == "pauli":
        phi = math.cos(beta) * phi - 1.0j * math.sin(beta) * apply_mixer_vec(mixer, phi)
    else:
        lay = AnsatzLayer(mixer=mixer, beta=beta)
        phi = evolve_ansatz_vec(Ansatz(ham.n, (lay,)), ham, psi0=phi)
    return float(np.real(np.vdot(phi, diag * phi)))


# ── pool screening ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class PoolGradient:
    """One screened pool entry; ``value`` is the gradient that scored it."""

    mixer: Mixer
    value: float


def _offset_state(data: np.ndarray, diag: np.ndarray, gamma: float) -> np.ndarray:
    if gamma == 0.0:
        return data
    ph = np.exp(-1.0j * gamma * diag)
    if data.ndim == 1:
        return ph * data
    return (ph[:, None] * data) * ph.conj()[None, :]


def select_mixer_zero(state, ham: IsingHamiltonian, pool) -> tuple[Mixer, list[PoolGradient]]:
    """Argmax of |gradient| at zero cost offset; ties go to pool order."""
    data = state.data if isinstance(state, QuantumState) else state
    diag = ham.diagonal
    grads = []
    for mixer in pool:
        if data.ndim == 1:
            g = _grad_on_vec(data, diag, mixer)
        else:
            g = _grad_on_dm(data, diag, mixer, ham.n)
        grads.append(PoolGradient(mixer, g))
    best = int(np.argmax([abs(pg.value) for pg in grads]))
    return grads[best].mixer, grads


def select_mixer_offset(
    state, ham: IsingHamiltonian, pool, gamma_offset: float
) -> tuple[Mixer, int, list[PoolGradient]]:
    """Argmax of max(|grad(+g)|, |grad(-g)|) over the pool.

    Returns (mixer, sign, table); ``sign`` is the winning offset branch,
    +1 on exact ties, and the table carries each entry's stronger branch
    gradient with that sign applied.
    """
    if gamma_offset < 0.0:
        raise InvalidParameterError("gamma_offset must be nonnegative")
    data = state.data if isinstance(state, QuantumState) else state
    diag = ham.diagonal
    plus = _offset_state(data, diag, gamma_offset)
    minus = _offset_state(data, diag, -gamma_offset)
    table: list[tuple[float, float]] = []
    for mixer in pool:
        if data.ndim == 1:
            gp = _grad_on_vec(plus, diag, mixer)
            gm = _grad_on_vec(minus, diag, mixer)
        else:
            gp = _grad_on_dm(plus, diag, mixer, ham.n)
            gm = _grad_on_dm(minus, diag, mixer, ham.n)
        table.append((gp, gm))
    scores = [max(abs(gp), abs(gm)) for gp, gm in table]
    best = int(np.argmax(scores))
    signs = [1 if abs(gp) >= abs(gm) else -1 for gp, gm in table]
    grads = [
        PoolGradient(mixer, gp if s == 1 else gm)
        for mixer, (gp, gm), s in zip(pool, table, signs)
    ]
    return pool[best], signs[best], grads


# ── configuration ─────────────────────────────────────────────────────────


@dataclass(frozen=True)
class AdaptConfig:
    """Growth hyperparameters shared by all variants.

    ``delta1`` bounds |c| and ``delta2`` is the strict positivity margin on
    b*d in the skip test.  The optimizer is a quasi-Newton local search
    with central finite-difference gradients, warm-started from the
    previous optimum, plus ``optimizer_restarts`` Gaussian-perturbed
    restarts of scale ``restart_scale``.
    """

    max_layers: int = 12
    epsilon: float = 0.0
    gamma_offset: float = 0.1
    # standard-flow cost layers start at sign * gamma_init; reselected
    # layers start at the gamma_offset where their gradient was screened
    gamma_init: float = 0.01
    delta1: float = 1e-9
    delta2: float = 1e-5
    variant: str = "dynamic"
    optimizer_maxiter: int = 300
    optimizer_restarts: int = 1
    fd_step: float = 1e-6
    restart_scale: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.max_layers < 1:
            raise InvalidParameterError("max_layers must be at least 1")
        if self.epsilon < 0.0:
            raise InvalidParameterError("epsilon must be nonnegative")
        if self.gamma_offset <= 0.0:
            raise InvalidParameterError("gamma_offset must be positive")
        if self.gamma_init <= 0.0:
            raise InvalidParameterError("gamma_init must be positive")
        if self.delta1 < 0.0:
            raise InvalidParameterError("delta1 must be nonnegative")
        if self.delta2 <= 0.0:
            raise InvalidParameterError("delta2 must be positive")
        if self.variant not in VARIANTS:
            raise InvalidParameterError(f"unknown variant {self.variant!r}")
        if self.optimizer_maxiter < 1 or self.optimizer_restarts < 0:
            raise InvalidParameterError("bad optimizer settings")
        if self.fd_step <= 0.0 or self.restart_scale <= 0.0:
            raise InvalidParameterError("fd_step and restart_scale must be positive")


# ── parameter optimization ────────────────────────────────────────────────


def optimize_parameters(
    ansatz: Ansatz,
    ham: IsingHamiltonian,
    config: AdaptConfig,
    rng: np.random.Generator | None = None,
    energy_fn=None,
) -> tuple[Ansatz, float]:
    """Locally minimize the energy over all present angles.

    Runs BFGS from the given parameters (the warm start) and from
    ``config.optimizer_restarts`` perturbed copies, keeping the best.  The
    returned energy never exceeds the warm-start energy.
    """
    if energy_fn is None:
        def energy_fn(a):
            psi = evolve_ansatz_vec(a, ham)
            return float(np.real(np.vdot(psi, ham.diagonal * psi)))
    if rng is None:
        rng = np.random.default_rng(config.seed)
    n_beta = len(ansatz.layers)

    def unpack(x):
        return ansatz.with_params(x[:n_beta], x[n_beta:])

    def fun(x):
        return energy_fn(unpack(x))

    h = config.fd_step

    def jac(x):
        g = np.empty_like(x)
        for i in range(len(x)):
            step = np.zeros_like(x)
            step[i] = h
            g[i] = (fun(x + step) - fun(x - step)) / (2.0 * h)
        return g

    x0 = np.concatenate([ansatz.betas, ansatz.gammas])
    best_x, best_e = x0, fun(x0)
    starts = [x0] + [
        x0 + rng.normal(0.0, config.restart_scale, size=x0.shape)
        for _ in range(config.optimizer_restarts)
    ]
    for start in starts:
        res = minimize(
            fun,
            start,
            jac=jac,
            method="BFGS",
            options={"maxiter": config.optimizer_maxiter, "gtol": 1e-9},
        )
        # a restart must beat the incumbent by more than optimizer noise,
        # otherwise flat directions would drift with every perturbed start
        if res.fun < best_e - 1e-9:
            best_x, best_e = res.x, float(res.fun)
    return unpack(best_x), best_e


# ── run records ───────────────────────────────────────────────────────────


@dataclass
class IterationRecord:
    """State of the run after one growth iteration."""

    mixer: str
    has_cost: bool
    skipped: bool
    gamma_sign: int | None
    grad: float
    skip_b: float | None
    skip_c: float | None
    skip_d: float | None
    betas: list[float]
    gammas: list[float]
    energy: float
    cnots: int

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, doc):
        return cls(**doc)


@dataclass
class RunRecord:
    """Full trace of one growth run; self-contained and replayable.

    Stores the instance, the resolved configuration, and per-iteration
    optimized parameter vectors, so any prefix circuit can be rebuilt
    exactly (e.g. for noisy replay).
    """

    n: int
    instance_seed: int | None
    weights: list[float]
    variant: str
    p_gate: float
    config: dict
    v_max: float
    iterations: list[IterationRecord] = field(default_factory=list)
    version: str = __version__

    @property
    def instance(self) -> MaxCutInstance:
        w = np.asarray(self.weights).reshape(self.n, self.n)
        return MaxCutInstance(n=self.n, weights=w, seed=self.instance_seed)

    @property
    def final_energy(self) -> float:
        return self.iterations[-1].energy

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    def alpha(self, p: int) -> float:
        """Approximation ratio after iteration p (1-based)."""
        energy = self.iterations[p - 1].energy
        return (self.total_weight / 4.0 - energy) / self.v_max

    def alphas(self) -> np.ndarray:
        return np.array([self.alpha(p) for p in range(1, len(self.iterations) + 1)])

    def cnot_counts(self) -> np.ndarray:
        return np.array([it.cnots for it in self.iterations])

    def build_prefix(self, p: int) -> Ansatz:
        """Ansatz of the first p layers with the parameters optimized at
        iteration p (not the final ones)."""
        if not 1 <= p <= len(self.iterations):
            raise InvalidParameterError(f"prefix {p} outside run of {len(self.iterations)}")
        snap = self.iterations[p - 1]
        layers = []
        gi = 0
        for it in self.iterations[:p]:
            mixer = Mixer.from_text(it.mixer)
            if it.has_cost:
                layers.append(
                    AnsatzLayer(
                        mixer=mixer,
                        beta=snap.betas[len(layers)],
                        has_cost=True,
                        gamma=snap.gammas[gi],
                    )
                )
                gi += 1
            else:
                layers.append(AnsatzLayer(mixer=mixer, beta=snap.betas[len(layers)]))
        return Ansatz(self.n, tuple(layers))

    def build_final(self) -> Ansatz:
        return self.build_prefix(len(self.iterations))

    def to_json(self) -> str:
        doc = {
            "version": self.version,
            "variant": self.variant,
            "p_gate": self.p_gate,
            "config": self.config,
            "instance": {"n": self.n, "seed": self.instance_seed, "weights": self.weights},
            "v_max": self.v_max,
            "iterations": [it.to_dict() for it in self.iterations],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        doc = json.loads(text)
        inst = doc["instance"]
        return cls(
            n=int(inst["n"]),
            instance_seed=inst["seed"],
            weights=list(inst["weights"]),
            variant=doc["variant"],
            p_gate=float(doc["p_gate"]),
            config=doc["config"],
            v_max=float(doc["v_max"]),
            iterations=[IterationRecord.from_dict(d) for d in doc["iterations"]],
            version=doc.get("version", "unknown"),
        )

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "RunRecord":
        with open(path) as fh:
            return cls.from_json(fh.read())


# ── the growth engine ─────────────────────────────────────────────────────


def _grow(inst: MaxCutInstance, config: AdaptConfig, p_gate: float = 0.0) -> RunRecord:
    ham = build_hamiltonian(inst)
    pool = mixer_pool(inst.n)
    rng = np.random.default_rng(config.seed)
    backend = DensityBackend(ham, p_gate) if p_gate > 0.0 else None

    def current_state(ansatz):
        if ansatz is None:
            return (
                QuantumState.plus_density(inst.n).data
                if backend
                else QuantumState.plus_state(inst.n).data
            )
        return backend.evolve(ansatz) if backend else evolve_ansatz_vec(ansatz, ham)

    energy_fn = backend.energy if backend else None

    record = RunRecord(
        n=inst.n,
        instance_seed=inst.seed,
        weights=[float(w) for w in np.asarray(inst.weights).ravel()],
        variant=config.variant,
        p_gate=p_gate,
        config=dataclasses.asdict(config),
        v_max=brute_force_max_cut(inst).value,
    )

    ansatz: Ansatz | None = None
    state = current_state(None)
    prev_energy = 0.0

    for _ in range(config.max_layers):
        coeffs = None
        skipped = False
        if config.variant == "standard":
            # the standard flow screens and starts at the same small angle,
            # mirroring the original selection convention
            mixer, sign, grads = select_mixer_offset(state, ham, pool, config.gamma_init)
            grad = next(pg.value for pg in grads if pg.mixer == mixer)
            new_layer = AnsatzLayer(mixer=mixer, has_cost=True, gamma=sign * config.gamma_init)
        elif config.variant == "dynamic-nocost":
            mixer, grads = select_mixer_zero(state, ham, pool)
            grad = next(pg.value for pg in grads if pg.mixer == mixer)
            sign = None
            new_layer = AnsatzLayer(mixer=mixer)
        else:  # dynamic, dynamic-noreselect
            mixer, grads = select_mixer_zero(state, ham, pool)
            grad = next(pg.value for pg in grads if pg.mixer == mixer)
            if not mixer.is_global:
                _, h_anti = split_hamiltonian(ham, mixer)
                coeffs = skip_coefficients(state, mixer, h_anti)
                skipped = skip_condition(coeffs, config.delta1, config.delta2)
            if skipped:
                sign = None
                new_layer = AnsatzLayer(mixer=mixer)
            elif config.variant == "dynamic":
                mixer, sign, offset_grads = select_mixer_offset(
                    state, ham, pool, config.gamma_offset
                )
                grad = next(pg.value for pg in offset_grads if pg.mixer == mixer)
                # a reselected layer starts where the screen certified its
                # gradient, not at the small standard-flow init
                new_layer = AnsatzLayer(
                    mixer=mixer, has_cost=True, gamma=sign * config.gamma_offset
                )
            else:  # keep the zero-offset mixer, no re-screening
                sign = 1
                new_layer = AnsatzLayer(
                    mixer=mixer, has_cost=True, gamma=config.gamma_offset
                )

        layers = (ansatz.layers if ansatz else ()) + (new_layer,)
        ansatz = Ansatz(inst.n, layers)
        ansatz, energy = optimize_parameters(ansatz, ham, config, rng=rng, energy_fn=energy_fn)
        state = current_state(ansatz)

        record.iterations.append(
            IterationRecord(
                mixer=new_layer.mixer.text,
                has_cost=new_layer.has_cost,
                skipped=skipped,
                gamma_sign=sign if new_layer.has_cost else None,
                grad=float(grad),
                skip_b=None if coeffs is None else coeffs.b,
                skip_c=None if coeffs is None else coeffs.c,
                skip_d=None if coeffs is None else coeffs.d,
                betas=[float(b) for b in ansatz.betas],
                gammas=[float(g) for g in ansatz.gammas],
                energy=float(energy),
                cnots=ansatz_cnot_count(ansatz, ham),
            )
        )

        if abs(prev_energy - energy) < config.epsilon:
            break
        prev_energy = energy

    return record


def run_standard(inst: MaxCutInstance, config: AdaptConfig) -> RunRecord:
    """Grow with the always-cost, offset-screened baseline variant."""
    return _grow(inst, dataclasses.replace(config, variant="standard"))


def run_dynamic(inst: MaxCutInstance, config: AdaptConfig) -> RunRecord:
    """Grow with the skip-test variant configured in ``config.variant``."""
    if config.variant == "standard":
        raise InvalidParameterError("run_dynamic needs a dynamic variant config")
    return _grow(inst, config)


def run_adapt(inst: MaxCutInstance, config: AdaptConfig, p_gate: float = 0.0) -> RunRecord:
    """Dispatch on ``config.variant``; ``p_gate > 0`` grows on noisy states."""
    return _grow(inst, config, p_gate=p_gate)


def tune_delta2(
    inst: MaxCutInstance,
    config: AdaptConfig,
    grid=(1e-7, 1e-6, 1e-5, 1e-4),
    tol: float = 1e-9,
) -> tuple[RunRecord, float]:
    """Per-instance grid search of delta2.

    Keeps the lowest final energy; among runs whose final energies agree
    within ``tol`` (relative to the best), the fewest-CNOT run wins, ties
    going to the earliest grid entry.  Redundant cost layers spend CNOTs
    without lowering the energy, so the tie-break prunes them.
    """
    if not grid:
        raise InvalidParameterError("delta2 grid must not be empty")
    runs = []
    for delta2 in grid:
        rec = _grow(inst, dataclasses.replace(config, delta2=delta2))
        runs.append((rec, delta2))
    best_e = min(rec.final_energy for rec, _ in runs)
    slack = tol * max(1.0, abs(best_e))
    tied = [(rec, d2) for rec, d2 in runs if rec.final_energy <= best_e + slack]
    return min(tied, key=lambda rd: int(rd[0].cnot_counts()[-1]))
