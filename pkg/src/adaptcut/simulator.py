"""Circuit compilation and exact state-vector / density-matrix simulation.

Ansatz layers alternate an optional diagonal cost unitary exp(-i gamma H)
with a mixer rotation exp(-i beta A).  ``compile_ansatz`` lowers layers to a
flat gate list over {CNOT, RZ, RX, RY, H, S, SDG}; the simulators start from
the uniform-superposition state |+>^n and apply gates left to right.

The noisy backend applies a single-qubit depolarizing channel of strength
p_gate to the target qubit after every CNOT; all other gates are noiseless.
Expectation values are exact (no sampling).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import (
    DimensionError,
    InvalidParameterError,
    ResourceLimitError,
    UnsupportedMixerError,
)
from .operators import IsingHamiltonian, Mixer, apply_mixer_vec, apply_pauli_vec

PURE_MAX_QUBITS = 24
DENSITY_MAX_QUBITS = 12

_H_MAT = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)
_S_MAT = np.diag([1.0, 1.0j])
_SDG_MAT = np.diag([1.0, -1.0j])
_X_MAT = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_Y_MAT = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_Z_MAT = np.diag([1.0 + 0.0j, -1.0])


def _rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -1.0j * s], [-1.0j * s, c]])


def _ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


# ── gates and ansatz structure ────────────────────────────────────────────


@dataclass(frozen=True)
class Gate:
    """One primitive gate; ``qubits`` is (control, target) for CNOT."""

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    _ROTATIONS = ("RZ", "RX", "RY")
    _FIXED = ("H", "S", "SDG")

    def __post_init__(self):
        if self.kind == "CNOT":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise InvalidParameterError(f"bad CNOT qubits {self.qubits}")
            if self.angle is not None:
                raise InvalidParameterError("CNOT takes no angle")
        elif self.kind in self._ROTATIONS:
            if len(self.qubits) != 1 or self.angle is None:
                raise InvalidParameterError(f"{self.kind} needs one qubit and an angle")
        elif self.kind in self._FIXED:
            if len(self.qubits) != 1 or self.angle is not None:
                raise InvalidParameterError(f"{self.kind} takes one qubit, no angle")
        else:
            raise InvalidParameterError(f"unknown gate kind {self.kind!r}")

    @classmethod
    def cnot(cls, control: int, target: int):
        return cls("CNOT", (control, target))

    @classmethod
    def rz(cls, qubit: int, angle: float):
        return cls("RZ", (qubit,), float(angle))

    @classmethod
    def rx(cls, qubit: int, angle: float):
        return cls("RX", (qubit,), float(angle))

    @classmethod
    def ry(cls, qubit: int, angle: float):
        return cls("RY", (qubit,), float(angle))

    @classmethod
    def h(cls, qubit: int):
        return cls("H", (qubit,))

    @classmethod
    def s(cls, qubit: int):
        return cls("S", (qubit,))

    @classmethod
    def sdg(cls, qubit: int):
        return cls("SDG", (qubit,))

    def matrix(self) -> np.ndarray:
        """2x2 matrix for single-qubit gates (CNOT is handled separately)."""
        if self.kind == "RZ":
            return _rz(self.angle)
        if self.kind == "RX":
            return _rx(self.angle)
        if self.kind == "RY":
            return _ry(self.angle)
        if self.kind == "H":
            return _H_MAT
        if self.kind == "S":
            return _S_MAT
        if self.kind == "SDG":
            return _SDG_MAT
        raise UnsupportedMixerError("CNOT has no single-qubit matrix")


@dataclass(frozen=True)
class AnsatzLayer:
    """One growth step: optional cost unitary followed by a mixer rotation."""

    mixer: Mixer
    beta: float = 0.0
    has_cost: bool = False
    gamma: float | None = None

    def __post_init__(self):
        if self.has_cost and self.gamma is None:
            raise InvalidParameterError("cost layer needs a gamma value")
        if not self.has_cost and self.gamma is not None:
            raise InvalidParameterError("gamma given for a layer without cost unitary")


@dataclass(frozen=True)
class Ansatz:
    """Ordered layers over a fixed qubit count."""

    n: int
    layers: tuple[AnsatzLayer, ...]

    @property
    def n_cost_layers(self) -> int:
        return sum(1 for lay in self.layers if lay.has_cost)

    @property
    def betas(self) -> np.ndarray:
        return np.array([lay.beta for lay in self.layers])

    @property
    def gammas(self) -> np.ndarray:
        return np.array([lay.gamma for lay in self.layers if lay.has_cost])

    def with_params(self, betas, gammas) -> "Ansatz":
        """Same structure with replaced parameters (gammas map to cost layers in order)."""
        if len(betas) != len(self.layers) or len(gammas) != self.n_cost_layers:
            raise DimensionError("parameter vectors do not match ansatz structure")
        out, gi = [], 0
        for lay, beta in zip(self.layers, betas):
            if lay.has_cost:
                out.append(replace(lay, beta=float(beta), gamma=float(gammas[gi])))
                gi += 1
            else:
                out.append(replace(lay, beta=float(beta)))
        return Ansatz(self.n, tuple(out))


# ── compilation ───────────────────────────────────────────────────────────

# Basis change V with V sigma V^dag = Z, as circuit-order gate kinds.
_PRE_BASIS = {"X": ("H",), "Y": ("SDG", "H"), "Z": ()}
_POST_BASIS = {"X": ("H",), "Y": ("H", "S"), "Z": ()}


def _mixer_gates(mixer: Mixer, beta: float, n: int) -> list[Gate]:
    theta = 2.0 * beta
    if mixer.kind == "global_x":
        return [Gate.rx(q, theta) for q in range(n)]
    if mixer.kind == "global_y":
        return [Gate.ry(q, theta) for q in range(n)]
    factors = mixer.string.factors
    if any(q >= n for q, _ in factors):
        raise DimensionError(f"mixer {mixer.text} does not fit in n={n} qubits")
    if len(factors) == 1:
        q, letter = factors[0]
        if letter == "X":
            return [Gate.rx(q, theta)]
        if letter == "Y":
            return [Gate.ry(q, theta)]
        return [Gate.rz(q, theta)]
    if len(factors) == 2:
        (qa, la), (qb, lb) = factors
        gates = [Gate(kind, (qa,)) for kind in _PRE_BASIS[la]]
        gates += [Gate(kind, (qb,)) for kind in _PRE_BASIS[lb]]
        gates += [Gate.cnot(qa, qb), Gate.rz(qb, theta), Gate.cnot(qa, qb)]
        gates += [Gate(kind, (qa,)) for kind in _POST_BASIS[la]]
        gates += [Gate(kind, (qb,)) for kind in _POST_BASIS[lb]]
        return gates
    raise UnsupportedMixerError(
        f"mixers on more than two qubits are not compiled: {mixer.text}"
    )


def compile_ansatz(ansatz: Ansatz, ham: IsingHamiltonian) -> list[Gate]:
    """Lower an ansatz to a flat gate list.

    Each cost layer emits, per Hamiltonian term (i, j, c) in ascending edge
    order, the sequence CNOT(i,j), RZ(j, gamma * 2c), CNOT(i,j); zero-weight
    edges carry no term and hence no gates.  Mixer rotations use angle
    2*beta.
    """
    if ansatz.n != ham.n:
        raise DimensionError(f"ansatz n={ansatz.n} vs hamiltonian n={ham.n}")
    gates: list[Gate] = []
    for lay in ansatz.layers:
        if lay.has_cost:
            for i, j, c in ham.terms:
                gates.append(Gate.cnot(i, j))
                gates.append(Gate.rz(j, lay.gamma * 2.0 * c))
                gates.append(Gate.cnot(i, j))
        gates.extend(_mixer_gates(lay.mixer, lay.beta, ansatz.n))
    return gates


def cnot_count(gates) -> int:
    return sum(1 for g in gates if g.kind == "CNOT")


def ansatz_cnot_count(ansatz: Ansatz, ham: IsingHamiltonian) -> int:
    """CNOT count of the compiled circuit, without compiling."""
    total = 0
    for lay in ansatz.layers:
        if lay.has_cost:
            total += 2 * len(ham.terms)
        if lay.mixer.is_two_qubit:
            total += 2
    return total


def dump_gates(gates) -> str:
    """One gate per line: ``CNOT c t`` / ``RZ q angle`` / ``H q`` etc.

    Angles use 17-significant-digit decimals so parsing reproduces the
    exact binary value.
    """
    lines = []
    for g in gates:
        parts = [g.kind] + [str(q) for q in g.qubits]
        if g.angle is not None:
            parts.append(format(g.angle, ".17g"))
        lines.append(" ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_gates(text: str) -> list[Gate]:
    """Inverse of :func:`dump_gates`."""
    gates = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0].upper()
        if kind == "CNOT":
            gates.append(Gate.cnot(int(parts[1]), int(parts[2])))
        elif kind in Gate._ROTATIONS:
            gates.append(Gate(kind, (int(parts[1]),), float(parts[2])))
        elif kind in Gate._FIXED:
            gates.append(Gate(kind, (int(parts[1]),)))
        else:
            raise InvalidParameterError(f"cannot parse gate line {raw!r}")
    return gates


# ── states ────────────────────────────────────────────────────────────────


@dataclass
class QuantumState:
    """Either a pure state vector (ndim 1) or a density matrix (ndim 2)."""

    data: np.ndarray

    @property
    def is_density(self) -> bool:
        return self.data.ndim == 2

    @property
    def n(self) -> int:
        return int(self.data.shape[0]).bit_length() - 1

    @classmethod
    def plus_state(cls, n: int) -> "QuantumState":
        dim = 1 << n
        return cls(np.full(dim, 1.0 / math.sqrt(dim), dtype=complex))

    @classmethod
    def plus_density(cls, n: int) -> "QuantumState":
        psi = cls.plus_state(n).data
        return cls(np.outer(psi, psi.conj()))

    def validate(self):
        """Raise if the stored array violates the state contract."""
        d = self.data
        if d.shape[0] != 1 << self.n:
            raise DimensionError(f"state dimension {d.shape[0]} is not a power of two")
        if not self.is_density:
            if abs(np.linalg.norm(d) - 1.0) > 1e-10:
                raise InvalidParameterError("state vector norm deviates from 1")
        else:
            if d.shape[0] != d.shape[1]:
                raise DimensionError("density matrix must be square")
            if np.abs(d - d.conj().T).max() > 1e-10:
                raise InvalidParameterError("density matrix not Hermitian")
            if abs(np.trace(d).real - 1.0) > 1e-10 or abs(np.trace(d).imag) > 1e-10:
                raise InvalidParameterError("density matrix trace deviates from 1")
            if np.linalg.eigvalsh(d).min() < -1e-9:
                raise InvalidParameterError("density matrix has a negative eigenvalue")
        return self


# ── gate application kernels ──────────────────────────────────────────────


def _apply_1q_vec(psi: np.ndarray, mat: np.ndarray, q: int, n: int) -> np.ndarray:
    shaped = psi.reshape(1 << (n - q - 1), 2, 1 << q)
    return np.einsum("xy,ayb->axb", mat, shaped).reshape(-1)


def _cnot_perm(control: int, target: int, n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return np.where((idx >> control) & 1 == 1, idx ^ (1 << target), idx)


def _apply_cnot_vec(psi: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    return psi[_cnot_perm(control, target, n)]


def _apply_1q_dm(rho: np.ndarray, mat: np.ndarray, q: int, n: int) -> np.ndarray:
    dim = 1 << n
    shaped = rho.reshape(1 << (n - q - 1), 2, (1 << q) * dim)
    rho = np.einsum("xy,ayb->axb", mat, shaped).reshape(dim, dim)
    shaped = rho.reshape(dim * (1 << (n - q - 1)), 2, 1 << q)
    return np.einsum("xy,ayb->axb", mat.conj(), shaped).reshape(dim, dim)


def _apply_cnot_dm(rho: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    perm = _cnot_perm(control, target, n)
    return rho[perm][:, perm]


def depolarize_dm(rho: np.ndarray, target: int, p: float, n: int) -> np.ndarray:
    """Single-qubit depolarizing channel: (1-p) rho + (p/3) sum_s s rho s.

    Uses the partial-trace identity X rho X + Y rho Y + Z rho Z =
    4 * (I/2 (x) Tr_t rho) - rho, which avoids three dense conjugations.
    """
    if p == 0.0:
        return rho
    a, b = 1 << (n - target - 1), 1 << target
    shaped = rho.reshape(a, 2, b, a, 2, b)
    traced = np.einsum("aibcid->abcd", shaped)
    out = (1.0 - 4.0 * p / 3.0) * rho
    view = out.reshape(a, 2, b, a, 2, b)
    view[:, 0, :, :, 0, :] += (2.0 * p / 3.0) * traced
    view[:, 1, :, :, 1, :] += (2.0 * p / 3.0) * traced
    return out


def simulate_pure(gates, n: int) -> QuantumState:
    """Apply gates left to right to |+>^n and return the final state vector."""
    if n > PURE_MAX_QUBITS:
        raise ResourceLimitError(f"state vectors capped at n={PURE_MAX_QUBITS}")
    psi = QuantumState.plus_state(n).data
    for g in gates:
        if g.kind == "CNOT":
            psi = _apply_cnot_vec(psi, g.qubits[0], g.qubits[1], n)
        else:
            psi = _apply_1q_vec(psi, g.matrix(), g.qubits[0], n)
    return QuantumState(psi)


def simulate_noisy(gates, n: int, p_gate: float) -> QuantumState:
    """Density-matrix run of the gate list with depolarizing noise after CNOTs.

    The channel acts on the CNOT target qubit with strength ``p_gate``;
    single-qubit gates are noiseless.  At ``p_gate = 0`` the result equals
    the pure simulation projector exactly.
    """
    if n > DENSITY_MAX_QUBITS:
        raise ResourceLimitError(f"density matrices capped at n={DENSITY_MAX_QUBITS}")
    if not 0.0 <= p_gate <= 1.0:
        raise InvalidParameterError(f"p_gate must lie in [0, 1], got {p_gate}")
    rho = QuantumState.plus_density(n).data
    for g in gates:
        if g.kind == "CNOT":
            rho = _apply_cnot_dm(rho, g.qubits[0], g.qubits[1], n)
            rho = depolarize_dm(rho, g.qubits[1], p_gate, n)
        else:
            rho = _apply_1q_dm(rho, g.matrix(), g.qubits[0], n)
    return QuantumState(rho)


def expectation(state: QuantumState, ham: IsingHamiltonian) -> float:
    """<H> for a diagonal Hamiltonian on either state representation."""
    if state.n != ham.n:
        raise DimensionError(f"state n={state.n} vs hamiltonian n={ham.n}")
    if state.is_density:
        return float(np.real(np.diagonal(state.data) @ ham.diagonal))
    return float(np.real(np.vdot(state.data, ham.diagonal * state.data)))


def fidelity_with_pure(state: QuantumState, psi: np.ndarray) -> float:
    """<psi| rho |psi> (or |<psi|phi>|^2 for a pure state)."""
    if state.is_density:
        return float(np.real(np.vdot(psi, state.data @ psi)))
    return float(abs(np.vdot(psi, state.data)) ** 2)


# ── fast exact evolution (layer granularity, noiseless) ───────────────────


def evolve_ansatz_vec(
    ansatz: Ansatz, ham: IsingHamiltonian, psi0: np.ndarray | None = None
) -> np.ndarray:
    """State vector after the ansatz, using exact layer unitaries.

    Equivalent to ``simulate_pure(compile_ansatz(...))`` but applies each
    cost layer as one diagonal phase and each Pauli mixer via
    exp(-i beta A) = cos(beta) I - i sin(beta) A.
    """
    n = ansatz.n
    psi = QuantumState.plus_state(n).data if psi0 is None else psi0.astype(complex)
    for lay in ansatz.layers:
        if lay.has_cost:
            psi = psi * np.exp(-1.0j * lay.gamma * ham.diagonal)
        mixer = lay.mixer
        if mixer.kind == "pauli":
            rotated = apply_pauli_vec(mixer.string, psi)
            psi = math.cos(lay.beta) * psi - 1.0j * math.sin(lay.beta) * rotated
        else:
            mat = _rx(2.0 * lay.beta) if mixer.kind == "global_x" else _ry(2.0 * lay.beta)
            for q in range(n):
                psi = _apply_1q_vec(psi, mat, q, n)
    return psi


# ── fast noisy evolution (fused per-edge superoperators) ──────────────────


def _superop(mat: np.ndarray) -> np.ndarray:
    """Row-major superoperator of rho -> U rho U^dag."""
    return np.kron(mat, mat.conj())


_CNOT4 = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def _depol_superop_target(p: float) -> np.ndarray:
    """16x16 superoperator of depolarizing noise on the second block qubit."""
    out = (1.0 - p) * np.eye(16, dtype=complex)
    for sigma in (_X_MAT, _Y_MAT, _Z_MAT):
        k = np.kron(np.eye(2, dtype=complex), sigma)
        out += (p / 3.0) * _superop(k)
    return out


class DensityBackend:
    """Noisy ansatz evolution with per-edge two-qubit fused channels.

    Matches ``simulate_noisy(compile_ansatz(...), n, p_gate)`` exactly while
    touching only the two active qubits per edge block.  Built once per
    (hamiltonian, p_gate) pair and reused across parameter evaluations.
    """

    def __init__(self, ham: IsingHamiltonian, p_gate: float):
        if ham.n > DENSITY_MAX_QUBITS:
            raise ResourceLimitError(f"density matrices capped at n={DENSITY_MAX_QUBITS}")
        if not 0.0 <= p_gate <= 1.0:
            raise InvalidParameterError(f"p_gate must lie in [0, 1], got {p_gate}")
        self.ham = ham
        self.n = ham.n
        self.p_gate = p_gate
        # One CNOT plus its trailing channel, as a block superoperator.
        self._noisy_cnot = _depol_superop_target(p_gate) @ _superop(_CNOT4)
        self._basis_pre = {}
        for la in "XYZ":
            for lb in "XYZ":
                va = {"X": _H_MAT, "Y": _H_MAT @ _SDG_MAT, "Z": np.eye(2)}[la]
                vb = {"X": _H_MAT, "Y": _H_MAT @ _SDG_MAT, "Z": np.eye(2)}[lb]
                self._basis_pre[la + lb] = _superop(np.kron(va, vb))

    def _block_apply(self, rho: np.ndarray, qa: int, qb: int, ops) -> np.ndarray:
        """Apply 16x16 superops (or diagonal 16-vectors) to the (qa, qb) block."""
        n = self.n
        tensor = rho.reshape((2,) * (2 * n))
        axes = (n - 1 - qa, n - 1 - qb, 2 * n - 1 - qa, 2 * n - 1 - qb)
        moved = np.moveaxis(tensor, axes, (0, 1, 2, 3))
        block = np.ascontiguousarray(moved).reshape(16, -1)
        for op in ops:
            block = op[:, None] * block if op.ndim == 1 else op @ block
        out = np.moveaxis(block.reshape(moved.shape), (0, 1, 2, 3), axes)
        return np.ascontiguousarray(out).reshape(rho.shape)

    @staticmethod
    def _rz_target_diag(theta: float) -> np.ndarray:
        """Superop diagonal of RZ(theta) on the second block qubit."""
        ph = np.array([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
        row = np.kron(np.ones(2), ph)
        return np.kron(row, row.conj())

    def cost_layer(self, rho: np.ndarray, gamma: float) -> np.ndarray:
        for i, j, c in self.ham.terms:
            ops = (self._noisy_cnot, self._rz_target_diag(gamma * 2.0 * c), self._noisy_cnot)
            rho = self._block_apply(rho, i, j, ops)
        return rho

    def mixer_layer(self, rho: np.ndarray, mixer: Mixer, beta: float) -> np.ndarray:
        n = self.n
        if mixer.kind in ("global_x", "global_y"):
            mat = _rx(2.0 * beta) if mixer.kind == "global_x" else _ry(2.0 * beta)
            for q in range(n):
                rho = _apply_1q_dm(rho, mat, q, n)
            return rho
        factors = mixer.string.factors
        if len(factors) == 1:
            q, letter = factors[0]
            mat = {"X": _rx, "Y": _ry, "Z": _rz}[letter](2.0 * beta)
            return _apply_1q_dm(rho, mat, q, n)
        (qa, la), (qb, lb) = factors
        pre = self._basis_pre[la + lb]
        ops = (
            pre,
            self._noisy_cnot,
            self._rz_target_diag(2.0 * beta),
            self._noisy_cnot,
            pre.conj().T,
        )
        return self._block_apply(rho, qa, qb, ops)

    def evolve(self, ansatz: Ansatz, rho0: np.ndarray | None = None) -> np.ndarray:
        if ansatz.n != self.n:
            raise DimensionError(f"ansatz n={ansatz.n} vs backend n={self.n}")
        rho = QuantumState.plus_density(self.n).data if rho0 is None else rho0.copy()
        for lay in ansatz.layers:
            if lay.has_cost:
                rho = self.cost_layer(rho, lay.gamma)
            rho = self.mixer_layer(rho, lay.mixer, lay.beta)
        return rho

    def energy(self, ansatz: Ansatz) -> float:
        rho = self.evolve(ansatz)
        return float(np.real(np.diagonal(rho) @ self.ham.diagonal))
