"""Pauli strings, mixers, and the diagonal Ising cost Hamiltonian.

The cost Hamiltonian for an instance is H = (1/4) sum_{i,j} W_ij Z_i Z_j,
stored as one term (i, j, W_ij / 2) per unordered edge with nonzero weight.
Basis index k encodes spin s_i(k) = 1 - 2*((k >> i) & 1), i.e. the Z_i
eigenvalue of basis state |k>.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DimensionError,
    InvalidParameterError,
    ResourceLimitError,
    UnsupportedMixerError,
)
from .instances import MaxCutInstance

DENSE_MAX_QUBITS = 12

_PAULI_MATS = {
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis on distinct qubits.

    ``factors`` maps qubit index to letter, kept sorted by qubit.  The text
    form joins letter+qubit tokens with '*', e.g. ``"X0*Y3"``.
    """

    factors: tuple[tuple[int, str], ...]

    def __post_init__(self):
        if len(self.factors) == 0:
            raise InvalidParameterError("empty Pauli string")
        qubits = [q for q, _ in self.factors]
        if len(set(qubits)) != len(qubits):
            raise InvalidParameterError(f"repeated qubit in Pauli string {self.factors}")
        if any(q < 0 for q in qubits):
            raise InvalidParameterError("negative qubit index")
        if any(letter not in "XYZ" for _, letter in self.factors):
            raise InvalidParameterError("Pauli letters must be X, Y or Z")
        object.__setattr__(self, "factors", tuple(sorted(self.factors)))

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        factors = []
        for token in text.split("*"):
            token = token.strip()
            if len(token) < 2:
                raise InvalidParameterError(f"bad Pauli token {token!r}")
            factors.append((int(token[1:]), token[0]))
        return cls(tuple(factors))

    @property
    def text(self) -> str:
        return "*".join(f"{letter}{q}" for q, letter in self.factors)

    def __str__(self):
        return self.text

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.factors)

    @property
    def non_z_qubits(self) -> tuple[int, ...]:
        """Qubits carrying an X or Y factor; these anticommute with Z there."""
        return tuple(q for q, letter in self.factors if letter != "Z")


@dataclass(frozen=True)
class Mixer:
    """A pool element: a transverse-field sum over all qubits or one Pauli string."""

    kind: str  # "global_x", "global_y" or "pauli"
    string: PauliString | None = None

    def __post_init__(self):
        if self.kind not in ("global_x", "global_y", "pauli"):
            raise InvalidParameterError(f"unknown mixer kind {self.kind!r}")
        if (self.kind == "pauli") != (self.string is not None):
            raise InvalidParameterError("pauli mixers carry a string, global ones do not")

    @classmethod
    def global_x(cls):
        return cls(kind="global_x")

    @classmethod
    def global_y(cls):
        return cls(kind="global_y")

    @classmethod
    def pauli(cls, string) -> "Mixer":
        if isinstance(string, str):
            string = PauliString.from_text(string)
        return cls(kind="pauli", string=string)

    @classmethod
    def from_text(cls, text: str) -> "Mixer":
        if text == "GLOBAL_X":
            return cls.global_x()
        if text == "GLOBAL_Y":
            return cls.global_y()
        return cls.pauli(text)

    @property
    def text(self) -> str:
        if self.kind == "global_x":
            return "GLOBAL_X"
        if self.kind == "global_y":
            return "GLOBAL_Y"
        return self.string.text

    def __str__(self):
        return self.text

    @property
    def is_global(self) -> bool:
        return self.kind != "pauli"

    @property
    def is_two_qubit(self) -> bool:
        return self.kind == "pauli" and len(self.string.factors) == 2


class IsingHamiltonian:
    """Diagonal two-body Ising operator sum_{(i,j)} c_ij Z_i Z_j.

    Terms are (i, j, coefficient) with i < j.  The full 2^n diagonal is
    computed lazily and cached; callers must not mutate it.
    """

    def __init__(self, n: int, terms):
        if n < 1:
            raise InvalidParameterError(f"need n >= 1, got {n}")
        terms = tuple((int(i), int(j), float(c)) for i, j, c in terms)
        for i, j, c in terms:
            if not (0 <= i < j < n):
                raise DimensionError(f"term ({i},{j}) out of range for n={n}")
            if not np.isfinite(c):
                raise InvalidParameterError(f"non-finite coefficient on edge ({i},{j})")
        self.n = n
        self.terms = terms
        self._diagonal = None

    @property
    def diagonal(self) -> np.ndarray:
        if self._diagonal is None:
            k = np.arange(1 << self.n, dtype=np.int64)
            diag = np.zeros(1 << self.n)
            for i, j, c in self.terms:
                s_i = 1.0 - 2.0 * ((k >> i) & 1)
                s_j = 1.0 - 2.0 * ((k >> j) & 1)
                diag += c * s_i * s_j
            diag.flags.writeable = False
            self._diagonal = diag
        return self._diagonal

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((i, j) for i, j, _ in self.terms)

    def __repr__(self):
        return f"IsingHamiltonian(n={self.n}, terms={len(self.terms)})"


def build_hamiltonian(inst: MaxCutInstance) -> IsingHamiltonian:
    """Cost Hamiltonian of an instance; zero-weight edges carry no term."""
    terms = []
    for i in range(inst.n - 1):
        for j in range(i + 1, inst.n):
            w = inst.weights[i, j]
            if w != 0.0:
                terms.append((i, j, w / 2.0))
    return IsingHamiltonian(inst.n, terms)


def split_hamiltonian(ham: IsingHamiltonian, mixer: Mixer):
    """Partition H into (commuting, anticommuting) parts for a Pauli mixer.

    A ZZ term anticommutes with the mixer string exactly when an odd number
    of its two qubits carry an X or Y factor.  Global mixers have no such
    two-way split and are rejected.
    """
    if mixer.is_global:
        raise UnsupportedMixerError("global mixers do not admit a commuting split")
    hot = set(mixer.string.non_z_qubits)
    comm, anti = [], []
    for term in ham.terms:
        i, j, _ = term
        if (int(i in hot) + int(j in hot)) % 2 == 1:
            anti.append(term)
        else:
            comm.append(term)
    return IsingHamiltonian(ham.n, comm), IsingHamiltonian(ham.n, anti)


# ── dense matrices (test oracles; hard-capped) ────────────────────────────


def pauli_matrix(obj, n: int) -> np.ndarray:
    """Dense 2^n x 2^n matrix of a PauliString or Mixer.

    Intended for small-n oracles and cross-checks only.
    """
    if n > DENSE_MAX_QUBITS:
        raise ResourceLimitError(f"dense matrices capped at n={DENSE_MAX_QUBITS}")
    if isinstance(obj, Mixer):
        if obj.kind == "global_x":
            return sum(
                pauli_matrix(PauliString(((q, "X"),)), n) for q in range(n)
            )
        if obj.kind == "global_y":
            return sum(
                pauli_matrix(PauliString(((q, "Y"),)), n) for q in range(n)
            )
        obj = obj.string
    letters = dict(obj.factors)
    if letters and max(letters) >= n:
        raise DimensionError(f"string {obj.text} does not fit in n={n} qubits")
    mat = np.eye(1, dtype=complex)
    for q in reversed(range(n)):
        factor = _PAULI_MATS.get(letters.get(q), np.eye(2, dtype=complex))
        mat = np.kron(mat, factor)
    return mat


# ── fast sparse action on states ──────────────────────────────────────────
#
# A Pauli string acts on a basis state by an XOR permutation plus a phase:
# A|k> = phase[k] |k ^ mask>, with mask collecting the X/Y qubits.


@functools.lru_cache(maxsize=4096)
def _pauli_action_cached(factors: tuple, n: int):
    mask = 0
    k = np.arange(1 << n, dtype=np.int64)
    phases = np.ones(1 << n, dtype=complex)
    for q, letter in factors:
        if q >= n:
            raise DimensionError(f"qubit {q} out of range for n={n}")
        sign = 1.0 - 2.0 * ((k >> q) & 1)
        if letter == "X":
            mask |= 1 << q
        elif letter == "Y":
            mask |= 1 << q
            phases = phases * (1.0j * sign)
        else:
            phases = phases * sign
    phases.flags.writeable = False
    return mask, phases


def pauli_action(string: PauliString, n: int):
    """(xor_mask, phases) with A|k> = phases[k] |k ^ xor_mask>."""
    return _pauli_action_cached(string.factors, n)


def apply_pauli_vec(string: PauliString, psi: np.ndarray) -> np.ndarray:
    """A @ psi for a state vector: out[k] = phases[k^m] * psi[k^m]."""
    n = psi.shape[0].bit_length() - 1
    mask, phases = pauli_action(string, n)
    src = np.arange(psi.shape[0]) ^ mask
    return (phases * psi)[src]


def apply_mixer_vec(mixer: Mixer, psi: np.ndarray) -> np.ndarray:
    """A @ psi where A is any pool mixer."""
    n = psi.shape[0].bit_length() - 1
    if mixer.kind == "pauli":
        return apply_pauli_vec(mixer.string, psi)
    letter = "X" if mixer.kind == "global_x" else "Y"
    out = np.zeros_like(psi)
    for q in range(n):
        out += apply_pauli_vec(PauliString(((q, letter),)), psi)
    return out


def apply_pauli_dm_left(string: PauliString, rho: np.ndarray) -> np.ndarray:
    """A @ rho for a density matrix (left action only)."""
    n = rho.shape[0].bit_length() - 1
    mask, phases = pauli_action(string, n)
    src = np.arange(rho.shape[0]) ^ mask
    return (phases[:, None] * rho)[src]


def apply_mixer_dm_left(mixer: Mixer, rho: np.ndarray) -> np.ndarray:
    n = rho.shape[0].bit_length() - 1
    if mixer.kind == "pauli":
        return apply_pauli_dm_left(mixer.string, rho)
    letter = "X" if mixer.kind == "global_x" else "Y"
    out = np.zeros_like(rho)
    for q in range(n):
        out += apply_pauli_dm_left(PauliString(((q, letter),)), rho)
    return out
