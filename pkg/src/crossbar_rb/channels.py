"""Quantum channels on two qubits in the column-stacking superoperator picture.

``vec(rho)`` stacks the columns of ``rho``, so ``vec(A rho B) = (B^T kron A) vec(rho)``.
For a single qubit and ``U = [[a, b], [c, d]]`` the channel ``rho -> U rho U^dag``
is ``conj(U) kron U``; its first column is ``vec(U |0><0| U^dag)
= (|a|^2, c conj(a), a conj(c), |c|^2)``.  Composition is then a plain matrix
product, with the right-hand factor acting first.
"""

from __future__ import annotations

import itertools
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

D = 4
TP_TOL = 1e-10
CP_TOL = 1e-8

_PAULI_1Q = [
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]
PAULI_LABELS = ["".join(p) for p in itertools.product("IXYZ", repeat=2)]
PAULIS = np.stack([np.kron(a, b) for a, b in itertools.product(_PAULI_1Q, repeat=2)])
# columns are vec(P)/2, orthonormal under the Hilbert-Schmidt product
_PAULI_BASIS = np.stack([p.reshape(-1, order="F") / 2 for p in PAULIS], axis=1)


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    n = int(round(np.sqrt(len(v))))
    return np.asarray(v).reshape(n, n, order="F")


def _check_unitary(U: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.shape != (D, D) or np.max(np.abs(U.conj().T @ U - np.eye(D))) > tol:
        raise ValueError("expected a 4x4 unitary")
    return U


def validate_density_matrix(rho: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (D, D):
        raise ValueError("density matrix must be 4x4")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError("density matrix does not have unit trace")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -1e-9:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def density_matrix(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


class QuantumChannel:
    """Linear map on 4x4 matrices stored as a 16x16 superoperator.

    ``a @ b`` is the composition ``a o b`` (``b`` acts first).
    """

    def __init__(self, superop: np.ndarray, kraus: list[np.ndarray] | None = None):
        superop = np.array(superop, dtype=complex)
        if superop.shape != (D * D, D * D):
            raise ValueError("superoperator must be 16x16")
        superop.setflags(write=False)
        self.superop = superop
        self.kraus = None if kraus is None else [np.asarray(k, dtype=complex) for k in kraus]
        self._ptm = None

    @classmethod
    def from_kraus(cls, kraus) -> "QuantumChannel":
        kraus = [np.asarray(k, dtype=complex) for k in kraus]
        return cls(sum(np.kron(k.conj(), k) for k in kraus), kraus)

    @classmethod
    def identity(cls) -> "QuantumChannel":
        return cls(np.eye(D * D), [np.eye(D)])

    @classmethod
    def depolarizing(cls, p: float) -> "QuantumChannel":
        """``rho -> p rho + (1 - p) I/d``."""
        replace = np.outer(vec(np.eye(D)), vec(np.eye(D))) / D
        return cls(p * np.eye(D * D) + (1 - p) * replace)

    def __matmul__(self, other: "QuantumChannel") -> "QuantumChannel":
        kraus = None
        if self.kraus is not None and other.kraus is not None:
            kraus = [a @ b for a in self.kraus for b in other.kraus]
        return QuantumChannel(self.superop @ other.superop, kraus)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.superop @ vec(rho))

    @property
    def ptm(self) -> np.ndarray:
        """Pauli-transfer matrix in the order II, IX, IY, IZ, XI, ..., ZZ."""
        if self._ptm is None:
            self._ptm = (_PAULI_BASIS.conj().T @ self.superop @ _PAULI_BASIS).real
        return self._ptm

    @property
    def choi(self) -> np.ndarray:
        """``sum_ij |i><j| kron channel(|i><j|)``."""
        choi = np.zeros((D * D, D * D), dtype=complex)
        for i in range(D):
            for j in range(D):
                unit = np.zeros((D, D), dtype=complex)
                unit[i, j] = 1
                choi += np.kron(unit, self(unit))
        return choi

    def is_trace_preserving(self, tol: float = TP_TOL) -> bool:
        # adjoint action on the identity: vec(I)^dag S = vec(I)^dag
        v = vec(np.eye(D))
        return bool(np.max(np.abs(v.conj() @ self.superop - v.conj())) <= tol)

    def is_completely_positive(self, tol: float = CP_TOL) -> bool:
        c = self.choi
        return bool(np.linalg.eigvalsh(0.5 * (c + c.conj().T)).min() >= -tol)

    def is_cptp(self) -> bool:
        return self.is_trace_preserving() and self.is_completely_positive()

    def allclose(self, other: "QuantumChannel", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.superop, other.superop, rtol=0, atol=atol))


def compose(*channels: QuantumChannel) -> QuantumChannel:
    """``compose(a, b, c) = a o b o c``; the last argument acts first."""
    if not channels:
        return QuantumChannel.identity()
    out = channels[-1]
    for ch in reversed(channels[:-1]):
        out = ch @ out
    return out


def from_unitary(U: np.ndarray) -> QuantumChannel:
    U = _check_unitary(U)
    return QuantumChannel(np.kron(U.conj(), U), [U])


def error_channel(U_ideal: np.ndarray, U_actual: np.ndarray) -> QuantumChannel:
    """Channel of ``dU = U_ideal^dag U_actual``, so that actual = ideal o error."""
    U_ideal = _check_unitary(U_ideal)
    U_actual = _check_unitary(U_actual)
    return from_unitary(U_ideal.conj().T @ U_actual)


def measurement_channel(P: np.ndarray) -> QuantumChannel:
    """Non-selective projective measurement ``rho -> P rho P + Q rho Q``."""
    P = np.asarray(P, dtype=complex)
    if P.shape != (D, D):
        raise ValueError("projector must be 4x4")
    if np.max(np.abs(P @ P - P)) > 1e-9 or np.max(np.abs(P - P.conj().T)) > 1e-9:
        raise ValueError("P is not an orthogonal projector")
    Q = np.eye(D) - P
    return QuantumChannel.from_kraus([P, Q])


def apply(channel: QuantumChannel, rho: np.ndarray) -> np.ndarray:
    rho = validate_density_matrix(rho)
    out = channel(rho)
    if abs(np.trace(out) - 1) > TP_TOL:
        warnings.warn("channel output does not have unit trace", RuntimeWarning, stacklevel=2)
    if np.max(np.abs(out - out.conj().T)) > TP_TOL:
        warnings.warn("channel output is not Hermitian", RuntimeWarning, stacklevel=2)
    return out


def random_channel(rng: np.random.Generator, n_kraus: int = 3) -> QuantumChannel:
    """CPTP channel from a Haar-random Stinespring isometry."""
    g = rng.normal(size=(D * n_kraus, D)) + 1j * rng.normal(size=(D * n_kraus, D))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return QuantumChannel.from_kraus(np.split(q, n_kraus))


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def depolarization_parameter_analytic(channel: QuantumChannel) -> float:
    """``p = (Tr R - 1) / (d^2 - 1)`` from the Pauli-transfer trace."""
    return float((np.trace(channel.ptm) - 1) / (D * D - 1))


def entanglement_fidelity(channel: QuantumChannel) -> float:
    return float(np.trace(channel.ptm) / (D * D))


def average_fidelity(channel: QuantumChannel) -> float:
    """Haar-averaged fidelity via ``F_avg = (d F_e + 1) / (d + 1)``."""
    return (D * entanglement_fidelity(channel) + 1) / (D + 1)


def _twirl_chunk(s: np.ndarray, superops: np.ndarray) -> np.ndarray:
    return (superops.conj().transpose(0, 2, 1) @ (s @ superops)).sum(axis=0)


def twirl_explicit(channel: QuantumChannel, table, workers: int = 1,
                   chunks: int = 16) -> QuantumChannel:
    """Average of ``C(g)^-1 o channel o C(g)`` over every element of ``table``.

    Partial sums are reduced in a fixed chunk order, so the result does not
    depend on ``workers``.
    """
    sops = table.superoperators
    parts = np.array_split(np.arange(len(sops)), chunks)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            partial = list(pool.map(lambda idx: _twirl_chunk(channel.superop, sops[idx]), parts))
    else:
        partial = [_twirl_chunk(channel.superop, sops[idx]) for idx in parts]
    total = np.zeros((D * D, D * D), dtype=complex)
    for block in partial:
        total += block
    return QuantumChannel(total / len(sops))
