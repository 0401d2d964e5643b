"""Two-spin Hamiltonian, magnetic-noise perturbations and dark states.

Conventions: hbar = 1, energies in units of the exchange ``J``, times in
``1/J``.  Spin operators are half the Pauli matrices and the basis order is
``|uu>, |ud>, |du>, |dd>`` (qubit 1 is the left tensor factor).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
_SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
_I2 = np.eye(2, dtype=complex)

S1X, S1Y, S1Z = (np.kron(s, _I2) for s in (_SX, _SY, _SZ))
S2X, S2Y, S2Z = (np.kron(_I2, s) for s in (_SX, _SY, _SZ))

IDEAL_DELTA_OMEGA = math.sqrt(15.0)
IDEAL_TIME = math.pi

SCENARIOS = ("independent", "correlated_central", "anticorrelated", "position_shift")


@dataclass(frozen=True)
class HamiltonianParams:
    omega: float = 20.0
    delta_omega: float = IDEAL_DELTA_OMEGA
    t: float = IDEAL_TIME
    J: float = 1.0

    def __post_init__(self):
        for name in ("omega", "delta_omega", "t", "J"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.J <= 0:
            raise ValueError("J must be positive")


def build_static_hamiltonian(p: HamiltonianParams) -> np.ndarray:
    """``J S1.S2 + [omega (S1z + S2z) + delta_omega (S1z - S2z)] / 2``."""
    exchange = S1X @ S2X + S1Y @ S2Y + S1Z @ S2Z
    return (p.J * exchange
            + 0.5 * (p.omega * (S1Z + S2Z) + p.delta_omega * (S1Z - S2Z)))


@dataclass(frozen=True)
class NoiseCoefficients:
    """Perturbation frequencies (units of J) entering :func:`build_perturbation`."""

    dwx1: float
    dwx2: float
    dwz1: float
    dwz2: float
    scenario: str = "independent"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        for name in ("dwx1", "dwx2", "dwz1", "dwz2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.dwx1, self.dwx2, self.dwz1, self.dwz2)


def _check_ratio(z0_over_L: float) -> float:
    if not (math.isfinite(z0_over_L) and z0_over_L > 0):
        raise ValueError("z0_over_L must be positive and finite")
    return float(z0_over_L)


def _check_amplitudes(*values: float) -> None:
    if not all(math.isfinite(v) for v in values):
        raise ValueError("noise amplitudes must be finite")


def central_wire_splittings(kappa: float, z0_over_L: float = 1.0) -> tuple[float, float]:
    """``(dw_x, dw_z)`` for a field change ``kappa`` (= g muB dB0 / J) on one wire."""
    q = _check_ratio(z0_over_L)
    _check_amplitudes(kappa)
    return kappa * q * q / (1 + q * q), kappa * q / (1 + q * q)


def independent(kappa1: float, kappa2: float, z0_over_L: float = 1.0) -> NoiseCoefficients:
    """Side-wire fluctuations with dimensionless amplitudes ``kappa_i`` proportional to ``dI_i``."""
    x1, z1 = central_wire_splittings(kappa1, z0_over_L)
    x2, z2 = central_wire_splittings(kappa2, z0_over_L)
    return NoiseCoefficients(x1, x2, z1, z2, "independent")


def correlated_central(kappa: float, z0_over_L: float = 1.0) -> NoiseCoefficients:
    x, z = central_wire_splittings(kappa, z0_over_L)
    return NoiseCoefficients(x, x, z, z, "correlated_central")


def anticorrelated(kappa: float, z0_over_L: float = 1.0) -> NoiseCoefficients:
    x, z = central_wire_splittings(kappa, z0_over_L)
    return NoiseCoefficients(x, -x, z, -z, "anticorrelated")


def _shift_terms(kappa0: float, s: float, q: float) -> tuple[float, float]:
    plus = (1 + s) ** 2 + q * q
    minus = (1 - s) ** 2 + q * q
    dwx = kappa0 * (q * q / plus - q * q / minus)
    dwz = kappa0 * (q * (1 + s) / plus + q * (1 - s) / minus)
    return dwx, dwz


def position_shift(kappa0: float, shift: float, z0_over_L: float = 1.0,
                   subtract_baseline: bool = False) -> NoiseCoefficients:
    """Both qubits displaced by ``shift`` (units of L); ``kappa0 = g muB B0 / J``.

    The printed z-coefficient does not vanish at ``shift = 0``;
    ``subtract_baseline`` removes that static part.
    """
    q = _check_ratio(z0_over_L)
    _check_amplitudes(kappa0, shift)
    dwx, dwz = _shift_terms(kappa0, shift, q)
    if subtract_baseline:
        bx, bz = _shift_terms(kappa0, 0.0, q)
        dwx, dwz = dwx - bx, dwz - bz
    return NoiseCoefficients(dwx, dwx, dwz, dwz, "position_shift")


def noise_coefficients(scenario: str, *, kappa: float | None = None,
                       kappa1: float | None = None, kappa2: float | None = None,
                       shift: float = 0.0, z0_over_L: float = 1.0,
                       subtract_baseline: bool = False) -> NoiseCoefficients:
    """Dispatch to the scenario constructors.

    ``kappa`` is the amplitude for ``correlated_central``, ``anticorrelated``
    and ``position_shift`` (where it plays the role of ``kappa0``);
    ``independent`` takes ``kappa1`` and ``kappa2``.
    """
    if scenario == "independent":
        if kappa1 is None or kappa2 is None:
            raise ValueError("independent noise needs kappa1 and kappa2")
        return independent(kappa1, kappa2, z0_over_L)
    if kappa is None:
        raise ValueError(f"{scenario} noise needs kappa")
    if scenario == "correlated_central":
        return correlated_central(kappa, z0_over_L)
    if scenario == "anticorrelated":
        return anticorrelated(kappa, z0_over_L)
    if scenario == "position_shift":
        return position_shift(kappa, shift, z0_over_L, subtract_baseline)
    raise ValueError(f"unknown scenario {scenario!r}")


def kappa_from_current(kappa0: float, delta_current: float, current: float) -> float:
    """Coupling scale of a current change: ``dB0 / B0 = dI / I``."""
    if current == 0:
        raise ValueError("current must be nonzero")
    return kappa0 * delta_current / current


def build_perturbation(c: NoiseCoefficients) -> np.ndarray:
    """``-dwx1 S1x - dwx2 S2x - dwz1 S1z + dwz2 S2z``."""
    return -c.dwx1 * S1X - c.dwx2 * S2X - c.dwz1 * S1Z + c.dwz2 * S2Z


def is_hermitian(H: np.ndarray, tol: float = 1e-12) -> bool:
    H = np.asarray(H)
    return H.shape == (4, 4) and float(np.max(np.abs(H - H.conj().T))) <= tol


def evolve(H: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t)`` through the eigendecomposition of a Hermitian ``H``."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("H must be a square matrix")
    if float(np.max(np.abs(H - H.conj().T))) > 1e-12 * max(1.0, float(np.max(np.abs(H)))):
        raise ValueError("H is not Hermitian")
    energies, vecs = np.linalg.eigh(0.5 * (H + H.conj().T))
    return (vecs * np.exp(-1j * energies * t)) @ vecs.conj().T


def gate_params(k: int = 5) -> HamiltonianParams:
    """Parameters making the free evolution a Clifford gate (omega = 4kJ)."""
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    return HamiltonianParams(omega=4.0 * k, delta_omega=IDEAL_DELTA_OMEGA, t=IDEAL_TIME)


def ideal_gate(k: int = 5) -> np.ndarray:
    """Equals ``exp(-i pi/4) diag(1, i, i, 1)`` for every positive integer ``k``."""
    p = gate_params(k)
    return evolve(build_static_hamiltonian(p), p.t)


def noisy_gate(c: NoiseCoefficients, k: int = 5) -> np.ndarray:
    """Gate actually produced when ``build_perturbation(c)`` is switched on."""
    p = gate_params(k)
    return evolve(build_static_hamiltonian(p) + build_perturbation(c), p.t)


@dataclass(frozen=True)
class DarkStateSet:
    """Dark states of the correlated (S) and anti-correlated (A) perturbations."""

    s1: np.ndarray
    s2: np.ndarray
    a1: np.ndarray
    a2: np.ndarray

    def symmetric(self) -> tuple[np.ndarray, np.ndarray]:
        return self.s1, self.s2

    def antisymmetric(self) -> tuple[np.ndarray, np.ndarray]:
        return self.a1, self.a2


def dark_states() -> DarkStateSet:
    r2 = 1 / math.sqrt(2)
    return DarkStateSet(
        s1=np.array([r2, 0, 0, -r2], dtype=complex),
        s2=np.array([0.5, -0.5, 0.5, 0.5], dtype=complex),
        a1=np.array([0, r2, r2, 0], dtype=complex),
        a2=np.array([0.5, 0.5, -0.5, 0.5], dtype=complex),
    )


def triplet_zero() -> np.ndarray:
    """``|T0(1,1)> = (|ud> + |du>)/sqrt 2``, the first anti-correlated dark state."""
    return dark_states().a1


def basis_state(label: str) -> np.ndarray:
    """Computational basis ket from a two-character label such as ``"uu"``."""
    order = {"uu": 0, "ud": 1, "du": 2, "dd": 3}
    if label not in order:
        raise ValueError(f"unknown basis label {label!r}")
    psi = np.zeros(4, dtype=complex)
    psi[order[label]] = 1.0
    return psi


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())
