"""Magnetic field of an alternating-current wire array at the qubit plane.

Wires run along ``y`` at height ``z0`` above the qubit row, at ``x = 2nL``,
carrying current in alternating directions (``+y`` at ``x = 4nL``, ``-y`` at
``x = 2L(2n+1)``).  Every field returned here is dimensionless, in units of
``B0 = mu_eff * I / (2 pi z0)``; multiply by ``cfg.B0`` for absolute units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class WireArrayConfig:
    """Geometry and drive of the wire array.

    Attributes
    ----------
    current : float
        Wire current ``I``.
    half_spacing : float
        ``L``; neighbouring wires are ``2L`` apart.
    depth : float
        ``z0``, vertical distance between the wire plane and the qubits.
    mu_eff : float
        Effective permeability of the surrounding media.
    """

    current: float = 1.0
    half_spacing: float = 1.0
    depth: float = 1.0
    mu_eff: float = 1.0

    def __post_init__(self):
        for name in ("current", "half_spacing", "depth", "mu_eff"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.half_spacing <= 0:
            raise ValueError("half_spacing must be positive")
        if self.depth <= 0:
            raise ValueError("depth must be positive")

    @property
    def B0(self) -> float:
        return self.mu_eff * self.current / (2 * math.pi * self.depth)

    @property
    def zeta(self) -> float:
        return math.pi * self.depth / (2 * self.half_spacing)

    @property
    def ratio(self) -> float:
        """``z0 / L``."""
        return self.depth / self.half_spacing

    @classmethod
    def from_ratio(cls, z0_over_L: float, **kwargs) -> "WireArrayConfig":
        return cls(half_spacing=1.0, depth=float(z0_over_L), **kwargs)


@dataclass(frozen=True)
class FieldVector:
    """In-plane field ``(Bx, Bz)`` in units of ``B0``."""

    bx: float
    bz: float

    def __iter__(self):
        yield self.bx
        yield self.bz

    def __add__(self, other: "FieldVector") -> "FieldVector":
        return FieldVector(self.bx + other.bx, self.bz + other.bz)

    def scaled(self, factor: float) -> "FieldVector":
        return FieldVector(factor * self.bx, factor * self.bz)

    @property
    def magnitude(self) -> float:
        return math.hypot(self.bx, self.bz)

    def as_array(self) -> np.ndarray:
        return np.array([self.bx, self.bz])


def wire_direction(m: int) -> int:
    """Current direction (+1 for ``+y``) of the wire sitting at ``x = 2mL``."""
    return 1 if m % 2 == 0 else -1


def single_wire_field(x: float, wire_x: float, direction_sign: int,
                      cfg: WireArrayConfig) -> FieldVector:
    """Field of one wire at the qubit position ``x``.

    The magnitude is ``z0 / r`` (i.e. ``B0 z0 / r``) and the orientation
    matches the array sums: ``(Bx, Bz) = s (z0^2, z0 dx) / r^2`` with
    ``dx = x - wire_x``.
    """
    if direction_sign not in (1, -1):
        raise ValueError("direction_sign must be +1 or -1")
    z0 = cfg.depth
    dx = x - wire_x
    r2 = dx * dx + z0 * z0
    return FieldVector(direction_sign * z0 * z0 / r2, direction_sign * z0 * dx / r2)


def total_field(x: float, cfg: WireArrayConfig, cutoff: int = 100) -> FieldVector:
    """Field of the whole array, summing wire pairs ``n = -cutoff .. cutoff``.

    Partial sums use ``math.fsum`` so that terms cancelling by symmetry
    (e.g. ``Bx`` at odd multiples of ``L``) cancel exactly.
    """
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    if int(cutoff) != cutoff or cutoff < 1:
        raise ValueError("cutoff must be a positive integer")
    L, z0 = cfg.half_spacing, cfg.depth
    n = np.arange(-int(cutoff), int(cutoff) + 1, dtype=float)
    x1 = x - 4 * L * n
    x2 = x - 2 * L * (2 * n + 1)
    r1 = x1 * x1 + z0 * z0
    r2 = x2 * x2 + z0 * z0
    bx = math.fsum(z0 * z0 / r1) - math.fsum(z0 * z0 / r2)
    bz = math.fsum(z0 * x1 / r1) - math.fsum(z0 * x2 / r2)
    return FieldVector(bx, bz)


def closed_form_operation_point(k: int, cfg: WireArrayConfig,
                                midpoint: bool = False) -> FieldVector:
    """Exact infinite-array field at ``x = (2k+1)L`` (or ``x = 2kL`` if ``midpoint``).

    At the operation points the field is purely along ``z``,
    ``(-1)^k zeta sech(zeta)``; below a wire it is purely along ``x``,
    ``(-1)^k zeta csch(zeta)``.
    """
    zeta = cfg.zeta
    sign = -1.0 if k % 2 else 1.0
    if midpoint:
        return FieldVector(sign * zeta / math.sinh(zeta), 0.0)
    return FieldVector(0.0, sign * zeta / math.cosh(zeta))


def operation_point(k: int, cfg: WireArrayConfig) -> float:
    return (2 * k + 1) * cfg.half_spacing


def _nearest_pair(x: float, k: int, cfg: WireArrayConfig) -> FieldVector:
    # the two wires flanking x_k sit at 2kL and 2(k+1)L
    L = cfg.half_spacing
    total = FieldVector(0.0, 0.0)
    for m in (k, k + 1):
        total = total + single_wire_field(x, 2 * m * L, wire_direction(m), cfg)
    return total


def calibration_coefficient(k: int, cfg: WireArrayConfig) -> float:
    """Ratio of the exact field at ``x_k`` to the bare two-wire field there."""
    exact = closed_form_operation_point(k, cfg).bz
    pair = _nearest_pair(operation_point(k, cfg), k, cfg).bz
    return exact / pair


def calibrated_two_wire_field(x: float, k: int, cfg: WireArrayConfig) -> FieldVector:
    """Two-nearest-wire approximation around ``x_k``, rescaled to be exact at ``x_k``.

    Only valid for ``|x - x_k| < L``.
    """
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    if abs(x - operation_point(k, cfg)) >= cfg.half_spacing:
        raise ValueError(f"x={x} outside the validity window |x - x_k| < L of k={k}")
    return _nearest_pair(x, k, cfg).scaled(calibration_coefficient(k, cfg))
