"""The two-qubit Clifford group as an explicit table of 4x4 unitaries.

Elements are stored modulo global phase: each matrix is rotated so that its
first entry (row-major) with modulus above ``PHASE_THRESHOLD`` is real and
positive, and is keyed by a 64-bit hash of its entries rounded to
``HASH_RESOLUTION``.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

GROUP_ORDER = 11520
FORMAT_VERSION = 1
PHASE_THRESHOLD = 1e-9
HASH_RESOLUTION = 1e-8
SAFETY_BOUND = 20000
_MAGIC = b"C2TABLE\n"

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_S = np.diag([1, 1j])
_I2 = np.eye(2, dtype=complex)

GENERATORS = {
    "H1": np.kron(_H, _I2),
    "H2": np.kron(_I2, _H),
    "S1": np.kron(_S, _I2),
    "S2": np.kron(_I2, _S),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}


def _phase_fix(us: np.ndarray) -> np.ndarray:
    flat = us.reshape(len(us), 16)
    first = np.argmax(np.abs(flat) > PHASE_THRESHOLD, axis=1)
    lead = flat[np.arange(len(us)), first]
    return us * (np.abs(lead) / lead)[:, None, None]


def _keys(us: np.ndarray) -> np.ndarray:
    flat = us.reshape(len(us), 16)
    ints = np.rint(np.concatenate([flat.real, flat.imag], axis=1) / HASH_RESOLUTION)
    ints = ints.astype("<i8")
    keys = np.empty(len(us), dtype=np.uint64)
    for i, row in enumerate(ints):
        digest = hashlib.blake2b(row.tobytes(), digest_size=8).digest()
        keys[i] = int.from_bytes(digest, "little")
    return keys


def _is_unitary(u: np.ndarray, tol: float) -> bool:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))) <= tol


@dataclass(frozen=True)
class CanonicalUnitary:
    matrix: np.ndarray = field(repr=False)
    key: int

    def __eq__(self, other):
        return isinstance(other, CanonicalUnitary) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


def canonicalize(U: np.ndarray) -> CanonicalUnitary:
    """Representative of ``U`` modulo global phase, with its hash key."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (4, 4):
        raise ValueError("expected a 4x4 matrix")
    if not _is_unitary(U, 1e-8):
        raise ValueError("matrix is not unitary")
    fixed = _phase_fix(U[None])
    return CanonicalUnitary(fixed[0], int(_keys(fixed)[0]))


class CliffordTable:
    """Immutable, ordered table of the 11520 canonical two-qubit Cliffords."""

    def __init__(self, matrices: np.ndarray, keys: np.ndarray | None = None,
                 metadata: dict | None = None):
        matrices = np.ascontiguousarray(matrices, dtype=np.complex128)
        matrices.setflags(write=False)
        self.matrices = matrices
        keys = _keys(matrices) if keys is None else np.asarray(keys, dtype=np.uint64)
        keys.setflags(write=False)
        self.keys = keys
        self.index = {int(k): i for i, k in enumerate(keys)}
        if len(self.index) != len(keys):
            raise ValueError("duplicate group elements in table")
        self.metadata = dict(metadata or {})
        self._superops = None

    def __len__(self):
        return len(self.matrices)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.matrices[i]

    def index_of(self, U: np.ndarray) -> int:
        """Table index of ``U`` (up to phase); ``KeyError`` if not a Clifford."""
        return self.index[canonicalize(U).key]

    def __contains__(self, U) -> bool:
        try:
            self.index_of(U)
        except (KeyError, ValueError):
            return False
        return True

    @property
    def superoperators(self) -> np.ndarray:
        """Column-stacking superoperators ``conj(U) (x) U``, shape (11520, 16, 16)."""
        if self._superops is None:
            u = self.matrices
            s = np.einsum("gab,gcd->gacbd", u.conj(), u).reshape(len(u), 16, 16)
            s.setflags(write=False)
            self._superops = s
        return self._superops

    def save(self, path) -> None:
        header = {
            "format_version": FORMAT_VERSION,
            "group_order": len(self),
            "tolerance": HASH_RESOLUTION,
            "phase_threshold": PHASE_THRESHOLD,
            "generators": self.metadata.get("generators", sorted(GENERATORS)),
        }
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
            fh.write(self.matrices.astype("<c16").tobytes())
            fh.write(self.keys.astype("<u8").tobytes())
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "CliffordTable":
        with open(path, "rb") as fh:
            if fh.readline() != _MAGIC:
                raise ValueError(f"{path} is not a Clifford table file")
            header = json.loads(fh.readline())
            if header.get("format_version") != FORMAT_VERSION:
                raise ValueError(f"unsupported table format {header.get('format_version')}")
            n = int(header["group_order"])
            mats = np.frombuffer(fh.read(n * 16 * 16), dtype="<c16").reshape(n, 4, 4)
            keys = np.frombuffer(fh.read(n * 8), dtype="<u8")
        if len(keys) != n:
            raise ValueError(f"{path} is truncated")
        table = cls(mats.astype(np.complex128), keys.astype(np.uint64), header)
        if not np.array_equal(_keys(table.matrices), table.keys):
            raise ValueError(f"{path}: stored hashes do not match matrices")
        return table


def generate_table() -> CliffordTable:
    """Breadth-first closure of the generator set under left multiplication."""
    gens = np.stack([GENERATORS[name] for name in sorted(GENERATORS)])
    ident = np.eye(4, dtype=complex)[None]
    found = [ident]
    seen = {int(_keys(ident)[0])}
    frontier = ident
    total = 1
    while len(frontier):
        products = _phase_fix(np.einsum("gab,nbc->ngac", gens, frontier).reshape(-1, 4, 4))
        keys = _keys(products)
        fresh = []
        for i, k in enumerate(keys):
            k = int(k)
            if k not in seen:
                seen.add(k)
                fresh.append(i)
        frontier = products[fresh]
        total += len(fresh)
        if total > SAFETY_BOUND:
            raise RuntimeError("Clifford closure exceeded the safety bound; canonicalization is broken")
        found.append(frontier)
    mats = np.concatenate(found)
    if len(mats) != GROUP_ORDER:
        raise RuntimeError(f"closure produced {len(mats)} elements, expected {GROUP_ORDER}")
    logger.debug("generated %d Clifford elements", len(mats))
    return CliffordTable(mats, metadata={"generators": sorted(GENERATORS)})


def cache_path(cache_dir) -> Path:
    return Path(cache_dir) / f"clifford2q_v{FORMAT_VERSION}.bin"


def load_or_generate(cache_dir=None) -> CliffordTable:
    """Load the cached table from ``cache_dir``, generating and caching it if absent."""
    if cache_dir is None:
        return default_table()
    path = cache_path(cache_dir)
    if path.exists():
        return CliffordTable.load(path)
    table = generate_table()
    path.parent.mkdir(parents=True, exist_ok=True)
    table.save(path)
    return table


@lru_cache(maxsize=1)
def default_table() -> CliffordTable:
    """Process-wide table, generated once."""
    return generate_table()


def sample_uniform(rng: np.random.Generator, size=None, order: int = GROUP_ORDER):
    """Uniform table index (or array of indices) drawn from ``rng``."""
    return rng.integers(0, order, size=size)


def sequence_product(table: CliffordTable, indices, interleaved: np.ndarray | None = None) -> np.ndarray:
    """Ideal unitary of the sequence; the first index acts first."""
    total = np.eye(4, dtype=complex)
    for i in indices:
        total = table.matrices[i] @ total
        if interleaved is not None:
            total = interleaved @ total
    return total


def inverse_of_sequence(table: CliffordTable, indices,
                        interleaved: np.ndarray | None = None) -> CanonicalUnitary:
    """Closing gate that returns the ideal sequence to the identity (up to phase)."""
    indices = list(indices)
    if not indices:
        raise ValueError("sequence must be nonempty")
    return canonicalize(sequence_product(table, indices, interleaved).conj().T)
