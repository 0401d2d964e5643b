"""Standard, interleaved and measurement-modified randomized benchmarking.

Every protocol applies, for ``i = 1..m``, a unit

* ``standard_rb``:        noise o C_i
* ``irb``:                C o err o noise o C_i
* ``modified_irb``:       C o err o meas o noise o C_i
* ``modified_reference``: meas o noise o C_i

followed by the ideal closing Clifford and one more application of the
Clifford noise ``noise``.  ``C`` is the ideal interleaved gate, ``err`` its
error channel and ``meas`` the pinching channel of a projective measurement.

Random sequences are driven by per-sequence generators derived from
``(seed, stream, m, sequence index)``, so results do not depend on
scheduling or on the number of workers.
"""

from __future__ import annotations

import dataclasses
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from . import channels as ch
from . import spin_model as sm
from .clifford_group import CliffordTable, default_table, inverse_of_sequence

logger = logging.getLogger(__name__)

D = 4
KINDS = ("standard_rb", "irb", "modified_irb", "modified_reference")
INTERLEAVED_KINDS = ("irb", "modified_irb")
REFERENCE_KIND = {"irb": "standard_rb", "modified_irb": "modified_reference"}


def default_lengths(m_max: int, count: int = 12) -> tuple[int, ...]:
    """About ``count`` geometrically spaced sequence lengths from 1 to ``m_max``."""
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    grid = np.unique(np.rint(np.geomspace(1, m_max, count)).astype(int))
    return tuple(int(m) for m in grid)


def _ground_state() -> np.ndarray:
    return ch.density_matrix(sm.basis_state("uu"))


@dataclass(frozen=True, eq=False)
class ProtocolConfig:
    """Everything needed to run one benchmarking protocol.

    ``stream`` selects an independent family of random sequences for the same
    ``seed``; a reference run and its interleaved run sharing a stream use
    identical Clifford draws.
    """

    kind: str = "standard_rb"
    lengths: tuple[int, ...] = default_lengths(200)
    n_avg: int = 1000
    seed: int = 0
    stream: int = 0
    rho0: np.ndarray = field(default_factory=_ground_state)
    measurement: np.ndarray = field(default_factory=_ground_state)
    clifford_noise: ch.QuantumChannel = field(default_factory=ch.QuantumChannel.identity)
    interleaved_error: ch.QuantumChannel | None = None
    measurement_channel: ch.QuantumChannel | None = None
    gate: np.ndarray = field(default_factory=sm.ideal_gate)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown protocol kind {self.kind!r}")
        lengths = tuple(int(m) for m in self.lengths)
        if not lengths or lengths[0] < 1 or any(b <= a for a, b in zip(lengths, lengths[1:])):
            raise ValueError("lengths must be strictly increasing and >= 1")
        object.__setattr__(self, "lengths", lengths)
        if self.n_avg < 1:
            raise ValueError("n_avg must be >= 1")
        ch.validate_density_matrix(self.rho0)
        E = np.asarray(self.measurement, dtype=complex)
        if np.max(np.abs(E - E.conj().T)) > 1e-10:
            raise ValueError("measurement operator must be Hermitian")
        eig = np.linalg.eigvalsh(E)
        if eig.min() < -1e-10 or eig.max() > 1 + 1e-10:
            raise ValueError("measurement operator must satisfy 0 <= E <= I")
        if self.kind.startswith("modified") and self.measurement_channel is None:
            raise ValueError(f"{self.kind} needs a measurement_channel")

    def replace(self, **changes) -> "ProtocolConfig":
        return dataclasses.replace(self, **changes)

    @property
    def interleaves(self) -> bool:
        return self.kind in INTERLEAVED_KINDS

    def unit_noise(self) -> ch.QuantumChannel:
        """Noise between the random Clifford and the (optional) interleaved gate."""
        parts = []
        if self.interleaves and self.interleaved_error is not None:
            parts.append(self.interleaved_error)
        if self.kind.startswith("modified"):
            parts.append(self.measurement_channel)
        parts.append(self.clifford_noise)
        return ch.compose(*parts)


@dataclass
class DecayCurve:
    lengths: np.ndarray
    mean: np.ndarray
    std_err: np.ndarray
    counts: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("m,mean_fidelity,std_err,n\n")
        for m, f, e, n in zip(self.lengths, self.mean, self.std_err, self.counts):
            buf.write(f"{int(m)},{float(f)!r},{float(e)!r},{int(n)}\n")
        return buf.getvalue()


@dataclass
class DecayFit:
    """``A p^m + B`` with one-sigma parameter errors."""

    A: float
    B: float
    p: float
    A_err: float = 0.0
    B_err: float = 0.0
    p_err: float = 0.0
    residual: float = 0.0
    converged: bool = True
    degenerate: bool = False

    def model(self, m):
        return self.A * np.power(self.p, np.asarray(m, dtype=float)) + self.B

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class ErrorRateEstimate:
    r: float
    r_err: float
    p_ref: float
    p_int: float
    d: int = D


# ---------------------------------------------------------------- simulation

def sequence_rng(seed: int, stream: int, m: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, m, index)))


def draw_sequences(cfg: ProtocolConfig, m: int, n: int | None = None) -> np.ndarray:
    """Clifford indices, shape ``(n_avg, m)``; row ``j`` comes from its own substream."""
    n = cfg.n_avg if n is None else n
    return np.stack([sequence_rng(cfg.seed, cfg.stream, m, j).integers(0, 11520, size=m)
                     for j in range(n)])


def _apply_superop(rho: np.ndarray, superop: np.ndarray) -> np.ndarray:
    n = len(rho)
    v = rho.transpose(0, 2, 1).reshape(n, 16)
    return (v @ superop.T).reshape(n, 4, 4).transpose(0, 2, 1)


def _is_identity(channel: ch.QuantumChannel) -> bool:
    return bool(np.array_equal(channel.superop, np.eye(16)))


def simulate_batch(cfg: ProtocolConfig, indices: np.ndarray,
                   table: CliffordTable) -> np.ndarray:
    """Sequence fidelities for a batch of index sequences of equal length."""
    n, m = indices.shape
    unit = cfg.unit_noise()
    unit_sop = None if _is_identity(unit) else unit.superop
    end_sop = None if _is_identity(cfg.clifford_noise) else cfg.clifford_noise.superop
    gate = np.asarray(cfg.gate, dtype=complex) if cfg.interleaves else None
    rho = np.broadcast_to(np.asarray(cfg.rho0, dtype=complex), (n, 4, 4)).copy()
    ideal = np.broadcast_to(np.eye(4, dtype=complex), (n, 4, 4)).copy()
    for step in range(m):
        u = table.matrices[indices[:, step]]
        rho = u @ rho @ u.conj().transpose(0, 2, 1)
        ideal = u @ ideal
        if unit_sop is not None:
            rho = _apply_superop(rho, unit_sop)
        if gate is not None:
            rho = gate @ rho @ gate.conj().T
            ideal = gate @ ideal
    rho = ideal.conj().transpose(0, 2, 1) @ rho @ ideal
    if end_sop is not None:
        rho = _apply_superop(rho, end_sop)
    E = np.asarray(cfg.measurement, dtype=complex)
    return np.einsum("ij,nji->n", E, rho).real


def run_sequence(cfg: ProtocolConfig, m: int, rng: np.random.Generator,
                 table: CliffordTable | None = None) -> float:
    """Fidelity of one random sequence of length ``m`` (dense, unbatched)."""
    table = default_table() if table is None else table
    indices = rng.integers(0, len(table), size=m)
    gate = np.asarray(cfg.gate, dtype=complex) if cfg.interleaves else None
    unit = cfg.unit_noise()
    rho = np.asarray(cfg.rho0, dtype=complex)
    for i in indices:
        u = table.matrices[i]
        rho = unit(u @ rho @ u.conj().T)
        if gate is not None:
            rho = gate @ rho @ gate.conj().T
    closing = inverse_of_sequence(table, indices, gate).matrix
    rho = cfg.clifford_noise(closing @ rho @ closing.conj().T)
    return float(np.trace(np.asarray(cfg.measurement) @ rho).real)


def _fidelities_at(cfg: ProtocolConfig, m: int, table: CliffordTable) -> np.ndarray:
    return simulate_batch(cfg, draw_sequences(cfg, m), table)


def run_protocol(cfg: ProtocolConfig, table: CliffordTable | None = None,
                 workers: int = 1) -> DecayCurve:
    """Average ``n_avg`` random sequences at every length of ``cfg.lengths``.

    Work is split by sequence length only, so ``workers`` never changes the
    numbers produced.
    """
    table = default_table() if table is None else table
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            samples = list(pool.map(lambda m: _fidelities_at(cfg, m, table), cfg.lengths))
    else:
        samples = [_fidelities_at(cfg, m, table) for m in cfg.lengths]
    mean = np.array([s.mean() for s in samples])
    if cfg.n_avg > 1:
        err = np.array([s.std(ddof=1) / math.sqrt(len(s)) for s in samples])
    else:
        err = np.zeros(len(samples))
    return DecayCurve(np.array(cfg.lengths), mean, err,
                      np.full(len(samples), cfg.n_avg))


# ------------------------------------------------------------------ analysis

def predict_exact(cfg: ProtocolConfig) -> DecayFit:
    """Exact average decay from the depolarizing part of the unit noise.

    ``B = Tr[E noise(I/d)]`` and ``A = Tr[E noise(rho0)] - B``, where ``noise``
    is the Clifford noise applied with the closing gate.
    """
    p = ch.depolarization_parameter_analytic(cfg.unit_noise())
    E = np.asarray(cfg.measurement, dtype=complex)
    end = cfg.clifford_noise
    B = float(np.trace(E @ end(np.eye(D) / D)).real)
    A = float(np.trace(E @ end(np.asarray(cfg.rho0, dtype=complex))).real) - B
    return DecayFit(A, B, p, degenerate=abs(p - 1) < 1e-14)


def exact_curve(cfg: ProtocolConfig) -> DecayCurve:
    fit = predict_exact(cfg)
    lengths = np.array(cfg.lengths)
    return DecayCurve(lengths, fit.model(lengths), np.zeros(len(lengths)),
                      np.zeros(len(lengths), dtype=int))


def _model(theta, m):
    A, B, p = theta
    return A * np.power(p, m) + B


def fit_decay(curve: DecayCurve, d: int = D) -> DecayFit:
    """Weighted least-squares fit of ``A p^m + B``.

    Bounds: ``0 <= A <= 1.5``, ``0 <= B <= 1``, ``0 <= p <= 1``.  Points are
    weighted by their standard errors when those are available; otherwise the
    parameter errors are scaled by the residual variance.
    """
    m = np.asarray(curve.lengths, dtype=float)
    f = np.asarray(curve.mean, dtype=float)
    if len(np.unique(m)) < 3:
        raise ValueError("need at least three distinct sequence lengths")
    if np.ptp(f) < 1e-12:
        B = 1.0 / d
        return DecayFit(float(f[0]) - B, B, 1.0, residual=0.0, degenerate=True)

    se = np.asarray(curve.std_err, dtype=float)
    weighted = bool(np.all(se > 0))
    sigma = se if weighted else np.ones_like(f)

    B0 = 1.0 / d
    order = np.argsort(m)
    m_lo, m_hi = m[order[0]], m[order[-1]]
    a_lo, a_hi = f[order[0]] - B0, f[order[-1]] - B0
    if a_lo > 0 and a_hi > 0:
        p0 = (a_hi / a_lo) ** (1.0 / (m_hi - m_lo))
    else:
        p0 = 0.5
    lower, upper = np.array([0.0, 0.0, 0.0]), np.array([1.5, 1.0, 1.0])
    theta0 = np.clip([a_lo / max(p0 ** m_lo, 1e-12), B0, p0], lower + 1e-9, upper - 1e-9)

    def resid(theta):
        return (_model(theta, m) - f) / sigma

    sol = least_squares(resid, theta0, bounds=(lower, upper), method="trf",
                        x_scale="jac", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=10000)
    chi2 = float(np.sum(sol.fun ** 2))
    dof = max(len(f) - 3, 1)
    cov = np.linalg.pinv(sol.jac.T @ sol.jac)
    if not weighted:
        cov = cov * chi2 / dof
    errs = np.sqrt(np.clip(np.diag(cov), 0, None))
    A, B, p = (float(v) for v in sol.x)
    residual = float(np.linalg.norm(_model(sol.x, m) - f))
    if not sol.success:
        logger.warning("decay fit did not converge: %s", sol.message)
    return DecayFit(A, B, p, float(errs[0]), float(errs[1]), float(errs[2]),
                    residual, bool(sol.success), False)


def estimate_error_rate(p_ref: float, p_int: float, p_ref_err: float = 0.0,
                        p_int_err: float = 0.0, d: int = D) -> ErrorRateEstimate:
    """``r = (d-1)/d (1 - p_int/p_ref)`` with first-order error propagation."""
    if not p_ref > 0:
        raise ValueError("p_ref must be positive")
    if not (0 <= p_int <= 1 + 1e-12) or p_ref > 1 + 1e-12:
        raise ValueError("depolarization parameters must lie in [0, 1]")
    ratio = p_int / p_ref
    r = (d - 1) / d * (1 - ratio)
    rel = math.hypot(p_int_err / p_int if p_int > 0 else 0.0, p_ref_err / p_ref)
    return ErrorRateEstimate(r, (d - 1) / d * ratio * rel, p_ref, p_int, d)


@dataclass
class BenchmarkResult:
    reference: DecayFit
    interleaved: DecayFit
    estimate: ErrorRateEstimate
    reference_curve: DecayCurve | None = None
    interleaved_curve: DecayCurve | None = None


def reference_config(cfg: ProtocolConfig) -> ProtocolConfig:
    """Reference protocol matching an interleaved one (same stream and noise)."""
    if cfg.kind not in REFERENCE_KIND:
        raise ValueError(f"{cfg.kind} has no reference protocol")
    return cfg.replace(kind=REFERENCE_KIND[cfg.kind])


def interleaved_benchmark(cfg: ProtocolConfig, table: CliffordTable | None = None,
                          workers: int = 1, fast: bool = False) -> BenchmarkResult:
    """Reference and interleaved runs of ``cfg`` and the resulting error rate.

    Both runs use ``cfg.stream`` and therefore the same random Cliffords.  The
    reported ``r_err`` propagates the two fit errors as if independent, which
    overstates it when the shared sequences make the fits co-vary.
    """
    ref_cfg = reference_config(cfg)
    if fast:
        ref_fit = predict_exact(ref_cfg)
        int_fit = predict_exact(cfg)
        return BenchmarkResult(ref_fit, int_fit, estimate_error_rate(ref_fit.p, int_fit.p))
    ref_curve = run_protocol(ref_cfg, table, workers)
    int_curve = run_protocol(cfg, table, workers)
    ref_fit = fit_decay(ref_curve)
    int_fit = fit_decay(int_curve)
    est = estimate_error_rate(ref_fit.p, int_fit.p, ref_fit.p_err, int_fit.p_err)
    return BenchmarkResult(ref_fit, int_fit, est, ref_curve, int_curve)


# -------------------------------------------------------------------- sweeps

def interleaved_error_for(kappa1: float, kappa2: float, z0_over_L: float = 1.0,
                          gate_k: int = 5) -> ch.QuantumChannel:
    """Error channel of the interleaved gate under side-wire noise ``(kappa1, kappa2)``."""
    coeffs = sm.independent(kappa1, kappa2, z0_over_L)
    return ch.error_channel(sm.ideal_gate(gate_k), sm.noisy_gate(coeffs, gate_k))


@dataclass
class SweepResult:
    kappa1: np.ndarray
    kappa2: np.ndarray
    r: np.ndarray
    r_err: np.ndarray
    errors: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("kappa1,kappa2,r_est,r_std_err,error\n")
        for i, k1 in enumerate(self.kappa1):
            for j, k2 in enumerate(self.kappa2):
                msg = self.errors.get((i, j), "").replace(",", ";").replace("\n", " ")
                buf.write(f"{float(k1)!r},{float(k2)!r},{float(self.r[i, j])!r},"
                          f"{float(self.r_err[i, j])!r},{msg}\n")
        return buf.getvalue()


@dataclass
class DiagonalCuts:
    """Error rates along ``kappa1 = kappa2`` (correlated) and ``kappa1 = -kappa2``."""

    kappa: np.ndarray
    r_correlated: np.ndarray
    r_correlated_err: np.ndarray
    r_anticorrelated: np.ndarray
    r_anticorrelated_err: np.ndarray
    p_correlated: np.ndarray
    p_anticorrelated: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("kappa,r_correlated,r_correlated_std_err,r_anticorrelated,r_anticorrelated_std_err\n")
        for row in zip(self.kappa, self.r_correlated, self.r_correlated_err,
                       self.r_anticorrelated, self.r_anticorrelated_err):
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()


def evaluate_points(points, base: ProtocolConfig, *, z0_over_L: float = 1.0,
                    gate_k: int = 5, fast: bool = True, workers: int = 1,
                    table: CliffordTable | None = None) -> list:
    """Benchmark ``base`` (an interleaved kind) at each ``(kappa1, kappa2)``.

    Returns, per point, a :class:`BenchmarkResult` or the exception raised
    there.  Point ``i`` draws all its sequences from stream ``i + 1``.
    """
    if base.kind not in INTERLEAVED_KINDS:
        raise ValueError("sweeps need an interleaved protocol kind")
    table = default_table() if table is None and not fast else table

    def one(item):
        i, (k1, k2) = item
        try:
            cfg = base.replace(stream=i + 1,
                               interleaved_error=interleaved_error_for(k1, k2, z0_over_L, gate_k))
            return interleaved_benchmark(cfg, table, 1, fast)
        except Exception as exc:  # recorded per point, the sweep goes on
            logger.warning("sweep point %s failed: %s", (k1, k2), exc)
            return exc

    items = list(enumerate(points))
    if workers > 1 and not fast:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, items))
    return [one(item) for item in items]


def sweep_grid(kappa1, kappa2, base: ProtocolConfig, **kwargs) -> SweepResult:
    """Error-rate map over independent side-wire amplitudes ``kappa1 x kappa2``."""
    kappa1 = np.asarray(kappa1, dtype=float)
    kappa2 = np.asarray(kappa2, dtype=float)
    points = [(a, b) for a in kappa1 for b in kappa2]
    results = evaluate_points(points, base, **kwargs)
    r = np.full((len(kappa1), len(kappa2)), np.nan)
    r_err = np.full_like(r, np.nan)
    errors = {}
    for n, res in enumerate(results):
        i, j = divmod(n, len(kappa2))
        if isinstance(res, Exception):
            errors[(i, j)] = f"{type(res).__name__}: {res}"
        else:
            r[i, j] = res.estimate.r
            r_err[i, j] = res.estimate.r_err
    meta = {"kind": base.kind, "seed": base.seed, "n_avg": base.n_avg,
            "lengths": list(base.lengths), "fast": kwargs.get("fast", True)}
    return SweepResult(kappa1, kappa2, r, r_err, errors, meta)


def diagonal_cuts(amplitudes, base: ProtocolConfig, **kwargs) -> DiagonalCuts:
    """Correlated and anti-correlated cuts through the ``(kappa1, kappa2)`` plane."""
    amps = np.asarray(amplitudes, dtype=float)
    points = [(a, a) for a in amps] + [(a, -a) for a in amps]
    results = evaluate_points(points, base, **kwargs)
    for res in results:
        if isinstance(res, Exception):
            raise res
    n = len(amps)
    get = lambda attr, sl: np.array([getattr(res.estimate, attr) for res in results[sl]])
    p = lambda sl: np.array([res.interleaved.p for res in results[sl]])
    first, second = slice(0, n), slice(n, 2 * n)
    return DiagonalCuts(amps, get("r", first), get("r_err", first),
                        get("r", second), get("r_err", second), p(first), p(second))
