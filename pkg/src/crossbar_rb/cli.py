"""Command-line driver writing CSV/JSON data files.

Every run writes a JSON sidecar holding the effective configuration; passing
that sidecar back through ``--config`` reproduces the run.  Plain config files
are flat ``key = value`` lines (``#`` starts a comment); command-line flags
override file values.

Exit codes: 0 success, 2 configuration error, 3 fit did not converge.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import channels as ch
from . import field_profile as fp
from . import rb_engine as rb
from . import spin_model as sm
from .clifford_group import CliffordTable, GROUP_ORDER, generate_table, load_or_generate

logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_FIT = 3


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _ints(text):
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(v) for v in str(text).split(",") if v.strip()]


# key -> (parser, default, help)
KEYS = {
    "seed": (int, 0, "master seed"),
    "workers": (int, 1, "parallel workers (never changes results)"),
    "out": (str, "results", "output directory"),
    "cache_dir": (str, ".clifford_cache", "Clifford table cache directory"),
    "mode": (str, None, "fast (exact) or montecarlo"),
    "n_avg": (int, 1000, "random sequences per length"),
    "m_max": (int, None, "longest sequence (default 200, or 30 for mirb)"),
    "n_lengths": (int, 12, "number of sequence lengths"),
    "lengths": (_ints, None, "explicit comma-separated sequence lengths"),
    "scenario": (str, "correlated", "correlated, anticorrelated, independent or noiseless"),
    "kappa": (float, 0.05, "noise amplitude for (anti)correlated scenarios"),
    "kappa1": (float, 0.0, "side-wire amplitude 1 (independent scenario)"),
    "kappa2": (float, 0.0, "side-wire amplitude 2 (independent scenario)"),
    "z0_over_L": (float, 1.0, "wire depth over half spacing"),
    "gate_k": (int, 5, "interleaved gate index (omega = 4k J)"),
    "projector": (str, "T0", "measurement projector: T0, D1S, D2S, D1A, D2A"),
    "initial_state": (str, "uu", "uu, ud, du, dd or T0; also the measured state"),
    "clifford_noise_p": (float, 1.0, "depolarizing parameter of the Clifford noise"),
    "x_min": (float, 0.0, "field profile start, units of L"),
    "x_max": (float, 4.0, "field profile end, units of L"),
    "x_points": (int, 81, "field profile samples"),
    "cutoff": (int, 100, "wire-pair cutoff of the lattice sum"),
    "kappa_min": (float, -0.1, "sweep axis start"),
    "kappa_max": (float, 0.1, "sweep axis end"),
    "kappa_points": (int, 11, "sweep axis samples"),
    "cut_amplitudes": (_floats, [0.02, 0.04, 0.06, 0.08, 0.1], "diagonal cut amplitudes"),
    "protocol": (str, "irb", "sweep protocol: irb or modified_irb"),
}


class ConfigError(ValueError):
    pass


def parse_config_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix == ".json":
        data = json.loads(text)
        return dict(data.get("config", data))
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def _coerce(values: dict) -> dict:
    out = {}
    for key, value in values.items():
        if key not in KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        if value is None:
            out[key] = None
            continue
        try:
            out[key] = KEYS[key][0](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return out


def _validate(cfg: dict) -> None:
    for key, value in cfg.items():
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(f"{key} must be finite")
    if cfg["n_avg"] < 1 or cfg["workers"] < 1 or cfg["n_lengths"] < 3:
        raise ConfigError("n_avg and workers must be >= 1, n_lengths >= 3")
    if cfg["z0_over_L"] <= 0:
        raise ConfigError("z0_over_L must be positive")
    if cfg["gate_k"] < 1:
        raise ConfigError("gate_k must be >= 1")
    if cfg["mode"] not in (None, "fast", "montecarlo"):
        raise ConfigError("mode must be fast or montecarlo")
    if cfg["scenario"] not in ("correlated", "anticorrelated", "independent", "noiseless"):
        raise ConfigError(f"unknown scenario {cfg['scenario']!r}")
    if cfg["projector"] not in _PROJECTORS:
        raise ConfigError(f"unknown projector {cfg['projector']!r}")
    if cfg["initial_state"] not in ("uu", "ud", "du", "dd", "T0"):
        raise ConfigError(f"unknown initial state {cfg['initial_state']!r}")
    if not -1 / 15 <= cfg["clifford_noise_p"] <= 1:
        raise ConfigError("clifford_noise_p must lie in [-1/15, 1]")
    if cfg["x_points"] < 1 or cfg["x_max"] < cfg["x_min"] or cfg["cutoff"] < 1:
        raise ConfigError("bad field profile range")
    if cfg["kappa_points"] < 1 or cfg["kappa_max"] < cfg["kappa_min"]:
        raise ConfigError("bad sweep range")
    if cfg["protocol"] not in rb.INTERLEAVED_KINDS:
        raise ConfigError("protocol must be irb or modified_irb")
    if cfg["lengths"] is not None:
        ls = cfg["lengths"]
        if len(ls) < 3 or ls[0] < 1 or any(b <= a for a, b in zip(ls, ls[1:])):
            raise ConfigError("lengths must be >= 3 strictly increasing positive integers")
    if cfg["m_max"] is not None and cfg["m_max"] < 3:
        raise ConfigError("m_max must be >= 3")


_PROJECTORS = {
    "T0": lambda d: d.a1, "D1A": lambda d: d.a1, "D2A": lambda d: d.a2,
    "D1S": lambda d: d.s1, "D2S": lambda d: d.s2,
}


def effective_config(args: argparse.Namespace) -> dict:
    cfg = {key: entry[1] for key, entry in KEYS.items()}
    if args.config:
        cfg.update(_coerce(parse_config_file(args.config)))
    flags = {key: getattr(args, key) for key in KEYS if getattr(args, key, None) is not None}
    cfg.update(_coerce(flags))
    if getattr(args, "noiseless", False):
        cfg["clifford_noise_p"] = 1.0
        cfg["scenario"] = "noiseless"
    if getattr(args, "fast", False):
        cfg["mode"] = "fast"
    if getattr(args, "montecarlo", False):
        cfg["mode"] = "montecarlo"
    _validate(cfg)
    return cfg


# ------------------------------------------------------------------- helpers

def _lengths(cfg: dict, default_max: int) -> tuple[int, ...]:
    if cfg["lengths"] is not None:
        return tuple(cfg["lengths"])
    return rb.default_lengths(cfg["m_max"] or default_max, cfg["n_lengths"])


def _state(cfg: dict) -> np.ndarray:
    label = cfg["initial_state"]
    psi = sm.triplet_zero() if label == "T0" else sm.basis_state(label)
    return ch.density_matrix(psi)


def _kappas(cfg: dict) -> tuple[float, float]:
    scenario, k = cfg["scenario"], cfg["kappa"]
    if scenario == "correlated":
        return k, k
    if scenario == "anticorrelated":
        return k, -k
    if scenario == "independent":
        return cfg["kappa1"], cfg["kappa2"]
    return 0.0, 0.0


def _base_config(cfg: dict, kind: str, default_max: int) -> rb.ProtocolConfig:
    state = _state(cfg)
    k1, k2 = _kappas(cfg)
    meas = None
    if kind.startswith("modified"):
        psi = _PROJECTORS[cfg["projector"]](sm.dark_states())
        meas = ch.measurement_channel(sm.projector(psi))
    return rb.ProtocolConfig(
        kind=kind, lengths=_lengths(cfg, default_max), n_avg=cfg["n_avg"],
        seed=cfg["seed"], rho0=state, measurement=state,
        clifford_noise=ch.QuantumChannel.depolarizing(cfg["clifford_noise_p"]),
        interleaved_error=rb.interleaved_error_for(k1, k2, cfg["z0_over_L"], cfg["gate_k"]),
        measurement_channel=meas, gate=sm.ideal_gate(cfg["gate_k"]),
    )


class _Artifacts:
    """Tracks written files so a failed run leaves nothing partial behind."""

    def __init__(self, out: Path):
        self.out = out
        self.written: list[Path] = []

    def write(self, name: str, text: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        path.write_text(text)
        self.written.append(path)
        return path

    def json(self, name: str, payload: dict) -> Path:
        return self.write(name, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def discard(self) -> None:
        for path in self.written:
            path.unlink(missing_ok=True)


def _table(cfg: dict) -> CliffordTable:
    return load_or_generate(cfg["cache_dir"])


def _fit_report(fit: rb.DecayFit, protocol: str, cfg: dict) -> dict:
    report = fit.as_dict()
    report.update(protocol=protocol, seed=cfg["seed"])
    return report


# ------------------------------------------------------------------ commands

def cmd_field(cfg: dict, art: _Artifacts) -> int:
    geo = fp.WireArrayConfig.from_ratio(cfg["z0_over_L"])
    xs = np.linspace(cfg["x_min"], cfg["x_max"], cfg["x_points"])
    rows = []
    for x in xs:
        b = fp.total_field(float(x), geo, cfg["cutoff"])
        rows.append((x, b.bx, b.bz, "sum"))
    for x in xs:
        k = int(round((x - 1) / 2))
        if abs(x - fp.operation_point(k, geo)) < geo.half_spacing:
            b = fp.calibrated_two_wire_field(float(x), k, geo)
            rows.append((x, b.bx, b.bz, "two_wire"))
    lo, hi = math.ceil(cfg["x_min"] - 1e-12), math.floor(cfg["x_max"] + 1e-12)
    for n in range(lo, hi + 1):
        b = fp.closed_form_operation_point(n // 2, geo, midpoint=(n % 2 == 0))
        rows.append((float(n), b.bx, b.bz, "closed"))
    text = "x_over_L,Bx_over_B0,Bz_over_B0,method\n" + "".join(
        f"{float(x)!r},{float(bx)!r},{float(bz)!r},{m}\n" for x, bx, bz, m in rows)
    art.write("field.csv", text)
    art.json("field.json", {"command": "field", "config": cfg})
    print(f"wrote {len(rows)} field samples to {art.out / 'field.csv'}")
    return 0


def cmd_clifford(args, cfg: dict) -> int:
    if args.verify:
        table = CliffordTable.load(args.verify)
        rng = np.random.default_rng(cfg["seed"])
        pairs = rng.integers(0, len(table), size=(1000, 2))
        closed = all(table.matrices[a] @ table.matrices[b] in table for a, b in pairs)
        ok = len(table) == GROUP_ORDER and closed
        print(f"{args.verify}: {len(table)} elements, closure {'ok' if closed else 'FAILED'}")
        return 0 if ok else EXIT_FIT
    table = generate_table()
    path = Path(args.out) if args.out else Path(cfg["cache_dir"]) / "clifford2q_v1.bin"
    path.parent.mkdir(parents=True, exist_ok=True)
    table.save(path)
    print(f"wrote {len(table)} Clifford elements to {path}")
    return 0


def cmd_rb(cfg: dict, art: _Artifacts) -> int:
    fast = cfg["mode"] == "fast"
    pcfg = _base_config(cfg, "standard_rb", 200)
    if fast:
        curve, fit = rb.exact_curve(pcfg), rb.predict_exact(pcfg)
    else:
        curve = rb.run_protocol(pcfg, _table(cfg), cfg["workers"])
        fit = rb.fit_decay(curve)
    art.write("rb_decay.csv", curve.to_csv())
    report = _fit_report(fit, "standard_rb", cfg)
    report["config"] = cfg
    art.json("rb_fit.json", report)
    r = rb.estimate_error_rate(1.0, fit.p, 0.0, fit.p_err)
    flag = " (degenerate: no decay)" if fit.degenerate else ""
    print(f"p = {fit.p:.8g} +/- {fit.p_err:.2g}{flag}; r = {r.r:.6g} +/- {r.r_err:.2g}")
    return 0 if fit.converged else EXIT_FIT


def _cmd_interleaved(cfg: dict, art: _Artifacts, kind: str, prefix: str, default_max: int) -> int:
    fast = cfg["mode"] == "fast"
    pcfg = _base_config(cfg, kind, default_max)
    table = None if fast else _table(cfg)
    res = rb.interleaved_benchmark(pcfg, table, cfg["workers"], fast)
    if fast:
        ref_curve = rb.exact_curve(rb.reference_config(pcfg))
        int_curve = rb.exact_curve(pcfg)
    else:
        ref_curve, int_curve = res.reference_curve, res.interleaved_curve
    art.write(f"{prefix}_reference_decay.csv", ref_curve.to_csv())
    art.write(f"{prefix}_interleaved_decay.csv", int_curve.to_csv())
    ref_kind = rb.REFERENCE_KIND[kind]
    art.json(f"{prefix}_fit.json", {
        "reference": _fit_report(res.reference, ref_kind, cfg),
        "interleaved": _fit_report(res.interleaved, kind, cfg),
        "r_est": res.estimate.r, "r_std_err": res.estimate.r_err,
        "config": cfg,
    })
    print(f"r_est = {res.estimate.r:.6g} +/- {res.estimate.r_err:.2g} "
          f"(p_ref = {res.reference.p:.8g}, p_int = {res.interleaved.p:.8g})")
    return 0 if res.reference.converged and res.interleaved.converged else EXIT_FIT


def cmd_sweep(cfg: dict, art: _Artifacts) -> int:
    fast = cfg["mode"] != "montecarlo"
    kind = cfg["protocol"]
    base = _base_config(cfg, kind, 200 if kind == "irb" else 30)
    table = None if fast else _table(cfg)
    opts = dict(z0_over_L=cfg["z0_over_L"], gate_k=cfg["gate_k"], fast=fast,
                workers=cfg["workers"], table=table)
    axis = np.linspace(cfg["kappa_min"], cfg["kappa_max"], cfg["kappa_points"])
    grid = rb.sweep_grid(axis, axis, base, **opts)
    cuts = rb.diagonal_cuts(cfg["cut_amplitudes"], base, **opts)
    art.write("sweep.csv", grid.to_csv())
    art.write("sweep_cuts.csv", cuts.to_csv())
    art.json("sweep.json", {"command": "sweep", "failed_points": len(grid.errors),
                            "config": cfg})
    print(f"swept {grid.r.size} points ({len(grid.errors)} failed); cuts at {len(cuts.kappa)} amplitudes")
    return 0


# ---------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file or JSON sidecar")
    common.add_argument("-v", "--verbose", action="store_true")
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--fast", action="store_true", help="exact prediction instead of sampling")
    mode.add_argument("--montecarlo", action="store_true", help="sample random sequences")
    for key, (_, _, help_text) in KEYS.items():
        if key == "mode":
            continue
        common.add_argument("--" + key.replace("_", "-"), dest=key, default=None, help=help_text)

    parser = argparse.ArgumentParser(prog="crossbar-rb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("field", parents=[common], help="field profile of the wire array")
    cl = sub.add_parser("clifford", parents=[common], help="generate or verify the Clifford table")
    cl.add_argument("--generate", action="store_true")
    cl.add_argument("--verify", metavar="PATH")
    rbp = sub.add_parser("rb", parents=[common], help="standard randomized benchmarking")
    rbp.add_argument("--noiseless", action="store_true")
    sub.add_parser("irb", parents=[common], help="interleaved randomized benchmarking")
    sub.add_parser("mirb", parents=[common], help="measurement-modified interleaved RB")
    sub.add_parser("sweep", parents=[common], help="error-rate map over (kappa1, kappa2)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        cfg = effective_config(args)
    except (ConfigError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "clifford":
        if not (args.generate or args.verify):
            print("config error: clifford needs --generate or --verify", file=sys.stderr)
            return EXIT_CONFIG
        return cmd_clifford(args, cfg)

    art = _Artifacts(Path(cfg["out"]))
    commands = {
        "field": lambda: cmd_field(cfg, art),
        "rb": lambda: cmd_rb(cfg, art),
        "irb": lambda: _cmd_interleaved(cfg, art, "irb", "irb", 200),
        "mirb": lambda: _cmd_interleaved(cfg, art, "modified_irb", "mirb", 30),
        "sweep": lambda: cmd_sweep(cfg, art),
    }
    try:
        return commands[args.command]()
    except ValueError as exc:
        art.discard()
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BaseException:
        art.discard()
        raise


if __name__ == "__main__":
    sys.exit(main())
