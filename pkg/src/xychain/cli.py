"""Config-driven command line front end.

Subcommands: ``trace``, ``sweep``, ``ensemble``, ``peaks``, ``predict``,
``units`` (plus ``reference``, which prints the generated key reference).
Parameters come from an INI-style config file with one section per
subcommand; every key has a documented default.  Flags override
environment variables (prefix ``XYCHAIN_``), which override the file.

Each output file embeds its fully resolved configuration and seed, so a
run is reproducible from the file alone.  Numbers are serialized with
full round-trip precision (repr, up to 17 significant digits); identical
(config, seed) pairs produce byte-identical files.

Exit codes: 0 success, 2 config/flag parse error, 3 validation error
(nothing is written), 4 numerical or I/O failure.  Errors are printed to
stderr as one-line JSON objects.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    SWEEP_AXES,
    fidelity_trace,
    revival_times,
    semiclassical_drop_site,
    semiclassical_regime,
    sweep,
)
from .disorder import EnsembleSpec
from .model import ChainSpec, FieldProfile, PerturbationCase, build_hamiltonian, vacuum_energy
from .propagator import (
    PHASE_FLOOR,
    default_time_step,
    diagonalize,
    site_amplitude_series,
    time_grid,
)
from . import units as lab_units

ENV_PREFIX = "XYCHAIN_"


class ParseError(Exception):
    """Malformed flags, config file, or key values (exit 2)."""


# ---------------------------------------------------------------------------
# Key registry: (default, type, help) per subcommand section

_CHAIN_KEYS = {
    "n": ("100", "int", "number of chain sites"),
    "profile": ("parabola", "str", "field kind: zero|parabola|pst|sine|triangle|custom"),
    "h_m": ("10.0", "float", "peak field magnitude"),
    "target_site": ("1", "int", "storage site, 1..n"),
    "coupling": ("1.0", "float", "uniform coupling J"),
    "custom_field": ("", "floats", "comma-separated h(i), used when profile=custom"),
}

_CASE_KEYS = {
    "case": ("0", "int", "perturbation case 0..4"),
    "epsilon": ("0.0", "float", "case 1 on-site strength"),
    "gamma": ("0.0", "float", "case 2 coupling strength"),
    "mu": ("0.0", "float", "case 3 next-nearest strength"),
    "eta": ("0.0", "float", "case 4 noisy coupling strength"),
    "tau": ("0.1", "float", "case 4 redraw interval"),
    "realizations": ("200", "int", "ensemble size"),
}

KEYS = {
    "trace": {
        **_CHAIN_KEYS,
        "t_max": ("200.0", "float", "trace horizon"),
        "dt": ("auto", "float|auto", "grid spacing; auto resolves the fastest oscillation"),
        "theta": ("false", "bool", "emit the retrieval phase column"),
    },
    "ensemble": {
        **_CHAIN_KEYS,
        **_CASE_KEYS,
        "t_max": ("200.0", "float", "trace horizon"),
        "dt": ("auto", "float|auto", "grid spacing"),
    },
    "sweep": {
        **_CHAIN_KEYS,
        **_CASE_KEYS,
        "axis": ("storage_site", "str", "chain_length|storage_site|field_amplitude"),
        "values": ("1:50", "values", "axis values: comma list and/or a:b integer ranges"),
        "window_start": ("100.0", "float", "window lower edge"),
        "window_end": ("1000.0", "float", "window upper edge"),
        "dt": ("auto", "float|auto", "grid spacing"),
    },
    "peaks": {
        **_CHAIN_KEYS,
        "t_max": ("200.0", "float", "trace horizon"),
        "dt": ("auto", "float|auto", "grid spacing"),
        "threshold": ("0.9", "float", "revival threshold in (0, 1)"),
    },
    "predict": {
        "h_m": ("10.0", "float", "peak field magnitude"),
        "n": ("100", "int", "number of chain sites"),
    },
    "units": {
        "s": ("23.0", "float", "lattice depth in recoil units"),
        "wavelength_nm": ("1064.0", "float", "lattice laser wavelength"),
        "mass_kg": (repr(lab_units.RB87_MASS), "float", "atomic mass (default 87Rb)"),
        "h_m": ("1.0", "float", "field amplitude for the trap frequency"),
        "n": ("100", "int", "chain length for the trap frequency"),
        "t": ("1.0", "float", "dimensionless time to convert"),
    },
}

RUN_COMMANDS = tuple(KEYS)


def _fmt(x: float) -> str:
    """Round-trip-exact decimal text for a float."""
    return repr(float(x))


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ParseError(f"expected a boolean, got {text!r}")


def _parse_float(text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ParseError(f"expected a number, got {text!r}") from exc


def _parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ParseError(f"expected an integer, got {text!r}") from exc


def _parse_values(text: str) -> list[float]:
    """Comma/space separated numbers; ``a:b`` expands to the inclusive
    integer range."""
    out: list[float] = []
    for token in text.replace(",", " ").split():
        if ":" in token:
            a, _, b = token.partition(":")
            lo, hi = _parse_int(a), _parse_int(b)
            if hi < lo:
                raise ParseError(f"empty range {token!r}")
            out.extend(float(v) for v in range(lo, hi + 1))
        else:
            out.append(_parse_float(token))
    if not out:
        raise ParseError("values must be nonempty")
    return out


def _parse_float_list(text: str) -> list[float]:
    return [_parse_float(tok) for tok in text.replace(",", " ").split()]


# ---------------------------------------------------------------------------
# Config resolution


def _resolve_section(command: str, config_path: str | None, overrides: dict[str, str]) -> dict[str, str]:
    resolved = {k: v[0] for k, v in KEYS[command].items()}
    if config_path:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(config_path, "r", encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ParseError(f"cannot read config {config_path}: {exc}") from exc
        except configparser.Error as exc:
            raise ParseError(f"malformed config {config_path}: {exc}") from exc
        if parser.has_section(command):
            for key, value in parser.items(command):
                if key not in resolved:
                    raise ParseError(f"unknown key {key!r} in section [{command}]")
                resolved[key] = value
    for key, value in overrides.items():
        if key not in resolved:
            raise ParseError(f"unknown override key {key!r} for {command}")
        resolved[key] = value
    return resolved


def _chain_from(cfg: dict[str, str]) -> ChainSpec:
    kind = cfg["profile"].strip().lower()
    custom = None
    if kind == "custom":
        custom = _parse_float_list(cfg["custom_field"])
        if not custom:
            raise ValueError("profile=custom needs custom_field values")
    profile = FieldProfile(kind, _parse_float(cfg["h_m"]), tuple(custom) if custom else None)
    return ChainSpec(
        N=_parse_int(cfg["n"]),
        profile=profile,
        J=_parse_float(cfg["coupling"]),
        target_site=_parse_int(cfg["target_site"]),
    )


def _case_from(cfg: dict[str, str]) -> PerturbationCase:
    return PerturbationCase(
        case_id=_parse_int(cfg["case"]),
        epsilon=_parse_float(cfg["epsilon"]),
        gamma=_parse_float(cfg["gamma"]),
        mu=_parse_float(cfg["mu"]),
        eta=_parse_float(cfg["eta"]),
        tau=_parse_float(cfg["tau"]),
    )


def _dt_from(cfg: dict[str, str]) -> float | None:
    raw = cfg["dt"].strip().lower()
    return None if raw == "auto" else _parse_float(raw)


# ---------------------------------------------------------------------------
# Runners: resolved config -> record dict


def _run_trace(cfg: dict[str, str], seed: int, threads: int) -> dict:
    chain = _chain_from(cfg)
    t_max = _parse_float(cfg["t_max"])
    dt = _dt_from(cfg)
    if _parse_bool(cfg["theta"]):
        step = dt if dt is not None else default_time_step(chain.profile.h_m)
        if step <= 0:
            raise ValueError("dt must be positive")
        times = time_grid(t_max, step)
        field = chain.field()
        spec = diagonalize(build_hamiltonian(chain, field))
        c = site_amplitude_series(spec, chain.target_site, times)
        F = np.clip(np.abs(c), 0.0, 1.0)
        phase = np.angle(c * np.exp(1j * vacuum_energy(field) * times))
        phase[np.abs(c) < PHASE_FLOOR] = np.nan  # phase undefined at zero amplitude
        rows = np.column_stack([times, F, phase])
        return {"columns": ["t", "F", "theta"], "rows": rows}
    curve = fidelity_trace(chain, None, t_max=t_max, dt=dt, threads=threads)
    return {"columns": ["t", "F"], "rows": np.column_stack([curve.times, curve.values])}


def _run_ensemble(cfg: dict[str, str], seed: int, threads: int) -> dict:
    chain = _chain_from(cfg)
    ens = EnsembleSpec(_parse_int(cfg["realizations"]), seed, _case_from(cfg))
    curve = fidelity_trace(chain, ens, t_max=_parse_float(cfg["t_max"]), dt=_dt_from(cfg),
                           threads=threads)
    return {"columns": ["t", "F"], "rows": np.column_stack([curve.times, curve.values])}


def _run_sweep(cfg: dict[str, str], seed: int, threads: int) -> dict:
    chain = _chain_from(cfg)
    axis = cfg["axis"].strip().lower()
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    values = _parse_values(cfg["values"])
    case = _case_from(cfg)
    ens = None
    if case.case_id != 0:
        ens = EnsembleSpec(_parse_int(cfg["realizations"]), seed, case)
    window = (_parse_float(cfg["window_start"]), _parse_float(cfg["window_end"]))
    table = sweep(chain, axis, values, ensemble=ens, window=window, dt=_dt_from(cfg),
                  threads=threads)
    rows = np.column_stack([table.values, table.f_max, table.t_at_max])
    return {"columns": [axis, "F_max", "t_at_max"], "rows": rows}


def _run_peaks(cfg: dict[str, str], seed: int, threads: int) -> dict:
    chain = _chain_from(cfg)
    curve = fidelity_trace(chain, None, t_max=_parse_float(cfg["t_max"]), dt=_dt_from(cfg))
    threshold = _parse_float(cfg["threshold"])
    peaks = revival_times(curve, threshold)
    vals = [float(curve.values[np.argmin(np.abs(curve.times - p))]) for p in peaks]
    rows = np.array([peaks, vals]).T if peaks else np.empty((0, 2))
    return {"columns": ["t", "F"], "rows": rows}


def _run_predict(cfg: dict[str, str], seed: int, threads: int) -> dict:
    h_m = _parse_float(cfg["h_m"])
    N = _parse_int(cfg["n"])
    if N < 2:
        raise ValueError("n must be >= 2")
    regime = semiclassical_regime(h_m)
    result = {
        "h_m": h_m,
        "n": N,
        "breathing_regime": regime,
        "drop_site_estimate": semiclassical_drop_site(h_m, N) if regime else None,
    }
    return {"result": result}


def _run_units(cfg: dict[str, str], seed: int, threads: int) -> dict:
    ctx = lab_units.LatticeContext(
        s=_parse_float(cfg["s"]),
        k_L=2.0 * np.pi / (_parse_float(cfg["wavelength_nm"]) * 1e-9),
        m=_parse_float(cfg["mass_kg"]),
    )
    tun = lab_units.tunneling_energy(ctx)
    omega = lab_units.trap_frequency(ctx, _parse_float(cfg["h_m"]), _parse_int(cfg["n"]))
    t = _parse_float(cfg["t"])
    result = {
        "recoil_energy_j": lab_units.recoil_energy(ctx),
        "tunneling_j": tun.joules,
        "tunneling_over_recoil": tun.recoils,
        "hbar_over_j_s": lab_units.HBAR / tun.joules,
        "omega_rad_per_s": omega,
        "omega_hz": omega / (2.0 * np.pi),
        "t": t,
        "t_seconds": lab_units.time_to_seconds(t, ctx),
    }
    return {"result": result}


_RUNNERS = {
    "trace": _run_trace,
    "ensemble": _run_ensemble,
    "sweep": _run_sweep,
    "peaks": _run_peaks,
    "predict": _run_predict,
    "units": _run_units,
}


# ---------------------------------------------------------------------------
# Emission


def _emit_csv(path: Path, command: str, cfg: dict[str, str], seed: int, record: dict) -> None:
    lines = [f"# xychain {command}"]
    for key, value in cfg.items():
        lines.append(f"# {key} = {value}")
    lines.append(f"# seed = {seed}")
    if "result" in record:
        lines.append("key,value")
        for key, value in record["result"].items():
            lines.append(f"{key},{_serialize_scalar(value)}")
    else:
        lines.append(",".join(record["columns"]))
        for row in record["rows"]:
            lines.append(",".join(_serialize_scalar(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _serialize_scalar(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v).lower() if v is not None else "none"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    x = float(v)
    return "nan" if math.isnan(x) else _fmt(x)


def _jsonable(v):
    if v is None or isinstance(v, (bool, int, str)):
        return v
    x = float(v)
    return None if math.isnan(x) else x


def _emit_json(path: Path, command: str, cfg: dict[str, str], seed: int, record: dict) -> None:
    doc = {"command": command, "config": dict(cfg), "seed": seed}
    if "result" in record:
        doc["result"] = {k: _jsonable(v) for k, v in record["result"].items()}
    else:
        doc["columns"] = record["columns"]
        doc["rows"] = [[_jsonable(v) for v in row] for row in record["rows"]]
    path.write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def read_embedded_config(path: str | Path) -> tuple[str, dict[str, str], int]:
    """Recover (command, config, seed) from an emitted CSV or JSON file,
    sufficient to reproduce it exactly."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text(encoding="utf-8"))
        return doc["command"], dict(doc["config"]), int(doc["seed"])
    command = None
    cfg: dict[str, str] = {}
    seed = 0
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.startswith("#"):
            break
        body = line[1:].strip()
        if body.startswith("xychain "):
            command = body.split(None, 1)[1]
        elif "=" in body:
            key, _, value = body.partition("=")
            if key.strip() == "seed":
                seed = int(value.strip())
            else:
                cfg[key.strip()] = value.strip()
    if command is None:
        raise ParseError(f"{path} does not carry an embedded xychain header")
    return command, cfg, seed


# ---------------------------------------------------------------------------
# Argument parsing and entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # machine-readable, still exit 2
        print(json.dumps({"error": "parse", "message": message}), file=sys.stderr)
        raise SystemExit(2)


def _build_parser() -> _Parser:
    parser = _Parser(prog="xychain", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for command in RUN_COMMANDS:
        keys_doc = "\n".join(
            f"  {key:<14} default {default!r:<26} {help_}"
            for key, (default, _, help_) in KEYS[command].items()
        )
        p = sub.add_parser(
            command,
            help=f"run the {command} pipeline",
            description=f"[{command}] config keys:\n{keys_doc}",
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.add_argument("--config", default=None, help="INI config file (section [%s])" % command)
        p.add_argument("--seed", type=int, default=None, help="ensemble base seed (default 0)")
        p.add_argument("--out", default=None, help="output directory (default .)")
        p.add_argument("--format", choices=("csv", "json"), default=None, help="output format")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default 1)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a single config key")
    sub.add_parser("reference", help="print the generated config-key reference")
    return parser


def _env(name: str) -> str | None:
    return os.environ.get(ENV_PREFIX + name)


def _reference_text() -> str:
    lines = ["xychain configuration reference", ""]
    lines.append("Global flags/env: --config (XYCHAIN_CONFIG), --seed (XYCHAIN_SEED),")
    lines.append("--out (XYCHAIN_OUT), --format (XYCHAIN_FORMAT), --threads (XYCHAIN_THREADS).")
    lines.append("Precedence: flag > environment > config file > default.")
    for command in RUN_COMMANDS:
        lines.append("")
        lines.append(f"[{command}]")
        for key, (default, type_, help_) in KEYS[command].items():
            lines.append(f"  {key} = {default}   ({type_}) {help_}")
    return "\n".join(lines)


def run(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "reference":
        print(_reference_text())
        return 0

    config_path = args.config if args.config is not None else _env("CONFIG")
    seed_raw = args.seed if args.seed is not None else _env("SEED")
    out_raw = args.out if args.out is not None else _env("OUT")
    fmt = args.format if args.format is not None else (_env("FORMAT") or "csv")
    threads_raw = args.threads if args.threads is not None else _env("THREADS")

    if fmt not in ("csv", "json"):
        raise ParseError(f"format must be csv or json, got {fmt!r}")
    seed = _parse_int(str(seed_raw)) if seed_raw is not None else 0
    if seed < 0:
        raise ParseError("seed must be nonnegative")
    threads = _parse_int(str(threads_raw)) if threads_raw is not None else 1
    if threads < 1:
        raise ParseError("threads must be >= 1")

    overrides = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ParseError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()

    cfg = _resolve_section(args.command, config_path, overrides)
    record = _RUNNERS[args.command](cfg, seed, threads)

    out_dir = Path(out_raw) if out_raw else Path(".")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{args.command}.{fmt}"
        if fmt == "csv":
            _emit_csv(path, args.command, cfg, seed, record)
        else:
            _emit_json(path, args.command, cfg, seed, record)
    except OSError as exc:
        raise _IOFailure(str(exc)) from exc
    print(path)
    return 0


class _IOFailure(Exception):
    pass


def main(argv=None) -> int:
    try:
        return run(argv)
    except ParseError as exc:
        print(json.dumps({"error": "parse", "message": str(exc)}), file=sys.stderr)
        return 2
    except ValueError as exc:
        print(json.dumps({"error": "validation", "message": str(exc)}), file=sys.stderr)
        return 3
    except _IOFailure as exc:
        print(json.dumps({"error": "io", "message": str(exc)}), file=sys.stderr)
        return 4
    except Exception as exc:  # numerical failures: convergence, overflow, ...
        print(json.dumps({"error": "numerical", "message": str(exc)}), file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
