"""Command-line front end: ``trimerheat <subcommand> [--config FILE] [flags]``.

Every run writes a data table and a JSON manifest into the output directory.
Settings resolve as flags over config file over built-in defaults; the
output directory falls back to ``$TRIMERHEAT_OUTPUT_DIR`` and then ``.``.

Exit status: 0 success, 2 bad configuration, 3 solver or physics error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import __version__, analysis, closed, exact, kernels, lindblad
from .errors import DomainError, TrimerError
from .model import TrimerParams

OUTPUT_ENV = "TRIMERHEAT_OUTPUT_DIR"

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4

UNITS = {
    "currents": "J",
    "heat_currents": "gamma*omega",
    "temperatures": "omega",
    "theta": "rad",
    "time_closed": "1/J",
    "tau_ss": "1/gamma",
    "omega_c": "omega",
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    # physics
    J_over_gamma: float = 0.1
    theta: float = math.pi / 2
    gamma: float = 0.03
    T_hot: float = 5.0
    T_cold: float = 3.0
    omega: float = 1.0
    delta: float = 0.0
    epsilon: float = 0.0
    # solvers and baths
    solver: str = "lindblad"
    n_bath: int = 400
    omega_c: float = 3.0
    tau_ss: float = 6.0
    independent_cold: bool = False
    # grids
    theta_points: int = 61
    ratios: list[float] = field(default_factory=lambda: [0.1, 0.6, 1.2])
    J_over_omega: float = closed.DEFAULT_J_OVER_OMEGA
    initial_site: int = 2
    t_max: float = 10.0
    t_points: int = 201
    grid_points: int = 41
    grid_range: float = 0.3
    threshold: float = 0.1
    bracket: list[float] = field(default_factory=lambda: [0.1, 2.0])
    tol: float = 0.02
    # output
    output_dir: str | None = None
    format: str = "csv"
    workers: int | None = None

    def params(self) -> TrimerParams:
        return TrimerParams.from_ratio(
            self.J_over_gamma,
            theta=self.theta,
            gamma=self.gamma,
            T_hot=self.T_hot,
            T_cold=self.T_cold,
            omega=self.omega,
            delta=self.delta,
            epsilon=self.epsilon,
        )

    def validate(self) -> None:
        if self.solver not in ("lindblad", "exact"):
            raise ConfigError(f"solver must be 'lindblad' or 'exact', not {self.solver!r}")
        if self.format not in ("csv", "tsv"):
            raise ConfigError("format must be 'csv' or 'tsv'")
        positive_ints = ("n_bath", "theta_points", "t_points", "grid_points")
        for name in positive_ints:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.initial_site not in (1, 2, 3):
            raise ConfigError("initial_site must be 1, 2 or 3")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if len(self.bracket) != 2:
            raise ConfigError("bracket needs exactly two values")
        if not (self.omega_c > 0 and self.tau_ss > 0 and self.tol > 0 and self.t_max >= 0):
            raise ConfigError("omega_c, tau_ss and tol must be positive, t_max non-negative")
        if not 0 <= self.grid_range < 1:
            raise ConfigError("grid_range must lie in [0, 1)")
        try:
            self.params()
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc


FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
SECTIONS = ("params", "bath", "grid", "output")


def _coerce(name: str, value):
    kind = FIELDS[name].type
    try:
        if value is None:
            if "None" in kind:
                return None
            raise ConfigError(f"{name} may not be null")
        if kind.startswith("list"):
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            return [float(v) for v in value]
        if kind.startswith("int"):
            if isinstance(value, float) and not value.is_integer():
                raise ConfigError(f"{name} must be an integer")
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "bool":
            if isinstance(value, str):
                if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise ConfigError(f"{name} must be a boolean")
                return value.lower() in ("true", "1", "yes")
            return bool(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {value!r}") from exc


def flatten_config(data) -> dict:
    """Merge the optional sections into one flat mapping; reject unknown keys."""
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping")
    flat: dict = {}
    for key, value in data.items():
        if key in SECTIONS and isinstance(value, dict):
            for k, v in value.items():
                if k not in FIELDS:
                    raise ConfigError(f"unknown config key {key}.{k}")
                flat[k] = v
        elif key in FIELDS:
            flat[key] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return flat


def load_config_file(path: str | os.PathLike) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return flatten_config(data)


def resolve_config(file_values: dict, flag_values: dict) -> RunConfig:
    merged = {**file_values, **{k: v for k, v in flag_values.items() if v is not None}}
    cfg = RunConfig(**{k: _coerce(k, v) for k, v in merged.items()})
    if cfg.output_dir is None:
        cfg.output_dir = os.environ.get(OUTPUT_ENV, ".")
    cfg.validate()
    return cfg


# ----------------------------------------------------------------------------- output


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_table(path: Path, columns, rows) -> None:
    delim = "\t" if path.suffix == ".tsv" else ","
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter=delim, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_manifest(path: Path, manifest: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ----------------------------------------------------------------------------- subcommands


def _bath_kwargs(cfg: RunConfig, p: TrimerParams) -> dict:
    return {"n_bath": cfg.n_bath, "omega_c": cfg.omega_c * p.omega, "tau_ss": cfg.tau_ss / p.gamma}


def cmd_steady(cfg: RunConfig):
    p = cfg.params()
    row = analysis._lindblad_point(p)
    rep = lindblad.steady_state(p, with_temperatures=False)
    for k in range(3):
        row[f"n{k + 1}"] = float(rep.occupations[k])
    cols = analysis.LINDBLAD_COLUMNS + ("entropy_production_bath", "n1", "n2", "n3")
    return cols, [row], {}


def cmd_sweep_theta(cfg: RunConfig):
    p = cfg.params()
    kw = _bath_kwargs(cfg, p) if cfg.solver == "exact" else {}
    res = analysis.sweep_theta(cfg.solver, p, analysis.theta_grid(cfg.theta_points), workers=cfg.workers, **kw)
    return res.columns, res.rows, {"provenance": res.provenance}


def cmd_closed(cfg: RunConfig):
    p = closed.closed_params(cfg.theta, cfg.J_over_omega, cfg.omega)
    run = closed.evolve_closed(p, initial_site=cfg.initial_site, times=np.linspace(0, cfg.t_max, cfg.t_points))
    rows = []
    for k, t in enumerate(run.times):
        occ = run.occupations[k]
        j21, j23, j13 = run.currents[k]
        rows.append({"t": t, "n1": occ[0], "n2": occ[1], "n3": occ[2], "J21": j21, "J23": j23, "J13": j13})
    return ("t", "n1", "n2", "n3", "J21", "J23", "J13"), rows, {}


def cmd_exact(cfg: RunConfig):
    p = cfg.params()
    hot, cold = exact.default_baths(p, cfg.omega_c * p.omega, cfg.n_bath)
    res = exact.quasi_steady_currents(
        p, hot, cold, cfg.tau_ss / p.gamma, independent_cold=cfg.independent_cold, check=False
    )
    ref = lindblad.steady_state(p, with_temperatures=False)
    row = {
        "theta": p.theta,
        "J21": res.J21 / p.J,
        "J23": res.J23 / p.J,
        "J13": res.J13 / p.J,
        "J13_lindblad": ref.J13 / p.J,
        "relative_drift": res.relative_drift,
        "recurrence_ok": res.recurrence_ok,
    }
    cols = ("theta", "J21", "J23", "J13", "J13_lindblad", "relative_drift", "recurrence_ok")
    extra = {"diagnostics": {"tau_rec": res.tau_rec, "window": res.window, "n_modes": res.n_modes, "drift": res.drift}}
    return cols, [row], extra


def cmd_critical_ratio(cfg: RunConfig):
    p = cfg.params()
    res = analysis.find_critical_ratio(
        p, tuple(cfg.bracket), cfg.tol, n=cfg.n_bath, omega_c=cfg.omega_c * p.omega, tau_ss=cfg.tau_ss / p.gamma
    )
    cols = ("J_over_gamma", "J13", "J13_lindblad", "relative_drift")
    return cols, res.steps, {"result": {"estimate": res.estimate, "bracket": res.bracket, "T_cold": res.T_cold}}


def cmd_fidelity(cfg: RunConfig):
    p = cfg.params()
    rows = analysis.fidelity_comparison(
        p, cfg.ratios, analysis.theta_grid(cfg.theta_points), workers=cfg.workers, **_bath_kwargs(cfg, p)
    )
    return ("J_over_gamma", "theta", "fidelity"), rows, {}


def cmd_error_grid(cfg: RunConfig):
    p = cfg.params()
    axis = np.linspace(-cfg.grid_range, cfg.grid_range, cfg.grid_points)
    g = analysis.error_grid(p, axis, axis, cfg.threshold)
    rows = []
    dev, ok = g.deviation, g.robust
    for i, d in enumerate(g.deltas):
        for j, e in enumerate(g.epsilons):
            rows.append(
                {
                    "delta": d,
                    "epsilon": e,
                    "J13_at_pi": g.J13_at_pi[i, j],
                    "swap_ratio": g.swap_ratio[i, j],
                    "deviation": dev[i, j],
                    "robust": ok[i, j],
                }
            )
    extra = {"result": {"reference_J13": g.reference_J13, "robust_fraction": float(ok.mean())}}
    return ("delta", "epsilon", "J13_at_pi", "swap_ratio", "deviation", "robust"), rows, extra


def cmd_benchmark(cfg: RunConfig):
    tables = analysis.benchmark_exact(cfg.params(), workers=cfg.workers)
    rows = [{"axis": name, **r} for name, tab in tables.items() for r in tab]
    cols = (
        "axis",
        "N",
        "omega_c",
        "tau_ss",
        "J13",
        "J13_lindblad",
        "relative_deviation",
        "relative_drift",
        "recurrence_ok",
    )
    return cols, rows, {}


COMMANDS = {
    "steady": (cmd_steady, "Lindblad steady state at one parameter point"),
    "sweep-theta": (cmd_sweep_theta, "currents over the loop phase"),
    "closed": (cmd_closed, "isolated loop, one excitation, time series"),
    "exact": (cmd_exact, "finite-bath exact dynamics at one point"),
    "critical-ratio": (cmd_critical_ratio, "bisection for the J/gamma where J13(pi/2) changes sign"),
    "fidelity": (cmd_fidelity, "sites-(1,3) fidelity, Lindblad vs exact bath"),
    "error-grid": (cmd_error_grid, "switch and swap robustness over (delta, epsilon)"),
    "benchmark": (cmd_benchmark, "exact-bath convergence in omega_c, tau_ss and N"),
}

FLAG_HELP = {
    "J_over_gamma": "hopping in units of gamma",
    "theta": "loop phase (rad)",
    "tau_ss": "quasi-steady time in units of 1/gamma",
    "omega_c": "bath cutoff in units of omega",
    "ratios": "comma-separated J/gamma values",
    "bracket": "comma-separated J/gamma bracket low,high",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trimerheat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, text) in COMMANDS.items():
        sp = sub.add_parser(name, help=text, description=text)
        sp.add_argument("--config", help="YAML configuration file")
        for key, f in FIELDS.items():
            flag = "--" + key.replace("_", "-")
            if f.type == "bool":
                sp.add_argument(flag, dest=key, default=None, action=argparse.BooleanOptionalAction)
            else:
                sp.add_argument(flag, dest=key, default=None, help=FLAG_HELP.get(key))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {k: getattr(args, k) for k in FIELDS}
    try:
        file_values = load_config_file(args.config) if args.config else {}
        cfg = resolve_config(file_values, flags)
    except ConfigError as exc:
        print(f"trimerheat: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    func = COMMANDS[args.command][0]
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    try:
        columns, rows, extra = func(cfg)
    except (TrimerError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"trimerheat: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    elapsed = time.perf_counter() - t0

    out_dir = Path(cfg.output_dir)
    stem = args.command
    table = out_dir / f"{stem}.{cfg.format}"
    manifest = {
        "command": args.command,
        "config": dataclasses.asdict(cfg),
        "columns": list(columns),
        "rows": len(rows),
        "units": UNITS,
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "data_file": table.name,
        "timestamp": {"started_utc": started.isoformat(), "wall_clock_seconds": elapsed},
        **extra,
    }
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_table(table, columns, rows)
        write_manifest(out_dir / f"{stem}.manifest.json", manifest)
    except OSError as exc:
        print(f"trimerheat: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    print(str(table))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
