"""Command-line front door: ``propertime <experiment> --config run.json [--out dir] [--quiet]``.

The config file is a flat JSON object: ``experiment`` (optional, must
match the command), ``seed``, ``output`` (CSV file name) and the
experiment's own parameters. Unknown keys are rejected. Every CSV starts
with a ``#`` metadata block whose ``# config:`` line is the fully
defaulted config, so it can be fed back in unchanged.

Exit status: 0 success, 1 invalid config or parameters outside a module
guard, 2 a numerical contract was violated.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import platform
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np
import scipy
from scipy import constants

from . import __version__
from . import freedirac as fd
from . import gravdirac as gd
from . import scalar
from . import verify as vf
from .phasegrid import AxisGrid, GridError, fit_extent, gaussian_packet, project_positive_mass

__all__ = ["ConfigError", "ContractError", "EXPERIMENTS", "RunConfig", "main", "parse_config", "run"]

log = logging.getLogger("propertime")

EXIT_OK, EXIT_VALIDATION, EXIT_CONTRACT = 0, 1, 2


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


class ContractError(RuntimeError):
    """A numerical invariant failed; carries the invariant name and residual."""

    def __init__(self, invariant: str, residual: float, tolerance: float):
        self.invariant = invariant
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(f"{invariant}: residual {residual:.6g} exceeds {tolerance:.3g}")


# -- parameter schema ---------------------------------------------------------


def _number(name, v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{name}: expected a finite number, got {v!r}")
    return float(v)


def _integer(name, v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{name}: expected an integer, got {v!r}")
    return int(v)


def _vector(name, v, length=3) -> list[float]:
    if not isinstance(v, list) or len(v) != length:
        raise ConfigError(f"{name}: expected a list of {length} numbers, got {v!r}")
    return [_number(f"{name}[{i}]", x) for i, x in enumerate(v)]


def _numbers(name, v) -> list[float]:
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{name}: expected a non-empty list of numbers, got {v!r}")
    return [_number(f"{name}[{i}]", x) for i, x in enumerate(v)]


def _positive(kind):
    def check(name, v):
        v = kind(name, v)
        if not v > 0:
            raise ConfigError(f"{name}: must be positive, got {v}")
        return v

    return check


def _pow2(name, v) -> int:
    v = _integer(name, v)
    if v < 2 or v & (v - 1):
        raise ConfigError(f"{name}: must be a power of two >= 2, got {v}")
    return v


def _strings(name, v) -> list[str] | None:
    if v is None:
        return None
    if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
        raise ConfigError(f"{name}: expected a list of strings, got {v!r}")
    return list(v)


def _pow2_triple(name, v) -> list[int]:
    if not isinstance(v, list) or len(v) != 3:
        raise ConfigError(f"{name}: expected a list of 3 integers, got {v!r}")
    return [_pow2(f"{name}[{i}]", x) for i, x in enumerate(v)]


def _nonzero_vector(name, v):
    v = _vector(name, v)
    if not any(v):
        raise ConfigError(f"{name}: direction must be nonzero")
    return v


PARTICLE_MASSES = {
    "electron": constants.m_e,
    "muon": constants.physical_constants["muon mass"][0],
    "proton": constants.m_p,
    "neutron": constants.m_n,
}


def _particles(name, v) -> list[str]:
    v = _strings(name, v)
    if not v:
        raise ConfigError(f"{name}: expected a non-empty list of particle names")
    for p in v:
        if p not in PARTICLE_MASSES:
            raise ConfigError(f"{name}: unknown particle {p!r}; choose from {sorted(PARTICLE_MASSES)}")
    return v


@dataclass(frozen=True)
class Param:
    check: Callable[[str, Any], Any]
    default: Any


SCHEMAS: dict[str, dict[str, Param]] = {
    "free-dirac": {
        "p_prime": Param(_vector, [3.0, 0.0, 0.0]),
        "m_prime": Param(_positive(_number), 4.0),
        "times": Param(_numbers, [0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0]),
        "spin_coefficients": Param(lambda n, v: _vector(n, v, 2), [1.0, 0.0]),
    },
    "scalar-flat": {
        "m_prime": Param(_positive(_number), 1.0),
        "velocities": Param(_numbers, [0.6]),
        "sigma_m": Param(_positive(_number), 0.008),
        "sigma_p": Param(_positive(_number), 0.0375),
        "n_tau": Param(_pow2, 256),
        "n_x": Param(_pow2, 64),
    },
    "scalar-schwarzschild": {
        "a": Param(_positive(_number), 2.5),
        "radii": Param(_numbers, [600.0, 1000.0, 1500.0, 2200.0, 3000.0]),
        "m_prime": Param(_positive(_number), 100.0),
        "sigma_m": Param(_positive(_number), 10.0),
        "sigma_x": Param(_positive(_number), 5.0),
        "margin": Param(_positive(_number), 10.0),
        "n_tau": Param(_pow2, 32),
        "n_x": Param(_pow2, 64),
    },
    "grav-spin": {
        "g": Param(_number, 5e-3),
        "m_prime": Param(_positive(_number), 10.0),
        "p_prime": Param(_vector, [1.0, 0.0, 0.0]),
        "spin": Param(_nonzero_vector, [0.0, 1.0, 0.0]),
        "sigma_m": Param(_positive(_number), 0.8),
        "sigma_p": Param(_vector, [0.2, 0.8, 0.8]),
        "n_tau": Param(_pow2, 64),
        "n_x": Param(_pow2_triple, [32, 32, 32]),
        "paired": Param(lambda n, v: v if isinstance(v, bool) else _bad_bool(n, v), True),
    },
    "sweep": {
        "count": Param(_positive(_integer), 50),
        "g_range": Param(lambda n, v: _vector(n, v, 2), [1e-3, 4e-3]),
        "m_range": Param(lambda n, v: _vector(n, v, 2), [2.0, 10.0]),
        "p_range": Param(lambda n, v: _vector(n, v, 2), [0.2, 1.0]),
    },
    "si-estimate": {
        "particles": Param(_particles, ["electron", "muon"]),
        "g_si": Param(_positive(_number), constants.g),
    },
    "verify": {
        "checks": Param(_strings, None),
    },
}

EXPERIMENTS = tuple(SCHEMAS)
RESERVED = ("experiment", "seed", "output")


def _bad_bool(name, v):
    raise ConfigError(f"{name}: expected true or false, got {v!r}")


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    seed: int = 0
    output: str | None = None
    params: dict = field(default_factory=dict)

    def to_mapping(self) -> dict:
        return {"experiment": self.experiment, "seed": self.seed, "output": self.output, **self.params}

    def echo(self) -> str:
        """Canonical one-line JSON; parses back to an equal RunConfig."""
        return json.dumps(self.to_mapping(), sort_keys=True, separators=(",", ":"))

    @property
    def csv_name(self) -> str:
        return self.output or f"{self.experiment}.csv"


def parse_config(data: Any, experiment: str | None = None) -> RunConfig:
    """Validate a decoded JSON object and fill defaults."""
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a JSON object")
    exp = data.get("experiment", experiment)
    if exp is None:
        raise ConfigError("experiment: missing (give it on the command line or in the config)")
    if experiment is not None and exp != experiment:
        raise ConfigError(f"experiment: config says {exp!r} but the command is {experiment!r}")
    if exp not in SCHEMAS:
        raise ConfigError(f"experiment: unknown experiment {exp!r}; choose from {', '.join(EXPERIMENTS)}")
    schema = SCHEMAS[exp]
    unknown = sorted(set(data) - set(schema) - set(RESERVED))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key for experiment {exp!r} (allowed: {', '.join(sorted(schema))})")
    seed = data.get("seed", gd.SWEEP_SEED if exp == "sweep" else 0)
    seed = _integer("seed", seed)
    if seed < 0:
        raise ConfigError(f"seed: must be an unsigned integer, got {seed}")
    output = data.get("output")
    if output is not None and (not isinstance(output, str) or not output or "/" in output or "\\" in output):
        raise ConfigError(f"output: expected a plain file name, got {output!r}")
    params = {}
    for k, p in schema.items():
        v = data.get(k, p.default)
        # only fields whose default is null accept null
        params[k] = None if v is None and p.default is None else p.check(k, v)
    return RunConfig(exp, seed, output, params)


def load_config(path: Path, experiment: str | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(data, experiment)


# -- experiments ----------------------------------------------------------------


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    summary: list[str] = field(default_factory=list)


def _free_dirac(cfg: RunConfig) -> Table:
    p = cfg.params
    sec = fd.Sector(tuple(p["p_prime"]), p["m_prime"])
    u = fd.positive_basis(sec) @ np.asarray(p["spin_coefficients"], dtype=complex)
    if np.linalg.norm(u) == 0:
        raise ConfigError("spin_coefficients: must not both be zero")
    u = u / np.linalg.norm(u)
    target = sec.m_prime / sec.E
    t = Table(["t", "beta_mean_heisenberg", "beta_mean_closed_form", "m_over_E"])
    worst = 0.0
    for time in p["times"]:
        brute = fd.taudot_mean_positive(sec, u, time)
        closed = float(np.vdot(u, fd.beta_closed_form(sec, time) @ u).real)
        worst = max(worst, abs(brute - target), abs(closed - target))
        t.rows.append([time, brute, closed, target])
    if worst > 1e-10:
        raise ContractError("positive-energy <beta(t)> = m'/E", worst, 1e-10)
    t.summary.append(f"<beta(t)> = {target:.12g} at every t (max deviation {worst:.2e})")
    return t


def flat_packet_rate(m_prime, p_prime, sigma_m, sigma_p, n_tau, n_x) -> float:
    """Grid mean of the flat proper-time rate for a 1D packet with carrier (m', p')."""
    w_tau, w_x = 1 / (2 * sigma_m), 1 / (2 * sigma_p)
    axes = (AxisGrid("tau", n_tau, fit_extent(n_tau, w_tau, m_prime)), AxisGrid("x1", n_x, fit_extent(n_x, w_x, p_prime)))
    s = gaussian_packet(axes, (0.0, 0.0), (w_tau, w_x), (m_prime, p_prime))
    s = project_positive_mass(s).state
    return scalar.taudot_mean_at_zero(s, scalar.MetricModel.flat())


def _scalar_flat(cfg: RunConfig) -> Table:
    p = cfg.params
    t = Table(["v", "p_prime", "taudot_grid", "taudot_exact", "abs_error"])
    for v in p["velocities"]:
        mom = float(scalar.velocity_to_momentum([v, 0.0, 0.0], p["m_prime"])[0])
        exact = scalar.taudot_flat_mean(p["m_prime"], [mom, 0.0, 0.0])
        grid = flat_packet_rate(p["m_prime"], mom, p["sigma_m"], p["sigma_p"], p["n_tau"], p["n_x"])
        t.rows.append([v, mom, grid, exact, abs(grid - exact)])
    return t


def _scalar_schwarzschild(cfg: RunConfig) -> Table:
    p = cfg.params
    t = Table(["r", "four_a_over_r", "taudot_grid", "sqrt_one_minus_4a_over_r", "abs_error"])
    for r in p["radii"]:
        s, metric = vf.redshift_packet(r, p["a"], p["m_prime"], p["sigma_m"], p["sigma_x"])
        metric = replace(metric, margin=p["margin"])
        rate = scalar.taudot_mean_at_zero(s, metric)
        exact = math.sqrt(1 - 4 * p["a"] / r)
        t.rows.append([r, 4 * p["a"] / r, rate, exact, abs(rate - exact)])
    order = np.argsort([row[0] for row in t.rows])
    rates = np.array([t.rows[i][2] for i in order])
    if len(rates) > 1 and np.min(np.diff(rates)) <= 0:
        raise ContractError("redshift monotone in r", float(-np.min(np.diff(rates))), 0.0)
    return t


def _weak_config(p: dict, spin) -> gd.WeakFieldConfig:
    return gd.WeakFieldConfig(
        g=p["g"],
        m_prime=p["m_prime"],
        p_prime=tuple(p["p_prime"]),
        spin=tuple(spin),
        sigma_m=p["sigma_m"],
        sigma_p=tuple(p["sigma_p"]),
        n_tau=p["n_tau"],
        n_x=tuple(p["n_x"]),
    )


def _grav_spin(cfg: RunConfig) -> Table:
    p = cfg.params
    t = Table(
        [
            "spin_x",
            "spin_y",
            "spin_z",
            "taudot_direct",
            "taudot_formula",
            "sharp_spin_term",
            "spin_orbit_term",
            "ratio",
            "sigma_E_over_E",
        ]
    )
    # adding 0.0 turns -0.0 into 0.0 so reversed spins print cleanly
    spins = [p["spin"], [0.0 - x + 0.0 for x in p["spin"]]] if p["paired"] else [p["spin"]]
    vals = []
    for spin in spins:
        wc = _weak_config(p, spin)
        st = gd.build_positive_spinor(wc)
        d, f = gd.taudot0_direct(st), gd.taudot0_formula(st)
        s = gd.sharp_spin_term(st)
        vals.append((d, f, s))
        t.rows.append([*spin, d, f, s, gd.spin_orbit_term(st), gd.ratio_estimate(st), st.sigma_E / st.energy_mean])
    if p["paired"]:
        (d1, f1, s1), (d2, f2, s2) = vals
        residual = abs((d1 - d2) - (f1 - f2)) / 2
        spin_term = abs(s1 - s2) / 2
        if spin_term > 0:
            rel = residual / spin_term
            t.summary.append(f"paired residual {residual:.3e} = {rel:.4f} x spin term {spin_term:.3e}")
            if rel >= 0.05:
                raise ContractError("paired spin reconciliation", rel, 0.05)
        else:
            t.summary.append(f"spin term vanishes (spin parallel to p'); paired residual {residual:.3e}")
    return t


def _sweep(cfg: RunConfig) -> Table:
    p = cfg.params
    configs = gd.sweep_configs(p["count"], cfg.seed, tuple(p["g_range"]), tuple(p["m_range"]), tuple(p["p_range"]))
    t = Table(["index", "g", "m_prime", "p1", "p2", "p3", "spin_x", "spin_y", "spin_z", "ratio", "bound", "ratio_over_bound"])
    worst = 0.0
    for i, c in enumerate(configs):
        r = gd.ratio_estimate(gd.build_positive_spinor(c))
        bound = abs(c.g) / c.m_prime
        worst = max(worst, abs(r) / bound)
        t.rows.append([i, c.g, c.m_prime, *c.p_prime, *c.spin, r, bound, abs(r) / bound])
    if worst > 1:
        raise ContractError("spin bound |ratio| <= g/m'", worst, 1.0)
    t.summary.append(f"max |ratio|/(g/m') over {len(configs)} runs: {worst:.4f}")
    return t


def _si_estimate(cfg: RunConfig) -> Table:
    p = cfg.params
    t = Table(["particle", "mass_kg", "g_hbar_over_m_c3"])
    for name in p["particles"]:
        val = gd.si_smallness(PARTICLE_MASSES[name], p["g_si"])
        t.rows.append([name, PARTICLE_MASSES[name], val])
        t.summary.append(f"{name} {val:.1e}")
    return t


def _verify(cfg: RunConfig, report=None) -> Table:
    names = cfg.params["checks"]
    if names is not None:
        unknown = [n for n in names if n not in vf.CHECKS]
        if unknown:
            raise ConfigError(f"checks: unknown check {unknown[0]!r}")
    results = vf.run_suite(names, report)
    t = Table(["check", "residual", "tolerance", "passed", "detail"])
    for r in results:
        t.rows.append([r.name, r.residual, r.tolerance, int(r.passed), r.detail])
    failed = [r for r in results if not r.passed]
    t.summary.append(f"{len(results) - len(failed)}/{len(results)} properties pass")
    if failed:
        raise ContractError(failed[0].name, failed[0].residual, failed[0].tolerance)
    return t


RUNNERS = {
    "free-dirac": _free_dirac,
    "scalar-flat": _scalar_flat,
    "scalar-schwarzschild": _scalar_schwarzschild,
    "grav-spin": _grav_spin,
    "sweep": _sweep,
    "si-estimate": _si_estimate,
    "verify": _verify,
}


# -- output -------------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def metadata_lines(cfg: RunConfig) -> list[str]:
    return [
        f"# propertime {__version__}",
        f"# python {platform.python_version()} numpy {np.__version__} scipy {scipy.__version__}",
        f"# experiment: {cfg.experiment}",
        f"# seed: {cfg.seed}",
        f"# config: {cfg.echo()}",
    ]


def write_csv(path: Path, cfg: RunConfig, table: Table) -> None:
    with open(path, "w", newline="") as fh:
        for line in metadata_lines(cfg):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_cell(v) for v in row])


def read_echo(path: Path) -> RunConfig:
    """RunConfig from the ``# config:`` line of a CSV written by this tool."""
    for line in Path(path).read_text().splitlines():
        if line.startswith("# config: "):
            return parse_config(json.loads(line[len("# config: ") :]))
    raise ConfigError(f"config: no config echo in {path}")


def run(cfg: RunConfig, out_dir: Path, report=None) -> tuple[Path, Table]:
    """Execute ``cfg`` and write its CSV; raises ConfigError or ContractError."""
    runner = RUNNERS[cfg.experiment]
    try:
        table = runner(cfg, report) if cfg.experiment == "verify" else runner(cfg)
    except (ConfigError, ContractError):
        raise
    except (GridError, ValueError) as exc:
        # module guards reject parameters: a validation failure, not a numerical one
        raise ConfigError(f"{cfg.experiment}: {exc}") from None
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / cfg.csv_name
    write_csv(path, cfg, table)
    return path, table


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="propertime", description=__doc__.split("\n")[0])
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", type=Path, required=True, help="JSON run configuration")
    ap.add_argument("--out", type=Path, default=Path("."), help="output directory (default: current)")
    ap.add_argument("--quiet", action="store_true", help="only report errors")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config, args.experiment)
        report = None if args.quiet else (lambda r: log.info(r.line()))
        path, table = run(cfg, args.out, report)
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_VALIDATION
    except ContractError as exc:
        log.error("numerical contract violated: %s", exc)
        return EXIT_CONTRACT
    if not args.quiet:
        for line in table.summary:
            print(line)
        log.info("wrote %s", path)
    return EXIT_OK
