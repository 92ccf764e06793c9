"""Command-line front end.

Every subcommand resolves its configuration from built-in defaults, an
optional ``--config`` file (``key = value`` lines, optionally grouped in
``[section]`` blocks named after subcommands) and finally the flags.  Output
goes to ``--output`` (stdout by default) as CSV or JSON with the resolved
configuration in a header.

Exit codes: 0 success, 2 configuration error, 3 numerical or feasibility error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from .analysis import (
    DofQuery,
    InconclusiveCount,
    InfeasibleQ,
    UnboundedBeam,
    backscatter_powers,
    beam_pattern,
    beamwidth,
    dof_count,
    dof_small_sphere_reference,
    gain_sweep,
)
from .channel import BranchError, ChannelSpec, NumericalInconsistency, capacity, efficiency
from .qfactor import quality_factor
from .scattering import C0, Medium, ResonanceError
from .sphsample import ApproximationInvalid, fibonacci_points, gram_matrix, simulate_channel

COMMANDS = ("efficiency", "qfactor", "capacity", "dof", "backscatter", "gain-opt", "sample-check")
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    def __init__(self, name, message):
        super().__init__(f"{name}: {message}")
        self.name = name


@dataclass
class RunConfig:
    command: str
    fc: float = 16.8e9
    eps_r: float = 16.0
    tan_delta: float = 1e-4
    r1: float = 5e-3
    sweep_r1: str | None = None  # "start:stop:count" in units of the free-space wavelength
    n_max: int = 5
    alpha: float = 0.1
    power: float = 1.0
    noise_floor: float = 1.0
    q_bar: float = 33.6
    eta_min: float = 0.5
    q_max: float = 1e3
    beta: float = 0.8
    n: int = 80
    k0r2: float | None = None
    points: int = 4096
    draws: int = 100000
    seed: int = 0
    output: str | None = None
    format: str = "csv"
    bits: bool = False

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError("command", f"unknown command {self.command!r}")
        for name in ("fc", "eps_r", "r1", "alpha", "noise_floor", "q_bar", "eta_min", "q_max", "beta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(name, f"must be positive, got {v!r}")
        if not (math.isfinite(self.tan_delta) and self.tan_delta >= 0):
            raise ConfigError("tan_delta", f"must be nonnegative, got {self.tan_delta!r}")
        if not (math.isfinite(self.power) and self.power >= 0):
            raise ConfigError("power", f"must be nonnegative, got {self.power!r}")
        if self.alpha >= 1:
            raise ConfigError("alpha", "must lie in (0, 1)")
        if self.eta_min > 1:
            raise ConfigError("eta_min", "must lie in (0, 1]")
        for name in ("n_max", "n", "points", "draws"):
            if getattr(self, name) < 1:
                raise ConfigError(name, "must be a positive integer")
        if self.k0r2 is not None and not self.k0r2 > 0:
            raise ConfigError("k0r2", "must be positive")
        if self.format not in ("csv", "json"):
            raise ConfigError("format", "must be csv or json")
        self.sweep_values()

    def sweep_values(self):
        """R1 over wavelength for every grid point (a single point without a sweep)."""
        if self.sweep_r1 is None:
            return [self.r1 * self.fc / C0]
        parts = str(self.sweep_r1).split(":")
        try:
            if len(parts) != 3:
                raise ValueError
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError("sweep_r1", "expected start:stop:count") from None
        if not (0 < lo and count >= 1 and (hi > lo or (hi == lo and count == 1))):
            raise ConfigError("sweep_r1", "range must be positive, nonempty and increasing")
        return [float(v) for v in np.linspace(lo, hi, count)]

    def medium(self):
        return Medium(self.fc, self.eps_r, self.tan_delta)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name, value):
    t = _FIELD_TYPES[name]
    try:
        if t == "bool":
            if isinstance(value, bool):
                return value
            return str(value).strip().lower() in ("1", "true", "yes", "on")
        if t == "int":
            return int(value)
        if t == "float":
            return float(value)
        if t == "float | None":
            return None if value in (None, "", "none") else float(value)
        return None if value in (None, "none") else str(value)
    except ValueError:
        raise ConfigError(name, f"cannot parse {value!r}") from None


def read_config_file(path, command):
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("config", str(exc)) from None
    if not text.lstrip().startswith("["):
        text = "[DEFAULT]\n" + text
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config", str(exc).splitlines()[0]) from None
    section = parser[command] if parser.has_section(command) else parser.defaults()
    out = {}
    for key, value in section.items():
        name = key.replace("-", "_")
        if name not in _FIELD_TYPES or name == "command":
            raise ConfigError(name, "unknown configuration key")
        out[name] = value
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="em_capacity", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"em_capacity {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config")
    common.add_argument("--dry-run", action="store_true")
    common.add_argument("--output", "-o")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--fc", type=float)
    common.add_argument("--eps-r", type=float)
    common.add_argument("--tan-delta", type=float)
    common.add_argument("--r1", type=float, help="sphere radius in m")
    common.add_argument("--sweep-r1", help="start:stop:count of R1 / wavelength")
    common.add_argument("--n-max", type=int)
    common.add_argument("--seed", type=int)
    extra = {
        "capacity": [("--alpha", float), ("--power", float), ("--noise-floor", float), ("--bits", None)],
        "dof": [("--eta-min", float), ("--q-max", float)],
        "backscatter": [("--beta", float), ("--n", int), ("--k0r2", float)],
        "gain-opt": [("--q-bar", float)],
        "sample-check": [("--alpha", float), ("--points", int), ("--draws", int), ("--noise-floor", float)],
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        for flag, typ in extra.get(name, []):
            if typ is None:
                sp.add_argument(flag, action="store_true", default=None)
            else:
                sp.add_argument(flag, type=typ)
    return p


def resolve(argv):
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        values.update(read_config_file(args.config, args.command))
    for key, value in vars(args).items():
        if key in ("command", "config", "dry_run") or value is None:
            continue
        values[key] = value
    cfg = RunConfig(args.command, **{k: _coerce(k, v) for k, v in values.items()})
    cfg.validate()
    return cfg, args.dry_run


# ---------------------------------------------------------------------------
# commands


def _threads():
    try:
        return max(1, int(os.environ.get("EM_CAPACITY_THREADS", "1")))
    except ValueError:
        return 1


def _grid_map(fn, grid):
    """Apply ``fn`` over the grid; row order follows the grid regardless of scheduling."""
    threads = _threads()
    if threads == 1 or len(grid) == 1:
        return [fn(g) for g in grid]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, grid))


def _r1(cfg, ratio):
    return ratio * C0 / cfg.fc


def cmd_efficiency(cfg):
    m = cfg.medium()

    def point(ratio):
        R1 = _r1(cfg, ratio)
        return [
            {"r1_over_lambda": ratio, "n": n, "l": l, "eta": efficiency(n, l, m, R1)}
            for n in range(1, cfg.n_max + 1)
            for l in (1, 2)
        ]

    return [row for rows in _grid_map(point, cfg.sweep_values()) for row in rows], {}


def cmd_qfactor(cfg):
    m = cfg.medium()

    def point(ratio):
        R1 = _r1(cfg, ratio)
        rows = []
        for n in range(1, cfg.n_max + 1):
            for l in (1, 2):
                q = quality_factor(n, l, m, R1)
                rows.append({
                    "r1_over_lambda": ratio, "n": n, "l": l, "eta": q.eta,
                    "q_tilde": q.q_tilde, "q": q.q, "q_m": q.q_m, "q_e": q.q_e,
                })
        return rows

    return [row for rows in _grid_map(point, cfg.sweep_values()) for row in rows], {}


def cmd_capacity(cfg):
    m = cfg.medium()
    unit = "capacity_bits" if cfg.bits else "capacity_nats"

    def point(ratio):
        spec = ChannelSpec(m, _r1(cfg, ratio), cfg.n_max, cfg.alpha, cfg.noise_floor, cfg.power)
        res = capacity(spec)
        active = sum(mult for _, p, mult in res.allocations if p > 0)
        return {
            "r1_over_lambda": ratio,
            unit: res.capacity_bits if cfg.bits else res.capacity_nats,
            "water_level": res.water_level,
            "active_modes": active,
        }

    return _grid_map(point, cfg.sweep_values()), {}


def cmd_dof(cfg):
    m = cfg.medium()

    def point(ratio):
        R1 = _r1(cfg, ratio)
        x = m.k0 * R1
        count = dof_count(DofQuery(m, R1, cfg.eta_min, cfg.q_max))
        return {"r1_over_lambda": ratio, "k0r1": x, "dof": count, "reference": dof_small_sphere_reference(x)}

    return _grid_map(point, cfg.sweep_values()), {}


def cmd_backscatter(cfg):
    x = cfg.k0r2 if cfg.k0r2 is not None else cfg.beta * cfg.n
    res = backscatter_powers(cfg.n, 1.0, x)
    row = {"n": cfg.n, "k0r2": x, "p_l": res.p_l, "p_s": res.p_s, "p_t": res.p_t, "ratio": res.ratio}
    return [row], {}


def cmd_gain_opt(cfg):
    m = cfg.medium()
    results, best = gain_sweep(m, cfg.r1, cfg.q_bar, range(1, cfg.n_max + 1))
    rows = []
    for N, r in results.items():
        try:
            bw = beamwidth(beam_pattern(r.excitation, m, cfg.r1), cut=0)
        except UnboundedBeam:
            bw = float("nan")
        rows.append({
            "n_max": N, "gain": r.gain, "directivity": r.directivity, "q_j": r.q_j,
            "beamwidth_deg": bw, "is_argmax": int(N == best),
        })
    top = next(row for row in rows if row["is_argmax"])
    summary = {
        "argmax_n": best,
        "gain": top["gain"],
        "directivity": top["directivity"],
        "beamwidth_deg": top["beamwidth_deg"],
        "q_j": top["q_j"],
    }
    return rows, summary


def cmd_sample_check(cfg):
    m = cfg.medium()
    spec = ChannelSpec(m, cfg.r1, cfg.n_max, cfg.alpha, cfg.noise_floor)
    pts = fibonacci_points(cfg.points, cfg.alpha)
    if cfg.points < cfg.alpha * cfg.n_max**2:
        raise ApproximationInvalid(f"points = {cfg.points} < alpha N^2 = {cfg.alpha * cfg.n_max**2:g}")
    gram = gram_matrix(pts, cfg.n_max)
    rows = []
    summary = {"beta": pts.beta, "k0r2": pts.k0R2, "gram_deviation": float(np.abs(gram - np.eye(len(gram))).max())}
    for direction in ("forward", "reverse"):
        res = simulate_channel(direction, spec, pts, cfg.draws, cfg.seed)
        cov = res.noise_cov
        off = cov - np.diag(np.diag(cov))
        summary[f"{direction}_noise_diag_dev"] = float(np.abs(np.diag(cov).real - 1).max())
        summary[f"{direction}_noise_offdiag_max"] = float(np.abs(off).max())
        for (n, l), (g, se, exp) in sorted(res.by_nl().items()):
            rows.append({
                "direction": direction, "n": n, "l": l, "gain_sq": g, "gain_sq_se": se,
                "expected": exp, "ratio": g / exp,
            })
    summary["generator"] = "Philox"
    return rows, summary


HANDLERS = {
    "efficiency": cmd_efficiency,
    "qfactor": cmd_qfactor,
    "capacity": cmd_capacity,
    "dof": cmd_dof,
    "backscatter": cmd_backscatter,
    "gain-opt": cmd_gain_opt,
    "sample-check": cmd_sample_check,
}


# ---------------------------------------------------------------------------
# output


def _meta(cfg):
    meta = {"artifact": "em_capacity", "version": __version__}
    meta.update(asdict(cfg))
    return meta


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(cfg, rows, summary):
    meta = _meta(cfg)
    if cfg.format == "json":
        doc = {"meta": meta, **summary, "rows": rows}
        return json.dumps(doc, indent=2, sort_keys=False, default=float) + "\n"
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k} = {_fmt(v)}\n")
    for k, v in summary.items():
        buf.write(f"# result.{k} = {_fmt(v)}\n")
    if rows:
        writer = csv.writer(buf, lineterminator="\n")
        cols = list(rows[0])
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in cols])
    return buf.getvalue()


def describe_plan(cfg):
    grid = cfg.sweep_values()
    lines = [f"command: {cfg.command}", f"grid points: {len(grid)}"]
    lines += [f"{k} = {_fmt(v)}" for k, v in _meta(cfg).items()]
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    try:
        cfg, dry = resolve(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # argparse
        return EXIT_CONFIG if exc.code else 0
    if dry:
        sys.stdout.write(describe_plan(cfg))
        return 0
    try:
        rows, summary = HANDLERS[cfg.command](cfg)
    except (InfeasibleQ, ResonanceError, InconclusiveCount, ApproximationInvalid, BranchError,
            NumericalInconsistency, UnboundedBeam) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(cfg, rows, summary)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0
