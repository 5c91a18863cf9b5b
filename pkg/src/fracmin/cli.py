"""Command-line front end.

    fracmin <command> [--config PATH] [--out DIR] [--seed N] [--threads K]
                      [--boxed | --ambient] [--snapshots] [--max-free-cells N]

Commands: energy, minimise, levelset, verify, yinyang, sector, bench.
Exit codes: 0 success, 2 configuration error, 3 invariant violation.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .energy import FuncConfig, SetConfig, g_energy, g_tilde, global_tail
from .errors import InvariantError
from .experiments import (SweepMode, SweepRecord, bench, sector_nonuniqueness, theta_emp,
                          yin_yang_sweep)
from .kernel import Ambient, WeightTable
from .lattice import LatticeSpec, Region, ball_region, fits_in_box, ring_region
from .levelset import (_level_datum, assemble_function, build_level_family, datum_levels,
                       verify_function_minimality)
from .optimise import minimise
from .verification import run_all

COMMANDS = ("energy", "minimise", "levelset", "verify", "yinyang", "sector", "bench")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config

def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"config lacks '{key}'")
    return cfg[key]


def lattice_from(cfg: dict) -> LatticeSpec:
    lat = _require(cfg, "lattice")
    try:
        if "half_width" in lat:
            return LatticeSpec.square(int(lat["dim"]), float(lat["h"]), float(lat["half_width"]),
                                      float(lat["s"]), float(lat.get("offset", 0.0)))
        return io.spec_from_json(lat)
    except KeyError as exc:
        raise ConfigError(f"lattice lacks {exc}") from None


class RegionResolver:
    """Resolves named or inline region definitions on one lattice."""

    def __init__(self, spec: LatticeSpec, named: dict):
        self.spec = spec
        self.named = dict(named or {})
        self._done: dict[str, Region] = {}
        self._active: set[str] = set()

    def __call__(self, ref) -> Region:
        if isinstance(ref, str):
            if ref in self._done:
                return self._done[ref]
            if ref not in self.named:
                raise ConfigError(f"unknown region '{ref}'")
            if ref in self._active:
                raise ConfigError(f"region '{ref}' is defined in terms of itself")
            self._active.add(ref)
            region = self._build(self.named[ref])
            self._active.discard(ref)
            self._done[ref] = region
            return region
        return self._build(ref)

    def _build(self, d) -> Region:
        spec = self.spec
        if not isinstance(d, dict) or len(d) != 1:
            raise ConfigError(f"region definition must have exactly one key: {d!r}")
        (kind, arg), = d.items()
        c = spec.centers
        if kind == "cells":
            return Region.from_cells(spec, [tuple(x) if isinstance(x, list) else (x,) for x in arg])
        if kind == "box":
            return Region(spec, np.ones(spec.n_cells, dtype=bool))
        if kind == "empty":
            return Region.empty(spec)
        if kind == "ball":
            return ball_region(spec, tuple(arg.get("center", [0.0] * spec.dim)), float(arg["radius"]))
        if kind == "ring":
            around = self(arg["around"])
            width = float(arg["width"])
            if not fits_in_box(spec, around, width):
                raise ConfigError(f"ring of width {width} exceeds the box")
            return ring_region(spec, around, width)
        if kind == "sector":
            sign = float(arg.get("sign", 1)) if isinstance(arg, dict) else 1.0
            return Region(spec, sign * c[:, 0] * c[:, 1] > 0)
        if kind == "half_plane":
            normal = np.asarray(arg["normal"], dtype=float)
            return Region(spec, c @ normal > float(arg.get("offset", 0.0)))
        if kind in ("union", "intersection"):
            parts = [self(r) for r in arg]
            if not parts:
                raise ConfigError(f"{kind} needs at least one region")
            out = parts[0]
            for p in parts[1:]:
                out = (out | p) if kind == "union" else (out & p)
            return out
        if kind == "difference":
            a, b = arg
            return self(a) - self(b)
        if kind == "complement":
            return ~self(arg)
        raise ConfigError(f"unknown region kind '{kind}'")


def omega_from(cfg: dict, regions: RegionResolver) -> Region:
    return regions(cfg.get("omega", "omega"))


def datum_from(cfg: dict, spec: LatticeSpec, regions: RegionResolver):
    """A SetConfig for {"set": ...} data, a FuncConfig otherwise."""
    d = _require(cfg, "datum")
    ambient = cfg.get("ambient", "empty")
    if "set" in d:
        try:
            amb = Ambient.parse(ambient)
        except ValueError:
            raise ConfigError(f"unknown ambient mode {ambient!r}") from None
        return SetConfig.from_region(regions(d["set"]), amb)
    if "values" in d:
        vals = np.asarray(d["values"], dtype=float)
        if vals.shape != (spec.n_cells,):
            raise ConfigError("datum values must list one value per box cell")
    else:
        vals = np.full(spec.n_cells, float(d.get("default", 0.0)))
        for layer in d.get("layers", []):
            vals = np.where(regions(layer["region"]).mask, float(layer["value"]), vals)
    amb = d.get("ambient_value", 0.0)
    if isinstance(ambient, str) and "ambient_value" not in d:
        amb = Ambient.parse(ambient).level
    return FuncConfig(spec, vals, float(amb))


def table_from(cfg: dict, spec: LatticeSpec, boxed: bool) -> WeightTable:
    k = cfg.get("kernel", {})
    return WeightTable(spec, boxed=boxed, kappa=float(k.get("kappa", 4.0)),
                       refine=int(k.get("refine", 6)))


def _scale(cfg: dict):
    s = cfg.get("solver", {}).get("scale")
    return None if s is None else int(s)


# ---------------------------------------------------------------- output

class Output:
    def __init__(self, out_dir, stream):
        self.dir = Path(out_dir) if out_dir else None
        self.stream = stream
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def emit(self, name: str, text: str):
        self.stream.write(text)
        if self.dir is not None:
            (self.dir / name).write_text(text)

    def file(self, name: str, text: str):
        if self.dir is not None:
            (self.dir / name).write_text(text)

    def pgm(self, name: str, spec: LatticeSpec, mask):
        if self.dir is None:
            raise ConfigError("--snapshots needs --out")
        if spec.dim != 2:
            return
        io.write_pgm(self.dir / name, spec, mask)


def _setup(cfg, args):
    spec = lattice_from(cfg)
    regions = RegionResolver(spec, cfg.get("regions", {}))
    omega = omega_from(cfg, regions)
    table = table_from(cfg, spec, args.boxed)
    return spec, regions, omega, table


# ---------------------------------------------------------------- commands

def cmd_energy(cfg, args, out: Output):
    spec, regions, omega, table = _setup(cfg, args)
    u = datum_from(cfg, spec, regions)
    if isinstance(u, SetConfig):
        u = u.to_func()
    report = g_energy(u, omega, table, threads=args.threads).to_dict()
    report["global_tail"] = global_tail(u, omega, table, threads=args.threads)
    report["g_tilde"] = g_tilde(u, omega, table, threads=args.threads)
    out.emit("energy.json", io.dumps(report))


def cmd_minimise(cfg, args, out: Output):
    spec, regions, omega, table = _setup(cfg, args)
    datum = datum_from(cfg, spec, regions)
    if not isinstance(datum, SetConfig):
        raise ConfigError("minimise needs a set datum ({\"set\": ...})")
    r = minimise(datum, omega, table, scale=_scale(cfg))
    out.emit("minimise.json", io.dumps(r.to_dict(omega)))
    if args.snapshots:
        out.pgm("minimal.pgm", spec, r.minimal_set.occupancy)
        out.pgm("maximal.pgm", spec, r.maximal_set.occupancy)


def _faulty_solver(phi, omega, table):
    """Solver that breaks nesting: the top level fills omega, every other level empties it."""
    top = _level_datum(phi, omega, datum_levels(phi, omega, table)[-1])
    n = len(omega)

    def solve(datum, om, tab):
        r = minimise(datum, om, tab)
        fill = datum == top
        E = r.maximal_set.with_inside(om, np.full(n, fill))
        return type(r)(r.optimal_value, E, E, r.gap_bound, r.optimal_value)

    return solve


def cmd_levelset(cfg, args, out: Output):
    spec, regions, omega, table = _setup(cfg, args)
    phi = datum_from(cfg, spec, regions)
    if isinstance(phi, SetConfig):
        phi = phi.to_func()
    solver = _faulty_solver(phi, omega, table) if args.inject_fault == "nesting" else None
    family = build_level_family(phi, omega, table, threads=args.threads, solver=solver)
    u = assemble_function(family, phi, omega)
    outside = phi.values[~omega.mask]
    report = {
        "function": io.funcconfig_to_json(u),
        "manifest": family.manifest(omega),
        "omega_values": [[list(c), float(v)] for c, v in zip(omega.cells, u.values[omega.mask])],
        "datum_range": [float(outside.min()), float(outside.max())],
    }
    if cfg.get("verify", False):
        report["verified"] = verify_function_minimality(u, omega, table, threads=args.threads).passed
    out.emit("levelset.json", io.dumps(report))
    out.file("manifest.json", io.dumps(family.manifest(omega)))
    if args.snapshots:
        for k, E in enumerate(family.sets):
            out.pgm(f"level_{k:03d}.pgm", spec, E.occupancy)


def cmd_verify(cfg, args, out: Output):
    v = cfg.get("verify", {})
    report = run_all(seed=args.seed, instances=int(v.get("instances", 20)),
                     max_free=args.max_free_cells)
    out.emit("verify.json", io.dumps(report))
    if report["failed"]:
        raise InvariantError(f"{report['failed']} property checks failed")


def _modes(value):
    if value in (None, "both"):
        return list(SweepMode)
    if isinstance(value, str):
        return [SweepMode.parse(value)]
    return [SweepMode.parse(m) for m in value]


def cmd_yinyang(cfg, args, out: Output):
    spec, regions, omega, table = _setup(cfg, args)
    exp = cfg.get("experiment", {})
    widths = exp.get("widths", [0.25, 0.5, 1.0, 1.5, 2.0])
    s_values = exp.get("s_values", [spec.s])
    k = cfg.get("kernel", {})
    records: list[SweepRecord] = []
    for mode in _modes(exp.get("mode", "full_ring_empty_far")):
        records += yin_yang_sweep(omega, widths, s_values, mode, boxed=args.boxed,
                                  kappa=float(k.get("kappa", 4.0)),
                                  refine=int(k.get("refine", 6)), threads=args.threads)
    out.emit("yinyang.csv", io.write_csv(None, SweepRecord.CSV_HEADER,
                                        [r.csv_row() for r in records]))
    theta = {m.value: {repr(s): w for s, w in theta_emp(records, m).items()}
             for m in {r.mode for r in records}}
    out.file("theta.json", io.dumps(theta))
    if args.snapshots:
        for r in records:
            out.pgm(f"yinyang_{r.mode.value}_s{r.s}_w{r.width_diam}.pgm", spec, r.occupancy)


def cmd_sector(cfg, args, out: Output):
    exp = cfg.get("experiment", {})
    h = float(exp.get("h", 0.5))
    s = float(exp.get("s", 0.5))
    half_width = float(exp.get("half_width", 3.0))
    offset = float(exp.get("offset", 0.5))
    brute = exp.get("brute")
    spec = LatticeSpec.square(2, h, half_width, s, offset)
    n_free = len(ball_region(spec, (0.0, 0.0), 1.0))
    if brute is None:
        brute = n_free <= args.max_free_cells
    table = table_from(cfg, spec, args.boxed)
    rep = sector_nonuniqueness(h, s, half_width, offset, full=bool(exp.get("full", False)),
                               brute=bool(brute), table=table)
    omega = ball_region(spec, (0.0, 0.0), 1.0)
    out.emit("sector.json", io.dumps(rep.to_dict(omega)))
    if args.snapshots:
        out.pgm("minimal.pgm", spec, rep.result.minimal_set.occupancy)
        out.pgm("maximal.pgm", spec, rep.result.maximal_set.occupancy)


def cmd_bench(cfg, args, out: Output):
    exp = cfg.get("experiment", {})
    sizes = tuple(int(n) for n in exp.get("sizes", (512, 2048, 4608)))
    solve = exp.get("solve_sizes")
    rows = bench(sizes, seed=args.seed, solve_sizes=None if solve is None else tuple(solve))
    out.emit("bench.csv", io.write_csv(None, "stage,n_cells,millis",
                                      [f"{st},{n},{ms:.3f}" for st, n, ms in rows]))


HANDLERS = {
    "energy": cmd_energy,
    "minimise": cmd_minimise,
    "levelset": cmd_levelset,
    "verify": cmd_verify,
    "yinyang": cmd_yinyang,
    "sector": cmd_sector,
    "bench": cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1, metavar="K")
    grp = common.add_mutually_exclusive_group()
    grp.add_argument("--boxed", dest="boxed", action="store_true", default=True,
                     help="drop beyond-box interactions (default)")
    grp.add_argument("--ambient", dest="boxed", action="store_false",
                     help="include the analytic beyond-box tail")
    common.add_argument("--snapshots", action="store_true", help="write PGM bitmaps to --out")
    common.add_argument("--max-free-cells", type=int, default=12, metavar="N")
    common.add_argument("--inject-fault", choices=["nesting"], help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="fracmin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.max_free_cells < 1:
            raise ConfigError("--max-free-cells must be at least 1")
        cfg = load_config(args.config)
        HANDLERS[args.command](cfg, args, Output(args.out, stdout))
    except InvariantError as exc:
        print(f"fracmin: invariant violated: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"fracmin: configuration error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
