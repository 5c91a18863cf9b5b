"""Scripted reproductions: fill/empty transitions, sector non-uniqueness,
constant-datum rigidity and symmetry inheritance."""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._parallel import ordered_map
from .energy import FuncConfig, SetConfig, _resolve, g_energy, perimeter
from .kernel import Ambient, WeightTable
from .lattice import LatticeSpec, Region, ball_region, diameter, fits_in_box, ring_region
from .levelset import assemble_function, build_level_family
from .optimise import BRUTE_FORCE_LIMIT, MinimiserPair, brute_force, build_cut_problem, minimise, solve_mincut


class SweepMode(enum.Enum):
    FULL_RING_EMPTY_FAR = "full_ring_empty_far"
    EMPTY_RING_FULL_FAR = "empty_ring_full_far"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        return cls(str(text).lower())


@dataclass(frozen=True)
class SweepRecord:
    s: float
    width_diam: float
    filled_fraction: float
    optimal_value: float
    gap_bound: float
    mode: SweepMode
    occupancy: np.ndarray | None = field(default=None, compare=False, repr=False)

    CSV_HEADER = "s,width_diam,filled_fraction,optimal_value,gap_bound,mode"

    def csv_row(self) -> str:
        return (f"{self.s!r},{self.width_diam!r},{self.filled_fraction!r},"
                f"{self.optimal_value!r},{self.gap_bound!r},{self.mode.value}")


def ring_datum(omega: Region, width: float, mode: SweepMode) -> SetConfig:
    """Exterior datum that is full (or empty) on the ring of the given physical width."""
    spec = omega.spec
    if width > 0:
        if not fits_in_box(spec, omega, width):
            raise ValueError(f"ring of width {width} exceeds the box")
        ring = ring_region(spec, omega, width)
    else:
        ring = Region.empty(spec)
    if mode is SweepMode.FULL_RING_EMPTY_FAR:
        return SetConfig.from_region(ring, Ambient.EMPTY)
    far = ~(omega | ring)
    return SetConfig.from_region(far, Ambient.FULL)


def yin_yang_sweep(omega: Region, widths, s_values, mode, boxed: bool = True,
                   kappa: float = 4.0, refine: int = 6, threads: int = 1) -> list[SweepRecord]:
    """Maximal minimiser for ring data over a grid of (s, width in diameters)."""
    mode = SweepMode.parse(mode)
    d = diameter(omega)
    points = sorted((float(s), float(w)) for s in s_values for w in widths)
    for _, w in points:
        if w > 0 and not fits_in_box(omega.spec, omega, w * d):
            raise ValueError(f"ring of width {w} diameters exceeds the box")
    tables = {s: WeightTable(omega.spec.with_s(s), boxed=boxed, kappa=kappa, refine=refine)
              for s in sorted({p[0] for p in points})}

    def run(point):
        s, w = point
        table = tables[s]
        om = Region(table.spec, omega.mask)
        datum = ring_datum(om, w * d, mode)
        r = minimise(SetConfig(table.spec, datum.occupancy, datum.ambient), om, table)
        filled = r.maximal_set.volume(om) / len(om)
        return SweepRecord(s, w, filled, r.optimal_value, r.gap_bound, mode,
                           r.maximal_set.occupancy)

    return ordered_map(run, points, threads)


def theta_emp(records, mode=None) -> dict:
    """Least tested width (in diameters) reaching the predicted state, per s (None if never)."""
    out: dict = {}
    for r in records:
        if mode is not None and r.mode is not SweepMode.parse(mode):
            continue
        target = 1.0 if r.mode is SweepMode.FULL_RING_EMPTY_FAR else 0.0
        out.setdefault(r.s, None)
        if r.filled_fraction == target and (out[r.s] is None or r.width_diam < out[r.s]):
            out[r.s] = r.width_diam
    return out


class Isometry:
    """Orthogonal integer map of the plane (or line) about the origin, acting on cells."""

    def __init__(self, matrix, name: str = ""):
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=np.int64))
        self.name = name
        m = self.matrix
        if m.shape[0] != m.shape[1] or not np.array_equal(m @ m.T, np.eye(len(m), dtype=np.int64)):
            raise ValueError("isometry matrix must be orthogonal with integer entries")

    def __repr__(self):
        return f"Isometry({self.name or self.matrix.tolist()})"

    def permutation(self, spec: LatticeSpec) -> np.ndarray:
        """perm[k] = flat index of the image of cell k; raises if the box is not preserved."""
        if spec.dim != len(self.matrix):
            raise ValueError("isometry dimension does not match the lattice")
        # centers are (i + offset) h; work in doubled integer coordinates
        doubled = 2 * spec.indices + int(round(2 * spec.offset))
        image = doubled @ self.matrix.T - int(round(2 * spec.offset))
        if np.any(image % 2):
            raise ValueError(f"{self} does not map cell centers to cell centers")
        try:
            return spec.flat_indices(image // 2)
        except ValueError:
            raise ValueError(f"{self} does not map the box to itself") from None

    def apply(self, mask: np.ndarray, spec: LatticeSpec) -> np.ndarray:
        out = np.zeros_like(mask)
        out[self.permutation(spec)] = mask
        return out


def identity(dim: int = 2) -> Isometry:
    return Isometry(np.eye(dim, dtype=np.int64), "identity")


def rotation90() -> Isometry:
    return Isometry([[0, -1], [1, 0]], "rotation90")


def rotation180() -> Isometry:
    return Isometry([[-1, 0], [0, -1]], "rotation180")


def reflection(axis: int, dim: int = 2) -> Isometry:
    """Reflection flipping coordinate ``axis`` (axis=1 reflects across the x-axis)."""
    m = np.eye(dim, dtype=np.int64)
    m[axis, axis] = -1
    return Isometry(m, f"reflect{axis}")


def sector_datum(omega: Region) -> SetConfig:
    """Box cells outside omega whose center satisfies x*y > 0."""
    c = omega.spec.centers
    occ = (c[:, 0] * c[:, 1] > 0) & ~omega.mask
    return SetConfig(omega.spec, occ, Ambient.EMPTY)


def half_plane_datum(omega: Region, normal, offset: float = 0.0,
                     ambient=Ambient.EMPTY) -> SetConfig:
    """Box cells outside omega with normal . center > offset."""
    c = omega.spec.centers
    occ = (c @ np.asarray(normal, dtype=float) > offset) & ~omega.mask
    return SetConfig(omega.spec, occ, ambient)


@dataclass
class SectorReport:
    h: float
    s: float
    n_free: int
    result: MinimiserPair
    symmetric_difference_volume: float
    minimal_energy: float
    maximal_energy: float
    rotated_energy: float
    rotation_relative_error: float
    n_optima: int | None

    def to_dict(self, omega: Region):
        d = {k: getattr(self, k) for k in (
            "h", "s", "n_free", "symmetric_difference_volume", "minimal_energy",
            "maximal_energy", "rotated_energy", "rotation_relative_error", "n_optima")}
        d["gap_bound"] = self.result.gap_bound
        d["minimiser"] = self.result.to_dict(omega)
        return d


def sector_setup(h: float, s: float, half_width: float = 3.0, offset: float = 0.5,
                 full: bool = False):
    spec = LatticeSpec.square(2, h, half_width, s, offset)
    omega = ball_region(spec, (0.0, 0.0), 1.0)
    if full:
        datum = SetConfig(spec, ~omega.mask, Ambient.FULL)
    else:
        datum = sector_datum(omega)
    return spec, omega, datum


def sector_nonuniqueness(h: float, s: float, half_width: float = 3.0, offset: float = 0.5,
                         full: bool = False, brute: bool | None = None,
                         table: WeightTable | None = None) -> SectorReport:
    """Minimal and maximal minimisers for the quadrant datum outside the unit disc.

    The default staggered lattice (``offset=0.5``) keeps cell centers off the
    axes, so the quarter-turn-plus-complement symmetry of the datum is exact.
    """
    spec, omega, datum = sector_setup(h, s, half_width, offset, full)
    if len(omega) == 0:
        raise ValueError("grid too coarse: the disc contains no cell")
    table = table or WeightTable(spec)
    r = minimise(datum, omega, table)
    lo, hi = r.inside(omega)
    symdiff = int(np.sum(lo != hi)) * h * h
    E = r.minimal_set
    rot = rotation90()
    rotated = SetConfig(spec, rot.apply(~E.occupancy, spec), E.complement().ambient)
    e_rot = perimeter(rotated, omega, table).total
    rel = abs(e_rot - r.optimal_value) / max(abs(r.optimal_value), 1e-300)
    n_opt = None
    if brute or (brute is None and len(omega) <= 16):
        n_opt = len(brute_force(datum, omega, table, limit=BRUTE_FORCE_LIMIT)[1])
    return SectorReport(h, s, len(omega), r, symdiff, r.optimal_value, r.maximal_value,
                        e_rot, rel, n_opt)


def constant_datum_function(omega: Region, lam: float, ring_width: float,
                            far_value: float = 0.0, table: WeightTable | None = None):
    """Assembled minimal function for the datum lam on the ring, far_value beyond it."""
    spec = omega.spec
    table = _resolve(spec, omega, table)
    if not fits_in_box(spec, omega, ring_width):
        raise ValueError("ring exceeds the box")
    ring = ring_region(spec, omega, ring_width)
    vals = np.where(ring.mask, float(lam), float(far_value))
    phi = FuncConfig(spec, vals, float(far_value))
    return phi, assemble_function(build_level_family(phi, omega, table), phi, omega)


def constant_datum_check(omega: Region, lam: float, ring_width: float,
                         far_value: float = 0.0, table: WeightTable | None = None) -> bool:
    _, u = constant_datum_function(omega, lam, ring_width, far_value, table)
    return bool(np.all(u.values[omega.mask] == lam))


def symmetry_inheritance(datum: SetConfig, omega: Region, group,
                         table: WeightTable | None = None) -> bool:
    """True iff the maximal minimiser is invariant under every isometry of ``group``."""
    spec = datum.spec
    table = _resolve(spec, omega, table)
    out = ~omega.mask
    for g in group:
        if not np.array_equal(g.apply(omega.mask, spec), omega.mask):
            raise ValueError(f"{g} does not preserve omega")
        if not np.array_equal(g.apply(datum.occupancy & out, spec), datum.occupancy & out):
            raise ValueError(f"{g} does not preserve the datum")
    E = minimise(datum, omega, table).maximal_set
    return all(np.array_equal(g.apply(E.occupancy, spec), E.occupancy) for g in group)


def bench_geometry(n_cells: int, s: float = 0.5):
    """2-D box of 2*n_cells cells; omega is the central horizontal band of n_cells cells."""
    m = int(round(math.sqrt(n_cells / 2)))
    if 2 * m * m != n_cells or m % 2:
        raise ValueError("bench sizes must be 2*m*m with m even")
    spec = LatticeSpec(2, 1.0 / m, ((-m, m - 1), (-m, m - 1)), s)
    row = spec.indices[:, 1]
    return spec, Region(spec, (row >= -m // 2) & (row < m // 2))


def bench(sizes=(512, 2048, 4608), seed: int = 0, solve_sizes=None):
    """Rows (stage, n_cells, millis) timing kernel fill, one energy evaluation and one solve."""
    rng = np.random.default_rng(seed)
    solve_sizes = sizes if solve_sizes is None else solve_sizes
    rows = []
    for n in sizes:
        spec, omega = bench_geometry(n)
        t0 = time.perf_counter()
        table = WeightTable(spec)
        t1 = time.perf_counter()
        u = FuncConfig(spec, rng.random(spec.n_cells))
        g_energy(u, omega, table)
        t2 = time.perf_counter()
        rows.append(("kernel_fill", n, 1e3 * (t1 - t0)))
        rows.append(("energy", n, 1e3 * (t2 - t1)))
        if n in solve_sizes:
            datum = SetConfig(spec, rng.random(spec.n_cells) < 0.5)
            t3 = time.perf_counter()
            solve_mincut(build_cut_problem(datum, omega, table=table))
            rows.append(("mincut", n, 1e3 * (time.perf_counter() - t3)))
    return rows
