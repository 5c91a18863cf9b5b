"""Discrete fractional perimeter and W^{s,1}-type energies.

Conventions: pairs with both cells in omega are counted once per unordered
pair, pairs (omega, box minus omega) once.  The beyond-box interaction of a
cell x is ``h^n * tail(x) * |u(x) - ambient_value|`` and is dropped entirely
for a boxed weight table.

Every sum is taken row by row in a fixed order (numpy pairwise summation per
row, ``math.fsum`` across rows), so results do not depend on the number of
worker threads.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from ._parallel import ordered_map
from .kernel import Ambient, WeightTable
from .lattice import LatticeSpec, Region

_CHUNK_ELEMS = 1 << 21


@dataclass(frozen=True, eq=False)
class SetConfig:
    spec: LatticeSpec
    occupancy: np.ndarray
    ambient: Ambient = Ambient.EMPTY

    def __post_init__(self):
        occ = np.asarray(self.occupancy, dtype=bool).ravel().copy()
        if occ.shape != (self.spec.n_cells,):
            raise ValueError("occupancy must cover exactly the box cells")
        occ.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)
        object.__setattr__(self, "ambient", Ambient.parse(self.ambient))

    @classmethod
    def from_region(cls, region: Region, ambient=Ambient.EMPTY):
        return cls(region.spec, region.mask, ambient)

    @property
    def region(self) -> Region:
        return Region(self.spec, self.occupancy)

    def to_func(self) -> "FuncConfig":
        return FuncConfig(self.spec, self.occupancy.astype(float), self.ambient.level)

    def with_inside(self, omega: Region, inside) -> "SetConfig":
        """Copy whose occupancy on omega is replaced by ``inside`` (mask over omega cells)."""
        occ = self.occupancy.copy()
        occ[omega.flat] = np.asarray(inside, dtype=bool)
        return SetConfig(self.spec, occ, self.ambient)

    def complement(self) -> "SetConfig":
        flipped = Ambient.EMPTY if self.ambient is Ambient.FULL else Ambient.FULL
        return SetConfig(self.spec, ~self.occupancy, flipped)

    def volume(self, omega: Region) -> int:
        return int(self.occupancy[omega.mask].sum())

    def __eq__(self, other):
        if not isinstance(other, SetConfig):
            return NotImplemented
        return (self.spec == other.spec and self.ambient is other.ambient
                and np.array_equal(self.occupancy, other.occupancy))

    def __hash__(self):
        return hash((self.spec, self.ambient, self.occupancy.tobytes()))

    def __repr__(self):
        return f"SetConfig({int(self.occupancy.sum())}/{self.spec.n_cells} cells, {self.ambient.value})"


@dataclass(frozen=True, eq=False)
class FuncConfig:
    spec: LatticeSpec
    values: np.ndarray
    ambient_value: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).ravel().copy()
        if vals.shape != (self.spec.n_cells,):
            raise ValueError("values must cover exactly the box cells")
        if not np.all(np.isfinite(vals)) or not math.isfinite(self.ambient_value):
            raise ValueError("function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "ambient_value", float(self.ambient_value))

    @classmethod
    def constant(cls, spec: LatticeSpec, value: float):
        return cls(spec, np.full(spec.n_cells, float(value)), value)

    def with_inside(self, omega: Region, inside) -> "FuncConfig":
        vals = self.values.copy()
        vals[omega.flat] = inside
        return FuncConfig(self.spec, vals, self.ambient_value)

    def level_set(self, t: float) -> SetConfig:
        """The superlevel set {u >= t}, including the beyond-box mode."""
        amb = Ambient.FULL if self.ambient_value >= t else Ambient.EMPTY
        return SetConfig(self.spec, self.values >= t, amb)

    def __add__(self, c: float):
        return FuncConfig(self.spec, self.values + c, self.ambient_value + c)

    def __mul__(self, c: float):
        return FuncConfig(self.spec, self.values * c, self.ambient_value * c)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, FuncConfig):
            return NotImplemented
        return (self.spec == other.spec and self.ambient_value == other.ambient_value
                and np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.spec, self.ambient_value, self.values.tobytes()))


def indicator(E: SetConfig) -> FuncConfig:
    return E.to_func()


@dataclass(frozen=True)
class EnergyBreakdown:
    local: float
    nonlocal_: float
    ambient: float
    total: float

    def to_dict(self):
        return {"local": self.local, "nonlocal": self.nonlocal_,
                "ambient": self.ambient, "total": self.total}


@functools.lru_cache(maxsize=16)
def default_table(spec: LatticeSpec) -> WeightTable:
    return WeightTable(spec, boxed=True)


def _resolve(spec: LatticeSpec, omega: Region, table: WeightTable | None) -> WeightTable:
    table = table or default_table(spec)
    if table.spec != spec:
        raise ValueError("weight table built for a different lattice")
    if omega.spec != spec:
        raise ValueError("omega is not a region of this box")
    return table


def _chunks(rows: np.ndarray, width: int):
    step = max(1, _CHUNK_ELEMS // max(width, 1))
    return [rows[i:i + step] for i in range(0, len(rows), step)]


def _pair_sums(values, omega: Region, table: WeightTable, threads: int = 1):
    """Per-omega-row sums of w|u(x)-u(y)| over y in omega and over y in box minus omega."""
    inside = omega.flat
    cols = np.concatenate([inside, np.flatnonzero(~omega.mask)])
    n_in = len(inside)
    v_cols = values[cols]

    def work(rows):
        p = table.block(rows, cols) * np.abs(values[rows][:, None] - v_cols[None, :])
        return p[:, :n_in].sum(axis=1), p[:, n_in:].sum(axis=1)

    parts = ordered_map(work, _chunks(inside, len(cols)), threads)
    loc = np.concatenate([p[0] for p in parts]) if parts else np.zeros(0)
    nl = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0)
    return loc, nl


def _breakdown(values, ambient_value, omega, table, threads):
    loc, nl = _pair_sums(values, omega, table, threads)
    local = 0.5 * math.fsum(loc)
    nonlocal_ = math.fsum(nl)
    ambient = 0.0
    if not table.boxed:
        rows = omega.flat
        ambient = math.fsum(table.tail_weights[rows] * np.abs(values[rows] - ambient_value))
    return EnergyBreakdown(local, nonlocal_, ambient, math.fsum([local, nonlocal_, ambient]))


def perimeter(E: SetConfig, omega: Region, table: WeightTable | None = None,
              threads: int = 1) -> EnergyBreakdown:
    table = _resolve(E.spec, omega, table)
    return _breakdown(E.occupancy.astype(float), E.ambient.level, omega, table, threads)


def g_energy(u: FuncConfig, omega: Region, table: WeightTable | None = None,
             threads: int = 1) -> EnergyBreakdown:
    table = _resolve(u.spec, omega, table)
    return _breakdown(u.values, u.ambient_value, omega, table, threads)


def g_energy_many(values, ambient_values, omega: Region, table: WeightTable) -> np.ndarray:
    """Total energies of a stack of functions, one per row of ``values``."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    ambient_values = np.broadcast_to(np.asarray(ambient_values, dtype=float), (len(values),))
    inside = omega.flat
    outside = np.flatnonzero(~omega.mask)
    w_in = table.block(inside, inside)
    w_out = table.block(inside, outside)
    out = np.empty(len(values))
    step = max(1, _CHUNK_ELEMS // max(len(inside) * max(len(inside), len(outside)), 1))
    for b in range(0, len(values), step):
        v = values[b:b + step]
        vi = v[:, inside]
        loc = 0.5 * (w_in[None] * np.abs(vi[:, :, None] - vi[:, None, :])).sum(axis=(1, 2))
        nl = (w_out[None] * np.abs(vi[:, :, None] - v[:, outside][:, None, :])).sum(axis=(1, 2))
        amb = 0.0
        if not table.boxed:
            tw = table.tail_weights[inside]
            amb = (tw[None] * np.abs(vi - ambient_values[b:b + step, None])).sum(axis=1)
        out[b:b + step] = loc + nl + amb
    return out


def global_tail(u: FuncConfig, omega: Region, table: WeightTable | None = None,
                threads: int = 1) -> float:
    """Interaction of omega with |u| outside omega."""
    table = _resolve(u.spec, omega, table)
    inside = omega.flat
    outside = np.flatnonzero(~omega.mask)
    absu = np.abs(u.values[outside])

    def work(rows):
        return (table.block(rows, outside) * absu[None, :]).sum(axis=1)

    parts = ordered_map(work, _chunks(inside, len(outside)), threads)
    terms = [math.fsum(p) for p in parts]
    if not table.boxed:
        terms.append(math.fsum(table.tail_weights[inside]) * abs(u.ambient_value))
    return math.fsum(terms)


def g_tilde(u: FuncConfig, omega: Region, table: WeightTable | None = None,
            threads: int = 1) -> float:
    """Renormalised energy: G(u) minus the global tail.  May be negative."""
    return g_energy(u, omega, table, threads).total - global_tail(u, omega, table, threads)


def local_tail(phi: FuncConfig, ring: Region, omega: Region,
               table: WeightTable | None = None):
    """Per-cell tail of |phi| restricted to ``ring`` for every omega cell, and its sum."""
    table = _resolve(phi.spec, omega, table)
    if np.any(ring.mask & omega.mask):
        raise ValueError("ring and omega overlap")
    cols = ring.flat
    per_cell = (table.block(omega.flat, cols) * np.abs(phi.values[cols])[None, :]).sum(axis=1)
    return per_cell, math.fsum(per_cell)


def seminorm(u: FuncConfig, omega: Region, table: WeightTable | None = None) -> float:
    """Sum over ordered pairs in omega of w|u(x)-u(y)|."""
    return 2.0 * g_energy(u, omega, table).local


def value_grid(u: FuncConfig, table: WeightTable) -> np.ndarray:
    vals = u.values
    if not table.boxed:
        vals = np.append(vals, u.ambient_value)
    return np.unique(vals)


def coarea_check(u: FuncConfig, omega: Region, table: WeightTable | None = None):
    """Return (G(u), integral over t of Per({u >= t})) evaluated on the exact value grid."""
    table = _resolve(u.spec, omega, table)
    if not table.boxed:
        attained = set(np.unique(u.values).tolist()) | {0.0}
        if u.ambient_value not in attained:
            raise ValueError("ambient value must be an attained value or 0")
    lhs = g_energy(u, omega, table).total
    grid = value_grid(u, table)
    terms = [(grid[k] - grid[k - 1]) * perimeter(u.level_set(grid[k]), omega, table).total
             for k in range(1, len(grid))]
    return lhs, math.fsum(terms)


def split_parts(u: FuncConfig):
    plus = FuncConfig(u.spec, np.maximum(u.values, 0.0), max(u.ambient_value, 0.0))
    minus = FuncConfig(u.spec, np.minimum(u.values, 0.0), min(u.ambient_value, 0.0))
    return plus, minus


def cutoff(u: FuncConfig, lam: float, eps: float) -> FuncConfig:
    """Clamp-and-rescale of u near ``lam``; values land in [0, 1]."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    root = math.sqrt(eps)

    def f(x):
        return np.minimum(eps, np.maximum(x - lam + root, 0.0)) / eps

    return FuncConfig(u.spec, f(u.values), float(f(np.float64(u.ambient_value))))
