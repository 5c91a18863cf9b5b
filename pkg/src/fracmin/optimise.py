"""Exact minimisation of the discrete fractional perimeter by minimum cut.

Each free cell i carries a binary label (1 = inside the set).  The perimeter
splits into pair terms ``w(i,j)|e_i - e_j|`` between free cells and unary
terms from the fixed datum, so it is a submodular binary energy and a single
s-t minimum cut minimises it exactly.  Weights are quantised to integers
*per pair* (unary costs are integer sums of quantised pair weights), so the
quantised energy is itself a perimeter with symmetric, isometry-invariant
weights: exact ties of the real problem stay exact ties.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .energy import SetConfig, _resolve, perimeter
from .errors import InvariantError
from .kernel import Ambient, WeightTable
from .lattice import Region
from .maxflow import max_flow

MIN_SCALE = 2 ** 20
BRUTE_FORCE_LIMIT = 24
REL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CutProblem:
    datum: SetConfig
    omega: Region
    table: WeightTable
    free: np.ndarray
    cost0: np.ndarray
    cost1: np.ndarray
    pairwise: np.ndarray
    q_cost0: np.ndarray
    q_cost1: np.ndarray
    q_pairwise: np.ndarray
    scale: int
    n_terms: int
    gap_bound: float

    @property
    def n_free(self) -> int:
        return len(self.free)

    def energy(self, labels) -> float:
        """Unquantised binary energy of a labelling of the free cells."""
        e = np.asarray(labels, dtype=bool)
        diff = e[:, None] != e[None, :]
        return math.fsum([0.5 * float((self.pairwise * diff).sum()),
                          math.fsum(np.where(e, self.cost1, self.cost0))])

    def q_energy(self, labels) -> int:
        e = np.asarray(labels, dtype=bool)
        diff = e[:, None] != e[None, :]
        return int((self.q_pairwise * diff).sum()) // 2 + int(np.where(e, self.q_cost1, self.q_cost0).sum())


@dataclass(frozen=True, eq=False)
class MinimiserPair:
    optimal_value: float
    minimal_set: SetConfig
    maximal_set: SetConfig
    gap_bound: float
    maximal_value: float = float("nan")

    def inside(self, omega: Region):
        return (self.minimal_set.occupancy[omega.mask], self.maximal_set.occupancy[omega.mask])

    def to_dict(self, omega: Region):
        spec = omega.spec
        mn = Region(spec, self.minimal_set.occupancy & omega.mask)
        mx = Region(spec, self.maximal_set.occupancy & omega.mask)
        return {
            "optimal_value": self.optimal_value,
            "maximal_value": self.maximal_value,
            "gap_bound": self.gap_bound,
            "free_cells": len(omega),
            "minimal_cells": [list(c) for c in mn.cells],
            "maximal_cells": [list(c) for c in mx.cells],
            "minimal_volume": len(mn) * spec.h ** spec.dim,
            "maximal_volume": len(mx) * spec.h ** spec.dim,
        }


def _ambient_costs(datum: SetConfig, table: WeightTable, rows):
    if table.boxed:
        zero = np.zeros(len(rows))
        return zero, zero
    tw = table.tail_weights[rows]
    if datum.ambient is Ambient.FULL:
        return tw, np.zeros(len(rows))
    return np.zeros(len(rows)), tw


def build_cut_problem(datum: SetConfig, omega: Region, scale: int | None = None,
                      table: WeightTable | None = None) -> CutProblem:
    table = _resolve(datum.spec, omega, table)
    free = omega.flat
    fixed = np.flatnonzero(~omega.mask)
    chi = datum.occupancy[fixed]

    w_fix = table.block(free, fixed)
    w_free = table.block(free, free)
    amb0, amb1 = _ambient_costs(datum, table, free)
    cost0 = (w_fix * chi[None, :]).sum(axis=1) + amb0
    cost1 = (w_fix * ~chi[None, :]).sum(axis=1) + amb1

    n = len(free)
    n_terms = n * (n - 1) // 2 + n * len(fixed) + (0 if table.boxed else n)
    max_term = max(table.max_weight, float(np.max(amb0 + amb1, initial=0.0)))
    budget = float(cost0.sum() + cost1.sum() + w_free.sum())
    if scale is None:
        if max_term == 0.0 or budget == 0.0:
            scale = 1 << 52
        else:
            scale = int(min(2.0 ** 52 / max_term, 2.0 ** 61 / budget))
        if scale < MIN_SCALE:
            raise ValueError("weights too large to quantise within 64-bit capacities")
    else:
        scale = int(scale)
        if scale < MIN_SCALE:
            raise ValueError(f"scale must be at least 2**20, got {scale}")
        if budget * scale >= 2.0 ** 62:
            raise ValueError("scale overflows 64-bit capacities for these weights")

    qtab = table.quantized_table(scale)
    q_fix = table.block(free, fixed, table=qtab)
    q_free = table.block(free, free, table=qtab)
    q_amb0 = np.rint(amb0 * scale).astype(np.int64)
    q_amb1 = np.rint(amb1 * scale).astype(np.int64)
    q_cost0 = (q_fix * chi[None, :]).sum(axis=1) + q_amb0
    q_cost1 = (q_fix * ~chi[None, :]).sum(axis=1) + q_amb1

    per_term = 0.5 + 0.5 * float(np.spacing(max_term * scale)) if max_term > 0 else 0.0
    gap = 2.0 * n_terms * per_term / scale
    return CutProblem(datum, omega, table, free, cost0, cost1, w_free,
                      q_cost0, q_cost1, q_free, scale, n_terms, gap)


def solve_mincut(p: CutProblem) -> MinimiserPair:
    omega, datum, table = p.omega, p.datum, p.table
    n = p.n_free
    if n == 0:
        value = perimeter(datum, omega, table).total
        return MinimiserPair(value, datum, datum, 0.0, value)

    base = np.minimum(p.q_cost0, p.q_cost1)
    cap = np.zeros((n + 2, n + 2), dtype=np.int64)
    cap[:n, :n] = p.q_pairwise
    src, snk = n, n + 1
    cap[src, :n] = p.q_cost0 - base
    cap[:n, snk] = p.q_cost1 - base
    flow = max_flow(cap, src, snk)

    lo = flow.source_reachable()[:n]
    hi = ~flow.sink_reaching()[:n]
    cut_value = flow.value + int(base.sum())
    if p.q_energy(lo) != cut_value or p.q_energy(hi) != cut_value or np.any(lo & ~hi):
        raise InvariantError("min-cut sets disagree with the max-flow value")

    minimal = datum.with_inside(omega, lo)
    maximal = datum.with_inside(omega, hi)
    return MinimiserPair(
        perimeter(minimal, omega, table).total,
        minimal,
        maximal,
        p.gap_bound,
        perimeter(maximal, omega, table).total,
    )


def minimise(datum: SetConfig, omega: Region, table: WeightTable | None = None,
             scale: int | None = None) -> MinimiserPair:
    return solve_mincut(build_cut_problem(datum, omega, scale, table))


def _within(value, best):
    return value <= best + REL_TOL * abs(best)


def brute_force(datum: SetConfig, omega: Region, table: WeightTable | None = None,
                limit: int = BRUTE_FORCE_LIMIT):
    """Enumerate every occupancy of omega; return the minimum and all optima.

    Energies follow the perimeter definition directly: pair terms inside
    omega plus, per free cell and label, the interaction with the fixed cells.
    """
    table = _resolve(datum.spec, omega, table)
    free = omega.flat
    n = len(free)
    if n > limit:
        raise ValueError(f"{n} free cells exceed the brute-force limit {limit}")
    if n == 0:
        return perimeter(datum, omega, table).total, [datum]

    fixed = np.flatnonzero(~omega.mask)
    chi = datum.occupancy[fixed].astype(float)
    w_in = table.block(free, free)
    w_out = table.block(free, fixed)
    # interaction of free cell i, labelled v, with everything outside omega
    outer = np.stack([(w_out * np.abs(v - chi)[None, :]).sum(axis=1) for v in (0.0, 1.0)], axis=1)
    if not table.boxed:
        tw = table.tail_weights[free]
        outer += tw[:, None] * np.abs(np.array([0.0, 1.0]) - datum.ambient.level)[None, :]

    shifts = np.arange(n)
    batch = 1 << min(n, 14)
    energies = np.empty(1 << n)
    for start in range(0, 1 << n, batch):
        codes = np.arange(start, start + batch)
        bits = (codes[:, None] >> shifts[None, :]) & 1
        differ = bits[:, :, None] != bits[:, None, :]
        local = 0.5 * (differ * w_in[None]).sum(axis=(1, 2))
        energies[start:start + batch] = local + outer[shifts[None, :], bits].sum(axis=1)
    best = float(energies.min())
    optima = []
    for code in np.flatnonzero(energies <= best + REL_TOL * abs(best)):
        labels = (int(code) >> shifts) & 1
        optima.append(datum.with_inside(omega, labels.astype(bool)))
    return best, optima


def _same_datum(a: SetConfig, b: SetConfig, omega: Region) -> bool:
    out = ~omega.mask
    return a.ambient is b.ambient and np.array_equal(a.occupancy[out], b.occupancy[out])


def lattice_closure_check(optima, omega: Region, table: WeightTable | None = None) -> bool:
    """True iff unions and intersections of every pair of optima are optima too."""
    optima = list(optima)
    if not optima:
        return True
    for E in optima[1:]:
        if not _same_datum(optima[0], E, omega):
            raise ValueError("optima do not share a datum")
    table = _resolve(optima[0].spec, omega, table)
    best = min(perimeter(E, omega, table).total for E in optima)
    seen: dict[bytes, bool] = {}
    for E, F in itertools.combinations(optima, 2):
        for occ in (E.occupancy | F.occupancy, E.occupancy & F.occupancy):
            key = occ.tobytes()
            if key not in seen:
                cand = SetConfig(E.spec, occ, E.ambient)
                seen[key] = _within(perimeter(cand, omega, table).total, best)
            if not seen[key]:
                return False
    return True
