"""Minimal functions assembled from nested minimal level sets, and their verification."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._parallel import ordered_map
from .energy import FuncConfig, SetConfig, _resolve, g_energy_many, perimeter, value_grid
from .errors import InvariantError
from .kernel import WeightTable
from .lattice import Region
from .optimise import REL_TOL, MinimiserPair, brute_force, minimise


@dataclass
class LevelFamily:
    thresholds: np.ndarray  # ascending
    sets: list[SetConfig]
    results: list[MinimiserPair] = field(default_factory=list)

    def manifest(self, omega: Region):
        """One entry per nontrivial threshold; the lowest one has a full datum and is skipped."""
        return [
            {"threshold": float(t), "optimal_value": r.optimal_value, "gap_bound": r.gap_bound,
             "volume": E.volume(omega)}
            for t, E, r in zip(self.thresholds[1:], self.sets[1:], self.results[1:])
        ]


def datum_levels(phi: FuncConfig, omega: Region, table: WeightTable) -> np.ndarray:
    """Distinct values taken by the datum outside omega (and beyond the box unless boxed)."""
    vals = phi.values[~omega.mask]
    if not table.boxed:
        vals = np.append(vals, phi.ambient_value)
    return np.unique(vals)


def _level_datum(phi: FuncConfig, omega: Region, t: float) -> SetConfig:
    E = phi.level_set(t)
    return E.with_inside(omega, np.zeros(len(omega), dtype=bool))


def build_level_family(phi: FuncConfig, omega: Region, table: WeightTable | None = None,
                       threads: int = 1, solver=None) -> LevelFamily:
    """Maximal minimisers for the data {phi >= t}, one per distinct datum value t.

    Thresholds are processed from the top down and each new set must contain
    the previous one; a violation raises :class:`InvariantError`.
    """
    table = _resolve(phi.spec, omega, table)
    solver = solver or minimise
    levels = datum_levels(phi, omega, table)
    if len(levels) == 0:
        raise ValueError("datum has no cells outside omega")
    descending = levels[::-1]
    results = ordered_map(lambda t: solver(_level_datum(phi, omega, t), omega, table),
                          descending, threads)
    sets = []
    prev = None
    for t, r in zip(descending, results):
        E = r.maximal_set
        if prev is not None and np.any(prev & ~E.occupancy):
            raise InvariantError(f"level set at threshold {t} does not contain the level above")
        prev = E.occupancy
        sets.append(E)
    return LevelFamily(levels, sets[::-1], results[::-1])


def assemble_function(family: LevelFamily, phi: FuncConfig, omega: Region) -> FuncConfig:
    """u = phi outside omega; inside, the largest threshold whose set contains the cell."""
    inside = omega.flat
    u_in = np.full(len(inside), float(family.thresholds.min()))
    for t, E in zip(family.thresholds, family.sets):
        u_in = np.where(E.occupancy[inside], t, u_in)
    return phi.with_inside(omega, u_in)


@dataclass
class LevelVerdict:
    level: float
    perimeter: float
    optimum: float
    tolerance: float
    passed: bool


@dataclass
class MinimalityReport:
    levels: list[LevelVerdict]

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.levels)

    def failing(self):
        return [v for v in self.levels if not v.passed]

    def to_dict(self):
        return {"passed": self.passed,
                "levels": [vars(v) for v in self.levels]}


def verify_function_minimality(u: FuncConfig, omega: Region, table: WeightTable | None = None,
                               oracle: str = "mincut", threads: int = 1) -> MinimalityReport:
    """Check every superlevel set {u >= level} against the optimum for its own exterior datum.

    ``oracle`` is ``"mincut"`` or ``"brute"`` (exhaustive enumeration).
    """
    table = _resolve(u.spec, omega, table)
    if oracle not in ("mincut", "brute"):
        raise ValueError(f"unknown oracle {oracle!r}")

    def check(level):
        E = u.level_set(level)
        per = perimeter(E, omega, table).total
        datum = E.with_inside(omega, np.zeros(len(omega), dtype=bool))
        if oracle == "brute":
            opt, _ = brute_force(datum, omega, table)
            tol = REL_TOL * max(abs(opt), 1e-300)
        else:
            r = minimise(datum, omega, table)
            opt = r.optimal_value
            tol = r.gap_bound + REL_TOL * abs(opt)
        return LevelVerdict(float(level), per, opt, tol, per <= opt + tol)

    return MinimalityReport(ordered_map(check, value_grid(u, table), threads))


def competitor_test(u_star: FuncConfig, competitors, omega: Region,
                    table: WeightTable | None = None) -> bool:
    """True iff no competitor (equal to u_star outside omega) has strictly lower energy."""
    table = _resolve(u_star.spec, omega, table)
    competitors = list(competitors)
    out = ~omega.mask
    for v in competitors:
        if (v.spec != u_star.spec or v.ambient_value != u_star.ambient_value
                or not np.array_equal(v.values[out], u_star.values[out])):
            raise ValueError("competitor differs from u_star outside omega")
    if not competitors:
        return True
    base = float(g_energy_many(u_star.values, u_star.ambient_value, omega, table)[0])
    values = np.stack([v.values for v in competitors])
    energies = g_energy_many(values, [v.ambient_value for v in competitors], omega, table)
    slack = REL_TOL * np.maximum(np.abs(energies), abs(base))
    return bool(np.all(base <= energies + slack))


def is_nondegenerate(phi: FuncConfig, omega: Region, table: WeightTable | None = None,
                     levels=None) -> bool:
    """Every level datum has a single optimum (certified by enumeration)."""
    table = _resolve(phi.spec, omega, table)
    levels = datum_levels(phi, omega, table) if levels is None else levels
    for t in levels:
        _, optima = brute_force(_level_datum(phi, omega, t), omega, table)
        if len(optima) != 1:
            return False
    return True

