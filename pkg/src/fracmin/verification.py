"""Randomised property suites over small instances.

Every suite draws its instances from the generator it is handed and returns
``(passed, failed)`` counts, so one seeded generator drives a whole run.
"""
from __future__ import annotations

import numpy as np

from .energy import (FuncConfig, SetConfig, coarea_check, cutoff, g_tilde, perimeter,
                     split_parts)
from .kernel import Ambient, WeightTable
from .lattice import LatticeSpec, Region
from .levelset import assemble_function, build_level_family, verify_function_minimality
from .optimise import brute_force, lattice_closure_check, minimise

S_CHOICES = (0.2, 0.5, 0.8)


def random_instance(rng: np.random.Generator, max_free: int = 12, dims=(1, 2), min_free: int = 1):
    """A random lattice, weight table and omega with between min_free and max_free cells."""
    dim = int(rng.choice(dims))
    s = float(rng.choice(S_CHOICES))
    if dim == 1:
        half = int(rng.integers(max(3, max_free // 2 + 1), max_free + 6))
        spec = LatticeSpec(1, float(rng.choice([0.5, 1.0, 2.0])), ((-half, half),), s)
    else:
        half = int(rng.integers(2, 5))
        spec = LatticeSpec(2, float(rng.choice([0.25, 0.5, 1.0])), ((-half, half),) * 2, s)
    k = int(rng.integers(min_free, min(max_free, spec.n_cells - 1) + 1))
    if rng.random() < 0.5:
        # a connected-ish blob: the k cells nearest a random center
        c = spec.centers[rng.integers(spec.n_cells)]
        order = np.argsort(np.linalg.norm(spec.centers - c, axis=1), kind="stable")
        mask = np.zeros(spec.n_cells, dtype=bool)
        mask[order[:k]] = True
    else:
        mask = np.zeros(spec.n_cells, dtype=bool)
        mask[rng.choice(spec.n_cells, k, replace=False)] = True
    return WeightTable(spec), Region(spec, mask)


def random_set(rng, spec: LatticeSpec, ambient=None) -> SetConfig:
    p = rng.random()
    amb = ambient or (Ambient.FULL if rng.random() < 0.5 else Ambient.EMPTY)
    return SetConfig(spec, rng.random(spec.n_cells) < p, amb)


def random_function(rng, spec: LatticeSpec, n_levels: int | None = None) -> FuncConfig:
    """Random values; with ``n_levels`` they come from a small integer-ish grid."""
    if n_levels:
        grid = np.round(rng.uniform(-3, 3, n_levels), 3)
        vals = rng.choice(grid, spec.n_cells)
        amb = float(rng.choice(np.append(grid, 0.0)))
    else:
        vals = rng.normal(size=spec.n_cells) * rng.uniform(0.1, 5)
        amb = 0.0
    return FuncConfig(spec, vals, amb)


def suite_coarea(rng, instances: int, max_free: int = 12):
    ok = bad = 0
    for _ in range(instances):
        table, omega = random_instance(rng, max_free)
        u = random_function(rng, table.spec, n_levels=int(rng.integers(2, 7)) if rng.random() < 0.5 else None)
        lhs, rhs = coarea_check(u, omega, table)
        if abs(lhs - rhs) <= 1e-10 * max(1.0, lhs):
            ok += 1
        else:
            bad += 1
    return ok, bad


def suite_submodularity(rng, instances: int, max_free: int = 12):
    ok = bad = 0
    for _ in range(instances):
        table, omega = random_instance(rng, max_free)
        amb = Ambient.FULL if rng.random() < 0.5 else Ambient.EMPTY
        E = random_set(rng, table.spec, amb)
        F = random_set(rng, table.spec, amb)
        pe = perimeter(E, omega, table).total
        pf = perimeter(F, omega, table).total
        pu = perimeter(SetConfig(E.spec, E.occupancy | F.occupancy, amb), omega, table).total
        pi = perimeter(SetConfig(E.spec, E.occupancy & F.occupancy, amb), omega, table).total
        if pu + pi <= pe + pf + 1e-10 * max(1.0, pe + pf):
            ok += 1
        else:
            bad += 1
    return ok, bad


def suite_oracle(rng, instances: int, max_free: int = 12):
    ok = bad = 0
    for _ in range(instances):
        table, omega = random_instance(rng, max_free)
        datum = random_set(rng, table.spec)
        r = minimise(datum, omega, table)
        value, optima = brute_force(datum, omega, table)
        union = np.logical_or.reduce([E.occupancy for E in optima])
        inter = np.logical_and.reduce([E.occupancy for E in optima])
        good = (abs(r.optimal_value - value) <= r.gap_bound + 1e-9 * abs(value)
                and np.array_equal(r.minimal_set.occupancy, inter)
                and np.array_equal(r.maximal_set.occupancy, union)
                and lattice_closure_check(optima, omega, table))
        ok, bad = (ok + 1, bad) if good else (ok, bad + 1)
    return ok, bad


def suite_ster(rng, instances: int, max_free: int = 12):
    ok = bad = 0
    for _ in range(instances):
        table, omega = random_instance(rng, max_free)
        phi = random_function(rng, table.spec, n_levels=int(rng.integers(2, 5)))
        u = assemble_function(build_level_family(phi, omega, table), phi, omega)
        good = verify_function_minimality(u, omega, table, oracle="brute").passed
        ok, bad = (ok + 1, bad) if good else (ok, bad + 1)
    return ok, bad


def suite_splitting(rng, instances: int, max_free: int = 12):
    ok = bad = 0
    for _ in range(instances):
        table, omega = random_instance(rng, max_free)
        u = random_function(rng, table.spec)
        plus, minus = split_parts(u)
        lhs = g_tilde(u, omega, table)
        rhs = g_tilde(plus, omega, table) + g_tilde(minus, omega, table)
        scale = g_tilde(plus, omega, table) - g_tilde(minus, omega, table)
        good = abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs), abs(scale))
        ok, bad = (ok + 1, bad) if good else (ok, bad + 1)
    return ok, bad


def suite_cutoff(rng, instances: int, max_free: int = 12):
    ok = bad = 0
    for _ in range(instances):
        table, omega = random_instance(rng, max_free)
        phi = random_function(rng, table.spec, n_levels=int(rng.integers(2, 5)))
        u = assemble_function(build_level_family(phi, omega, table), phi, omega)
        lam = float(rng.uniform(-3, 3))
        eps = float(10 ** rng.uniform(-3, 0.5))
        good = verify_function_minimality(cutoff(u, lam, eps), omega, table).passed
        ok, bad = (ok + 1, bad) if good else (ok, bad + 1)
    return ok, bad


SUITES = {
    "coarea": suite_coarea,
    "submodularity": suite_submodularity,
    "oracle": suite_oracle,
    "ster": suite_ster,
    "splitting": suite_splitting,
    "cutoff": suite_cutoff,
}


def run_all(seed: int = 0, instances: int = 20, max_free: int = 12) -> dict:
    rng = np.random.default_rng(seed)
    report = {}
    for name, suite in SUITES.items():
        passed, failed = suite(rng, instances, max_free)
        report[name] = {"passed": passed, "failed": failed}
    total_ok = sum(v["passed"] for v in report.values())
    total_bad = sum(v["failed"] for v in report.values())
    return {"seed": seed, "instances": instances, "max_free_cells": max_free,
            "passed": total_ok, "failed": total_bad, "suites": report}
