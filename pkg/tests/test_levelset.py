import numpy as np
import pytest

from fracmin.energy import FuncConfig, SetConfig
from fracmin.errors import InvariantError
from fracmin.kernel import WeightTable
from fracmin.lattice import LatticeSpec, ball_region
from fracmin.levelset import (assemble_function, build_level_family, competitor_test,
                              is_nondegenerate, verify_function_minimality)
from fracmin.optimise import minimise
from fracmin.verification import random_function, random_instance


def test_reference_family(line5):
    spec, om, t = line5
    phi = FuncConfig(spec, [0, 0, 0, 1, 0])
    fam = build_level_family(phi, om, t)
    assert fam.thresholds.tolist() == [0.0, 1.0]
    assert fam.sets[0].occupancy[om.mask].all()
    assert not fam.sets[1].occupancy[om.mask].any()
    assert len(fam.manifest(om)) == 1
    u = assemble_function(fam, phi, om)
    assert u.values[2] == 0.0
    assert verify_function_minimality(u, om, t, oracle="brute").passed


@pytest.mark.parametrize("lam", [-2.5, 0.0, 1.0])
def test_constant_datum(lam):
    spec = LatticeSpec(2, 0.5, ((-4, 4),) * 2, 0.5)
    om = ball_region(spec, (0, 0), 1.0)
    phi = FuncConfig(spec, np.where(om.mask, 7.0, lam), lam)
    t = WeightTable(spec)
    fam = build_level_family(phi, om, t)
    assert fam.thresholds.tolist() == [lam]
    u = assemble_function(fam, phi, om)
    assert np.all(u.values[om.mask] == lam)


def test_fallback_to_minimum(line5):
    spec, om, t = line5
    # one high value far from omega cannot pull omega up
    phi = FuncConfig(spec, [-1.0, -1.0, 0.0, -1.0, 5.0])
    u = assemble_function(build_level_family(phi, om, t), phi, om)
    assert u.values[2] == -1.0


def test_nesting_violation_is_reported(line5):
    spec, om, t = line5
    phi = FuncConfig(spec, [0, 0, 0, 1, 0])

    def bad_solver(datum, omega, table):
        r = minimise(datum, omega, table)
        flip = datum.with_inside(omega, ~r.maximal_set.occupancy[omega.mask])
        return type(r)(r.optimal_value, flip, flip, r.gap_bound, r.optimal_value)

    with pytest.raises(InvariantError):
        build_level_family(phi, om, t, solver=bad_solver)


@pytest.mark.parametrize("seed", range(25))
def test_assembled_function_is_minimal(seed):
    rng = np.random.default_rng(seed)
    table, om = random_instance(rng, 10)
    phi = random_function(rng, table.spec, n_levels=4)
    u = assemble_function(build_level_family(phi, om, table), phi, om)
    outside = phi.values[~om.mask]
    assert np.all(u.values[om.mask] >= outside.min()) and np.all(u.values[om.mask] <= outside.max())
    assert verify_function_minimality(u, om, table, oracle="brute").passed
    assert verify_function_minimality(u, om, table).passed


def test_threads_do_not_change_family():
    rng = np.random.default_rng(5)
    table, om = random_instance(rng, 12, dims=(2,))
    phi = random_function(rng, table.spec, n_levels=5)
    a = assemble_function(build_level_family(phi, om, table, threads=1), phi, om)
    b = assemble_function(build_level_family(phi, om, table, threads=4), phi, om)
    assert a == b


def test_indicator_of_optimum_passes_and_beats_competitors(rng):
    spec = LatticeSpec(2, 0.5, ((-3, 3),) * 2, 0.5)
    om = ball_region(spec, (0, 0), 1.0)
    t = WeightTable(spec)
    datum = SetConfig(spec, spec.centers[:, 0] > 0.3)
    E = minimise(datum, om, t).maximal_set
    u = E.to_func()
    assert verify_function_minimality(u, om, t, oracle="brute").passed
    comps = [u.with_inside(om, rng.random(len(om))) for _ in range(300)]
    assert competitor_test(u, comps, om, t)
    assert competitor_test(u, [u], om, t)


def test_suboptimal_loses_to_its_assembly(line5):
    spec, om, t = line5
    phi = FuncConfig(spec, [0, 0, 0, 1, 0])
    bad = phi.with_inside(om, [1.0])
    good = assemble_function(build_level_family(bad, om, t), bad, om)
    assert not competitor_test(bad, [good], om, t)
    assert not verify_function_minimality(bad, om, t).passed


def test_competitor_must_share_datum(line5):
    spec, om, t = line5
    u = FuncConfig(spec, [0, 0, 0, 1, 0])
    with pytest.raises(ValueError):
        competitor_test(u, [FuncConfig(spec, [1, 0, 0, 1, 0])], om, t)


def test_perturbation_breaks_nondegenerate_instance():
    found = 0
    rng = np.random.default_rng(11)
    for _ in range(60):
        table, om = random_instance(rng, 8)
        phi = random_function(rng, table.spec, n_levels=3)
        if not is_nondegenerate(phi, om, table):
            continue
        u = assemble_function(build_level_family(phi, om, table), phi, om)
        levels = np.unique(phi.values[~om.mask])
        k = int(rng.integers(len(om)))
        cur = u.values[om.flat[k]]
        other = levels[levels != cur]
        if len(other) == 0:
            continue
        # move the cell strictly between its own value and another datum level
        new = 0.5 * (cur + other[np.argmin(np.abs(other - cur))])
        vals = u.values[om.mask].copy()
        vals[k] = new
        assert not verify_function_minimality(u.with_inside(om, vals), om, table, oracle="brute").passed
        found += 1
    assert found >= 10
