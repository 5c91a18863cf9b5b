import numpy as np
import pytest

from fracmin.energy import perimeter
from fracmin.kernel import WeightTable
from fracmin.lattice import LatticeSpec, Region, ball_region
from fracmin.experiments import (Isometry, SweepMode, bench, bench_geometry, constant_datum_check,
                                 half_plane_datum, identity, reflection, ring_datum, rotation90,
                                 rotation180, sector_datum, sector_nonuniqueness,
                                 symmetry_inheritance, theta_emp, yin_yang_sweep)

R = 2 ** -1.5
FILL = 2 * (R + 3 ** -1.5)


@pytest.fixture
def line7():
    spec = LatticeSpec(1, 1.0, ((-3, 3),), 0.5)
    return spec, Region.from_cells(spec, [(0,)])


def test_reference_full_ring(line7):
    spec, om = line7
    datum = ring_datum(om, 1.5, SweepMode.FULL_RING_EMPTY_FAR)
    assert datum.region.cells == [(-1,), (1,)]
    t = WeightTable(spec)
    filled = perimeter(datum.with_inside(om, [True]), om, t).total
    empty = perimeter(datum, om, t).total
    assert filled == pytest.approx(FILL, abs=1e-12) and empty == 2.0
    (rec,) = yin_yang_sweep(om, [1.5], [0.5], "full_ring_empty_far")
    assert rec.filled_fraction == 1.0 and rec.optimal_value == pytest.approx(FILL, abs=1e-12)


def test_reference_empty_ring(line7):
    spec, om = line7
    datum = ring_datum(om, 1.5, SweepMode.EMPTY_RING_FULL_FAR)
    assert datum.region.cells == [(-3,), (-2,), (2,), (3,)]
    t = WeightTable(spec)
    assert perimeter(datum.with_inside(om, [True]), om, t).total == 2.0
    assert perimeter(datum, om, t).total == pytest.approx(FILL, abs=1e-12)
    (rec,) = yin_yang_sweep(om, [1.5], [0.5], SweepMode.EMPTY_RING_FULL_FAR)
    assert rec.filled_fraction == 0.0


def test_zero_width_is_empty(line7):
    _, om = line7
    (rec,) = yin_yang_sweep(om, [0.0], [0.5], "full_ring_empty_far")
    assert rec.filled_fraction == 0.0 and rec.optimal_value == 0.0


def test_ring_outside_box_rejected(line7):
    _, om = line7
    with pytest.raises(ValueError):
        yin_yang_sweep(om, [4.0], [0.5], "full_ring_empty_far")


def test_csv_row_and_theta(line7):
    _, om = line7
    recs = yin_yang_sweep(om, [0.5, 1.5], [0.2, 0.8], "full_ring_empty_far")
    assert [(r.s, r.width_diam) for r in recs] == [(0.2, 0.5), (0.2, 1.5), (0.8, 0.5), (0.8, 1.5)]
    assert recs[0].csv_row().endswith(",full_ring_empty_far")
    assert len(recs[0].csv_row().split(",")) == 6
    th = theta_emp(recs)
    assert th == {0.2: 1.5, 0.8: 1.5}


def test_sweep_threads_identical():
    spec = LatticeSpec.square(2, 0.5, 6.0, 0.5)
    om = ball_region(spec, (0, 0), 1.0)
    a = yin_yang_sweep(om, [0.5, 1.0], [0.2, 0.5], "full_ring_empty_far", threads=1)
    b = yin_yang_sweep(om, [0.5, 1.0], [0.2, 0.5], "full_ring_empty_far", threads=3)
    assert [r.csv_row() for r in a] == [r.csv_row() for r in b]


def test_modes_mirror_each_other():
    spec = LatticeSpec.square(2, 0.5, 6.0, 0.5)
    om = ball_region(spec, (0, 0), 1.0)
    widths = [0.25, 0.5, 1.0, 1.5]
    full = yin_yang_sweep(om, widths, [0.2, 0.8], "full_ring_empty_far")
    emp = yin_yang_sweep(om, widths, [0.2, 0.8], "empty_ring_full_far")
    for a, b in zip(full, emp):
        assert a.optimal_value == pytest.approx(b.optimal_value, rel=1e-12)
    # complement duality: the maximal minimiser of one mode is the complement of the
    # minimal one of the other, so filled fractions need not be exact mirrors; Theta agrees
    assert theta_emp(full) == theta_emp(emp)


def test_sector_instance():
    rep = sector_nonuniqueness(0.5, 0.5)
    assert rep.n_free == 12
    assert rep.symmetric_difference_volume > 0
    assert abs(rep.minimal_energy - rep.maximal_energy) <= 2 * rep.result.gap_bound
    assert rep.n_optima >= 2
    assert rep.rotation_relative_error <= 1e-9


def test_sector_full_datum_is_unique():
    rep = sector_nonuniqueness(0.5, 0.5, full=True)
    assert rep.symmetric_difference_volume == 0 and rep.n_optima == 1
    assert rep.minimal_energy == 0.0


def test_unstaggered_sector_is_not_symmetric():
    # centers on the axes break the quarter-turn symmetry of the quadrant datum
    rep = sector_nonuniqueness(0.5, 0.5, offset=0.0)
    assert rep.n_optima == 1


def test_isometries():
    spec = LatticeSpec.square(2, 0.5, 3.0, 0.5, offset=0.5)
    mask = np.zeros(spec.n_cells, bool)
    mask[spec.flat_index((0, 0))] = True  # center (0.25, 0.25)
    img = rotation90().apply(mask, spec)
    np.testing.assert_allclose(spec.centers[img][0], [-0.25, 0.25])
    r = rotation90()
    four = mask
    for _ in range(4):
        four = r.apply(four, spec)
    assert np.array_equal(four, mask)
    assert np.array_equal(identity().apply(mask, spec), mask)
    with pytest.raises(ValueError):
        Isometry([[1, 1], [0, 1]])
    odd = LatticeSpec(2, 1.0, ((-2, 3), (-2, 2)), 0.5)
    with pytest.raises(ValueError):
        reflection(0).permutation(odd)


def test_symmetry_inheritance():
    spec = LatticeSpec.square(2, 0.5, 3.0, 0.5, offset=0.5)
    om = ball_region(spec, (0, 0), 1.0)
    left = half_plane_datum(om, [-1.0, 0.0])
    assert symmetry_inheritance(left, om, [identity()])
    assert symmetry_inheritance(left, om, [reflection(1)])
    assert symmetry_inheritance(sector_datum(om), om, [rotation180()])
    with pytest.raises(ValueError):
        symmetry_inheritance(left, om, [reflection(0)])


@pytest.mark.parametrize("lam", [-2.5, 0.0, 1.0])
def test_constant_datum_rigidity(lam):
    spec = LatticeSpec.square(2, 0.5, 6.0, 0.5)
    om = ball_region(spec, (0, 0), 1.0)
    assert constant_datum_check(om, lam, 2.5 * 2.0)


def test_bench_schema():
    spec, om = bench_geometry(512)
    assert spec.n_cells == 1024 and len(om) == 512
    with pytest.raises(ValueError):
        bench_geometry(500)
    rows = bench((32,), seed=1)
    assert [r[0] for r in rows] == ["kernel_fill", "energy", "mincut"]
    assert all(r[1] == 32 and r[2] >= 0 for r in rows)
