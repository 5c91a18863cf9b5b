import itertools

import numpy as np
import pytest

from fracmin.lattice import (LatticeSpec, Region, ball_region, build_box, diameter, fits_in_box,
                             ring_region)


def test_box_1d_centers():
    spec = LatticeSpec(1, 1.0, ((-2, 2),), 0.5)
    box = build_box(spec)
    assert len(box) == 5
    np.testing.assert_array_equal(box.centers[:, 0], [-2, -1, 0, 1, 2])


def test_box_2d_count():
    spec = LatticeSpec(2, 0.5, ((-1, 1), (-1, 1)), 0.5)
    assert len(build_box(spec)) == 9
    assert spec.shape == (3, 3)


@pytest.mark.parametrize("kwargs", [
    dict(dim=1, h=1.0, extent=((2, 1),), s=0.5),
    dict(dim=3, h=1.0, extent=((0, 1),) * 3, s=0.5),
    dict(dim=1, h=0.0, extent=((0, 1),), s=0.5),
    dict(dim=1, h=1.0, extent=((0, 1),), s=1.0),
    dict(dim=1, h=1.0, extent=((0, 1),), s=0.0),
])
def test_invalid_specs(kwargs):
    with pytest.raises(ValueError):
        LatticeSpec(**kwargs)


def test_ball_matches_enumeration():
    spec = LatticeSpec(2, 0.5, ((-2, 2), (-2, 2)), 0.5)
    expected = {(i, j) for i, j in itertools.product(range(-2, 3), repeat=2)
                if np.hypot(i * 0.5, j * 0.5) < 1.0}
    ball = ball_region(spec, (0.0, 0.0), 1.0)
    assert set(ball.cells) == expected
    # the strict inequality excludes the four axis cells at distance exactly 1
    assert len(ball) == 9


def test_ball_small_and_large():
    spec = LatticeSpec(2, 0.5, ((-2, 2), (-2, 2)), 0.5)
    assert ball_region(spec, (0.5, 0.0), 0.1).cells == [(1, 0)]
    assert ball_region(spec, (0.0, 0.0), 10.0) == build_box(spec)


def test_ring_examples():
    spec = LatticeSpec(1, 1.0, ((-3, 3),), 0.5)
    om = Region.from_cells(spec, [(0,)])
    assert ring_region(spec, om, 1.5).cells == [(-1,), (1,)]
    assert len(ring_region(spec, om, 0.5)) == 0
    assert ring_region(spec, om, 2.5).cells == [(-2,), (-1,), (1,), (2,)]
    assert fits_in_box(spec, om, 3.5) and not fits_in_box(spec, om, 3.6)


def test_diameter():
    s1 = LatticeSpec(1, 1.0, ((-3, 3),), 0.5)
    assert diameter(Region.from_cells(s1, [(0,)])) == 1.0
    assert diameter(Region.from_cells(s1, [(-1,), (1,)])) == 3.0
    s2 = LatticeSpec(2, 1.0, ((-5, 5), (-5, 5)), 0.5)
    assert diameter(Region.from_cells(s2, [(0, 0), (3, 4)])) == pytest.approx(6.0)
    # collinear cells in 2-D go through the all-pairs fallback
    assert diameter(Region.from_cells(s2, [(0, 0), (1, 0), (2, 0), (3, 0)])) == pytest.approx(4.0)


def test_region_algebra():
    spec = LatticeSpec(1, 1.0, ((-2, 2),), 0.5)
    a = Region.from_cells(spec, [(-1,), (0,)])
    b = Region.from_cells(spec, [(0,), (1,)])
    assert (a | b).cells == [(-1,), (0,), (1,)]
    assert (a & b).cells == [(0,)]
    assert (a - b).cells == [(-1,)]
    assert len(~a) == 3
    assert (a & b) <= a and not a <= b
    assert (0,) in a and (5,) not in a
    assert hash(a) == hash(Region.from_cells(spec, [(0,), (-1,)]))


def test_staggered_lattice_is_symmetric():
    spec = LatticeSpec.square(2, 0.5, 3.0, 0.5, offset=0.5)
    c = spec.centers
    assert spec.shape == (12, 12)
    assert np.all(c[:, 0] != 0) and np.all(c[:, 1] != 0)
    np.testing.assert_allclose(np.sort(c[:, 0]), np.sort(-c[:, 0]))
    lo, hi = spec.box_bounds.T
    np.testing.assert_allclose(lo, -3.0)
    np.testing.assert_allclose(hi, 3.0)


def test_flat_index_round_trip():
    spec = LatticeSpec(2, 1.0, ((-2, 1), (0, 3)), 0.5)
    for k, cell in enumerate(spec.indices):
        assert spec.flat_index(cell) == k
    with pytest.raises(ValueError):
        spec.flat_index((5, 0))
