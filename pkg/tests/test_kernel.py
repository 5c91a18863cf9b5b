import math

import numpy as np
import pytest

from fracmin.kernel import Ambient, WeightTable, ambient_tail_integrals, kernel_weight
from fracmin.lattice import LatticeSpec


def test_weight_examples():
    s1 = LatticeSpec(1, 1.0, ((-2, 2),), 0.5)
    t = WeightTable(s1)
    assert t.weight((0,), (1,)) == pytest.approx(1.0, rel=1e-15)
    assert t.weight((0,), (2,)) == pytest.approx(2 ** -1.5, rel=1e-15)
    assert t.weight((0,), (0,)) == 0.0
    s2 = LatticeSpec(2, 1.0, ((-2, 2), (-2, 2)), 0.5)
    assert WeightTable(s2).weight((0, 0), (1, 1)) == pytest.approx(2 ** -1.25, rel=1e-15)


@pytest.mark.parametrize("dim,h,s", [(1, 0.5, 0.2), (2, 0.25, 0.8), (2, 1.0, 0.5)])
def test_offset_table_matches_direct(dim, h, s):
    spec = LatticeSpec(dim, h, ((-3, 3),) * dim, s)
    a, b = WeightTable(spec), WeightTable(spec, strategy="direct")
    rows = np.arange(spec.n_cells)
    np.testing.assert_array_equal(a.block(rows, rows), b.block(rows, rows))
    blk = a.block(rows, rows)
    np.testing.assert_array_equal(blk, blk.T)


def test_weight_formula_scaling():
    # w = h^{2n} (h r)^{-(n+s)}
    spec = LatticeSpec(2, 0.25, ((-1, 1),) * 2, 0.3)
    w = kernel_weight(spec, 5)
    assert w == pytest.approx(0.25 ** 4 * (0.25 * math.sqrt(5)) ** -2.3, rel=1e-14)


def test_boxed_table_has_no_tails():
    spec = LatticeSpec(1, 1.0, ((-2, 2),), 0.5)
    with pytest.raises(ValueError):
        WeightTable(spec).tails


def test_tail_1d_against_exact_integral():
    spec = LatticeSpec(1, 1.0, ((-2, 2),), 0.5)
    t = WeightTable(spec, boxed=False, kappa=4.0, refine=6)
    exact = 4 / math.sqrt(2.5)
    assert t.ambient_tail((0,)) == pytest.approx(exact, rel=0.02)
    # off-center cells see the near edge more strongly
    assert t.ambient_tail((2,)) > t.ambient_tail((0,))
    exact_edge = 2 / math.sqrt(0.5) + 2 / math.sqrt(4.5)
    assert t.ambient_tail((2,)) == pytest.approx(exact_edge, rel=0.02)


def test_tail_converges_with_refinement():
    spec = LatticeSpec(1, 1.0, ((-2, 2),), 0.5)
    exact = 4 / math.sqrt(2.5)
    errs = [abs(ambient_tail_integrals(spec, np.zeros((1, 1)), 4.0, r)[0] - exact)
            for r in range(0, 7)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] / exact < 1e-4


def test_tail_2d_is_symmetric_and_positive():
    spec = LatticeSpec(2, 0.5, ((-3, 3),) * 2, 0.5)
    t = WeightTable(spec, boxed=False, refine=3)
    grid = t.tails.reshape(spec.shape)
    assert np.all(grid > 0)
    np.testing.assert_allclose(grid, grid[::-1], rtol=1e-12)
    np.testing.assert_allclose(grid, grid.T, rtol=1e-12)
    assert grid[0, 0] > grid[3, 3]


def test_box_sum_grows_and_total_converges():
    # tail(0) approximates the sum of the missing weights, so sum + tail settles as the box grows
    totals, sums = [], []
    for half in (4, 8, 16, 32):
        spec = LatticeSpec(1, 1.0, ((-half, half),), 0.5)
        t = WeightTable(spec, boxed=False)
        row = t.block([spec.flat_index((0,))], np.arange(spec.n_cells))[0]
        sums.append(row.sum())
        totals.append(row.sum() + t.tail_weights[spec.flat_index((0,))])
    assert all(b > a for a, b in zip(sums, sums[1:]))
    diffs = [abs(b - a) for a, b in zip(totals, totals[1:])]
    assert all(d2 < d1 for d1, d2 in zip(diffs, diffs[1:]))
    exact = 2 * sum(k ** -1.5 for k in range(1, 200000)) + 2 * 2 / math.sqrt(200000 - 0.5)
    assert totals[-1] == pytest.approx(exact, rel=2e-3)


def test_ambient_parse_and_level():
    assert Ambient.parse("full") is Ambient.FULL
    assert Ambient.parse("EMPTY") is Ambient.EMPTY
    assert Ambient.FULL.level == 1.0 and Ambient.EMPTY.level == 0.0
    with pytest.raises(ValueError):
        Ambient.parse("none")


def test_bad_table_parameters():
    spec = LatticeSpec(1, 1.0, ((-2, 2),), 0.5)
    with pytest.raises(ValueError):
        WeightTable(spec, kappa=1.0)
    with pytest.raises(ValueError):
        WeightTable(spec, strategy="fft")
