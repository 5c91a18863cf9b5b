import numpy as np
import pytest

from fracmin.energy import SetConfig
from fracmin.kernel import Ambient, WeightTable
from fracmin.lattice import LatticeSpec, Region


@pytest.fixture
def line5():
    """1-D box [-2..2], h=1, s=0.5 with omega = {0}."""
    spec = LatticeSpec(1, 1.0, ((-2, 2),), 0.5)
    return spec, Region.from_cells(spec, [(0,)]), WeightTable(spec)


def set_of(spec, cells, ambient=Ambient.EMPTY):
    return SetConfig.from_region(Region.from_cells(spec, cells), ambient)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for key in sorted(results, key=lambda k: int(k.split()[0][1:])):
            terminalreporter.write_line(results[key])
