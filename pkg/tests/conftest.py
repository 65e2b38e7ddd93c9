import numpy as np
import pytest
from hypothesis import strategies as st

from majoranon import fields as fl

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
complexes = st.builds(complex, finite, finite)
spinors = st.lists(complexes, min_size=2, max_size=2).map(lambda v: np.array(v, dtype=complex))


def random_field(grid, seed=0, smooth=False):
    """Random complex field; ``smooth`` restricts it to low momenta."""
    rng = np.random.default_rng(seed)
    vals = rng.normal(size=(2,) + grid.shape) + 1j * rng.normal(size=(2,) + grid.shape)
    if smooth:
        spec = np.fft.fftn(vals, axes=tuple(range(1, grid.dim + 1)))
        mask = np.ones(grid.shape, dtype=bool)
        for axis, n in enumerate(grid.n):
            idx = np.abs(np.fft.fftfreq(n, 1 / n))
            shape = [1] * grid.dim
            shape[axis] = n
            mask &= (idx <= n // 8).reshape(shape)
        vals = np.fft.ifftn(spec * mask, axes=tuple(range(1, grid.dim + 1)))
    return fl.SpinorField(grid, vals)


@pytest.fixture
def grid1():
    return fl.make_grid(1, [64], [40.0])


@pytest.fixture
def grid2():
    return fl.make_grid(2, [16, 16], [10.0, 12.0])


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
