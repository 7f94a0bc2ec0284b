import numpy as np
import pytest
from hypothesis import strategies as st

from fractal_spectra import IFSModel, weighted_cantor


def layout(ratios, gap_weights, probs):
    """Images placed left to right in [0, 1], touching both ends, with the given gap shares."""
    ratios = np.asarray(ratios, dtype=float)
    free = 1.0 - ratios.sum()
    gaps = free * np.asarray(gap_weights, dtype=float) / np.sum(gap_weights)
    offsets = np.concatenate([[0.0], np.cumsum(ratios[:-1] + gaps)])
    offsets[-1] = 1.0 - ratios[-1]
    probs = np.asarray(probs, dtype=float)
    probs = probs / probs.sum()
    probs[-1] = 1.0 - probs[:-1].sum()
    return IFSModel.from_lists(ratios.tolist(), offsets.tolist(), probs.tolist())


def random_model(rng, n_max=5, r_min=0.05):
    n = int(rng.integers(2, n_max + 1))
    ratios = rng.uniform(r_min, 1.0, n)
    ratios *= rng.uniform(0.3, 0.95) / ratios.sum()
    ratios = np.maximum(ratios, 1e-3)
    return layout(ratios, rng.uniform(0.1, 1.0, n - 1), rng.uniform(0.05, 1.0, n))


@st.composite
def models(draw, n_max=5):
    n = draw(st.integers(2, n_max))
    raw = draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n))
    fill = draw(st.floats(0.2, 0.95))
    ratios = np.array(raw) * fill / sum(raw)
    gaps = draw(st.lists(st.floats(0.1, 1.0), min_size=n - 1, max_size=n - 1))
    probs = draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n))
    return layout(ratios, gaps, probs)


@pytest.fixture
def cantor():
    return weighted_cantor()


@pytest.fixture
def flat():
    """p_i = r_i^s: the spectrum collapses to a point."""
    return IFSModel.from_lists([1 / 3, 1 / 3], [0.0, 2 / 3], [0.5, 0.5])


@pytest.fixture
def uneven():
    return IFSModel.from_lists([0.25, 0.5], [0.0, 0.5], [0.2, 0.8])


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
