import numpy as np
import pytest
import torch

from hypertimbre import lorentz as L

torch.set_num_threads(1)


def random_point(rng, curv, d, scale=1.0):
    """A point on the sheet reached from the origin by a random tangent of norm ~ scale."""
    xi = torch.from_numpy(rng.normal(0.0, scale, size=d))
    return L.expmap0(xi, curv)


def random_tangent(rng, base, curv, scale=1.0):
    """Tangent at ``base``: a random vector at the origin transported to ``base``."""
    d = base.shape[-1] - 1
    v0 = L.lift_to_tangent(torch.from_numpy(rng.normal(0.0, scale, size=d)))
    return L.parallel_transport(L.origin(curv, d), base, v0, curv)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
