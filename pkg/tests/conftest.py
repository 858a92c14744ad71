import numpy as np
import pytest

from mixedplap import OperatorParams, ShapeSpec, build_mesh


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def unit_interval_mesh():
    params = OperatorParams(N=1, p=2.0, s=0.3, theta=0.32)
    return build_mesh(ShapeSpec.interval(0.0, 1.0, 64), params), params


@pytest.fixture(scope="session")
def small_disk_mesh():
    params = OperatorParams(N=2, p=2.0, s=0.5, theta=0.5)
    return build_mesh(ShapeSpec.disk((0.0, 0.0), 1.0, 16), params), params


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, when those tests ran."""
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not any(mod.RESULTS.values()):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
