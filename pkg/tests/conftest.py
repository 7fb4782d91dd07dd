import numpy as np
import pytest

from wishart2cut.model import ModelParams

# Two-cut instances used across the test modules.
A_BIG = ModelParams(10.0, 0.5, 0.05)    # a > 1
A_SMALL = ModelParams(0.1, 0.3, 0.05)   # a < 1
MC = ModelParams(10.0, 0.5, 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n].line())
    passed = sum(r.passed for r in RESULTS.values())
    terminalreporter.write_line(f"{passed}/{len(RESULTS)} criteria passed")
