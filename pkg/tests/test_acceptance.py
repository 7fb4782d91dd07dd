"""The twelve acceptance criteria at their stated tolerances.

Each criterion is one test; the pass/fail table is printed at the end of the
pytest run (see ``conftest.py``) and also when this file is run as a script.
"""

import pytest

from wishart2cut.acceptance import CRITERIA, format_table, mass_sensitivity_probe, run_criterion

RESULTS = {}


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=[f"criterion-{c[0]:02d}" for c in CRITERIA])
def test_criterion(number):
    r = run_criterion(number)
    RESULTS[number] = r
    print(r.line())
    assert r.passed, r.detail


def test_mass_check_is_sensitive():
    # an endpoint moved by 1e-3 must be caught by criterion 3's tolerance
    err, detected = mass_sensitivity_probe()
    assert detected, f"perturbed mass error only {err:.2e}"


if __name__ == "__main__":
    from wishart2cut.acceptance import run_suite

    print(format_table(run_suite()), end="")
