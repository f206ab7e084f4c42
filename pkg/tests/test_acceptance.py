"""The eleven acceptance criteria at their stated tolerances, one PASS/FAIL line each."""
import pytest

from toroidal_lab.acceptance import CRITERIA, SuiteOptions, run_criterion


@pytest.mark.parametrize("cid", sorted(CRITERIA), ids=lambda c: f"criterion_{c:02d}_{CRITERIA[c][1].__name__}")
def test_criterion(cid, capsys):
    result = run_criterion(cid, SuiteOptions())
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.details
