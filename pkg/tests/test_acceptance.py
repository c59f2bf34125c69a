"""The eleven acceptance criteria at their stated tolerances; one PASS/FAIL line each."""
import pytest

from splitflow.acceptance import CRITERIA


@pytest.mark.acceptance
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, acceptance_lines):
    res = CRITERIA[number]()
    print(res.line())
    acceptance_lines.append(res.line())
    assert res.passed, res.line()
