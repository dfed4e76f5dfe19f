"""One test per acceptance criterion; each prints a PASS/FAIL line."""
import pytest

from amodel import acceptance

from conftest import CRITERION_LINES


@pytest.mark.parametrize("number", range(1, 10))
def test_criterion(number):
    fn = acceptance.CRITERIA[number - 1]
    result = fn(seed=number)
    line = result.line()
    print(line)
    CRITERION_LINES.append(line)
    assert result.number == number
    assert result.passed, line
