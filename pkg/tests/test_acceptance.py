"""Acceptance criteria at their stated tolerances, one pass/fail line each.

Slow criteria carry the ``slow`` marker; deselect them with ``-m "not slow"``.
"""

import json

import pytest

from zetamellin.acceptance import CRITERIA, SLOW, run_suite


def _params():
    for n in sorted(CRITERIA):
        marks = [pytest.mark.slow] if n in SLOW else []
        yield pytest.param(n, marks=marks, id=f"criterion_{n}")


@pytest.mark.parametrize("number", list(_params()))
def test_criterion(number, capsys):
    (res,) = run_suite([number], seed=0)
    with capsys.disabled():
        print("\n" + res.line())
        if not res.passed:
            print(json.dumps(res.as_dict()["checks"], default=str))
    assert res.passed, res.note or res.line()
