"""Acceptance gate: one test per criterion, each printing its pass/fail line.

Tolerances and runtime limits live in ``photon_chain_lab.acceptance``; the
line for every criterion is repeated in the terminal summary.
"""

import pytest

from conftest import ACCEPTANCE_LINES
from photon_chain_lab.acceptance import CRITERIA


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA), ids=lambda n: f"criterion_{n}")
def test_criterion(number):
    res = CRITERIA[number]()
    ACCEPTANCE_LINES.append(res.line())
    print(res.line())
    assert res.passed, res.line()
