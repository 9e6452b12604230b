"""Acceptance gate: one test per numbered criterion, each delegating to the
matching verification suite at its documented default parameters.

Run with `pytest -s tests/test_acceptance.py` to see the per-check lines and
the one PASS/FAIL verdict line per criterion.
"""

import pytest

from oamghost.verify import run_suite

CRITERIA = [
    (1, "discord-extremum"),
    (2, "csd-oracle"),
    (3, "normalization"),
    (4, "separability"),
    (5, "discord-oracle"),
    (6, "imaging"),
    (7, "mode-math"),
]


@pytest.mark.parametrize("number,suite", CRITERIA, ids=[f"{n}-{s}" for n, s in CRITERIA])
def test_acceptance_criterion(number, suite):
    results = run_suite(suite)
    for result in results:
        print(f"  {result.line()}")
    verdict = "PASS" if all(r.passed for r in results) else "FAIL"
    print(f"ACCEPTANCE {number}-{suite}: {verdict}")
    failed = [r for r in results if not r.passed]
    assert not failed, "; ".join(f"{r.name}: {r.detail}" for r in failed)
