"""Acceptance suite: every criterion at its stated tolerance, at L = 32.

Each criterion prints one summary PASS/FAIL line (collected into the
pytest terminal summary, and printed directly when this file is run as a
script). Checks built on reference constants that disagree with their own
closed forms are reported separately; they fail as written and are kept
as strict expected failures, while the oracle-corrected versions of the
same checks must pass.

Run ``python tests/test_acceptance.py`` for the report alone.
"""
from __future__ import annotations

import warnings

import pytest

from cmcfol.checks import CRITERIA

L = 32
TITLES = {
    1: "Schwarzschild exactness",
    2: "ADM mass convergence",
    3: "stability spectrum",
    4: "eigenvalue identity",
    5: "continuity method",
    6: "centers coincide",
    7: "center velocity formula",
    8: "identity residual suite",
    9: "flux decay",
    10: "asymptote fitter",
}
_CACHE: dict = {}
SUMMARY: list = []


def results(k):
    if k not in _CACHE:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _CACHE[k] = CRITERIA[k](L=L)
        SUMMARY.append(summary_line(k, _CACHE[k]))
    return _CACHE[k]


def summary_line(k, res):
    faithful = [r for r in res if not r.known_inconsistent]
    printed = [r for r in res if r.known_inconsistent]
    ok = all(r.passed for r in faithful)
    lit = all(r.passed for r in printed)
    tag = "PASS" if ok and lit else "FAIL"
    line = f"{tag} criterion {k} ({TITLES[k]}): {sum(r.passed for r in faithful)}/{len(faithful)} checks"
    if printed:
        line += f"; printed-constant checks {sum(r.passed for r in printed)}/{len(printed)}"
        if ok and not lit:
            line += " (fail as printed; closed-form oracle checks pass)"
    return line


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    res = results(k)
    for r in res:
        print(r.line())
    bad = [r.line() for r in res if not r.passed and not r.known_inconsistent]
    assert not bad, "\n".join(bad)


@pytest.mark.xfail(strict=True, reason="printed reference constant disagrees with its closed form; see the decisions ledger")
@pytest.mark.parametrize("k", [1, 2, 4])
def test_printed_constants(k):
    printed = [r for r in results(k) if r.known_inconsistent]
    assert printed
    for r in printed:
        print(r.line())
    assert all(r.passed for r in printed)


if __name__ == "__main__":
    for k in sorted(CRITERIA):
        res = results(k)
        for r in res:
            print("    " + r.line())
        print(SUMMARY[-1])
