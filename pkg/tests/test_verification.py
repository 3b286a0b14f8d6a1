import json

import pytest

from mosaic.verification import Check, SuiteReport, identities_suite, oracle_suite, run_suite


def test_check_relations():
    assert Check("a", 1e-9, 1e-8).passed
    assert not Check("a", 1e-7, 1e-8).passed
    assert Check("b", 2.0, 1.9, ">=").passed
    assert not Check("a", float("nan"), 1.0).passed
    assert Check("a", 0.5, 1.0).as_dict()["passed"] is True


def test_report_serialises_without_timing():
    rep = SuiteReport("x", 3, [Check("a", 0.1, 1.0), Check("b", 2.0, 1.0)], elapsed=0.25)
    d = rep.as_dict()
    assert "elapsed" not in d and d["seed"] == 3 and d["passed"] is False
    assert json.loads(json.dumps(d)) == d
    assert rep.check("b").value == 2.0
    assert rep.as_dict(timing=True)["elapsed_s"] == 0.25


def test_oracle_suite_small():
    rep = oracle_suite(seed=1, charts=2, ranks=(0, 1, 2))
    assert rep.passed, [c.as_dict() for c in rep.checks if not c.passed]
    names = {c.name for c in rep.checks}
    assert {"oracle/material/n=2", "oracle/jaumann/n=1"} <= names


def test_identities_suite():
    rep = identities_suite(seed=2, charts=2)
    assert rep.passed, [c.as_dict() for c in rep.checks if not c.passed]


def test_suites_are_deterministic():
    a = identities_suite(seed=4, charts=1).as_dict()
    b = identities_suite(seed=4, charts=1).as_dict()
    assert a == b


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nonsense")
