import re

import pytest

from algsim.cwe import CATALOG, IMPLEMENTED, CweNotFound, export, lookup
from algsim.harness import SCENARIOS


def test_known_entries():
    e = lookup("CWE-444")
    assert e.description == "Inconsistent Interpretation of HTTP Requests"
    assert e.occurred_in == ("HAProxy",)
    assert lookup("CWE-290").description == "Authentication Bypass by Spoofing"


def test_missing_entry():
    with pytest.raises(CweNotFound):
        lookup("CWE-9999")


def test_catalog_shape():
    assert len(CATALOG) == 28
    assert all(re.fullmatch(r"CWE-\d+", k) for k in CATALOG)
    assert {k for k, e in CATALOG.items() if e.implemented} == IMPLEMENTED
    assert len(IMPLEMENTED) == 7
    assert lookup("CWE-1333").implemented and lookup("CWE-1333").note


def test_every_scenario_tag_resolves():
    for spec in SCENARIOS.values():
        assert lookup(spec.cwe).implemented


def test_export_is_sorted_and_plain():
    rows = export()
    ids = [int(r["cwe_id"].split("-")[1]) for r in rows]
    assert ids == sorted(ids)
    assert all(isinstance(r["occurred_in"], list) for r in rows)
