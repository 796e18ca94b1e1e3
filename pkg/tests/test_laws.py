import json

import pytest

from convexsmooth.structures.descriptors import orthant, region_X, square_pyramid
from convexsmooth.structures.laws import (PRESET_SETS, axiom_suite, chen_queries,
                                          default_candidates, exhaustion_laws,
                                          nonstandard_distinction, real_queries,
                                          reflexivity_report, roundtrip_suite, x_queries)
from convexsmooth.structures.symbolic import SymbolicMap, coords, exp


def test_query_suites_have_twenty_maps():
    assert len(real_queries()) == 20
    assert len(x_queries()) == 20
    assert {want for _, want in x_queries()} == {True, False}


@pytest.mark.parametrize("which", ["R", "X"])
def test_di_ch_round_trip(which):
    r = roundtrip_suite(which)
    assert r["queries"] == 20 and r["agree"] == 20
    assert r["passed"]
    assert all(row["matches_expected"] for row in r["rows"])


def test_exhaustion_laws():
    r = exhaustion_laws()
    assert r["passed"]
    for name, entry in r.items():
        if isinstance(entry, dict):
            assert entry["inclusion"] and entry["idempotent"], name


def test_exhaustion_adjoins_exactly_the_missing_plots():
    # plots rejected by the nonstandard structure but accepted by its exhaustion
    r = exhaustion_laws()
    ns = next(v for k, v in r.items() if isinstance(v, dict) and "ns" in k)
    gained = {row["query"] for row in ns["rows"] if row["in_E"] and not row["in_C"]}
    standard = {q.name for q, std, _ in chen_queries() if std}
    non = {q.name for q, _, n in chen_queries() if n}
    assert gained == standard - non


def test_nonstandard_distinction():
    r = nonstandard_distinction()
    assert r["passed"]
    assert r["obstruction"] == pytest.approx(1.0, abs=1e-12)
    assert r["standard"]["status"] != "FAILED"
    assert r["nonstandard"]["status"] == "FAILED"
    assert r["exhaustion"]["status"] != "FAILED"
    assert r["probes"] and all(p["standard"] and p["nonstandard"] for p in r["probes"])


def test_axiom_suite():
    r = axiom_suite()
    assert r["passed"]
    assert r["D_std(X)"]["D2_precomposition"] == {"pairs": 20, "ok": 20}
    assert r["D_std(X)"]["D3_locality"]["glued"] > 0
    assert r["F_sub(X)"]["S2_locality"]


def test_reflexivity_tension_on_X():
    rep = reflexivity_report(region_X(), default_candidates(region_X()))
    assert rep.flag == "tension"
    (entry,) = rep.entries
    assert entry.phi.ok and not entry.affirmed
    cert = entry.blowup
    assert cert["passed"] and abs(cert["slope"] + 0.5) <= 0.02


@pytest.mark.parametrize("make", [square_pyramid, lambda: orthant(2)])
def test_reflexivity_consistent_on_closed_sets(make):
    S = make()
    cands = default_candidates(S)
    assert len(cands) == 5
    rep = reflexivity_report(S, cands)
    assert rep.flag == "consistent"
    assert all(e.affirmed and e.blowup is None for e in rep.entries)


def test_orthant_exponential():
    x, y = coords(2)
    rep = reflexivity_report(orthant(2), [SymbolicMap.of(exp(x + y), n_in=2, name="exp(x+y)")])
    assert rep.flag == "consistent"


def test_report_serialises_deterministically():
    a = reflexivity_report(square_pyramid(), default_candidates(square_pyramid())).to_dict()
    b = reflexivity_report(square_pyramid(), default_candidates(square_pyramid())[::-1]).to_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert set(PRESET_SETS) == {"X", "pyramid", "orthant"}
