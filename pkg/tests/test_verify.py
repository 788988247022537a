import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rikit.gridfn import ParameterError, make_grid
from rikit.norms import lebesgue, lorentz
from rikit.operators import KernelOp
from rikit.profiles import linear_profile, power_profile
from rikit.verify import (
    SUITE,
    RatioReport,
    RegistryError,
    SuiteConfig,
    TestFamily,
    nonincreasing_reduction_check,
    op_norm_dual,
    op_norm_estimate,
    op_norm_lower,
    ratio_report,
    reports_csv,
    reports_jsonl,
    run_suite,
    theorem_suite,
)

SMALL = make_grid(K=4, t_min=2.0 ** -20)


def _report(lo, hi, drift, band=(1 / 64, 64), mode="band"):
    return RatioReport("x", {"b": 2, "a": "1/2"}, lo, hi, "p", "q", 10, drift, band, mode)


def test_family_is_deterministic():
    a = TestFamily(SMALL, seed=3, size=40)
    b = TestFamily(SMALL, seed=3, size=40)
    assert a.ids == b.ids
    assert np.array_equal(a.matrix(), b.matrix())
    c = TestFamily(SMALL, seed=4, size=40)
    assert not np.array_equal(a.matrix(), c.matrix())


def test_family_flags_match_values():
    F = TestFamily(SMALL, seed=0, size=64)
    for m in F:
        assert m.nonincreasing == bool(np.all(np.diff(m.values) <= 0))
    assert len(F.subfamily(True)) + len(F.subfamily(False)) == len(F)


def test_family_grid_independent_ids():
    F = TestFamily(SMALL, seed=0, size=32)
    G = F.with_grid(SMALL.refine())
    assert F.ids == G.ids
    # same functions: integrals agree
    for a, b in zip(F, G):
        ia = float(np.where(a.values == 0, 0, a.values * SMALL.lengths).sum())
        ib = float(np.where(b.values == 0, 0, b.values * G.grid.lengths).sum())
        assert ia == pytest.approx(ib, rel=1e-12)


def test_family_rejects_empty():
    with pytest.raises(ParameterError):
        TestFamily(SMALL, size=0)


def test_empty_family_in_estimators():
    F = TestFamily(SMALL, size=8)
    empty = F.subfamily(True)
    empty.members = []
    T = KernelOp("H", linear_profile(), 1)
    with pytest.raises(ParameterError):
        op_norm_lower(T, lebesgue(1), lebesgue(1), empty)
    with pytest.raises(ParameterError):
        op_norm_dual(T, lebesgue(1), lebesgue(1), empty)


def test_linear_hardy_on_L1_has_norm_one():
    # int_0^1 H_s f = int_0^1 f, so every ratio is 1
    F = TestFamily(make_grid(K=8, t_min=2.0 ** -30), size=32).subfamily(True)
    T = KernelOp("H", linear_profile(), 1)
    assert op_norm_lower(T, lebesgue(1), lebesgue(1), F) == pytest.approx(1.0, rel=1e-10)
    assert op_norm_dual(T, lebesgue(1), lebesgue(1), F) == pytest.approx(1.0, rel=1e-10)
    est = op_norm_estimate(T, lebesgue(1), lebesgue(1), F)
    assert est["agree"] and est["best"] == pytest.approx(1.0, rel=1e-10)


def test_dual_estimator_needs_H():
    F = TestFamily(SMALL, size=8)
    with pytest.raises(ParameterError):
        op_norm_dual(KernelOp("R", linear_profile(), 1), lebesgue(1), lebesgue(1), F)


def test_report_id_and_json():
    r = _report(0.5, 2.0, 0.01)
    assert r.id == "x[a=1/2,b=2]"
    d = r.to_json()
    assert d["verdict"] == "pass" and d["id"] == r.id
    inf = _report(1.0, float("inf"), None, band=(10, float("inf")), mode="growth")
    assert json.loads(json.dumps(inf.to_json()))["max"] == "inf"


@pytest.mark.parametrize(
    "lo,hi,drift,verdict",
    [
        (0.5, 2.0, 0.01, "pass"),
        (0.5, 2.0, 0.05, "unstable"),
        (0.5, 100.0, 0.0, "fail"),
        (1e-3, 2.0, 0.2, "fail"),
        (0.5, 2.0, None, "pass"),
    ],
)
def test_verdict_rules(lo, hi, drift, verdict):
    assert _report(lo, hi, drift).verdict == verdict


def test_growth_mode():
    assert _report(1.0, 12.0, 0.0, band=(10, float("inf")), mode="growth").verdict == "pass"
    assert _report(1.0, 8.0, 0.0, band=(10, float("inf")), mode="growth").verdict == "fail"


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6), st.one_of(st.none(), st.floats(0, 1)))
def test_verdict_is_a_function_of_fields(a, b, drift):
    lo, hi = min(a, b), max(a, b)
    r1, r2 = _report(lo, hi, drift), _report(lo, hi, drift)
    assert r1.verdict == r2.verdict
    inside = lo >= 1 / 64 and hi <= 64
    if not inside:
        assert r1.verdict == "fail"
    elif drift is not None and drift >= 0.05:
        assert r1.verdict == "unstable"
    else:
        assert r1.verdict == "pass"


def test_ratio_report_drift():
    calls = []

    def fn(g):
        calls.append(g.n_cells)
        return [("a", 1.0), ("b", 1.0 + 1.0 / g.n_cells)]

    r = ratio_report("demo", {}, fn, SMALL)
    assert calls == [SMALL.n_cells, SMALL.refine().n_cells]
    assert r.drift == pytest.approx(abs((1 + 1 / calls[0]) - (1 + 1 / calls[1])) / (1 + 1 / calls[0]))
    with pytest.raises(ParameterError):
        ratio_report("demo", {}, lambda g: [], SMALL)


def test_reduction_check_small():
    F = TestFamily(SMALL, size=32)
    r = nonincreasing_reduction_check(power_profile(0.5), 1, lebesgue(2), lorentz(4, 2), F)
    assert r.verdict == "pass"
    assert r.min >= 1 - 1e-12


def test_registry():
    assert len(SUITE) == 20
    with pytest.raises(RegistryError):
        theorem_suite("nope")
    with pytest.raises(LookupError):
        run_suite(["nope"])


def test_run_suite_deterministic_and_serializers():
    cfg = SuiteConfig(K=4, t_min=2.0 ** -20)
    a = run_suite(["linf-criterion", "profile-facts"], cfg)
    b = run_suite(["linf-criterion", "profile-facts"], cfg)
    assert reports_jsonl(a) == reports_jsonl(b)
    assert [r["id"] for r in a] == sorted(r["id"] for r in a)
    csv = reports_csv(a).splitlines()
    assert csv[0] == "id,check,min,max,band_lo,band_hi,N,drift,verdict"
    assert len(csv) == len(a) + 1


def test_suite_config_json():
    d = SuiteConfig().to_json()
    assert d["K"] == 16 and d["seed"] == 0 and d["band"] == [1 / 64, 64]
