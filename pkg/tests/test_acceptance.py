"""The twelve acceptance criteria, one test each.

Every test records a one-line verdict that conftest prints in the terminal
summary, so ``pytest -v`` shows a PASS/FAIL line per criterion.
"""

import functools
import json
import subprocess
import sys
import time

from conftest import ACCEPTANCE
from rikit.verify import SuiteConfig, theorem_suite

CFG = SuiteConfig(K=16, t_min=2.0 ** -40, seed=0)
BAND = (1 / 64, 64)


@functools.lru_cache(maxsize=None)
def _timed(name):
    t0 = time.perf_counter()
    reps = theorem_suite(name, CFG)
    return reps, time.perf_counter() - t0


def _reports(name):
    return _timed(name)[0]


def _record(n, ok, msg):
    ACCEPTANCE[n] = (bool(ok), msg)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {msg}")
    assert ok, msg


def _params(reps, *keys):
    return {tuple(r.params[k] for k in keys) for r in reps}


MATRIX = {(p, m) for p in ("s^1/2", "s^3/4", "s", "gauss") for m in (1, 2, 3)}


def test_criterion_01_kernel_composition():
    reps, dt = _timed("kernel-composition")
    worst = max(r.max for r in reps)
    ok = (
        _params(reps, "I", "m") == MATRIX
        and all(r.count == 20 for r in reps)
        and worst < 1e-6
        and all(r.verdict == "pass" for r in reps)
        and dt < 120
    )
    _record(1, ok, f"max relative gap {worst:.2e} (< 1e-6) over {len(reps)} (I, m) pairs x 20 functions, {dt:.1f} s")


def test_criterion_02_associativity():
    reps = _reports("associativity")
    worst = max(r.max for r in reps)
    ok = _params(reps, "I", "m") == MATRIX and worst <= 1e-9 and all(r.verdict == "pass" for r in reps)
    _record(2, ok, f"max |<H f,g> - <f,R g>| / <H f,g> = {worst:.2e} (<= 1e-9)")


def test_criterion_03_indicator_closed_form():
    reps = _reports("indicator-closed-form")
    worst = max(r.max for r in reps)
    phis = {r.params["Phi"] for r in reps}
    ok = (
        {"gauss", "boltzmann:1"} <= phis
        and _params(reps, "m") == {(1,), (2,), (3,)}
        and all(r.count == 3 for r in reps)
        and worst < 1e-6
    )
    _record(3, ok, f"max relative error vs closed form {worst:.2e} (< 1e-6), Phi in {sorted(phis)}, b in 0.1/0.5/0.9")


def test_criterion_04_sandwich():
    reps = _reports("sandwich-P")
    phis = {r.params["Phi"] for r in reps}
    ok = (
        phis == {"gauss", "boltzmann:1", "boltzmann:3/2", "boltzmann:2"}
        and _params(reps, "m") == {(1,), (2,), (3,)}
        and all(r.detail["nonincreasing"] >= 50 for r in reps)
        and all(r.verdict == "pass" for r in reps)
    )
    lo = min(r.min * 2 ** r.params["m"] for r in reps)
    hi = max(r.max for r in reps)
    _record(4, ok, f"(m-1)! H/P within [2^-m, 1]: min 2^m-scaled {lo:.12f}, max {hi:.12f}")


def test_criterion_05_doubling_bound():
    reps = _reports("doubling-bound")
    viol = sum(r.detail["violations"] for r in reps)
    worst = max(r.max for r in reps)
    ok = _params(reps, "I", "m") == MATRIX and viol == 0 and worst <= 1.0 + 1e-12
    _record(5, ok, f"{viol} violations, max R(t) / (2^m R(s)) = {worst:.4f}")


def test_criterion_06_four_way():
    reps = _reports("four-way-equivalence")
    want = {
        (I, X, m)
        for I in ("s^1/2", "s", "gauss")
        for X in ("lebesgue:1", "lebesgue:2", "lorentz:2,1", "lz:inf,2,-1")
        for m in (0, 1, 2)
    }
    lo = min(r.min for r in reps)
    hi = max(r.max for r in reps)
    drift = max(r.drift for r in reps)
    ok = (
        _params(reps, "I", "X", "m") == want
        and BAND[0] <= lo
        and hi <= BAND[1]
        and drift < 0.05
        and all(r.verdict == "pass" for r in reps)
    )
    _record(6, ok, f"ratios in [{lo:.3f}, {hi:.3f}] over {len(reps)} cases, max drift {drift:.2%}")


def test_criterion_07_closed_form_targets():
    reps = _reports("closed-form-targets")
    lo = min(r.min for r in reps)
    hi = max(r.max for r in reps)
    drift = max(r.drift for r in reps)
    ok = len(reps) == 12 and BAND[0] <= lo and hi <= BAND[1] and drift < 0.05 and all(r.verdict == "pass" for r in reps)
    _record(7, ok, f"{len(reps)} rows, numeric/closed-form in [{lo:.3f}, {hi:.3f}], max drift {drift:.2%}")


def test_criterion_08_linf_criterion():
    reps = _reports("linf-criterion")
    agree = [r.detail["criterion"] == r.detail["expected"] for r in reps]
    kinds = {r.detail["expected"] for r in reps}
    ok = len(reps) == 9 and all(agree) and kinds == {True, False} and all(r.verdict == "pass" for r in reps)
    _record(8, ok, f"{sum(agree)}/{len(reps)} (p, alpha, m) combinations classified as expected")


def test_criterion_09_iteration():
    reps = _reports("iteration")
    want = {(k, h, X, I) for k, h in ((1, 1), (1, 2)) for X in ("lebesgue:1", "lebesgue:2") for I in ("s^3/4", "gauss")}
    lo = min(r.min for r in reps)
    hi = max(r.max for r in reps)
    drift = max(r.drift for r in reps)
    ok = _params(reps, "k", "h", "X", "I") == want and BAND[0] <= lo and hi <= BAND[1] and drift < 0.05
    _record(9, ok, f"iterated/direct in [{lo:.3f}, {hi:.3f}], max drift {drift:.2%}")


def test_criterion_10_negative_controls():
    reps = _reports("negative-controls")
    growth = [r.max for r in reps]
    ok = len(reps) == 4 and all(g > 10 for g in growth) and all(r.verdict == "pass" for r in reps)
    # the passing row stays bounded while the strengthened one grows
    flat = all(max(r.detail["passing"]) <= 1.01 * min(r.detail["passing"]) for r in reps)
    ok = ok and flat
    _record(10, ok, "growth factors " + ", ".join(f"{g:.1f}" for g in growth) + " (> 10); passing bounds flat")


def test_criterion_11_profile_facts():
    reps = _reports("profile-facts")
    ratio = [r for r in reps if r.params["fact"] == "F/L"]
    ineq = [r for r in reps if r.params["fact"] != "F/L"]
    viol = sum(r.detail["violations"] for r in ineq)
    pts = min(r.detail["points"] for r in ineq)
    ok = (
        {r.params["Phi"] for r in ratio} >= {"gauss", "boltzmann:1"}
        and all(BAND[0] <= r.min and r.max <= BAND[1] for r in ratio)
        and viol == 0
        and pts >= 1000
    )
    lo = min(r.min for r in ratio)
    hi = max(r.max for r in ratio)
    _record(11, ok, f"F/L in [{lo:.3f}, {hi:.3f}]; {viol} inequality violations at {pts} points per fact")


def test_criterion_12_cli_determinism(tmp_path):
    outs = []
    t0 = time.perf_counter()
    for k in range(2):
        path = tmp_path / f"run{k}.jsonl"
        proc = subprocess.run(
            [sys.executable, "-m", "rikit", "suite", "--all", "--seed", "0", "--out", str(path)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr[-2000:]
        outs.append(path.read_bytes())
    dt = (time.perf_counter() - t0) / 2
    n = len(outs[0].splitlines())
    verdicts = {json.loads(line)["verdict"] for line in outs[0].splitlines()}
    ok = outs[0] == outs[1] and n > 0 and dt < 600 and verdicts == {"pass"}
    _record(12, ok, f"two runs byte-identical: {outs[0] == outs[1]}, {n} reports, {dt:.0f} s per run")
