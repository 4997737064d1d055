"""Acceptance criteria, one test per criterion, each printing a pass/fail
line with its measured runtime.  Runtime limits are part of the criteria.
"""

import time

from infogauge import suite

MASTER_SEED = 20260810


def _report(number, ok, elapsed, details):
    limit = suite.RUNTIME_LIMITS.get(number)
    within = limit is None or elapsed < limit
    status = "PASS" if (ok and within) else "FAIL"
    limit_txt = f" (limit {limit:.0f}s)" if limit else ""
    print(f"[{status}] criterion {number} ({suite.CRITERION_NAMES[number]}) "
          f"in {elapsed:.2f}s{limit_txt}: {details}")
    assert ok, f"criterion {number} failed: {details}"
    assert within, f"criterion {number} exceeded runtime limit {limit}s: {elapsed:.2f}s"


def _run(number, fn, *args):
    t0 = time.perf_counter()
    ok, details, _files = fn(*args)
    _report(number, ok, time.perf_counter() - t0, details)


def test_criterion_1_gaussian_null():
    _run(1, suite.criterion_gaussian_null)


def test_criterion_2_conservation_analytic():
    _run(2, suite.criterion_conservation_analytic, MASTER_SEED)


def test_criterion_3_conservation_grid_mc():
    _run(3, suite.criterion_conservation_grid, MASTER_SEED, 2000)


def test_criterion_4_spectral_identification():
    _run(4, suite.criterion_spectral_identification)


def test_criterion_5_robustness_selection():
    _run(5, suite.criterion_robustness, MASTER_SEED)


def test_criterion_6_heat_flow_laws():
    _run(6, suite.criterion_heat_flow)


def test_criterion_7_scale_invariance():
    _run(7, suite.criterion_scale_invariance, MASTER_SEED)


def test_criterion_8_landscape_law():
    _run(8, suite.criterion_landscape_law, MASTER_SEED)


def test_criterion_9_suite_determinism(tmp_path):
    """Two full suite runs with one config produce byte-identical data files."""
    config = {"version": 1, "seed": MASTER_SEED, "check_determinism": False}
    t0 = time.perf_counter()
    first = suite.run_suite(config, tmp_path / "a", check_determinism=False)
    second = suite.run_suite(config, tmp_path / "b", check_determinism=False)
    elapsed = time.perf_counter() - t0

    assert all(r.passed for r in first)
    assert all(r.passed for r in second)
    names = sorted(
        p.name for p in (tmp_path / "a").iterdir() if p.name != "run_metadata.json"
    )
    assert "summary.json" in names
    mismatched = [
        name for name in names
        if (tmp_path / "a" / name).read_bytes() != (tmp_path / "b" / name).read_bytes()
    ]
    _report(9, not mismatched, elapsed,
            {"files_compared": len(names), "mismatched": mismatched})
