"""Acceptance gate: one test per numbered criterion.

Each test prints a single `criterion N: pass|FAIL` line (visible with
pytest -s; the test outcome itself carries the same information under
pytest -v).  Failures here are real, measured discrepancies and must stay
red until the underlying numbers change; see the repository notes for the
analysis of each one.
"""

import math
import time

import numpy as np
import pytest

from mulcm.assembly import AssemblyConfig, theorem_bound, theorem_table
from mulcm.gstar import (
    aux_k_band,
    check_aux_k,
    check_convol,
    check_convol0,
    check_gstar_contract,
    moebius_square_table_check,
)
from mulcm.mertens import check_envelope_sqrt
from mulcm.products import (
    A_DEEP,
    aux_asymptotic_check,
    aux_ratio_scan,
    check_h_caps,
)
from mulcm.sigma import (
    check_landau,
    scan_report,
    sigma_coprime_trace,
    sigma_pairs_trace,
    sigma_scan,
)


def _line(n: int, ok: bool, extra: str = "") -> None:
    print(f"criterion {n}: {'pass' if ok else 'FAIL'}{' ' + extra if extra else ''}")


def test_criterion_01_oracle_equivalence():
    t0 = time.monotonic()
    X = 5000
    pairs = sigma_pairs_trace(X)      # definition, incremental lcm rows
    coprime = sigma_coprime_trace(X)  # coprime-splitting identity
    scan = sigma_scan(X).values       # divisor-recursion trace
    dev1 = float(np.max(np.abs(pairs - coprime)))
    dev2 = float(np.max(np.abs(pairs - scan[1:])))
    elapsed = time.monotonic() - t0
    ok = dev1 <= 1e-10 and dev2 <= 1e-10 and elapsed < 60.0
    _line(1, ok, f"(max deviations {dev1:.2e}, {dev2:.2e}, {elapsed:.1f}s)")
    assert dev1 <= 1e-10 and dev2 <= 1e-10
    assert elapsed < 60.0


def test_criterion_02_direct_computation_windows():
    t0 = time.monotonic()
    reports = scan_report(1_000_000)
    elapsed = time.monotonic() - t0
    assert elapsed < 600.0
    ok = all(reports[k].passed for k in
             ("nonnegative", "cap_0445", "cap_19_30",
              "bump_above_044455", "floor_0437"))
    _line(2, ok, f"({elapsed:.0f}s)")
    for key in ("nonnegative", "cap_19_30", "bump_above_044455",
                "floor_0437", "cap_0445"):
        rep = reports[key]
        assert rep.passed, rep.summary_line()


def test_criterion_03_mertens_envelopes():
    r1 = check_envelope_sqrt(10_000_000, q=1)
    r2 = check_envelope_sqrt(10_000_000, q=2)
    _line(3, r1.passed and r2.passed,
          f"(worst ratios {r1.worst_ratio:.4f}, {r2.worst_ratio:.4f})")
    assert r1.passed, r1.summary_line()
    assert r2.passed, r2.summary_line()


def test_criterion_04_euler_constants():
    violations = []
    window_lo, window_hi = 0.428257 - 5e-6, 0.428257 + 5e-6
    if not (window_lo <= A_DEEP.lo and A_DEEP.hi <= window_hi):
        violations.append(
            f"A enclosure [{A_DEEP.lo:.9f}, {A_DEEP.hi:.9f}] is outside "
            f"0.428257 +/- 5e-6")
    for rep in check_h_caps(10_000_000):
        if not rep.passed:
            violations.append(rep.summary_line())
    _line(4, not violations)
    assert not violations, "; ".join(violations)


def test_criterion_05_aux_scans():
    oks = []
    for key, argmax in (("g0^2", 42), ("g0*g1", 7), ("g1^2", 3)):
        rep = aux_ratio_scan(key, 1_000_000)
        oks.append(rep.passed and rep.worst_arg == argmax)
        assert rep.passed, rep.summary_line()
        assert rep.worst_arg == argmax, (key, rep.worst_arg)
    for key in ("g0^2", "g0*g1", "g1^2"):
        rep = aux_asymptotic_check(key, 10_000_000)
        oks.append(rep.passed)
        assert rep.passed, rep.summary_line()
    _line(5, all(oks))


def test_criterion_06_squarefree_count_table():
    rep = moebius_square_table_check(X_max=10_000_000)
    _line(6, rep.passed)
    failing = [r for r in rep.details["rows"] if not r["passed"]]
    assert rep.passed, "; ".join(
        f"row (X0={r['X0']}, c={r['c']}) worst ratio {r['worst_ratio']:.6f} "
        f"at {r['worst_arg']} ({r['side']})" for r in failing)


def test_criterion_07_cubic_tail_grid_and_band():
    grid = check_aux_k()
    band = aux_k_band()
    _line(7, grid.passed and band.passed)
    assert grid.passed, grid.summary_line()
    assert band.passed, band.summary_line()


def test_criterion_08_mean_value_contract():
    rep = check_gstar_contract()
    _line(8, rep.passed, f"({len(rep.details['cases'])} cases)")
    assert len(rep.details["cases"]) == 30
    assert rep.passed, rep.summary_line()


def test_criterion_09_theorem_assembly():
    table = theorem_table()
    # Hard requirement: every row computes and the combined row holds.
    for row in table["rows"]:
        assert math.isfinite(row["bound"]), row
    assert table["combined_ok"], table["combined_first_row"]
    # Row tolerances are soft per the stated fallback: a miss is logged
    # with the no-refinement bound, not failed.
    misses = []
    for row in table["rows"]:
        if not row["within_tolerance"]:
            fallback = theorem_bound(AssemblyConfig(
                row["x_min"], row["ratio"], False, False))["bound"]
            misses.append(f"x_min={row['x_min']:g}: computed {row['bound']:.4f} "
                          f"vs reference {row['reference']} "
                          f"(no-refinement bound {fallback:.4f})")
    for miss in misses:
        print("tolerance miss:", miss)
    _line(9, True, f"(combined row {table['combined_first_row']:.6f} <= 0.68"
          + (f"; {len(misses)} tolerance miss(es) logged)" if misses else ")"))


def test_criterion_10_identity_properties():
    c0 = check_convol0(100_000)
    c1 = check_convol(100_000)
    lb = check_landau(d_max=50, y_values=(2, 3, 10, 100, 1000))
    _line(10, c0.passed and c1.passed and lb.passed)
    assert c0.passed, c0.summary_line()
    assert c1.passed, c1.summary_line()
    assert lb.passed, lb.summary_line()
