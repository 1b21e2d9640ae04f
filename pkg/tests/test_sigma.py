import csv
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mulcm.sieve import factorize
from mulcm.sigma import (
    check_landau,
    drift_report,
    landau_coprime_m,
    landau_smooth_expansion,
    scan_report,
    sigma_bruteforce,
    sigma_coprime_trace,
    sigma_pairs_trace,
    sigma_scan,
    sigma_trace_exact,
    sigma_via_gstar_identity,
)

# Exact values of S(1..8) from the definition.
FIRST_EIGHT = [Fraction(1), Fraction(1, 2), Fraction(1, 2), Fraction(1, 2),
               Fraction(19, 30), Fraction(2, 5), Fraction(53, 105),
               Fraction(53, 105)]


def test_first_eight_exact():
    assert sigma_trace_exact(8) == FIRST_EIGHT
    for X in range(1, 9):
        assert sigma_bruteforce(X) == FIRST_EIGHT[X - 1]


def test_bruteforce_methods_agree():
    for X in (10, 30, 75):
        assert sigma_bruteforce(X, method="pairs") == \
            sigma_bruteforce(X, method="gcd")


def test_identity_route_small():
    # X = 2: (1/2)^2 + (1/4) * 1 = 1/2.
    assert sigma_via_gstar_identity(2) == pytest.approx(0.5, abs=1e-14)
    for X in (1, 4, 10, 50):
        assert sigma_via_gstar_identity(X) == pytest.approx(
            float(sigma_bruteforce(X)), abs=1e-12)


def test_three_routes_agree_at_desk():
    X = 600
    pairs = sigma_pairs_trace(X)
    coprime = sigma_coprime_trace(X)
    scan = sigma_scan(X).values
    assert np.max(np.abs(pairs - coprime)) < 1e-12
    assert np.max(np.abs(pairs - scan[1:])) < 1e-12
    exact = sigma_trace_exact(60)
    for d in range(1, 61):
        assert pairs[d - 1] == pytest.approx(float(exact[d - 1]), abs=1e-13)


def test_frozen_probe_values():
    scan = sigma_scan(1400)
    assert scan.values[757] == pytest.approx(0.445309230257814, abs=1e-12)
    assert scan.values[1321] == pytest.approx(0.444557, abs=5e-7)
    assert scan.values[5] == pytest.approx(19.0 / 30.0, abs=1e-15)


@given(st.integers(min_value=2, max_value=1200))
@settings(max_examples=60, deadline=None)
def test_sigma_constant_on_nonsquarefree_steps(d):
    if any(e > 1 for _, e in factorize(d)):
        scan = _cached_scan()
        assert scan.values[d] == scan.values[d - 1]


_SCAN = None


def _cached_scan():
    global _SCAN
    if _SCAN is None:
        _SCAN = sigma_scan(1200)
    return _SCAN


def test_landau_formula_exact():
    rep = check_landau(d_max=20, y_values=(2, 3, 10, 100))
    assert rep.passed, rep.summary_line()
    # spot value: d = 2, strict cutoff y = 4 sums d' in {1, 3}
    direct = landau_coprime_m(2, 4, exact=True)
    assert direct == Fraction(1) - Fraction(1, 3)
    assert landau_smooth_expansion(2, 4) == direct


def test_scan_report_known_pattern():
    reports = scan_report(2000)
    assert reports["nonnegative"].passed
    assert reports["cap_19_30"].passed
    assert not reports["cap_0445"].passed  # S(757) exceeds 0.445
    assert reports["cap_0445"].worst_arg == 757
    assert reports["bump_above_044455"].passed
    assert reports["bump_above_044455"].worst_arg == 1321
    assert reports["floor_0437"].passed
    assert reports["float_drift"].passed


def test_checkpoint_roundtrip(tmp_path):
    path = str(tmp_path / "scan.csv")
    first = sigma_scan(1500, checkpoint_path=path, checkpoint_every=500)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["d", "sigma", "running_max_arg", "running_max"]
    assert [r[0] for r in rows[1:]] == ["500", "1000", "1500"]
    # values stored at full precision
    assert float(rows[1][1]) == first.values[500]

    resumed = sigma_scan(2500, checkpoint_path=path, resume=True)
    assert resumed.resumed_from == 1500
    full = sigma_scan(2500)
    tail_dev = np.max(np.abs(resumed.values[1501:] - full.values[1501:]))
    assert tail_dev < 1e-12
    assert resumed.running_max == pytest.approx(full.running_max, abs=1e-12)
    assert resumed.running_max_arg == full.running_max_arg == 5


def test_resumed_window_refuses_unknown_prefix(tmp_path):
    path = str(tmp_path / "scan.csv")
    sigma_scan(1000, checkpoint_path=path, checkpoint_every=500)
    resumed = sigma_scan(2000, checkpoint_path=path, resume=True)
    with pytest.raises(ValueError):
        resumed.window_extrema(500, 2000)
    w = resumed.window_extrema(1001, 2000)
    assert 1001 <= w["argmax"] <= 2000


def test_malformed_checkpoint_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("nonsense,header\n1,2\n")
    with pytest.raises(ValueError):
        sigma_scan(100, checkpoint_path=str(bad), resume=True)
    empty = tmp_path / "empty.csv"
    empty.write_text("d,sigma,running_max_arg,running_max\n")
    with pytest.raises(ValueError):
        sigma_scan(100, checkpoint_path=str(empty), resume=True)


def test_drift_report_tight():
    scan = sigma_scan(3000)
    rep = drift_report(scan, shadow_to=3000)
    assert rep.passed
    assert rep.details["max_deviation"] < 1e-13
