"""The double Moebius sum over least common multiples and its scan.

S(X) = sum over d1, d2 <= X of mu(d1) mu(d2) / lcm(d1, d2).

Three independent evaluation routes:

* the definition itself (pairwise lcm sums, vectorized rows);
* an exact rational incremental trace, using gcd = sum of phi over common
  divisors, maintained through per-divisor accumulators;
* the coprime-decomposition form S(X) = sum_d mu^2(d) phi(d)/d^2 m_d(X/d)^2,
  with m_d the d-coprime Mertens sum, maintained incrementally through its
  own bookkeeping.

The batched scan evaluates the trace recursion in floats for millions of d:
grouping the recursion's smooth-part contributions by their smooth factor k
turns the inner work into strided array adds (coefficient prod_{p | k}(1-p)
per unit k, looked up against a cumulative Mertens table).  Scans checkpoint
to CSV and resume from the last checkpointed d.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .numutil import check_allocation
from .report import BoundReport
from .sieve import factorize, mu_upto, prime_divisors, primes_upto, sieve_range, smooth_numbers

_SCAN_K_SPLIT = 1000


# ----------------------------------------------------------------------
# Exact small-scale routes.

def sigma_bruteforce(X: int, method: str = "auto") -> Fraction:
    """Exact S(X) from first principles.

    method "pairs" evaluates the definition literally (fine up to a few
    hundred); "gcd" expands gcd(d1,d2) = sum of phi(e) over common divisors
    e, giving S(X) = sum_e phi(e) (sum_{n <= X, e | n} mu(n)/n)^2; "auto"
    picks pairs for X <= 300.  The two methods agree, which is itself a
    tested invariant.
    """
    if X < 1:
        return Fraction(0)
    if method == "auto":
        method = "pairs" if X <= 300 else "gcd"
    mu = mu_upto(X)
    if method == "pairs":
        total = Fraction(0)
        sf = [d for d in range(1, X + 1) if mu[d] != 0]
        for d1 in sf:
            for d2 in sf:
                g = math.gcd(d1, d2)
                total += Fraction(int(mu[d1]) * int(mu[d2]) * g, d1 * d2)
        return total
    if method == "gcd":
        total = Fraction(0)
        for e in range(1, X + 1):
            s = Fraction(0)
            for n in range(e, X + 1, e):
                if mu[n]:
                    s += Fraction(int(mu[n]), n)
            if s:
                total += _phi_int(e) * s * s
        return total
    raise ValueError(f"unknown method {method!r}")


def _phi_int(n: int) -> int:
    val = n
    for p in prime_divisors(n):
        val = val // p * (p - 1)
    return val


def sigma_trace_exact(X: int) -> list[Fraction]:
    """Exact [S(1), ..., S(X)] by the incremental recursion.

    S(d) - S(d-1) = mu^2(d)/d + (2 mu(d)/d) W(d) with
    W(d) = sum_{d' < d} mu(d') gcd(d, d') / d'
         = sum_{e | d} phi(e) U_e,   U_e = sum_{d' < d, e | d'} mu(d')/d',
    using gcd(d, d') = sum of phi(e) over e dividing both.  The divisor
    accumulators U_e are updated after each step.
    """
    block = sieve_range(1, X)
    U: dict[int, Fraction] = {}
    out: list[Fraction] = []
    total = Fraction(0)
    for d in range(1, X + 1):
        mu_d = int(block.mu[d - 1])
        if mu_d != 0:
            divs = _divisors_from_spf(d, block)
            W = Fraction(0)
            for e in divs:
                u = U.get(e)
                if u is not None:
                    W += _phi_int(e) * u
            total += Fraction(1, d) + Fraction(2 * mu_d, d) * W
            delta = Fraction(mu_d, d)
            for e in divs:
                U[e] = U.get(e, Fraction(0)) + delta
        out.append(total)
    return out


def _divisors_from_spf(d: int, block) -> list[int]:
    divs = [1]
    n = d
    while n > 1:
        p = int(block.spf[n - 1])
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        divs = [dv * p ** k for dv in divs for k in range(e + 1)]
    return divs


def sigma_pairs_trace(X: int) -> np.ndarray:
    """Float [S(1), ..., S(X)] by literal row sums of the definition.

    S(d) = S(d-1) + mu^2(d)/d + 2 mu(d) sum_{d' < d} mu(d')/lcm(d, d').
    Vectorized per row; no identity beyond the definition is used.
    """
    mu = mu_upto(X)
    out = np.zeros(X, dtype=np.float64)
    total = 1.0
    out[0] = 1.0
    idx_all = np.arange(1, X + 1, dtype=np.int64)
    muf = mu.astype(np.float64)
    for d in range(2, X + 1):
        if mu[d] != 0:
            prior = idx_all[: d - 1]
            g = np.gcd(prior, d)
            row = muf[1: d] * g / (prior.astype(np.float64) * d)
            total += 1.0 / d + 2.0 * float(mu[d]) * float(np.sum(row))
        out[d - 1] = total
    return out


def sigma_coprime_trace(X: int) -> np.ndarray:
    """Float [S(1), ..., S(X)] through the coprime-decomposition form.

    Maintains md[d] = m_d(floor(X'/d)) for the current prefix X', where
    m_d(y) = sum_{n <= y, (n, d) = 1} mu(n)/n, and the running value
    S = sum_d mu^2(d) phi(d)/d^2 * md[d]^2.  When X' grows to n, exactly
    the divisors d of n see their argument floor(n/d) jump, and the new
    point n/d enters m_d iff gcd(n/d, d) = 1.
    """
    block = sieve_range(1, X)
    mu = mu_upto(X)
    md = np.zeros(X + 1, dtype=np.float64)
    weight = np.zeros(X + 1, dtype=np.float64)
    for d in range(1, X + 1):
        if block.mu[d - 1] != 0:
            weight[d] = _phi_int(d) / (d * d)
    out = np.zeros(X, dtype=np.float64)
    total = 0.0
    for n in range(1, X + 1):
        for d in _divisors_from_spf(n, block):
            q = n // d
            if mu[q] != 0 and math.gcd(q, d) == 1:
                # m_d gains mu(q)/q; update the weighted square's total.
                if weight[d] != 0.0:
                    old = md[d]
                    new = old + float(mu[q]) / q
                    total += weight[d] * (new * new - old * old)
                    md[d] = new
                else:
                    md[d] += float(mu[q]) / q
        out[n - 1] = total
    return out


def sigma_via_gstar_identity(X: int) -> float:
    """S(X) evaluated directly as sum_d mu^2(d) phi(d)/d^2 m_d(floor(X/d))^2."""
    if X < 1:
        return 0.0
    block = sieve_range(1, X)
    mu = mu_upto(X)
    n_inv = np.zeros(X + 1, dtype=np.float64)
    n_inv[1:] = mu[1:].astype(np.float64) / np.arange(1, X + 1, dtype=np.float64)
    total = 0.0
    for d in range(1, X + 1):
        if block.mu[d - 1] == 0:
            continue
        y = X // d
        terms = n_inv[1: y + 1].copy()
        for p in prime_divisors(d):
            terms[p - 1:: p] = 0.0
        md = float(np.sum(terms))
        total += _phi_int(d) / (d * d) * md * md
    return total


# ----------------------------------------------------------------------
# Strict-cutoff coprime Mertens sums and their smooth-part expansion.

def landau_coprime_m(d: int, y, exact: bool = True):
    """sum_{n < y, (n, d) = 1} mu(n)/n, strict cutoff, exact by default."""
    limit = math.ceil(y) - 1
    if limit < 1:
        return Fraction(0) if exact else 0.0
    if exact:
        total = Fraction(0)
        mu = mu_upto(limit)
        for n in range(1, limit + 1):
            if mu[n] != 0 and math.gcd(n, d) == 1:
                total += Fraction(int(mu[n]), n)
        return total
    mu = mu_upto(limit)
    keep = np.ones(limit, dtype=bool)
    for p in prime_divisors(d):
        keep[p - 1:: p] = False
    n = np.arange(1, limit + 1, dtype=np.float64)
    return float(np.sum(np.where(keep, mu[1:].astype(np.float64) / n, 0.0)))


def landau_smooth_expansion(d: int, y) -> Fraction:
    """The same sum expanded over the d-smooth part of n:

    sum_{n < y, (n,d)=1} mu(n)/n = sum_{l | d^inf, l < y} (1/l) sum_{n < y/l} mu(n)/n.
    Exact rationals; used as the second side of the identity check.
    """
    total = Fraction(0)
    limit = math.ceil(y) - 1
    if limit < 1:
        return total
    mu = mu_upto(limit)
    strict = [Fraction(0)] * (limit + 2)
    acc = Fraction(0)
    for n in range(1, limit + 1):
        if mu[n]:
            acc += Fraction(int(mu[n]), n)
        strict[n + 1] = acc  # strict[v] = sum_{n < v} mu(n)/n for integer v
    for ell in smooth_numbers(d, limit):
        # strict cutoff n < y/ell; for integer v = ceil(y/ell), that is
        # sum over n <= v - 1 unless y/ell is attained non-integrally.
        v = y / ell
        cut = math.ceil(v) - 1 if float(v).is_integer() else math.floor(v)
        if cut >= 1:
            total += Fraction(1, ell) * strict[min(cut, limit) + 1]
    return total


def check_landau(d_max: int = 50, y_values=(2, 3, 10, 100, 1000)) -> BoundReport:
    """Exact identity check of the smooth-part expansion for small d, y."""
    bad = []
    for d in range(1, d_max + 1):
        for y in y_values:
            lhs = landau_coprime_m(d, y, exact=True)
            rhs = landau_smooth_expansion(d, y)
            if lhs != rhs:
                bad.append((d, y, str(lhs), str(rhs)))
    return BoundReport(
        name="coprime-smooth-expansion",
        domain=f"d <= {d_max}, y in {tuple(y_values)}",
        passed=not bad,
        worst_ratio=0.0 if not bad else 1.0,
        worst_arg=bad[0][:2] if bad else None,
        bound=0.0,
        details={"violations": bad[:10]},
    )


# ----------------------------------------------------------------------
# The batched scan.

@dataclass
class ScanResult:
    """Scan output: S(d) for 1 <= d <= X_max and window statistics."""

    X_max: int
    values: np.ndarray  # values[d] = S(d), index 0 unused (0.0)
    resumed_from: int = 0
    checkpoint_path: str | None = None
    running_max: float = -math.inf  # over 2 <= d <= X_max, across resumes
    running_max_arg: int = 0

    def window_extrema(self, a: int, b: int) -> dict:
        a = max(a, 1)
        b = min(b, self.X_max)
        if a > b:
            raise ValueError(f"empty window [{a}, {b}]")
        if 0 < self.resumed_from >= a:
            raise ValueError(
                f"window [{a}, {b}] starts at or before the resume point "
                f"{self.resumed_from}; those values are not in memory "
                f"(the checkpoint carries only the global running max)")
        seg = self.values[a: b + 1]
        imax = int(np.argmax(seg))
        imin = int(np.argmin(seg))
        return {
            "window": [a, b],
            "max": float(seg[imax]), "argmax": a + imax,
            "min": float(seg[imin]), "argmin": a + imin,
        }


def _radical_array(X: int) -> np.ndarray:
    rad = np.ones(X + 1, dtype=np.int64)
    for p in primes_upto(X):
        rad[p:: p] *= p
    return rad


def _coeff_numerators(X: int) -> np.ndarray:
    """c_num[k] = prod_{p | k} (1 - p) as float64 (c_num[1] = 1)."""
    cn = np.ones(X + 1, dtype=np.float64)
    for p in primes_upto(X):
        cn[p:: p] *= 1.0 - float(p)
    return cn


def _scan_increments(X: int, d_from: int) -> np.ndarray:
    """inc[d] = S(d) - S(d-1) in floats for d_from <= d <= X (0 elsewhere).

    The recursion's weighted history W(d) is expanded over the d-smooth
    factor k of the inner variable: each k with radical dividing d
    contributes (prod_{p|k}(1-p)/k) * m((d-1) // k), m being the cumulative
    Mertens sum.  Small k are handled with strided numpy adds; large k have
    short m-tables and run as tight Python loops.
    """
    mu = mu_upto(X)
    M = np.zeros(X + 1, dtype=np.float64)
    M[1:] = np.cumsum(mu[1:].astype(np.float64) / np.arange(1, X + 1, dtype=np.float64))
    rad = _radical_array(X)
    cnum = _coeff_numerators(X)
    inner = np.zeros(X + 1, dtype=np.float64)
    k_hi = min(_SCAN_K_SPLIT, X - 1)
    for k in range(1, k_hi + 1):
        R = int(rad[k])
        start = (max(k, d_from - 1) // R + 1) * R
        if start > X:
            continue
        d = np.arange(start, X + 1, R, dtype=np.int64)
        t = (d - 1) // k
        inner[d] += (cnum[k] / k) * M[t]
    if X - 1 > _SCAN_K_SPLIT:
        t_cap = (X - 1) // _SCAN_K_SPLIT + 1
        mshort = M[: t_cap + 1].tolist()
        rad_l = rad.tolist()
        cn_l = cnum.tolist()
        for k in range(_SCAN_K_SPLIT + 1, X):
            R = rad_l[k]
            start = (max(k, d_from - 1) // R + 1) * R
            if start > X:
                continue
            w = cn_l[k] / k
            acc = inner
            for d in range(start, X + 1, R):
                acc[d] += w * mshort[(d - 1) // k]
    inc = np.zeros(X + 1, dtype=np.float64)
    dd = np.arange(1, X + 1, dtype=np.float64)
    muf = mu[1:].astype(np.float64)
    inc[1:] = (muf * muf) / dd + 2.0 * muf / dd * inner[1:]
    if d_from > 1:
        inc[: d_from] = 0.0
    return inc


CHECKPOINT_HEADER = ["d", "sigma", "running_max_arg", "running_max"]


def _read_checkpoint(path: str) -> tuple[int, float, int, float]:
    """Return the last row (d, sigma, running_max_arg, running_max)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CHECKPOINT_HEADER:
            raise ValueError(f"malformed checkpoint {path}: header {header}")
        last = None
        for row in reader:
            if len(row) != 4:
                raise ValueError(f"malformed checkpoint row {row}")
            last = row
    if last is None:
        raise ValueError(f"checkpoint {path} has no data rows")
    return int(last[0]), float(last[1]), int(last[2]), float(last[3])


def sigma_scan(X_max: int, checkpoint_path: str | None = None,
               checkpoint_every: int = 100_000, resume: bool = False) -> ScanResult:
    """Compute S(d) for all d <= X_max in floats.

    With checkpoint_path set, appends CSV rows (d, sigma, running_max_arg,
    running_max) every checkpoint_every values of d; with resume=True the
    scan restarts from the last checkpointed d, recomputing only the
    remaining increments.  The running max tracks d >= 2 (d = 1 has the
    trivial value 1).
    """
    check_allocation(X_max * 8 * 5, f"sigma scan to {X_max}")
    d_from = 1
    base = 0.0
    run_arg, run_max = 0, -math.inf
    if resume:
        if not checkpoint_path:
            raise ValueError("resume requires a checkpoint path")
        d0, base, run_arg, run_max = _read_checkpoint(checkpoint_path)
        if d0 >= X_max:
            raise ValueError(f"checkpoint already covers {d0} >= {X_max}")
        d_from = d0 + 1
    inc = _scan_increments(X_max, d_from)
    values = np.cumsum(inc)
    if resume:
        values += base
        values[: d_from] = 0.0
    if checkpoint_path:
        new_file = not (resume and os.path.exists(checkpoint_path))
        mode = "a" if not new_file else "w"
        with open(checkpoint_path, mode, newline="") as fh:
            writer = csv.writer(fh)
            if new_file:
                writer.writerow(CHECKPOINT_HEADER)
            for d in range(max(2, d_from), X_max + 1):
                v = float(values[d])
                if v > run_max:
                    run_max, run_arg = v, d
                if d % checkpoint_every == 0 or d == X_max:
                    writer.writerow([d, repr(float(values[d])), run_arg, repr(run_max)])
    else:
        lo = max(2, d_from)
        if lo <= X_max:
            seg = values[lo:]
            j = int(np.argmax(seg))
            if float(seg[j]) > run_max:
                run_max, run_arg = float(seg[j]), lo + j
    return ScanResult(X_max=X_max, values=values,
                      resumed_from=d_from - 1 if resume else 0,
                      checkpoint_path=checkpoint_path,
                      running_max=run_max, running_max_arg=run_arg)


def scan_report(X_max: int = 1_000_000, scan: ScanResult | None = None) -> dict:
    """Window statistics and the direct-computation caps, as BoundReports.

    Checks (a) 0 <= S(d) everywhere, (b) S(d) <= 0.445 on [422, X_max],
    (c) S(d) <= 19/30 on [2, X_max], (d) some d in [1300, 1350] exceeds
    0.44455, (e) S(d) >= 0.437 on [1000, X_max].
    """
    if scan is None:
        scan = sigma_scan(X_max)
    v = scan.values
    reports: dict[str, BoundReport] = {}

    w_all = scan.window_extrema(1, X_max)
    reports["nonnegative"] = BoundReport(
        name="sigma-nonnegative", domain=f"d <= {X_max}",
        passed=w_all["min"] >= 0.0,
        worst_ratio=-w_all["min"],
        worst_arg=w_all["argmin"], bound=0.0, details=w_all)

    w = scan.window_extrema(422, X_max)
    reports["cap_0445"] = BoundReport(
        name="sigma-cap-0.445", domain=f"d in [422, {X_max}]",
        passed=w["max"] <= 0.445,
        worst_ratio=w["max"] / 0.445,
        worst_arg=w["argmax"], bound=0.445, details=w)

    w2 = scan.window_extrema(2, X_max)
    reports["cap_19_30"] = BoundReport(
        name="sigma-cap-19/30", domain=f"d in [2, {X_max}]",
        passed=w2["max"] <= 19.0 / 30.0 + 1e-12,
        worst_ratio=w2["max"] / (19.0 / 30.0),
        worst_arg=w2["argmax"], bound=19.0 / 30.0, details=w2)

    w3 = scan.window_extrema(1300, 1350)
    reports["bump_above_044455"] = BoundReport(
        name="sigma-bump-[1300,1350]", domain="d in [1300, 1350]",
        passed=w3["max"] > 0.44455,
        worst_ratio=0.44455 / w3["max"] if w3["max"] > 0 else math.inf,
        worst_arg=w3["argmax"], bound=0.44455, details=w3)

    w4 = scan.window_extrema(1000, X_max)
    reports["floor_0437"] = BoundReport(
        name="sigma-floor-0.437", domain=f"d in [1000, {X_max}]",
        passed=w4["min"] >= 0.437,
        worst_ratio=0.437 / w4["min"] if w4["min"] > 0 else math.inf,
        worst_arg=w4["argmin"], bound=0.437, details=w4)

    reports["float_drift"] = drift_report(scan)
    return reports


def drift_report(scan: ScanResult, shadow_to: int = 5000,
                 slack: float = 5e-4) -> BoundReport:
    """Bound the float accumulation error of a scan by an exact shadow.

    The trace is recomputed in exact rationals up to shadow_to, the largest
    deviation is extrapolated linearly in d (the accumulation is a sum of
    per-step roundings), and the result is compared to the slack available
    in the window inequalities.
    """
    upto = min(shadow_to, scan.X_max)
    exact = sigma_trace_exact(upto)
    dev = 0.0
    for d in range(1, upto + 1):
        dev = max(dev, abs(float(scan.values[d]) - float(exact[d - 1])))
    extrapolated = dev * (scan.X_max / upto)
    return BoundReport(
        name="scan-float-drift", domain=f"exact shadow to {upto}",
        passed=extrapolated <= slack,
        worst_ratio=extrapolated / slack,
        worst_arg=upto, bound=slack,
        details={"max_deviation": dev, "extrapolated": extrapolated})
