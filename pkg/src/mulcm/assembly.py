"""Assembly of the final explicit bound for sqrt(x) * S(x).

The bound splits the defining double sum at D = x / ratio:

* the head is grouped by j = floor(x/(d * something)) blocks, each block
  contributing a logarithmic main term A prod_{p<=j} p^2/(p^2+p-1)
  log(R_j/j) W(j) plus a remainder controlled by the G*_q difference
  envelope, where W(j) sums phi(delta)/delta^2 m_delta(j)^2 over divisors
  delta of the primorial of j;
* the tail over d > D is bounded by the envelope decomposition
  4.14 D/x + 0.00205, whose three components trace back to the coprime
  Mertens envelopes and the weighted partial-sum caps.

Two refinements are optional and on by default: the sharper first-remainder
constant 1.17 for delta with all prime factors below 30, and localization
of the remainder over dyadic windows x in [Y, 2Y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numutil import check_allocation, quad_checked
from .report import BoundReport
from .mertens import g0_factor, g1_factor
from .products import A_DEEP, EULER_GAMMA
from .sieve import factorize, primes_upto, prime_divisors, sieve_range

DEEP_SCALE = 1e12  # scale beyond which the logarithmic envelope term exists

REFERENCE_ROWS = (
    (1.1e7, 22.99, 0.679),
    (1e9, 38.99, 0.574),
    (3e10, 55.99, 0.536),
    (2.4e12, 75.99, 0.504),
)


@dataclass(frozen=True)
class AssemblyConfig:
    x_min: float
    ratio: float
    refine_small_factors: bool = True
    localize: bool = True


# ----------------------------------------------------------------------
# Per-j tables over the divisors of the primorial of j.

_j_table_cache: dict[int, dict] = {}


def _j_table(j: int) -> dict:
    """Arrays over delta | primorial(j): log(delta), phi(delta)/delta^2 *
    m_delta(j)^2, the same times sqrt(delta), and a small-factor flag.

    m_delta(j) = sum_{n <= j, (n, delta) = 1} mu(n)/n is evaluated for all
    2^pi(j) divisors at once: point masses mu(n)/n are placed on the prime
    subset of each squarefree n <= j, a subset-sum transform gives the sum
    over all n supported inside any prime set T, and m_delta(j) is the value
    at the complement of delta's support.
    """
    if j in _j_table_cache:
        return _j_table_cache[j]
    ps = [int(p) for p in primes_upto(j)]
    k = len(ps)
    n_masks = 1 << k
    check_allocation(n_masks * 8 * 6, f"primorial divisor table for j={j}")
    h = np.zeros(n_masks, dtype=np.float64)
    for n in range(1, j + 1):
        x, mask, mu, ok = n, 0, 1, True
        for i, p in enumerate(ps):
            if x % p == 0:
                x //= p
                if x % p == 0:
                    ok = False
                    break
                mask |= 1 << i
                mu = -mu
        if ok and x == 1:
            h[mask] += mu / n
    g = h.copy()
    for i in range(k):
        bit = 1 << i
        idx = np.nonzero(np.arange(n_masks) & bit)[0]
        g[idx] += g[idx ^ bit]
    masks = np.arange(n_masks)
    m_vals = g[(n_masks - 1) ^ masks]
    logd = np.zeros(n_masks, dtype=np.float64)
    wphi = np.ones(n_masks, dtype=np.float64)
    sq = np.ones(n_masks, dtype=np.float64)
    small = np.ones(n_masks, dtype=bool)
    for i, p in enumerate(ps):
        bit = (masks >> i) & 1
        logd += bit * math.log(p)
        wphi *= np.where(bit, (p - 1.0) / (p * p), 1.0)
        sq *= np.where(bit, math.sqrt(p), 1.0)
        if p >= 30:
            small &= bit == 0
    w = wphi * m_vals * m_vals
    table = {"logd": logd, "w": w, "wsq": w * sq, "small": small}
    _j_table_cache[j] = table
    return table


def block_weight(j: int) -> float:
    """W(j) = sum over delta | primorial(j) of phi(delta)/delta^2 m_delta(j)^2."""
    return float(_j_table(j)["w"].sum())


def _j1_star_primorial(j: int) -> float:
    r = 1.0
    for p in primes_upto(j):
        p = float(p)
        r *= (p ** 1.5 + p) / (p ** 1.5 + 1.0)
    return r


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % q for q in range(2, int(n ** 0.5) + 1))


def theorem_bound(config: AssemblyConfig) -> dict:
    """Evaluate the assembled bound for sqrt(x) S(x), x >= x_min.

    Returns a dict with the main, remainder, and tail parts, per-j details,
    and the localization window that realizes the remainder supremum.
    """
    x_min, ratio = config.x_min, config.ratio
    if not (x_min > 1 and ratio > 1):
        raise ValueError("need x_min > 1 and ratio > 1")
    jmax = int(ratio)
    A = A_DEEP.mid
    e1 = math.exp(EULER_GAMMA / 2.0) - 1.0
    e2 = math.exp(-EULER_GAMMA / 2.0)
    tail = 4.14 / ratio + 0.00205
    main_total = 0.0
    prodw = 1.0
    per_j = []
    for j in range(1, jmax + 1):
        if _is_prime(j):
            prodw *= j * j / (j * j + j - 1.0)
        R = min(j + 1.0, ratio)
        t = _j_table(j)
        W = float(t["w"].sum())
        main_j = A * prodw * math.log(R / j) * W
        main_total += main_j
        if config.refine_small_factors:
            C = np.where(t["small"], 1.17, 2.18)
        else:
            C = np.full(t["small"].shape, 2.18)
        coef = 2.0 * C * e1 * (math.sqrt(R) + math.sqrt(j)) \
            + 2.0 * 2.18 * e2 * (math.sqrt(R) - math.sqrt(j))
        errw = _j1_star_primorial(j) * t["wsq"] * coef
        per_j.append({"j": j, "main": main_j, "W": W,
                      "logd": t["logd"], "errw": errw})
    # Remainder: sup over x >= x_min of (1/sqrt(x)) sum of the (j, delta)
    # terms present at scale x.  With localization, x in [Y, 2Y) only sees
    # terms with j * delta <= 2Y and 1/sqrt(x) <= 1/sqrt(Y); the supremum
    # over dyadic Y terminates once even the full sum cannot beat the
    # current best.
    E_full = sum(float(row["errw"].sum()) for row in per_j)
    best, best_Y = 0.0, None
    Y = float(x_min)
    while True:
        if config.localize:
            E = 0.0
            for row in per_j:
                keep = row["logd"] <= math.log(2.0 * Y / row["j"])
                E += float(row["errw"][keep].sum())
        else:
            E = E_full
        cur = E / math.sqrt(Y)
        if cur > best:
            best, best_Y = cur, Y
        if not config.localize:
            break
        if E_full / math.sqrt(2.0 * Y) <= best:
            break
        Y *= 2.0
    bound = main_total + best + tail
    return {
        "x_min": x_min,
        "ratio": ratio,
        "refine_small_factors": config.refine_small_factors,
        "localize": config.localize,
        "main": main_total,
        "remainder": best,
        "remainder_window": best_Y,
        "tail": tail,
        "bound": bound,
        "per_j": [{"j": r["j"], "main": r["main"], "W": r["W"],
                   "err_sum": float(r["errw"].sum())} for r in per_j],
    }


def theorem_table(scan_cap: float = 19.0 / 30.0,
                  refine_small_factors: bool = True,
                  localize: bool = True,
                  tol_hi: float = 0.01, tol_lo: float = 0.05) -> dict:
    """All reference rows plus the combined first row.

    Each row reports the computed bound next to its reference value and
    whether it lands within (-tol_lo, +tol_hi) of it.  The combined row is
    max(first assembled bound, scan_cap) and is checked against 17/25.
    A row out of tolerance is reported, not raised; only failure to compute
    is an error.
    """
    rows = []
    for x_min, ratio, ref in REFERENCE_ROWS:
        res = theorem_bound(AssemblyConfig(x_min, ratio,
                                           refine_small_factors, localize))
        res["reference"] = ref
        res["within_tolerance"] = bool(ref - tol_lo <= res["bound"] <= ref + tol_hi)
        rows.append(res)
    combined = max(rows[0]["bound"], scan_cap)
    return {
        "rows": rows,
        "scan_cap": scan_cap,
        "combined_first_row": combined,
        "combined_cap": 17.0 / 25.0,
        "combined_ok": bool(combined <= 17.0 / 25.0),
        "all_rows_within_tolerance": all(r["within_tolerance"] for r in rows),
    }


# ----------------------------------------------------------------------
# The two weighted-sum lemmas feeding the tail constant, and the tail itself.

def _weighted_sum_exact(x: float, D: float, power: float, weight) -> float:
    """sum_{d <= min(D, x/1e12), d squarefree} phi(d) weight(d) / d^power / logterm."""
    cap = int(min(D, x / DEEP_SCALE))
    total = 0.0
    for d in range(1, cap + 1):
        fac = factorize(d)
        if any(e > 1 for _, e in fac):
            continue
        phi = 1
        for p, _ in fac:
            phi *= p - 1
        total += phi * weight(d) / d ** power
    return total


def le1_verify(grid=None, quad_tol: float = 1e-13) -> BoundReport:
    """Check the cross-term lemma: for (x, D) in the grid,

    sum_{d <= min(D, x/1e12)} mu^2(d) phi(d) g0(d) g1(d) / (d^(3/2) log(x/d))
      <= 0.05 sqrt(D),

    and that the proof's majorant (an explicit integral plus 0.0497 sqrt(D))
    also stays below the cap and above the exact sum.
    """
    if grid is None:
        grid = [(x, x / r) for x in (1e12, 1e13, 1e14, 1e15)
                for r in (23.0, 39.0, 56.0, 76.0)]
    worst = (0.0, None)
    rows = []
    for x, D in grid:
        exact = 0.0
        cap_d = int(min(D, x / DEEP_SCALE))
        for d in range(1, cap_d + 1):
            fac = factorize(d)
            if any(e > 1 for _, e in fac):
                continue
            phi = 1
            for p, _ in fac:
                phi *= p - 1
            exact += phi * g0_factor(d) * g1_factor(d) / (d ** 1.5 * math.log(x / d))
        capval = 0.05 * math.sqrt(D)
        lo_u = max(DEEP_SCALE, x / D)
        integral, ierr = quad_checked(
            lambda u: (2.0 * math.log(u) - 1.0) / (u ** 1.5 * math.log(u) ** 2),
            lo_u, x, tol=quad_tol)
        majorant = 0.80 * math.sqrt(x) * (integral + ierr) + 0.0497 * math.sqrt(D)
        ratio = exact / capval
        rows.append({"x": x, "D": D, "exact": exact, "majorant": majorant,
                     "cap": capval, "exact_le_majorant": exact <= majorant,
                     "majorant_le_cap": majorant <= capval})
        if ratio > worst[0]:
            worst = (ratio, (x, D))
    ok = all(r["exact_le_majorant"] and r["majorant_le_cap"] for r in rows)
    return BoundReport(
        name="cross-term-weighted-sum",
        domain=f"{len(rows)} grid points, x in [1e12, 1e15]",
        passed=ok and worst[0] <= 1.0,
        worst_ratio=worst[0],
        worst_arg=worst[1],
        bound=1.0,
        details={"rows": rows},
    )


def le2_verify(grid=None, quad_tol: float = 1e-13) -> BoundReport:
    """Check the square-term lemma: for (x, D) in the grid,

    sum_{d <= min(D, x/1e12)} mu^2(d) phi(d) g1(d)^2 / (d^2 log^2(x/d)) <= 0.047,

    together with its integral majorant plus 0.00152.
    """
    if grid is None:
        grid = [(x, x / r) for x in (1e12, 1e13, 1e14, 1e15)
                for r in (23.0, 39.0, 56.0, 76.0)]
    worst = (0.0, None)
    rows = []
    for x, D in grid:
        exact = 0.0
        cap_d = int(min(D, x / DEEP_SCALE))
        for d in range(1, cap_d + 1):
            fac = factorize(d)
            if any(e > 1 for _, e in fac):
                continue
            phi = 1
            for p, _ in fac:
                phi *= p - 1
            g1 = g1_factor(d)
            exact += phi * g1 * g1 / (d * d * math.log(x / d) ** 2)
        lo_u = max(DEEP_SCALE, x / D)
        integral, ierr = quad_checked(
            lambda u: (math.log(u) - 1.0) / (u * math.log(u) ** 3),
            lo_u, x, tol=quad_tol)
        majorant = 1.57 * (integral + ierr) + 0.00152
        ratio = exact / 0.047
        rows.append({"x": x, "D": D, "exact": exact, "majorant": majorant,
                     "exact_le_majorant": exact <= majorant,
                     "majorant_le_cap": majorant <= 0.047})
        if ratio > worst[0]:
            worst = (ratio, (x, D))
    ok = all(r["exact_le_majorant"] and r["majorant_le_cap"] for r in rows)
    return BoundReport(
        name="square-term-weighted-sum",
        domain=f"{len(rows)} grid points, x in [1e12, 1e15]",
        passed=ok and worst[0] <= 1.0,
        worst_ratio=worst[0],
        worst_arg=worst[1],
        bound=1.0,
        details={"rows": rows},
    )


def tail_bound(D: float, x: float) -> dict:
    """The tail estimate sum_{d <= D} mu^2 phi/d^2 m_d(x/d)^2 <= 4.14 D/x + 0.00205.

    Components: the linear part 4.14 D/x from the sqrt envelope and the
    weighted-sum cap 2.07; the cross part 2 sqrt(2) 0.0144 * 0.05 sqrt(D/x)
    capped at 0.00204; the square part 0.0144^2 * 0.047.  The flat form
    rounds cross + square up to 0.00205.
    """
    if not (0 < D <= x):
        raise ValueError("need 0 < D <= x")
    linear = 4.14 * D / x
    cross = 2.0 * math.sqrt(2.0) * 0.0144 * 0.05 * math.sqrt(D / x)
    square = 0.0144 ** 2 * 0.047
    return {
        "linear": linear,
        "cross": cross,
        "square": square,
        "total": linear + cross + square,
        "flat": linear + 0.00205,
        "flat_valid": cross + square <= 0.00205,
    }


def tail_audit() -> BoundReport:
    """Component audit of the flat tail estimate.

    Checks that the cross and square components together stay below the
    0.00205 constant folded into the flat form, and that the flat value at
    ratio 22.99 reproduces 0.18213 to rounding.
    """
    at_ref = tail_bound(1.0, 22.99)
    flat_ok = at_ref["flat_valid"]
    ref_ok = abs(at_ref["flat"] - 0.18213) <= 1e-5
    tiny = tail_bound(1e-9, 1.0)
    limit_ok = abs(tiny["flat"] - 0.00205) <= 1e-8
    excess = (at_ref["cross"] + at_ref["square"]) / 0.00205
    return BoundReport(
        name="tail-components",
        domain="D/x = 1/22.99 and D/x -> 0",
        passed=flat_ok and ref_ok and limit_ok,
        worst_ratio=excess,
        worst_arg=(1.0, 22.99),
        bound=1.0,
        details={"at_ratio_22.99": at_ref, "reference_value": 0.18213,
                 "limit_value": tiny["flat"]},
    )


def tail_desk_check(x: int = 200_000, ratio: float = 23.0) -> BoundReport:
    """Directly evaluate the tail sum at desk scale against 4.14 D/x + 0.00205.

    The sum sum_{d <= D} mu^2(d) phi(d)/d^2 m_d(x/d)^2 is computed exactly
    in floats (m_d by sieve masks), then compared to the flat bound.
    """
    D = int(x / ratio)
    block = sieve_range(1, x)
    mu = np.zeros(x + 1, dtype=np.int8)
    mu[1:] = block.mu
    base = np.zeros(x + 1, dtype=np.float64)
    base[1:] = mu[1:].astype(np.float64) / np.arange(1, x + 1, dtype=np.float64)
    total = 0.0
    for d in range(1, D + 1):
        if mu[d] == 0:
            continue
        y = x // d
        terms = base[1: y + 1].copy()
        for p in prime_divisors(d):
            terms[p - 1:: p] = 0.0
        md = float(np.sum(terms))
        phi = 1
        for p in prime_divisors(d):
            phi *= p - 1
        total += phi / (d * d) * md * md
    cap = 4.14 * D / x + 0.00205
    return BoundReport(
        name="tail-envelope-desk",
        domain=f"x = {x}, D = {D}",
        passed=total <= cap,
        worst_ratio=total / cap,
        worst_arg=(x, D),
        bound=cap,
        details={"sum": total, "linear_part": 4.14 * D / x},
    )
