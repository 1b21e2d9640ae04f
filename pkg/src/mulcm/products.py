"""Certified Euler products, prime tail bounds, and the constants registry.

The tail machinery turns a finite product or sum over primes into a certified
enclosure: the partial value plus an explicit bound on everything beyond the
cutoff.  Tail bounds on sums of f(p) log p use an effective prime number
theorem inequality with two validity modes; tails without the log weight go
through f(t)/log t.

Deep constants (cutoff 1e8) are frozen here with their enclosures and can be
regenerated with tools/deep_constants.py; everything else is recomputed on
demand at documented cutoffs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .numutil import NeumaierSum, quad_log
from .report import BoundReport, CertifiedValue
from .sieve import primes_upto, require_squarefree
from .mertens import XI

EULER_GAMMA = float(np.euler_gamma)

# Effective bound: for admissible P, sum_{p >= P} f(p) log p
#   <= (1 + EPS) * int_P^inf f + EPS * P f(P) + C * P f(P) / log^2 P
# with (mode, C, minimum P) = ("strong", 1/5, 3.6e6) or ("weak", 4, 2).
EPS_PNT = 1.0 / 914.0
STRONG_MIN_P = 3_600_000.0
WEAK_MIN_P = 2.0

# ----------------------------------------------------------------------
# Frozen deep constants (cutoff 1e8, via tools/deep_constants.py).
# A    = prod_p (1 - 2/p^2 + 1/p^3); the leading density constant.
# P0   = prod_p (1 - 1/p^2 + 1/p^3); the k-tail product over all primes.
A_DEEP = CertifiedValue(0.428249505675819, 0.428249506119184)
P0_DEEP = CertifiedValue(0.748535259681247, 0.748535260068727)


def prime_tail_bound(f, P: float, mode: str = "strong",
                     integral: float | None = None, sigma: float = 2.0) -> float:
    """Upper bound for sum over primes p >= P of f(p) log p.

    f must be nonnegative and decreasing on [P, infinity).  `integral` may
    supply the exact value of int_P^inf f(t) dt; otherwise it is computed by
    windowed quadrature plus a power-law remainder that assumes
    f(t) <= f(Q) (Q/t)^sigma beyond the last window edge Q (sigma > 1).
    Mode "strong" requires P >= 3.6e6; mode "weak" requires P >= 2.
    """
    if mode == "strong":
        if P < STRONG_MIN_P:
            raise ValueError(f"strong mode needs P >= {STRONG_MIN_P:.2g}, got {P}")
        c_last = 0.2
    elif mode == "weak":
        if P < WEAK_MIN_P:
            raise ValueError(f"weak mode needs P >= {WEAK_MIN_P}, got {P}")
        c_last = 4.0
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if integral is None:
        integral = _integral_to_infinity(f, P, sigma)
    fP = f(P)
    if fP < 0:
        raise ValueError("f must be nonnegative at P")
    logP = math.log(P)
    return (1.0 + EPS_PNT) * integral + EPS_PNT * P * fP + c_last * P * fP / (logP * logP)


def _integral_to_infinity(f, P: float, sigma: float) -> float:
    """Upper estimate of int_P^inf f, by windowed quadrature plus remainder.

    The remainder past Q = 1e6 * P assumes f(t) <= f(Q) (Q/t)^sigma there,
    which holds for the power-times-slowly-varying integrands used here.
    """
    if sigma <= 1.0:
        raise ValueError("sigma must exceed 1 for a finite remainder")
    edges = [P, 10 * P, 100 * P, 1e4 * P, 1e6 * P]
    total = NeumaierSum()
    for a, b in zip(edges, edges[1:]):
        v, e = quad_log(f, a, b, tol=1e-13 * max(1.0, f(a) * a))
        total.add(v)
        total.add(abs(e))
    Q = edges[-1]
    total.add(f(Q) * Q / (sigma - 1.0))
    return total.total()


def tail_sum_over_primes(f, P: float, mode: str = "strong", sigma: float = 2.0) -> float:
    """Upper bound for sum over primes p >= P of f(p) (no log weight).

    Writes f(p) = (f(p)/log p) * log p and applies prime_tail_bound to
    h(t) = f(t)/log t, which is still nonnegative decreasing when f is.
    """
    h = lambda t: f(t) / math.log(t)
    return prime_tail_bound(h, P, mode=mode, sigma=sigma)


def check_prime_tail(cutoff: int = 30_000_000) -> "BoundReport":
    """Desk validation of the prime tail estimate against exact partial sums.

    For f(t) = t^(-a), a in {1.5, 2}, and a grid of cut points P spanning
    both modes, the exact sum of f(p) log p over primes P <= p <= cutoff is
    compared to prime_tail_bound(f, P).  The partial sum is a lower bound
    for the infinite sum, so partial <= bound is a necessary condition; the
    uncaptured remainder beyond the cutoff only makes the check more lenient
    and is reported per row as the captured integral fraction.
    """
    from .report import BoundReport
    ps = primes_upto(cutoff).astype(np.float64)
    logs = np.log(ps)
    grid = [(10.0, "weak"), (1e3, "weak"), (1e5, "weak"),
            (3.7e6, "strong"), (1e7, "strong")]
    worst = (0.0, None)
    rows = []
    for a in (1.5, 2.0):
        weighted = logs / ps ** a
        suffix = np.cumsum(weighted[::-1])[::-1]
        for P, mode in grid:
            i = int(np.searchsorted(ps, P, side="left"))
            partial = float(suffix[i]) if i < len(ps) else 0.0
            exact_integral = P ** (1.0 - a) / (a - 1.0)
            bound = prime_tail_bound(lambda t: t ** -a, P, mode=mode,
                                     integral=exact_integral)
            captured = 1.0 - (cutoff / P) ** (1.0 - a)
            ratio = partial / bound
            rows.append({"a": a, "P": P, "mode": mode, "partial": partial,
                         "bound": bound, "ratio": ratio,
                         "captured_integral_fraction": captured})
            if ratio > worst[0]:
                worst = (ratio, (a, P))
    return BoundReport(
        name="prime-tail-estimate",
        domain=f"f(t)=t^-a, a in (1.5, 2), P grid to 1e7, primes to {cutoff:g}",
        passed=worst[0] <= 1.0,
        worst_ratio=worst[0],
        worst_arg=worst[1],
        bound=1.0,
        details={"rows": rows},
    )


def product_over_primes(local, cutoff: int, tail_abs_bound: float,
                        tail_sign: str) -> CertifiedValue:
    """Certified enclosure of prod_p (1 + local(p)) over all primes.

    local is evaluated at every prime p <= cutoff; tail_abs_bound must bound
    sum_{p > cutoff} |local(p)|, with every |local(p)| <= 1/2 there.
    tail_sign describes the tail terms: "negative" (partial is an upper
    bound), "positive" (partial is a lower bound), or "mixed".
    """
    ps = primes_upto(cutoff).astype(np.float64)
    logs = np.log1p(np.array([local(float(p)) for p in ps]))
    s = math.fsum(logs.tolist())
    partial = math.exp(s)
    # Float slack: fsum is exact to one rounding; log1p and exp each lose
    # an ulp per operation, so allow a generous 1e-13 relative cushion.
    fslack = 1e-13
    # |log(1 + x)| <= |x| / (1 - |x|) <= 2 |x| for |x| <= 1/2.
    t = 2.0 * tail_abs_bound
    if tail_sign == "negative":
        lo, hi = partial * math.exp(-t), partial
    elif tail_sign == "positive":
        lo, hi = partial, partial * math.exp(t)
    elif tail_sign == "mixed":
        lo, hi = partial * math.exp(-t), partial * math.exp(t)
    else:
        raise ValueError(f"unknown tail_sign {tail_sign!r}")
    return CertifiedValue(lo * (1 - fslack), hi * (1 + fslack))


def constant_A(cutoff: int = 2_000_000) -> CertifiedValue:
    """Enclosure of A = prod_p (1 - 2/p^2 + 1/p^3) at a chosen cutoff.

    The tail of sum 2/p^2 is bounded in weak mode (valid from P = 2), so any
    cutoff >= 100 works; larger cutoffs tighten the bracket.
    """
    tail = tail_sum_over_primes(lambda t: 2.0 / (t * t), float(cutoff), mode="weak")
    return product_over_primes(
        lambda p: (-2.0 * p + 1.0) / (p * p * p), cutoff, tail, "negative")


def constant_ktail_product(cutoff: int = 2_000_000) -> CertifiedValue:
    """Enclosure of prod_p (1 - 1/p^2 + 1/p^3) at a chosen cutoff."""
    tail = tail_sum_over_primes(lambda t: 1.0 / (t * t), float(cutoff), mode="weak")
    return product_over_primes(
        lambda p: (1.0 - p) / (p * p * p), cutoff, tail, "negative")


# ----------------------------------------------------------------------
# The three envelope weights G and their Dirichlet-series constants.

def weight_value(key: str, p: float) -> float:
    """G(p) for the weight named by key: "g0^2", "g0*g1", or "g1^2".

    g0(p) = sqrt(p)/(sqrt(p)-1) for odd p, sqrt(3/2) at p = 2;
    g1(p) = p^XI/(p^XI - 1) for odd p, 2.06 at p = 2.
    """
    if p == 2:
        a, b = math.sqrt(1.5), 2.06
    else:
        sp = math.sqrt(p)
        a = sp / (sp - 1.0)
        pe = p ** XI
        b = pe / (pe - 1.0)
    if key == "g0^2":
        return a * a
    if key == "g0*g1":
        return a * b
    if key == "g1^2":
        return b * b
    raise ValueError(f"unknown weight {key!r}")


# Caps asserted for the constants below: (H(1) cap, Hbar(2/3) cap).
H_CAPS = {"g0^2": (2.0004, 72.9), "g0*g1": (1.34, 23.4), "g1^2": (1.06, 9.20)}

# The H products need enclosure widths around 1e-8 to decide the caps above,
# far beyond what a monotone upper-bound tail can give (those shrink like
# cutoff^(-1/6) for Hbar(2/3)).  Instead, for p past the cutoff the log of
# each local factor is expanded into monomials c * p^(-e) with explicitly
# bounded remainders, and each monomial is summed over p > cutoff exactly via
# the prime zeta function.  The helpers below build that expansion.

# Remainder monomials are truncated no shallower than this exponent; every
# remainder then lands at exponent >= 3 after the worst shift below, so the
# absolute error terms are O(cutoff^-2) while kept terms carry the rest.
_REM_EXPONENT_FLOOR = 7.0 / 3.0

SHARP_TAIL_MIN_CUTOFF = 100_000

# Exponents of tail monomials are carried exactly as integer pairs (m, n)
# meaning m/6 + n * XI: every exponent arising in the two H products is a
# sixth-integer plus an integer multiple of XI.  Doing the exponent algebra
# on floats instead would drift each exponent by a few ulps, which moves
# p^(-e) by ln(p) ulps relatively; that drift is larger than the deepest
# remainder monomials and would break the certified containment.

_HALF = (3, 0)
_XI_STEP = (0, 1)


def _expo_float(e) -> float:
    return e[0] / 6.0 + e[1] * XI


def _expo_add(e, f):
    return (e[0] + f[0], e[1] + f[1])

# Tiny relative inflation applied to every float-computed remainder constant
# so a last-ulp rounding down cannot understate a bound.
_UP = 1.0 + 1e-12

_prime_zeta_tail_cache: dict[tuple[int, int, int], CertifiedValue] = {}


def _prime_power_tails(exponents, cutoff: int, ps: np.ndarray) -> dict:
    """Enclosures of Z(e) = sum_{p > cutoff} p^(-e) for exponent pairs e.

    Z(e) = primezeta(e) - (sieved partial sum).  primezeta is evaluated at 40
    digits with the exponent reconstructed there (so the exponent seen by
    primezeta is exact to 40 digits), and the subtraction is done at that
    precision.  The sieved partial uses float powers, whose rounding and the
    float representation of the exponent are covered by a cushion of 1e-12
    relative plus 1e-12 absolute, orders of magnitude above the true error.
    """
    out = {}
    for e in exponents:
        e_f = _expo_float(e)
        if e_f <= 1.0 + 1e-9:
            raise ValueError(f"prime power tail diverges at exponent {e_f}")
        key = (cutoff, e[0], e[1])
        hit = _prime_zeta_tail_cache.get(key)
        if hit is None:
            partial = math.fsum(np.power(ps, -e_f).tolist())
            with mp.workdps(40):
                e_mp = mp.mpf(e[0]) / 6 + e[1] * mp.mpf(XI)
                z = float(mp.primezeta(e_mp) - mp.mpf(partial))
            pad = 1e-12 * abs(z) + 1e-12
            hit = CertifiedValue(max(z - pad, 0.0), z + pad)
            _prime_zeta_tail_cache[key] = hit
        out[e] = hit
    return out


def _truncated_geometric(step, p_min: float):
    """Expansion of 1/(1 - p^(-step)) valid for all p >= p_min.

    Returns (terms, rem_coef, rem_exp): the function equals
    sum_{(c, e) in terms} c * p^(-e) plus a remainder R(p) with
    0 <= R(p) <= rem_coef * p^(-rem_exp).  Terms are kept until the
    remainder exponent clears _REM_EXPONENT_FLOOR with one term to spare.
    """
    s_f = _expo_float(step)
    n = math.ceil(_REM_EXPONENT_FLOOR / s_f) + 1
    terms = [(1.0, (i * step[0], i * step[1])) for i in range(n)]
    rem_coef = _UP / (1.0 - p_min ** (-s_f))
    return terms, rem_coef, (n * step[0], n * step[1])


def _weight_series(key: str, p_min: float):
    """Monomial expansion of G(p) for odd primes p >= p_min.

    G is a product of two geometric factors 1/(1 - p^(-s)) with steps from
    {1/2, XI}, so G(p) = sum_{(c, e) in terms} c * p^(-e) + R(p) with
    0 <= R(p) <= sum_{(r, e) in rems} r * p^(-e).  The remainder collects
    the three cross products that involve at least one truncated factor; each
    truncated factor at p >= p_min is itself at most its remainder constant.
    """
    steps = {"g0^2": (_HALF, _HALF), "g0*g1": (_HALF, _XI_STEP),
             "g1^2": (_XI_STEP, _XI_STEP)}[key]
    (t1, c1, e1), (t2, c2, e2) = (_truncated_geometric(s, p_min) for s in steps)
    terms: dict = {}
    for a, ea in t1:
        for b, eb in t2:
            e = _expo_add(ea, eb)
            terms[e] = terms.get(e, 0.0) + a * b
    rems = [(c1 * c2, e1), (c1 * c2, e2), (c1 * c2, _expo_add(e1, e2))]
    return terms, rems


def _local_monomials(key: str, w_shifts, extra, p_min: float):
    """Monomial expansion of the local term a(p) for odd primes p >= p_min:

        a(p) = sum_{(c, s) in w_shifts} c * W(p) * p^(-s)
             + sum_{(c, e) in extra} c * p^(-e),

    where W(p) = (p-1) G(p) - p = p (G(p) - 1) - G(p).  Returns (terms, rems)
    with a(p) = sum_{(e, c) in terms} c * p^(-e) + O*(sum_{(r, e) in rems}
    r * p^(-e)).  The weight expansion from _weight_series is pushed through
    W (shift exponents down by one for the p part, negate for the -G part)
    and shifted into a.
    """
    g_terms, g_rems = _weight_series(key, p_min)
    if g_terms.get((0, 0)) != 1.0:
        raise AssertionError("weight expansion must have constant term 1")
    # W(p) = p (G - 1) - G as monomials; G - 1 drops the constant term.
    w_terms: dict = {}
    for e, c in g_terms.items():
        if e != (0, 0):
            down = (e[0] - 6, e[1])
            w_terms[down] = w_terms.get(down, 0.0) + c
        w_terms[e] = w_terms.get(e, 0.0) - c
    w_rems = []
    for r, e in g_rems:
        w_rems.append((r, (e[0] - 6, e[1])))
        w_rems.append((r, e))
    a_terms: dict = {}
    a_rems: list = []
    for cs, s in w_shifts:
        for e, c in w_terms.items():
            up = _expo_add(e, s)
            a_terms[up] = a_terms.get(up, 0.0) + cs * c
        for r, e in w_rems:
            a_rems.append((abs(cs) * r, _expo_add(e, s)))
    for c, e in extra:
        a_terms[e] = a_terms.get(e, 0.0) + c
    a_terms = {e: c for e, c in a_terms.items() if c != 0.0}
    return a_terms, a_rems


def _local_log_tail(key: str, w_shifts, extra, cutoff: int,
                    ps: np.ndarray) -> CertifiedValue:
    """Enclosure of sum_{p > cutoff} log(1 + a(p)) past the cutoff.

    a is expanded into monomials by _local_monomials, log(1 + a) is
    linearized with a two-sided quadratic remainder, and every monomial tail
    is then a prime zeta value.
    """
    p_min = float(cutoff)
    a_terms, a_rems = _local_monomials(key, w_shifts, extra, p_min)
    all_expos = list(a_terms) + [e for _, e in a_rems]
    e_min = min(all_expos, key=_expo_float)
    e_min_f = _expo_float(e_min)
    if e_min_f <= 1.0:
        raise AssertionError("local expansion produced a divergent exponent")
    # |a(p)| <= C_a p^(-e_min) for p >= cutoff, hence the log linearization
    # error is at most a^2 / (2 (1 - |a|)) <= r_log * p^(-2 e_min).
    c_a = _UP * math.fsum(
        [abs(c) * p_min ** (e_min_f - _expo_float(e)) for e, c in a_terms.items()]
        + [r * p_min ** (e_min_f - _expo_float(e)) for r, e in a_rems])
    a0 = _UP * c_a * p_min ** (-e_min_f)
    if a0 >= 0.5:
        raise AssertionError("local terms too large past cutoff for log expansion")
    a_rems.append((_UP * c_a * c_a / (2.0 * (1.0 - a0)),
                   (2 * e_min[0], 2 * e_min[1])))
    zs = _prime_power_tails(set(a_terms) | {e for _, e in a_rems}, cutoff, ps)
    lo_parts, hi_parts = [], []
    for e, c in a_terms.items():
        z = zs[e]
        lo_parts.append(c * (z.lo if c >= 0.0 else z.hi))
        hi_parts.append(c * (z.hi if c >= 0.0 else z.lo))
    for r, e in a_rems:
        bound = r * zs[e].hi
        lo_parts.append(-bound)
        hi_parts.append(bound)
    pad = 1e-15 * math.fsum(abs(v) for v in lo_parts + hi_parts) + 1e-18
    return CertifiedValue(math.fsum(lo_parts) - pad, math.fsum(hi_parts) + pad)


# Local-term shapes for the two H products, as (coef, W shift) and plain
# monomial parts: H(1) has a(p) = W/p^2 - W/p^3 - 1/p^2 and Hbar(2/3) has
# a(p) = W/p^(5/3) + W/p^(7/3) + 1/p^(4/3), with W = (p-1)G - p.
H1_SHAPE = (((1.0, (12, 0)), (-1.0, (18, 0))), ((-1.0, (12, 0)),))
H23_SHAPE = (((1.0, (10, 0)), (1.0, (14, 0))), ((1.0, (8, 0)),))


def _sharp_weight_product(key: str, w_shifts, extra, cutoff: int,
                          local) -> CertifiedValue:
    """prod_p (1 + local(p)) with the monomial tail for p > cutoff.

    local(p) must equal a(p) from _local_log_tail for odd primes; p = 2 is
    covered by the partial product, the tail handles only p > cutoff.
    """
    if cutoff < SHARP_TAIL_MIN_CUTOFF:
        raise ValueError(f"cutoff must be >= {SHARP_TAIL_MIN_CUTOFF}")
    ps = primes_upto(cutoff).astype(np.float64)
    logs = np.log1p(np.array([local(float(p)) for p in ps]))
    partial = math.exp(math.fsum(logs.tolist()))
    tail = _local_log_tail(key, w_shifts, extra, cutoff, ps)
    fslack = 1e-13
    return CertifiedValue(partial * math.exp(tail.lo) * (1.0 - fslack),
                          partial * math.exp(tail.hi) * (1.0 + fslack))


def h_linear(key: str, cutoff: int = 10_000_000) -> CertifiedValue:
    """Enclosure of H(1) = prod_p (1 + ((p-1)G(p) - p)/p^2 - (p-1)G(p)/p^3).

    This is the value of the Dirichlet series sum mu^2(d) phi(d) G(d) / d^s
    at s = 1 after removing the zeta factor.  With W = (p-1)G - p the local
    term is W/p^2 - W/p^3 - 1/p^2, which the sharp tail expands past the
    cutoff; widths land near 1e-9 at the default cutoff.
    """
    def local(p: float) -> float:
        G = weight_value(key, p)
        return ((p - 1.0) * G - p) / (p * p) - (p - 1.0) * G / (p * p * p)

    return _sharp_weight_product(key, *H1_SHAPE, cutoff, local)


def h_twothirds(key: str, cutoff: int = 10_000_000) -> CertifiedValue:
    """Enclosure of Hbar(2/3) = prod_p (1 + ((p-1)G(p)-p)/p^(5/3) + (p-1)G(p)/p^(7/3)).

    Companion constant at s = 2/3 controlling the D^(2/3) term of partial
    sums.  With W = (p-1)G - p the local term is W/p^(5/3) + W/p^(7/3) +
    1/p^(4/3); tail monomials start at exponent 7/6, so a raw upper bound
    would shrink only like cutoff^(-1/6), while the prime zeta route gives
    widths near 1e-8 at the default cutoff.
    """
    def local(p: float) -> float:
        G = weight_value(key, p)
        return ((p - 1.0) * G - p) / p ** (5.0 / 3.0) + (p - 1.0) * G / p ** (7.0 / 3.0)

    return _sharp_weight_product(key, *H23_SHAPE, cutoff, local)


def check_h_caps(cutoff: int = 10_000_000) -> list[BoundReport]:
    """Verify the six asserted caps on H(1) and Hbar(2/3) at a deep cutoff.

    A cap passes only if the entire certified enclosure sits below it, so a
    true value above the cap cannot be waved through by rounding.
    """
    reports = []
    for key, (cap1, cap23) in H_CAPS.items():
        for label, cap, enc in (
            ("H1", cap1, h_linear(key, cutoff)),
            ("H23", cap23, h_twothirds(key, cutoff)),
        ):
            reports.append(BoundReport(
                name=f"h-cap-{label}({key})",
                domain=f"primes <= {cutoff} + certified tail",
                passed=enc.entirely_below(cap),
                worst_ratio=enc.hi / cap,
                worst_arg=None,
                bound=cap,
                details={"enclosure": enc.to_dict(), "cutoff": cutoff},
            ))
    return reports


# ----------------------------------------------------------------------
# Partial sums sum_{d <= D} mu^2(d) phi(d) G(d) / d and their growth caps.

AUX_RATIO_CAP = {"g0^2": 2.07, "g0*g1": 1.60, "g1^2": 1.57}
AUX_RATIO_ARGMAX = {"g0^2": 42, "g0*g1": 7, "g1^2": 3}
AUX_ASYMPTOTIC = {"g0^2": (2.0004, 106.0), "g0*g1": (1.34, 33.8), "g1^2": (1.06, 13.3)}


def _aux_values(key: str, D: int) -> np.ndarray:
    """values[d] = mu^2(d) phi(d) G(d) / d for d = 0..D (0 at d=0)."""
    vals = np.ones(D + 1, dtype=np.float64)
    vals[0] = 0.0
    square_free = np.ones(D + 1, dtype=bool)
    square_free[0] = False
    for p in primes_upto(D):
        p = int(p)
        w = (p - 1.0) / p * weight_value(key, float(p))
        vals[p:: p] *= w
        pp = p * p
        if pp <= D:
            square_free[pp:: pp] = False
    vals[~square_free] = 0.0
    return vals


def aux_sum(key: str, D: int) -> float:
    """sum_{d <= D} mu^2(d) phi(d) G(d) / d."""
    return float(np.sum(_aux_values(key, D)))


def aux_ratio_scan(key: str, D_max: int = 1_000_000) -> BoundReport:
    """Check sum_{d <= D} mu^2 phi G / d <= cap * D for all D <= D_max.

    Also records where the ratio peaks; the expected peak location is part
    of the frozen table.
    """
    sums = np.cumsum(_aux_values(key, D_max))
    d = np.arange(0, D_max + 1, dtype=np.float64)
    d[0] = 1.0
    ratios = sums / d
    ratios[0] = 0.0
    cap = AUX_RATIO_CAP[key]
    worst = int(np.argmax(ratios))
    return BoundReport(
        name=f"aux-ratio({key})",
        domain=f"integer D <= {D_max}",
        passed=bool(ratios[worst] <= cap),
        worst_ratio=float(ratios[worst]) / cap,
        worst_arg=worst,
        bound=cap,
        details={"max_ratio": float(ratios[worst]),
                 "expected_argmax": AUX_RATIO_ARGMAX[key],
                 "argmax_matches": worst == AUX_RATIO_ARGMAX[key]},
    )


def aux_asymptotic_check(key: str, D_max: int = 1_000_000) -> BoundReport:
    """Check sum_{d <= D} mu^2 phi G / d <= c1 D + c2 D^(2/3) for D <= D_max."""
    sums = np.cumsum(_aux_values(key, D_max))
    d = np.arange(0, D_max + 1, dtype=np.float64)
    d[0] = 1.0
    c1, c2 = AUX_ASYMPTOTIC[key]
    rhs = c1 * d + c2 * d ** (2.0 / 3.0)
    ratios = sums / rhs
    ratios[0] = 0.0
    worst = int(np.argmax(ratios))
    return BoundReport(
        name=f"aux-asymptotic({key})",
        domain=f"integer D <= {D_max}",
        passed=bool(ratios[worst] <= 1.0),
        worst_ratio=float(ratios[worst]),
        worst_arg=worst,
        bound=1.0,
        details={"c1": c1, "c2": c2},
    )


# ----------------------------------------------------------------------
# Constants attached to a coprimality modulus q.

_universal_log_sum: CertifiedValue | None = None


def universal_log_sum(cutoff: int = 1_000_000) -> CertifiedValue:
    """Enclosure of sum over all primes of (3p-2) log p / ((p-1)(p^2+p-1)).

    Appears in the logarithmic shift constant c_q.  Stripping the log p
    that the prime-tail lemma carries, the remaining factor satisfies
    (3t-2)/((t-1)(t^2+t-1)) < 3.2/t^2 for t >= 3, so the tail beyond the
    cutoff is about 3.3/cutoff (3.3e-6 at the default).
    """
    global _universal_log_sum
    if _universal_log_sum is not None and cutoff == 1_000_000:
        return _universal_log_sum
    ps = primes_upto(cutoff).astype(np.float64)
    terms = (3.0 * ps - 2.0) * np.log(ps) / ((ps - 1.0) * (ps * ps + ps - 1.0))
    partial = math.fsum(terms.tolist())
    tail = prime_tail_bound(lambda t: 3.2 / (t * t), float(cutoff), mode="weak")
    enc = CertifiedValue(partial, partial + tail)
    if cutoff == 1_000_000:
        _universal_log_sum = enc
    return enc


def c_q(q: int) -> float:
    """Logarithmic shift constant: Euler's gamma plus local and universal sums.

    c_q = gamma + sum_{p | q} (p-1) log p / (p^2+p-1)
        + sum_p (3p-2) log p / ((p-1)(p^2+p-1)).
    """
    loc = 0.0
    for p in require_squarefree(q):
        loc += (p - 1.0) * math.log(p) / (p * p + p - 1.0)
    return EULER_GAMMA + loc + universal_log_sum().mid


def c_q_prerewrite(q: int, cutoff: int = 1_000_000) -> CertifiedValue:
    """The shift constant in its pre-simplification form:

    c_q = gamma + sum_{p | q} log p / (p - 1)
        + sum_{p coprime to q} (3p-2) log p / ((p-1)(p^2+p-1)).

    Splitting the universal sum at p | q and using
    log p/(p-1) - (3p-2) log p/((p-1)(p^2+p-1)) = (p-1) log p/(p^2+p-1)
    recovers the rewritten form used by c_q; the two are evaluated
    independently so a mismatch is reported, not silently fixed.
    """
    qps = set(require_squarefree(q))
    loc = 0.0
    for p in qps:
        loc += math.log(p) / (p - 1.0)
    ps = primes_upto(cutoff).astype(np.float64)
    terms = (3.0 * ps - 2.0) * np.log(ps) / ((ps - 1.0) * (ps * ps + ps - 1.0))
    if qps:
        mask = np.ones(ps.shape, dtype=bool)
        for p in qps:
            mask &= ps != float(p)
        terms = terms[mask]
    partial = math.fsum(terms.tolist())
    tail = prime_tail_bound(lambda t: 3.2 / (t * t), float(cutoff), mode="weak")
    base = EULER_GAMMA + loc + partial
    return CertifiedValue(base, base + tail)


def check_cq_forms(qs=(1, 2, 6), tol: float = 1e-9) -> "BoundReport":
    """Cross-check the two algebraic forms of c_q on small moduli.

    The rewritten form (c_q) and the pre-simplification form
    (c_q_prerewrite) must agree to within the tail width of the
    universal sum plus float slack.
    """
    from .report import BoundReport
    worst = (0.0, None)
    rows = []
    for q in qs:
        a = c_q(q)
        enc = c_q_prerewrite(q)
        dev = abs(a - enc.mid)
        allowance = enc.width + universal_log_sum().width + tol
        rows.append({"q": q, "rewritten": a, "prerewrite_lo": enc.lo,
                     "prerewrite_hi": enc.hi, "deviation": dev,
                     "allowance": allowance})
        r = dev / allowance
        if r > worst[0]:
            worst = (r, q)
    return BoundReport(
        name="shift-constant-forms",
        domain=f"q in {tuple(qs)}",
        passed=worst[0] <= 1.0,
        worst_ratio=worst[0],
        worst_arg=worst[1],
        bound=1.0,
        details={"rows": rows},
    )


def local_ratio(q: int) -> float:
    """prod_{p | q} p^2 / (p^2 + p - 1); scales A into the q-coprime constant."""
    val = 1.0
    for p in require_squarefree(q):
        val *= p * p / (p * p + p - 1.0)
    return val


def h_q(q: int, A: CertifiedValue = A_DEEP) -> CertifiedValue:
    """Enclosure of H_q(1) = A * prod_{p | q} p^2/(p^2+p-1).

    This is the mean value of the q-coprime squarefree totient weight, and
    equals the full sum over m of the cancellation coefficients g_q(m)/m.
    """
    return A.scale(local_ratio(q))


def gq_constants(q: int, A: CertifiedValue = A_DEEP) -> tuple[CertifiedValue, float]:
    """The pair (H_q(1), c_q) governing the mean of the q-coprime weight:

    sum_{m <= X, (m, q) = 1} mu^2(m) phi(m)/m^2 = H_q(1)(log X + c_q) + O(1/sqrt(X)).
    """
    return h_q(q, A), c_q(q)


def j1_star(q: int) -> float:
    """prod_{p | q} (p^(3/2) + p) / (p^(3/2) + 1); inflation for sqrt-scale remainders."""
    val = 1.0
    for p in require_squarefree(q):
        val *= (p ** 1.5 + p) / (p ** 1.5 + 1.0)
    return val


def j5_star(q: int) -> float:
    """prod_{p | q} (p^(5/4) + p) / (p^(5/4) + 1); inflation for the X^(1/4) term."""
    val = 1.0
    for p in require_squarefree(q):
        val *= (p ** 1.25 + p) / (p ** 1.25 + 1.0)
    return val


# ----------------------------------------------------------------------
# Registry.

def build_registry(deep: bool = False) -> dict:
    """Assemble the constants registry as a plain dict.

    With deep=False the cheap constants are recomputed at moderate cutoffs
    and the expensive ones come from the frozen deep enclosures.  With
    deep=True the H constants are recomputed at cutoff 1e7 (a few seconds;
    the H enclosures are tight at either cutoff, deep mostly shrinks the
    Hbar(2/3) widths from about 5e-6 to below 1e-8).
    """
    h_cut = 10_000_000 if deep else 100_000
    reg: dict = {
        "A": {"enclosure": A_DEEP.to_dict(), "cutoff": 100_000_000,
              "source": "frozen; regenerate with tools/deep_constants.py"},
        "ktail_product": {"enclosure": P0_DEEP.to_dict(), "cutoff": 100_000_000,
                          "source": "frozen; regenerate with tools/deep_constants.py"},
        "A_check": {"enclosure": constant_A(200_000).to_dict(), "cutoff": 200_000},
        "euler_gamma": EULER_GAMMA,
        "xi": XI,
        "universal_log_sum": universal_log_sum().to_dict(),
        "h_constants": {},
        "aux_table": {
            "ratio_cap": AUX_RATIO_CAP,
            "ratio_argmax": AUX_RATIO_ARGMAX,
            "asymptotic": {k: list(v) for k, v in AUX_ASYMPTOTIC.items()},
        },
        "c_q": {str(q): c_q(q) for q in (1, 2, 3, 6, 30, 210)},
        "j1_star": {str(q): j1_star(q) for q in (1, 2, 3, 6, 30, 210)},
        "j5_star": {str(q): j5_star(q) for q in (1, 2, 3, 6, 30, 210)},
        "H_q": {str(q): h_q(q).to_dict() for q in (1, 2, 6, 30, 210)},
    }
    for key in H_CAPS:
        reg["h_constants"][key] = {
            "H1": h_linear(key, h_cut).to_dict(),
            "H23": h_twothirds(key, h_cut).to_dict(),
            "caps": list(H_CAPS[key]),
            "cutoff": h_cut,
        }
    return reg
