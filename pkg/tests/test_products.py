import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mulcm.mertens import XI
from mulcm.products import (
    A_DEEP,
    H1_SHAPE,
    H23_SHAPE,
    P0_DEEP,
    _local_monomials,
    _prime_power_tails,
    aux_asymptotic_check,
    aux_ratio_scan,
    aux_sum,
    c_q,
    c_q_prerewrite,
    check_cq_forms,
    check_h_caps,
    check_prime_tail,
    constant_A,
    gq_constants,
    h_linear,
    h_q,
    h_twothirds,
    j1_star,
    j5_star,
    local_ratio,
    prime_tail_bound,
    universal_log_sum,
    weight_value,
)
from mulcm.sieve import primes_upto


def test_prime_tail_spec_example():
    # f(t) = 1/t^2 at P = 1e7 in strong mode: about 1.01e-7.
    bound = prime_tail_bound(lambda t: t ** -2, 1e7, mode="strong",
                             integral=1e-7)
    assert bound == pytest.approx(1.003e-7, rel=1e-3)
    assert bound < 1.01e-7


def test_prime_tail_mode_preconditions():
    with pytest.raises(ValueError):
        prime_tail_bound(lambda t: t ** -2, 1e6, mode="strong")
    with pytest.raises(ValueError):
        prime_tail_bound(lambda t: t ** -2, 1.0, mode="weak")
    with pytest.raises(ValueError):
        prime_tail_bound(lambda t: t ** -2, 10.0, mode="nope")


@pytest.mark.parametrize("a", [1.5, 5.0 / 3.0, 2.0])
def test_prime_tail_monotone_in_P(a):
    f = lambda t: t ** -a
    grid = [10.0, 100.0, 1e3, 1e4, 1e5, 1e6]
    bounds = [prime_tail_bound(f, P, mode="weak",
                               integral=P ** (1 - a) / (a - 1)) for P in grid]
    assert all(x > y for x, y in zip(bounds, bounds[1:]))


def test_prime_tail_desk_validation():
    rep = check_prime_tail(cutoff=3_000_000)
    assert rep.passed, rep.summary_line()


def test_constant_A_cross_cutoff():
    # Enclosures at different cutoffs must overlap, and the coarse one must
    # contain the deep frozen enclosure.
    coarse = constant_A(50_000)
    assert coarse.lo <= A_DEEP.lo and A_DEEP.hi <= coarse.hi
    finer = constant_A(500_000)
    assert finer.lo <= A_DEEP.lo and A_DEEP.hi <= finer.hi
    assert finer.width < coarse.width


def test_universal_log_sum_cross_cutoff():
    coarse = universal_log_sum(200_000)
    fine = universal_log_sum(1_000_000)
    # the coarse enclosure contains every value of the finer one
    assert coarse.lo <= fine.lo and fine.hi <= coarse.hi


def test_cq_forms_cross_check():
    rep = check_cq_forms()
    assert rep.passed, rep.summary_line()


def test_cq_known_structure():
    base = c_q(1)
    # adding the local term for p = 2 shifts by (2-1) log 2 / (4+2-1)
    assert c_q(2) - base == pytest.approx(math.log(2) / 5.0, abs=1e-12)
    enc = c_q_prerewrite(1)
    assert enc.lo <= base <= enc.hi + enc.width


def test_h_q_and_local_ratio():
    assert local_ratio(1) == 1.0
    assert local_ratio(2) == pytest.approx(4.0 / 5.0)
    h2 = h_q(2)
    assert h2.mid == pytest.approx(A_DEEP.mid * 0.8, rel=1e-12)
    hq, cq = gq_constants(6)
    assert hq.mid == pytest.approx(A_DEEP.mid * local_ratio(6), rel=1e-12)
    assert cq == pytest.approx(c_q(6))
    with pytest.raises(ValueError):
        h_q(4)  # not squarefree


def test_weights():
    assert weight_value("g0^2", 2.0) == pytest.approx(1.5)
    assert weight_value("g0*g1", 2.0) == pytest.approx(math.sqrt(1.5) * 2.06)
    assert weight_value("g1^2", 2.0) == pytest.approx(2.06 ** 2)


def test_aux_sum_small():
    assert aux_sum("g0^2", 0) == 0.0
    assert aux_sum("g0^2", 1) == pytest.approx(1.0)
    assert aux_sum("g0^2", 2) == pytest.approx(1.75)  # 1 + (1/2) * 1.5


def test_aux_ratio_argmaxes():
    for key, argmax, cap in (("g0^2", 42, 2.07), ("g0*g1", 7, 1.60),
                             ("g1^2", 3, 1.57)):
        rep = aux_ratio_scan(key, 100_000)
        assert rep.passed, rep.summary_line()
        assert rep.worst_arg == argmax
        assert rep.worst_ratio <= 1.0


def test_aux_asymptotic_desk():
    for key in ("g0^2", "g0*g1", "g1^2"):
        rep = aux_asymptotic_check(key, 200_000)
        assert rep.passed, rep.summary_line()


def test_h_linear_cross_cutoff():
    a = h_linear("g0^2", 200_000)
    b = h_linear("g0^2", 400_000)
    # enclosures of the same limit value must intersect
    assert max(a.lo, b.lo) <= min(a.hi, b.hi)


def test_h_twothirds_cross_cutoff():
    a = h_twothirds("g1^2", 200_000)
    b = h_twothirds("g1^2", 400_000)
    assert max(a.lo, b.lo) <= min(a.hi, b.hi)
    # the deeper cutoff must not widen the bracket
    assert b.width <= a.width


def test_h_local_expansion_encloses_truth():
    # The tail expansion must bound the true local term pointwise: at
    # sampled primes past the cutoff, |a(p) - sum of term monomials| stays
    # inside the remainder monomials.  Checked in 50-digit arithmetic since
    # the direct float evaluation of (p-1)G - p loses more to cancellation
    # than the remainder bound itself.
    p_min = 100_000.0
    all_p = primes_upto(400_000)
    samples = [int(all_p[np.searchsorted(all_p, t)])
               for t in (100_000, 101_000, 250_000)]
    with mp.workdps(50):
        xi = mp.mpf(XI)
        for key in ("g0^2", "g0*g1", "g1^2"):
            for w_shifts, extra in (H1_SHAPE, H23_SHAPE):
                terms, rems = _local_monomials(key, w_shifts, extra, p_min)
                for p in samples:
                    pm = mp.mpf(p)
                    sp = mp.sqrt(pm)
                    g0 = sp / (sp - 1)
                    g1 = pm ** xi / (pm ** xi - 1)
                    G = {"g0^2": g0 * g0, "g0*g1": g0 * g1,
                         "g1^2": g1 * g1}[key]
                    W = (pm - 1) * G - pm
                    truth = mp.fsum(
                        [c * W * pm ** (-(mp.mpf(s[0]) / 6 + s[1] * xi))
                         for c, s in w_shifts]
                        + [c * pm ** (-(mp.mpf(e[0]) / 6 + e[1] * xi))
                           for c, e in extra])
                    series = mp.fsum(
                        c * pm ** (-(mp.mpf(e[0]) / 6 + e[1] * xi))
                        for e, c in terms.items())
                    rem = mp.fsum(
                        r * pm ** (-(mp.mpf(e[0]) / 6 + e[1] * xi))
                        for r, e in rems)
                    assert abs(truth - series) <= rem, (key, w_shifts, p)


def test_prime_power_tail_cross_cutoff():
    # Z(e, P1) - Z(e, P2) must equal the sieved sum over P1 < p <= P2.
    ps1 = primes_upto(100_000).astype(np.float64)
    ps2 = primes_upto(200_000).astype(np.float64)
    for e in ((7, 0), (9, 0), (10, 1)):
        e_f = e[0] / 6.0 + e[1] * XI
        z1 = _prime_power_tails([e], 100_000, ps1)[e]
        z2 = _prime_power_tails([e], 200_000, ps2)[e]
        mid = math.fsum(np.power(ps2[ps2 > 100_000.0], -e_f).tolist())
        assert z1.lo - z2.hi - 1e-12 <= mid <= z1.hi - z2.lo + 1e-12


def test_h_caps_all_decided():
    # Every enclosure must land entirely on one side of its cap, and the
    # only one above is H(1) for the g1^2 weight.
    reports = check_h_caps(150_000)
    above = []
    for rep in reports:
        enc = rep.details["enclosure"]
        assert enc["hi"] < rep.bound or enc["lo"] > rep.bound, rep.name
        if enc["lo"] > rep.bound:
            above.append(rep.name)
        assert rep.passed == (enc["hi"] < rep.bound)
    assert above == ["h-cap-H1(g1^2)"]


def _is_squarefree(n: int) -> bool:
    from mulcm.sieve import factorize
    return all(e == 1 for _, e in factorize(n))


_squarefree = st.integers(min_value=1, max_value=10 ** 5).filter(_is_squarefree)


@given(q1=_squarefree, q2=_squarefree)
@settings(max_examples=60, deadline=None)
def test_j_star_multiplicative(q1, q2):
    if math.gcd(q1, q2) != 1:
        return
    assert j1_star(q1 * q2) == pytest.approx(j1_star(q1) * j1_star(q2),
                                             rel=1e-12)
    assert j5_star(q1 * q2) == pytest.approx(j5_star(q1) * j5_star(q2),
                                             rel=1e-12)


def test_p0_matches_cubic_tail_sum():
    # P0 = prod_p (1 - 1/p^2 + 1/p^3) is also sum_k mu(k) phi(k)/k^3.
    from mulcm.gstar import aux_k_sum
    s = aux_k_sum(1.0, 1)
    assert s.lo - 1e-9 <= P0_DEEP.mid <= s.hi + 1e-9
