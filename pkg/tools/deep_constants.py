"""Regenerate the frozen deep enclosures in mulcm.products.

Computes two-sided brackets for

    A  = prod_p (1 - 2/p^2 + 1/p^3)
    P0 = prod_p (1 - 1/p^2 + 1/p^3)

over all primes up to 1e8, with the tail past the cutoff bounded through
the prime tail estimate applied to h(t) = c / (t^2 log t) (c = 2 or 1,
since |log(1+f(p))| <= c/p^2 there) and generous float slack on top.

Takes a few minutes and ~1.5 GB.  Prints bracket lines to paste into
products.py (A_DEEP, P0_DEEP).  Run:  python tools/deep_constants.py
"""

import math

import mpmath as mp
import numpy as np

CUTOFF = 10 ** 8

mp.mp.dps = 30


def main() -> None:
    n = CUTOFF
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p:: p] = False
    primes = np.nonzero(sieve)[0].astype(np.float64)
    del sieve
    print(f"primes up to {n:g}: {len(primes)}")

    for tag, f, c in (
        ("A_DEEP", lambda p: -2.0 / (p * p) + 1.0 / (p * p * p), 2.0),
        ("P0_DEEP", lambda p: -1.0 / (p * p) + 1.0 / (p * p * p), 1.0),
    ):
        log_terms = np.log1p(f(primes))
        log_partial = math.fsum(log_terms.tolist())
        partial = math.exp(log_partial)

        # Tail: every local term is negative with |log(1 + f(p))| below
        # c/p^2 (1 + tiny), so the omitted factor lies in [exp(-ub), 1].
        eps = mp.mpf(1) / 914
        P = mp.mpf(n)
        h = lambda t: c / (t * t * mp.log(t))
        integral = mp.quad(h, [P, 10 * P, 1000 * P, mp.inf])
        ub = float((1 + eps) * integral + eps * P * h(P)
                   + P * h(P) / (5 * mp.log(P) ** 2))

        # Float slack: fsum is exact to < 1 ulp of the total; per-term
        # log1p error is bounded by machine epsilon times the term count
        # weighted by term size (sum |term| < 1); exp adds one rounding.
        slack = ub * (1 + 1e-6) + 5e-15
        lo = partial * math.exp(-slack)
        hi = partial * math.exp(1e-15)
        print(f"{tag} = CertifiedValue({lo!r}, {hi!r})  # width {hi - lo:.2e}")


if __name__ == "__main__":
    main()
