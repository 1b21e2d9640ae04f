"""Weighted Mertens sums m(y) = sum_{n<=y} mu(n)/n and their envelopes.

Three layers:

* direct evaluation: exact rationals for small y, cached float cumsums for
  scan-scale y, and the coprime variants m_q;
* MertensTable: residue-class tables mod a small modulus with a documented
  binary checkpoint format, so long runs can persist and reload their state;
* envelope machinery: the square-root and logarithmic decay bounds, their
  combination, and the coprime generalization with multiplicative inflation
  factors, each checkable against direct evaluation on a finite range.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .numutil import check_allocation
from .report import BoundReport
from .sieve import mu_upto, prime_divisors, sieve_range

# Exponent for the logarithmic-regime interpolation envelope.
XI = 1.0 - 1.0 / (12.0 * math.log(10.0))


@dataclass(frozen=True)
class EnvelopeParams:
    """Constants of the decay envelopes for m and for the mod-2 variant m_2.

    sqrt_c: |m(x)| <= sqrt(sqrt_c / x) on [1, sqrt_range].
    log_c:  |m(x)| <= log_c / log x for x >= log_from.
    deep:   scale beyond which the logarithmic term enters mixed envelopes.
    """

    sqrt_c: float
    sqrt_range: float
    log_c: float
    log_from: int
    deep: float = 1e12


M_PARAMS = EnvelopeParams(sqrt_c=2.0, sqrt_range=1e14, log_c=0.0144, log_from=463421)
M2_PARAMS = EnvelopeParams(sqrt_c=3.0, sqrt_range=1e12, log_c=0.0296, log_from=5379)

_EXACT_LIMIT = 100_000

# Cached float cumulative sums of mu(n)/n, grown on demand.
_mu_over_n_cum: np.ndarray | None = None


def _cum_to(n: int) -> np.ndarray:
    global _mu_over_n_cum
    cur = _mu_over_n_cum
    if cur is None or len(cur) <= n:
        size = max(n + 1, 1 << 16)
        if cur is not None:
            size = max(size, 2 * len(cur))
        check_allocation(size * 9, f"mertens cumsum to {size}")
        mu = mu_upto(size - 1)
        vals = np.zeros(size, dtype=np.float64)
        vals[1:] = mu[1:].astype(np.float64) / np.arange(1, size, dtype=np.float64)
        cur = np.cumsum(vals)
        _mu_over_n_cum = cur
    return cur


def m(y: float) -> float:
    """m(y) = sum_{n <= y} mu(n)/n, as a float.  m(y) = m(floor(y))."""
    t = int(math.floor(y))
    if t < 1:
        return 0.0
    return float(_cum_to(t)[t])


def m_exact(y) -> Fraction:
    """Exact rational m(y) for y <= 100000 (guard against runaway cost)."""
    t = int(math.floor(y))
    if t < 1:
        return Fraction(0)
    if t > _EXACT_LIMIT:
        raise ValueError(f"m_exact limited to y <= {_EXACT_LIMIT}, got {y}")
    mu = mu_upto(t)
    total = Fraction(0)
    for n in range(1, t + 1):
        v = int(mu[n])
        if v:
            total += Fraction(v, n)
    return total


def m_q(y: float, q: int) -> float:
    """m_q(y) = sum_{n <= y, gcd(n, q) = 1} mu(n)/n, as a float."""
    t = int(math.floor(y))
    if t < 1:
        return 0.0
    block = sieve_range(1, t)
    n = np.arange(1, t + 1, dtype=np.float64)
    keep = np.ones(t, dtype=bool)
    for p in prime_divisors(q):
        keep[p - 1:: p] = False
    terms = np.where(keep, block.mu.astype(np.float64) / n, 0.0)
    return float(np.sum(terms))


def m_q_exact(y, q: int) -> Fraction:
    """Exact rational m_q(y) for y <= 100000."""
    t = int(math.floor(y))
    if t < 1:
        return Fraction(0)
    if t > _EXACT_LIMIT:
        raise ValueError(f"m_q_exact limited to y <= {_EXACT_LIMIT}, got {y}")
    mu = mu_upto(t)
    total = Fraction(0)
    for n in range(1, t + 1):
        v = int(mu[n])
        if v and math.gcd(n, q) == 1:
            total += Fraction(v, n)
    return total


# ----------------------------------------------------------------------
# Residue-class tables with a binary checkpoint format.

_MAGIC = b"MULCMMT1"
_VERSION = 1


@dataclass
class MertensTable:
    """Cumulative sums m(t; u, m0) = sum_{n <= t, n = u mod m0} mu(n)/n.

    rows has shape (m0, limit + 1); rows[u][t] is m(t; u, m0).  The full sum
    and any coprime restriction m_q with rad(q) | m0 are linear combinations
    of rows, so one table serves every modulus dividing m0.
    """

    m0: int
    limit: int
    rows: np.ndarray  # float64, shape (m0, limit + 1)

    def residue_value(self, t: float, u: int) -> float:
        k = int(math.floor(t))
        if k < 0:
            return 0.0
        k = min(k, self.limit)
        return float(self.rows[u % self.m0][k])

    def coprime_value(self, y: float) -> float:
        """m_{m0}(y): the sum restricted to n coprime to m0."""
        k = int(math.floor(y))
        if k < 1:
            return 0.0
        if k > self.limit:
            raise ValueError(f"table limit {self.limit} < {k}")
        total = 0.0
        for u in range(self.m0):
            if math.gcd(u, self.m0) == 1:
                total += float(self.rows[u][k])
        return total

    def full_value(self, t: float) -> float:
        """Reconstruct m(t) from residue rows.

        Writing each squarefree n as a * b with a | rad(m0) and (b, m0) = 1
        gives m(t) = sum_{a | rad(m0)} mu(a)/a * m_{m0}(t/a).
        """
        k = int(math.floor(t))
        if k < 1:
            return 0.0
        if k > self.limit:
            raise ValueError(f"table limit {self.limit} < {k}")
        rad = 1
        for p in prime_divisors(self.m0):
            rad *= p
        divs = [d for d in range(1, rad + 1) if rad % d == 0]
        total = 0.0
        for a in divs:
            mu_a = _mu_small(a)
            if mu_a:
                total += mu_a / a * self.coprime_value(k // a)
        return total

    def save(self, path: str) -> None:
        """Write the binary checkpoint.

        Layout (little-endian): magic "MULCMMT1", u32 version, u32 m0,
        u64 limit, then m0 rows of (limit+1) float64 values, residue-major
        (row u first, each row indexed by t from 0).
        """
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<IIQ", _VERSION, self.m0, self.limit))
            fh.write(np.ascontiguousarray(self.rows, dtype="<f8").tobytes())

    @staticmethod
    def load(path: str) -> "MertensTable":
        with open(path, "rb") as fh:
            magic = fh.read(8)
            if magic != _MAGIC:
                raise ValueError(f"not a mertens table checkpoint: magic {magic!r}")
            version, m0, limit = struct.unpack("<IIQ", fh.read(16))
            if version != _VERSION:
                raise ValueError(f"unsupported table version {version}")
            count = m0 * (limit + 1)
            data = np.frombuffer(fh.read(count * 8), dtype="<f8")
            if data.size != count:
                raise ValueError("truncated mertens table checkpoint")
        rows = data.reshape(m0, limit + 1).astype(np.float64)
        return MertensTable(m0=m0, limit=int(limit), rows=rows)


def _mu_small(n: int) -> int:
    mu, d = 1, 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            mu = -mu
        d += 1
    if n > 1:
        mu = -mu
    return mu


def build_table(limit: int, m0: int = 6) -> MertensTable:
    """Build the residue-class table up to `limit` for modulus m0."""
    if limit < 1 or m0 < 1:
        raise ValueError("need limit >= 1 and m0 >= 1")
    check_allocation(m0 * (limit + 1) * 8 + limit * 9, f"mertens table {m0} x {limit}")
    mu = mu_upto(limit)
    n = np.arange(0, limit + 1, dtype=np.float64)
    n[0] = 1.0
    terms = mu.astype(np.float64) / n
    rows = np.zeros((m0, limit + 1), dtype=np.float64)
    for u in range(m0):
        sel = np.zeros(limit + 1, dtype=np.float64)
        first = u if u >= 1 else m0
        sel[first::m0] = terms[first::m0]
        rows[u] = np.cumsum(sel)
    return MertensTable(m0=m0, limit=limit, rows=rows)


# ----------------------------------------------------------------------
# Envelopes.

def check_envelope_sqrt(limit: int, q: int = 1) -> BoundReport:
    """Sweep the square-root envelope over all real x in [1, limit + 1).

    For q = 1 this is |m(x)| <= sqrt(2/x); for q = 2 the variant
    |m_2(x)| <= sqrt(3/x).  m is constant on [n, n+1), so the supremum over
    real x of |m(x)| sqrt(x) on that interval is |m(n)| sqrt(n+1).
    """
    if q == 1:
        params = M_PARAMS
        cum = _cum_to(limit)
    elif q == 2:
        params = M2_PARAMS
        mu = mu_upto(limit)
        vals = np.zeros(limit + 1, dtype=np.float64)
        idx = np.arange(1, limit + 1, 2)
        vals[idx] = mu[idx].astype(np.float64) / idx
        cum = np.cumsum(vals)
    else:
        raise ValueError("square-root envelope is stated for q in {1, 2}")
    n = np.arange(0, limit + 1, dtype=np.float64)
    n[0] = 1.0
    ratios = np.abs(cum[: limit + 1]) * np.sqrt(n + 1.0) / math.sqrt(params.sqrt_c)
    ratios[0] = 0.0
    worst = int(np.argmax(ratios))
    return BoundReport(
        name=f"mertens-sqrt-envelope(q={q})",
        domain=f"real x in [1, {limit + 1})",
        passed=bool(ratios[worst] <= 1.0 + 1e-12),
        worst_ratio=float(ratios[worst]),
        worst_arg=worst,
        bound=math.sqrt(params.sqrt_c),
        details={"form": f"|m(x)| * sqrt(x) <= sqrt({params.sqrt_c})",
                 "claimed_range": params.sqrt_range},
    )


def check_envelope_log(limit: int, q: int = 1) -> BoundReport:
    """Sweep the logarithmic envelope |m(x)| <= c / log x for x >= threshold."""
    if q == 1:
        params = M_PARAMS
        cum = _cum_to(limit)
    elif q == 2:
        params = M2_PARAMS
        mu = mu_upto(limit)
        vals = np.zeros(limit + 1, dtype=np.float64)
        idx = np.arange(1, limit + 1, 2)
        vals[idx] = mu[idx].astype(np.float64) / idx
        cum = np.cumsum(vals)
    else:
        raise ValueError("log envelope is stated for q in {1, 2}")
    start = params.log_from
    if limit < start:
        raise ValueError(f"limit {limit} below threshold {start}")
    n = np.arange(0, limit + 1, dtype=np.float64)
    n[0] = 1.0
    # sup over [n, n+1) uses log(n+1), since 1/log x decreases.
    ratios = np.abs(cum[: limit + 1]) * np.log(n + 1.0) / params.log_c
    ratios[:start] = 0.0
    worst = int(np.argmax(ratios))
    return BoundReport(
        name=f"mertens-log-envelope(q={q})",
        domain=f"real x in [{start}, {limit + 1})",
        passed=bool(ratios[worst] <= 1.0 + 1e-12),
        worst_ratio=float(ratios[worst]),
        worst_arg=worst,
        bound=params.log_c,
        details={"form": f"|m(x)| * log(x) <= {params.log_c} for x >= {start}"},
    )


def envelope_mixed(t: float, y: float, q: int = 1) -> float:
    """Envelope for |m(t)| valid for 1 <= t <= y, blending both regimes.

    sqrt(c0/t) plus, once y reaches the deep threshold, a term that
    interpolates the logarithmic bound from scale y down to t with exponent
    1 - XI: c1 * y^(1-XI) / (log(y) * t^(1-XI)).
    """
    params = M_PARAMS if q == 1 else M2_PARAMS
    if q not in (1, 2):
        raise ValueError("mixed envelope is stated for q in {1, 2}")
    if t < 1 or t > y:
        raise ValueError("need 1 <= t <= y")
    val = math.sqrt(params.sqrt_c / t)
    if y >= params.deep:
        val += params.log_c * (y / t) ** (1.0 - XI) / math.log(y)
    return val


def g0_factor(d: int) -> float:
    """Multiplicative inflation for the sqrt envelope under coprimality.

    g0(2) = sqrt(3/2); g0(p) = sqrt(p)/(sqrt(p) - 1) for odd p; g0(1) = 1.
    Defined on squarefree d.
    """
    val = 1.0
    for p in prime_divisors(d):
        if p == 2:
            val *= math.sqrt(1.5)
        else:
            sp = math.sqrt(p)
            val *= sp / (sp - 1.0)
    return val


def g1_factor(d: int) -> float:
    """Multiplicative inflation for the log envelope under coprimality.

    g1(2) = 2.06; g1(p) = p^XI / (p^XI - 1) for odd p; g1(1) = 1.
    """
    val = 1.0
    for p in prime_divisors(d):
        if p == 2:
            val *= 2.06
        else:
            pe = p ** XI
            val *= pe / (pe - 1.0)
    return val


def envelope_coprime(d: int, y: float) -> float:
    """Envelope for |m_d(y)|: g0(d) sqrt(2/y) + 0.0144 g1(d) [y >= 1e12] / log y."""
    if y < 1:
        raise ValueError("need y >= 1")
    val = g0_factor(d) * math.sqrt(2.0 / y)
    if y >= M_PARAMS.deep:
        val += M_PARAMS.log_c * g1_factor(d) / math.log(y)
    return val


def check_envelope_coprime(d_limit: int = 100, y_limit: int = 10_000) -> BoundReport:
    """Desk check of the coprime envelope on squarefree d and moderate y.

    Compares |m_d(y)| directly against envelope_coprime(d, y) for every
    squarefree d <= d_limit and every integer y <= y_limit.
    """
    block = sieve_range(1, y_limit)
    n = np.arange(1, y_limit + 1, dtype=np.float64)
    base_terms = block.mu.astype(np.float64) / n
    worst = (0.0, None)
    for d in range(1, d_limit + 1):
        ps = prime_divisors(d)
        if any(d % (p * p) == 0 for p in ps):
            continue
        keep = np.ones(y_limit, dtype=bool)
        for p in ps:
            keep[p - 1:: p] = False
        md = np.cumsum(np.where(keep, base_terms, 0.0))
        g0d = g0_factor(d)
        ratios = np.abs(md) / (g0d * np.sqrt(2.0 / n))
        j = int(np.argmax(ratios))
        if ratios[j] > worst[0]:
            worst = (float(ratios[j]), (d, j + 1))
    return BoundReport(
        name="mertens-coprime-envelope",
        domain=f"squarefree d <= {d_limit}, integer y <= {y_limit}",
        passed=worst[0] <= 1.0 + 1e-12,
        worst_ratio=worst[0],
        worst_arg=worst[1],
        bound=1.0,
        details={"form": "|m_d(y)| <= g0(d) sqrt(2/y) + 0.0144 g1(d) [y>=1e12]/log y"},
    )
