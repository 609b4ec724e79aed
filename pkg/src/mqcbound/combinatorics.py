"""Exact counting: binomials, Zeeman degeneracies and maximal ranks of
coherence-order-q operators.

Every count is a plain Python ``int`` so comparisons of cumulative
multiplicities downstream stay exact at any N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache


def binomial_exact(n: int, k: int) -> int:
    """C(n, k), with zero for k outside [0, n]."""
    if n < 0:
        raise ValueError(f"binomial needs n >= 0, got {n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


@lru_cache(maxsize=64)
def binomial_row(n: int) -> tuple[int, ...]:
    """The full Pascal row (C(n,0), ..., C(n,n))."""
    if n < 0:
        raise ValueError(f"binomial needs n >= 0, got {n}")
    row = [1] * (n + 1)
    for k in range(n):
        row[k + 1] = row[k] * (n - k) // (k + 1)
    return tuple(row)


def _up_count(N: int, n) -> int:
    """Number of up spins N/2 + n, checking that it is integral."""
    up = Fraction(N, 2) + Fraction(n)
    if up.denominator != 1:
        raise ValueError(f"N/2 + n must be integral (N={N}, n={n})")
    return int(up)


def degeneracy(N: int, n) -> int:
    """Dimension g_n of the I_z eigenspace with magnetic quantum number n.

    ``n`` may be an int, a half-integer float or a Fraction.
    """
    if N < 0:
        raise ValueError(f"spin count must be >= 0, got {N}")
    up = _up_count(N, n)
    return binomial_exact(N, up)


def _check_order(N: int, q: int) -> None:
    if N < 1:
        raise ValueError(f"spin count must be >= 1, got {N}")
    if not 1 <= q <= N:
        raise ValueError(f"coherence order must satisfy 1 <= q <= N, got q={q}, N={N}")


@lru_cache(maxsize=65536)
def max_rank(N: int, q: int) -> int:
    """Largest matrix rank R^N_q of any operator with coherence order +-q.

    The manifolds split into q Zeeman chains, one per top magnetisation
    N/2 - j; along a chain the coherence-q operator is bipartite between
    alternate manifolds, so each chain contributes twice the smaller of the
    two alternating degeneracy sums.
    """
    _check_order(N, q)
    row = binomial_row(N)
    total = 0
    for j in range(q):
        # slicing stops once the binomial argument leaves [0, N]
        even = sum(row[N - j :: -2 * q]) if N - j >= 0 else 0
        odd = sum(row[N - j - q :: -2 * q]) if N - j - q >= 0 else 0
        total += min(even, odd)
    return 2 * total


def max_rank_even(N: int, q: int) -> int:
    """R^N_q from the chain form indexed by offsets k in (-q/2, q/2].

    Only defined for even N and even q.
    """
    if N % 2 or q % 2:
        raise ValueError(f"max_rank_even needs even N and even q, got N={N}, q={q}")
    _check_order(N, q)
    half = N // 2
    row = binomial_row(N)
    total = 0
    for k in range(-q // 2 + 1, q // 2 + 1):
        sums = [0, 0]
        # j ranges over every integer with |jq + k| <= N/2
        j_lo = -((half + k) // q)
        j_hi = (half - k) // q
        for j in range(j_lo, j_hi + 1):
            sums[j % 2] += row[half + j * q + k]
        total += min(sums)
    return 2 * total


@dataclass
class RankEntry:
    q: int
    rank: int
    half_rank: int


@dataclass
class RankReport:
    N: int
    entries: list[RankEntry] = field(default_factory=list)


def rank_report(N: int) -> RankReport:
    """R^N_q and r = R^N_q / 2 for every 1 <= q <= N."""
    report = RankReport(N)
    for q in range(1, N + 1):
        R = max_rank(N, q)
        report.entries.append(RankEntry(q, R, R // 2))
    return report
