"""Degeneracy-compressed spectra of P_z and the polarised product state.

Eigenvalues are never listed one by one. A spectrum is a short list of
blocks ``(n, value, mult)``, one per magnetic quantum number, with the value
held as a :class:`SignedLog` so that eigenvalues like 2^-N survive at
N = 10^4, and the multiplicity held as an exact ``int``.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy.special import logsumexp

from mqcbound.combinatorics import binomial_row

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class SignedLog:
    """Real number stored as ``sign * exp(log_mag)``.

    ``sign`` is -1, 0 or +1; ``log_mag`` is ignored (and kept at -inf) for
    zero.
    """

    sign: int
    log_mag: float = _NEG_INF

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign}")
        if self.sign and self.log_mag == _NEG_INF:
            object.__setattr__(self, "sign", 0)

    @classmethod
    def zero(cls) -> SignedLog:
        return cls(0)

    @classmethod
    def from_float(cls, x: float) -> SignedLog:
        if x == 0:
            return cls(0)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def from_int(cls, k: int) -> SignedLog:
        # math.log accepts arbitrarily large ints
        if k == 0:
            return cls(0)
        return cls(1 if k > 0 else -1, math.log(abs(k)))

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_mag)
        except OverflowError:
            return self.sign * math.inf

    def __neg__(self) -> SignedLog:
        return SignedLog(-self.sign, self.log_mag)

    def __mul__(self, other: SignedLog) -> SignedLog:
        if self.sign == 0 or other.sign == 0:
            return SignedLog(0)
        return SignedLog(self.sign * other.sign, self.log_mag + other.log_mag)

    def __truediv__(self, other: SignedLog) -> SignedLog:
        if other.sign == 0:
            raise ZeroDivisionError("division by a SignedLog zero")
        if self.sign == 0:
            return SignedLog(0)
        return SignedLog(self.sign * other.sign, self.log_mag - other.log_mag)

    def __add__(self, other: SignedLog) -> SignedLog:
        return signed_sum((self, other))

    def __sub__(self, other: SignedLog) -> SignedLog:
        return signed_sum((self, -other))

    def sqrt(self) -> SignedLog:
        if self.sign < 0:
            raise ValueError("square root of a negative SignedLog")
        return SignedLog(self.sign, 0.5 * self.log_mag)

    def square(self) -> SignedLog:
        return self * self

    def scale(self, k: int) -> SignedLog:
        """Multiply by an exact integer such as a multiplicity."""
        return self * SignedLog.from_int(k)

    def log(self) -> float:
        """Natural log of the value; -inf for zero."""
        if self.sign < 0:
            raise ValueError("log of a negative SignedLog")
        return self.log_mag if self.sign else _NEG_INF


def signed_sum(terms: Iterable[SignedLog]) -> SignedLog:
    """Sum of SignedLog terms by a sign-aware log-sum-exp."""
    terms = [t for t in terms if t.sign]
    if not terms:
        return SignedLog(0)
    top = max(t.log_mag for t in terms)
    pos = math.fsum(math.exp(t.log_mag - top) for t in terms if t.sign > 0)
    neg = math.fsum(math.exp(t.log_mag - top) for t in terms if t.sign < 0)
    if pos == neg:
        return SignedLog(0)
    if pos > neg:
        return SignedLog(1, top + math.log(pos - neg))
    return SignedLog(-1, top + math.log(neg - pos))


def log_difference(a: SignedLog, b: SignedLog) -> SignedLog:
    """a - b, evaluated with log1p so close values keep their precision."""
    if a.sign >= 0 and b.sign >= 0:
        if b.sign == 0:
            return a
        if a.sign == 0:
            return -b
        if a.log_mag == b.log_mag:
            return SignedLog(0)
        if a.log_mag > b.log_mag:
            return SignedLog(1, a.log_mag + math.log1p(-math.exp(b.log_mag - a.log_mag)))
        return SignedLog(-1, b.log_mag + math.log1p(-math.exp(a.log_mag - b.log_mag)))
    return a - b


@dataclass(frozen=True)
class Block:
    n: float  # magnetic quantum number, integral or half-integral
    value: SignedLog
    mult: int


@dataclass(frozen=True, eq=False)
class DegenerateSpectrum:
    """Blocks sorted ascending in n, plus numpy mirrors used for accumulation."""

    N: int
    blocks: tuple[Block, ...]

    def __post_init__(self):
        signs = np.array([b.value.sign for b in self.blocks], dtype=float)
        logs = np.array([b.value.log_mag if b.value.sign else -np.inf for b in self.blocks])
        object.__setattr__(self, "_signs", signs)
        object.__setattr__(self, "_logs", logs)
        binomial = len(self.blocks) == self.N + 1 and all(
            b.mult == g for b, g in zip(self.blocks, binomial_row(self.N))
        )
        object.__setattr__(self, "_binomial", binomial)

    @property
    def dim(self) -> int:
        return 1 << self.N

    def values(self) -> list[float]:
        """Every eigenvalue, ascending. Only sensible for small N."""
        out = []
        for b in self.blocks:
            out.extend([float(b.value)] * b.mult)
        return out


@lru_cache(maxsize=64)
def _cumulative(N: int) -> tuple[list[int], np.ndarray]:
    """Running multiplicity totals from the n = -N/2 end and ln g per block."""
    row = binomial_row(N)
    return list(itertools.accumulate(row)), np.array([math.log(g) for g in row])


@lru_cache(maxsize=256)
def sigma_spectrum(N: int, p: float) -> DegenerateSpectrum:
    """Spectrum of the product state (1/2 + p I_z)^(x)N.

    Block n carries ((1+p)/2)^(N/2+n) ((1-p)/2)^(N/2-n).
    """
    if N < 1:
        raise ValueError(f"spin count must be >= 1, got {N}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"polarisation must lie in [0, 1], got {p}")
    row = binomial_row(N)
    log_up = math.log((1 + p) / 2)
    log_down = math.log((1 - p) / 2) if p < 1 else None
    blocks = []
    for up in range(N + 1):
        down = N - up
        if log_down is None and down:
            value = SignedLog(0)
        else:
            value = SignedLog(1, up * log_up + (down * log_down if down else 0.0))
        blocks.append(Block((2 * up - N) / 2, value, row[up]))
    return DegenerateSpectrum(N, tuple(blocks))


@lru_cache(maxsize=256)
def pz_spectrum(N: int) -> DegenerateSpectrum:
    """Spectrum of P_z = (2/N) I_z: value 2n/N with multiplicity g_n."""
    if N < 1:
        raise ValueError(f"spin count must be >= 1, got {N}")
    row = binomial_row(N)
    blocks = tuple(
        Block((2 * up - N) / 2, SignedLog.from_float((2 * up - N) / N), row[up])
        for up in range(N + 1)
    )
    return DegenerateSpectrum(N, blocks)


def _binomial_blocks(spec: DegenerateSpectrum) -> bool:
    return spec._binomial


@dataclass(frozen=True)
class Taken:
    n: float
    value: SignedLog
    count: int


@dataclass(frozen=True)
class ExtremeSelection:
    r: int
    top_blocks: tuple[Taken, ...]  # from the largest eigenvalue down
    bottom_blocks: tuple[Taken, ...]  # from the smallest eigenvalue up


def _walk_length(spec: DegenerateSpectrum, r: int) -> tuple[int, int]:
    """(number of blocks touched, count taken from the last one) for a walk
    from the n = -N/2 end; by mirror symmetry the same for the top walk."""
    if r < 1 or r > spec.dim:
        raise ValueError(f"need 1 <= r <= 2^N = {spec.dim}, got r={r}")
    cum, _ = _cumulative(spec.N)
    k = bisect.bisect_left(cum, r)  # blocks 0..k-1 full up to cum[k-1] < r <= cum[k]
    partial = r - (cum[k - 1] if k else 0)
    return k + 1, partial


def _take(blocks, r: int) -> tuple[Taken, ...]:
    out = []
    left = r
    for b in blocks:
        if left <= 0:
            break
        k = min(b.mult, left)
        out.append(Taken(b.n, b.value, k))
        left -= k
    return tuple(out)


def select_extremes(spec: DegenerateSpectrum, r: int) -> ExtremeSelection:
    """The r largest and the r smallest eigenvalues, as partial blocks.

    The two sides are chosen independently and may overlap when 2r > 2^N.
    """
    if r < 1 or r > spec.dim:
        raise ValueError(f"need 1 <= r <= 2^N = {spec.dim}, got r={r}")
    return ExtremeSelection(
        r,
        _take(reversed(spec.blocks), r),
        _take(spec.blocks, r),
    )


def _window_log_counts(spec: DegenerateSpectrum, r: int) -> np.ndarray:
    """ln(count taken) for the first blocks of a walk of length r."""
    n_blocks, partial = _walk_length(spec, r)
    _, log_g = _cumulative(spec.N)
    counts = log_g[:n_blocks].copy()
    counts[-1] = math.log(partial)
    return counts


def _signed_lse(signs: np.ndarray, logs: np.ndarray) -> SignedLog:
    mask = signs != 0
    if not mask.any():
        return SignedLog(0)
    value, sign = logsumexp(logs[mask], b=signs[mask], return_sign=True)
    if sign == 0 or not np.isfinite(value):
        return SignedLog(0)
    return SignedLog(int(sign), float(value))


def _sub_arrays(sa, la, sb, lb):
    """Elementwise (sign, log|.|) of a - b for signed-log arrays."""
    sb = -sb
    same = sa * sb > 0
    hi = np.maximum(la, lb)
    lo = np.minimum(la, lb)
    with np.errstate(invalid="ignore", divide="ignore"):
        gap = np.where(np.isfinite(hi), lo - hi, -np.inf)
        mag = np.where(same, hi + np.log1p(np.exp(gap)), hi + np.log1p(-np.exp(gap)))
    sign = np.where(la >= lb, sa, sb)
    sign = np.where(sa == 0, sb, np.where(sb == 0, sa, sign))
    mag = np.where(sa == 0, lb, np.where(sb == 0, la, mag))
    cancel = (~same) & (la == lb) & (sa != 0) & (sb != 0)
    sign = np.where(cancel, 0.0, sign)
    mag = np.where(sign == 0, -np.inf, mag)
    return sign, mag


def paired_diff_norm(spec: DegenerateSpectrum, r: int) -> SignedLog:
    """|| Lambda_up_r - Lambda_down_r ||_2 of the spectrum.

    The i-th largest eigenvalue is paired with the i-th smallest. With
    mirror-symmetric (binomial) multiplicities this pairs block n of the top
    walk with block -n of the bottom walk, count for count.
    """
    if not _binomial_blocks(spec):
        raise NotImplementedError("block pairing needs g_n = C(N, N/2+n) multiplicities")
    log_counts = _window_log_counts(spec, r)
    k = len(log_counts)
    d = len(spec.blocks)
    top = np.arange(d - 1, d - 1 - k, -1)
    sign, mag = _sub_arrays(spec._signs[top], spec._logs[top], spec._signs[:k], spec._logs[:k])
    return _signed_lse(sign * sign, 2 * mag + log_counts).sqrt()


def aligned_dot(spec_a: DegenerateSpectrum, spec_b: DegenerateSpectrum, r: int) -> SignedLog:
    """Lambda_up_r(A) . Lambda_up_r(B) + Lambda_down_r(A) . Lambda_down_r(B).

    Both spectra must be sorted the same way by n, as P_z and sigma_p are
    for p >= 0.
    """
    if spec_a.N != spec_b.N:
        raise ValueError(f"spectra of different sizes: N={spec_a.N} vs N={spec_b.N}")
    if not (_binomial_blocks(spec_a) and _binomial_blocks(spec_b)):
        raise NotImplementedError("aligned_dot needs binomial block multiplicities")
    log_counts = _window_log_counts(spec_a, r)
    k = len(log_counts)
    d = len(spec_a.blocks)
    top = np.arange(d - 1, d - 1 - k, -1)
    bottom = np.arange(k)
    signs = np.concatenate([spec_a._signs[top] * spec_b._signs[top], spec_a._signs[bottom] * spec_b._signs[bottom]])
    logs = np.concatenate([
        spec_a._logs[top] + spec_b._logs[top] + log_counts,
        spec_a._logs[bottom] + spec_b._logs[bottom] + log_counts,
    ])
    return _signed_lse(signs, logs)
