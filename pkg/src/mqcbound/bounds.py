"""Upper and lower bounds on the maximal observable MQC intensity m^N_q(p),
their closed forms and asymptotics, and the transition analysis built on
them.

Everything is evaluated from degenerate block spectra, so a full sweep at
N = 10^4 costs O(N) block operations per coherence order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

from mqcbound.combinatorics import binomial_row, max_rank
from mqcbound.spectra import (
    SignedLog,
    aligned_dot,
    log_difference,
    paired_diff_norm,
    pz_spectrum,
    sigma_spectrum,
)

log = logging.getLogger(__name__)

_LN2 = math.log(2.0)
_NEG_INF = float("-inf")


@dataclass(frozen=True)
class BoundResult:
    N: int
    q: int
    p: float
    r: int
    lower: float
    upper: float
    log_lower: float
    log_upper: float

    @property
    def rank(self) -> int:
        return 2 * self.r


def _check(N: int, q: int, p: float) -> None:
    if N < 1:
        raise ValueError(f"spin count must be >= 1, got {N}")
    if not 1 <= q <= N:
        raise ValueError(f"coherence order must satisfy 1 <= q <= N, got q={q}, N={N}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"polarisation must lie in [0, 1], got {p}")


def _min_log(a: float, b: float) -> float:
    return a if a <= b else b


def upper_log(N: int, q: int, p: float, *, half_rank: bool = False) -> float:
    """ln B^N_q(p).

    B = min{2p, ||L_up(P_z) - L_down(P_z)|| * ||L_up(sigma) - L_down(sigma)|| / 2}.
    By default the eigenvalue windows hold R^N_q entries, which keeps
    B^N_1(p) = 2p at every N. ``half_rank=True`` uses windows of R^N_q / 2,
    the sharper Cauchy-Schwarz product; it stays a valid bound but can fall
    below 2p at q = 1 for small N.
    """
    _check(N, q, p)
    if p == 0:
        return _NEG_INF
    R = max_rank(N, q)
    window = R // 2 if half_rank else R
    norm_pz = paired_diff_norm(pz_spectrum(N), window)
    norm_sigma = paired_diff_norm(sigma_spectrum(N, p), window)
    product = (norm_pz * norm_sigma).log() - _LN2
    return _min_log(math.log(2 * p), product)


def lower_log(N: int, q: int, p: float) -> float:
    """ln b^N_q(p), the eigenvalue-aligned dot product over r = R^N_q / 2."""
    _check(N, q, p)
    r = max_rank(N, q) // 2
    return aligned_dot(pz_spectrum(N), sigma_spectrum(N, p), r).log()


def _exp(x: float) -> float:
    return math.exp(x) if x > -745.2 else 0.0


def upper_bound(N: int, q: int, p: float, *, half_rank: bool = False) -> float:
    return _exp(upper_log(N, q, p, half_rank=half_rank))


def lower_bound(N: int, q: int, p: float) -> float:
    return _exp(lower_log(N, q, p))


def bound(N: int, q: int, p: float, *, half_rank: bool = False) -> BoundResult:
    """Both bounds at (N, q, p), with their logs."""
    lo = lower_log(N, q, p)
    up = upper_log(N, q, p, half_rank=half_rank)
    return BoundResult(N, q, p, max_rank(N, q) // 2, _exp(lo), _exp(up), lo, up)


# ---------------------------------------------------------------- closed forms


def closed_form_q1(N: int, p: float) -> tuple[SignedLog, SignedLog]:
    """(b^N_1, B^N_1) = (p, 2p), independent of N."""
    _check(N, 1, p)
    return SignedLog.from_float(p), SignedLog.from_float(2 * p)


def closed_form_qN(N: int, p: float) -> SignedLog:
    """b^N_N(p) = 2^-N ((1+p)^N - (1-p)^N)."""
    _check(N, N, p)
    plus = SignedLog.from_float(1 + p)
    minus = SignedLog.from_float(1 - p)
    a = SignedLog(plus.sign, N * plus.log_mag) if plus.sign else plus
    b = SignedLog(minus.sign, N * minus.log_mag) if minus.sign else minus
    diff = log_difference(a, b)
    return SignedLog(diff.sign, diff.log_mag - N * _LN2) if diff.sign else diff


def closed_form_qNm1(N: int, p: float) -> SignedLog:
    """b^N_{N-1}(p) = 2^(1-N)/N ((1+p)^(N-1) (N-1+p) - (1-p)^(N-1) (N-1-p))."""
    if N < 2:
        raise ValueError(f"q = N - 1 needs N >= 2, got {N}")
    _check(N, N - 1, p)

    def term(base: float, factor: float) -> SignedLog:
        if base == 0 or factor == 0:
            return SignedLog(0)
        return SignedLog(1, (N - 1) * math.log(base) + math.log(factor))

    diff = log_difference(term(1 + p, N - 1 + p), term(1 - p, N - 1 - p))
    if not diff.sign:
        return diff
    return SignedLog(diff.sign, diff.log_mag + (1 - N) * _LN2 - math.log(N))


# ----------------------------------------------------------------- asymptotics


def asymptotic_bounds(N: int, q: int, p: float) -> tuple[float, float]:
    """Max-term approximations (ln b, ln B) for even N.

    Each sum over magnetic quantum numbers j >= q/2 is replaced by its
    largest term: ln(lambda_j(sigma) lambda_j(P_z) + lambda_-j(sigma)
    lambda_-j(P_z)) + ln g_j for the lower bound, and two maxima of
    ln(lambda_j - lambda_-j) + ln(g_j)/2 for the upper bound. No Laplace
    width factor is included, so on the plateau the lower estimate sits
    roughly ln sqrt(N) below the exact value.
    """
    if N % 2:
        raise NotImplementedError("asymptotic approximations are only derived for even N")
    _check(N, q, p)
    half = N // 2
    row = binomial_row(N)
    sig = sigma_spectrum(N, p).blocks
    best_low = best_sigma = best_pz = _NEG_INF
    for j in range(max(1, math.ceil(q / 2)), half + 1):
        top, bottom = sig[half + j], sig[half - j]
        ln_g = math.log(row[half + j])
        pz = 2 * j / N
        # P_z is odd in j, so the aligned pair collapses to (2j/N)(lam_j - lam_-j)
        dsig = log_difference(top.value, bottom.value)
        if dsig.sign > 0:
            best_low = max(best_low, math.log(pz) + dsig.log_mag + ln_g)
            best_sigma = max(best_sigma, dsig.log_mag + 0.5 * ln_g)
        best_pz = max(best_pz, math.log(2 * pz) + 0.5 * ln_g)
    if p == 0:
        return _NEG_INF, _NEG_INF
    return best_low, _min_log(math.log(2 * p), best_sigma + best_pz)


# ------------------------------------------------------------ transition point

Which = Literal["lower", "upper"]


def _log_curve(N: int, p: float, which: Which):
    if which == "lower":
        return lambda q: lower_log(N, q, p)
    if which == "upper":
        return lambda q: upper_log(N, q, p)
    raise ValueError(f"which must be 'lower' or 'upper', got {which!r}")


def _monotone_on_grid(values: list[float]) -> bool:
    return all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


def half_decay_order(N: int, p: float, which: Which = "lower", *, grid: int = 64) -> int | None:
    """Smallest q whose bound has dropped below half its q = 1 plateau.

    The plateau is p for the lower bound and 2p for the upper bound.
    Returns None when the bound never decays that far within 1 <= q <= N.
    For large N a coarse grid is checked for monotone decay first; if it
    holds, the crossing is bisected inside the bracketing grid cell,
    otherwise the scan is linear.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"half-decay order needs 0 < p < 1, got {p}")
    curve = _log_curve(N, p, which)
    plateau = math.log(p) if which == "lower" else math.log(2 * p)
    threshold = plateau - _LN2

    if N <= 2 * grid:
        for q in range(1, N + 1):
            if curve(q) < threshold:
                return q
        return None

    qs = sorted({1 + round(i * (N - 1) / grid) for i in range(grid + 1)})
    values = [curve(q) for q in qs]
    if not _monotone_on_grid(values):
        log.info("bound not monotone on coarse grid for N=%d p=%g; scanning linearly", N, p)
        for q in range(1, N + 1):
            if curve(q) < threshold:
                return q
        return None
    if values[-1] >= threshold:
        return None
    if values[0] < threshold:
        return 1
    cell = next(i for i, v in enumerate(values) if v < threshold)
    lo, hi = qs[cell - 1], qs[cell]  # curve(lo) >= threshold > curve(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if curve(mid) < threshold:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class TransitionReport:
    N: int
    p: float
    q_half_lower: int | None
    q_half_upper: int | None
    width: float | None
    raw_width: float | None
    q_c_model: float
    Q_c_cap: float


def transition_report(N: int, p: float) -> TransitionReport:
    lo = half_decay_order(N, p, "lower")
    up = half_decay_order(N, p, "upper")
    if lo is None or up is None:
        raw = width = None
    else:
        raw = (up - lo) / N
        width = max(0.0, raw)
    return TransitionReport(N, p, lo, up, width, raw, p * N, 2 * p / (1 + p * p) * N)


def transition_width(N: int, p: float) -> float | None:
    """(q_half_upper - q_half_lower) / N, floored at zero; None without a transition."""
    return transition_report(N, p).width


# ------------------------------------------------------- thermodynamic models


def convolution_profile(N: int, p: float, q: float) -> float:
    """Gaussian N(0, (1-p)N) convolved with the box u(-pN, pN), evaluated at q.

    Returned without the 1/(2pN) normalisation: Phi((q+pN)/s) - Phi((q-pN)/s).
    At p = 1 this is the indicator of |q| <= N, at p = 0 the box has no
    width and the profile vanishes.
    """
    if N < 1:
        raise ValueError(f"spin count must be >= 1, got {N}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"polarisation must lie in [0, 1], got {p}")
    edge = p * N
    var = (1 - p) * N
    if var == 0:
        return 1.0 if abs(q) <= edge else 0.0
    s = math.sqrt(2 * var)
    x = abs(q)  # symmetric; the upper tail keeps precision far out
    return 0.5 * (math.erfc((x - edge) / s) - math.erfc((x + edge) / s))


def model_transition_width(N: int, p: float) -> float:
    """Width 2 sqrt(6 N (1-p)) of the lower-bound transition region."""
    return 2 * math.sqrt(6 * N * (1 - p))


def observable_cluster_limit(N: int, p: float) -> float:
    """K_obs = Np + sqrt(6N(1-p)), the largest observable cluster size."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"polarisation must lie in [0, 1], got {p}")
    return N * p + math.sqrt(6 * N * (1 - p))


@dataclass(frozen=True)
class SnrEstimate:
    eta: float
    log_eta: float
    observable: bool  # q <= Np: no Gaussian suppression to beat


def snr_requirement(N: int, q: int, p: float) -> SnrEstimate:
    """Averaged SNR eta ~ exp(q^2/N) needed to see order q beyond pN."""
    if q <= N * p:
        return SnrEstimate(1.0, 0.0, True)
    log_eta = q * q / N
    eta = math.exp(log_eta) if log_eta < 709.0 else math.inf
    return SnrEstimate(eta, log_eta, False)


def one_over_e_crossing(p: float) -> float:
    """N ~ 2/(1-p), where b^N_N falls to 1/e of its plateau; inf at p = 1."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"1/e crossing needs 0 < p <= 1, got {p}")
    if p == 1.0:
        return math.inf
    return 2.0 / (1.0 - p)


def first_crossing_below(p: float, n_max: int = 100_000) -> int | None:
    """Smallest N >= 1 with b^N_N(p) < p/e, by direct scan of the closed form."""
    target = math.log(p) - 1.0
    for N in range(1, n_max + 1):
        if closed_form_qN(N, p).log() < target:
            return N
    return None
