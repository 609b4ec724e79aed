"""Dense small-N oracle: explicit 2^N x 2^N operators for N <= 8.

Basis states are bitstrings with bit j set when spin j points up, so the
I_z eigenvalue of basis state b is popcount(b) - N/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import unitary_group

MAX_DENSE_N = 8
MAX_OPTIMISE_N = 6
HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-12


def _check_size(N: int, limit: int = MAX_DENSE_N) -> None:
    if not 1 <= N <= limit:
        raise ValueError(f"dense oracle is limited to 1 <= N <= {limit}, got N={N}")


def n_spins(A: np.ndarray) -> int:
    dim = A.shape[0]
    N = dim.bit_length() - 1
    if A.shape != (dim, dim) or 1 << N != dim:
        raise ValueError(f"expected a square 2^N matrix, got shape {A.shape}")
    return N


def up_counts(N: int) -> np.ndarray:
    """popcount of every basis index."""
    idx = np.arange(1 << N)
    return np.array([bin(i).count("1") for i in idx])


def magnetisation(N: int) -> np.ndarray:
    """I_z eigenvalue of every basis state."""
    return up_counts(N) - N / 2


@dataclass(frozen=True)
class SpinOperators:
    N: int
    Iz: np.ndarray
    Iplus: np.ndarray
    Iminus: np.ndarray
    Pz: np.ndarray

    @property
    def Ix(self) -> np.ndarray:
        return (self.Iplus + self.Iminus) / 2

    @property
    def Iy(self) -> np.ndarray:
        return (self.Iplus - self.Iminus) / 2j

    def rz(self, phi: float) -> np.ndarray:
        """exp(-i phi I_z), diagonal."""
        return np.diag(np.exp(-1j * phi * np.diag(self.Iz).real))

    def rx(self, theta: float) -> np.ndarray:
        """exp(-i theta I_x) as a product of single-spin rotations."""
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        single = np.array([[c, -1j * s], [-1j * s, c]])
        out = np.ones((1, 1), dtype=complex)
        for _ in range(self.N):
            out = np.kron(single, out)
        return out


def _frozen(A: np.ndarray) -> np.ndarray:
    A.setflags(write=False)
    return A


@lru_cache(maxsize=None)
def build_spin_operators(N: int) -> SpinOperators:
    _check_size(N)
    dim = 1 << N
    Iz = np.diag(magnetisation(N)).astype(complex)
    Iplus = np.zeros((dim, dim), dtype=complex)
    for j in range(N):
        bit = 1 << j
        for b in range(dim):
            if not b & bit:
                Iplus[b | bit, b] = 1.0
    return SpinOperators(
        N, _frozen(Iz), _frozen(Iplus), _frozen(Iplus.conj().T.copy()), _frozen((2.0 / N) * Iz)
    )


def sigma_state(N: int, p: float) -> np.ndarray:
    """(1/2 + p I_z)^(x)N, diagonal in the computational basis."""
    _check_size(N)
    up = up_counts(N)
    diag = ((1 + p) / 2) ** up * ((1 - p) / 2) ** (N - up)
    return np.diag(diag).astype(complex)


@lru_cache(maxsize=256)
def _sigma_cached(N: int, p: float) -> np.ndarray:
    return _frozen(sigma_state(N, p))


@lru_cache(maxsize=None)
def coherence_order_matrix(N: int) -> np.ndarray:
    """m_i - m_j for every matrix entry (i, j)."""
    up = up_counts(N)
    return _frozen(up[:, None] - up[None, :])


def coherence_project(A: np.ndarray, q: int) -> np.ndarray:
    """Keep the entries of A connecting states whose I_z differs by q."""
    N = n_spins(A)
    return np.where(coherence_order_matrix(N) == q, A, 0)


def coherence_decomposition(A: np.ndarray) -> dict[int, np.ndarray]:
    N = n_spins(A)
    return {q: coherence_project(A, q) for q in range(-N, N + 1)}


def projector_fourier(A: np.ndarray, q: int, N: int | None = None) -> np.ndarray:
    """Phase-cycled projection onto orders +q and -q.

    (2/(2N+1)) sum_k cos(2 pi k q/(2N+1)) R_z(phi_k) A R_z(phi_k)^dag with
    phi_k = 2 pi k/(2N+1). For q = 0 this returns twice the zero-order part.
    """
    if N is None:
        N = n_spins(A)
    M = 2 * N + 1
    m = magnetisation(N)
    out = np.zeros_like(A, dtype=complex)
    for k in range(M):
        phase = np.exp(-1j * 2 * np.pi * k / M * m)
        rotated = phase[:, None] * A * phase.conj()[None, :]
        out += np.cos(2 * np.pi * k * q / M) * rotated
    return 2.0 / M * out


def projector_pm(A: np.ndarray, q: int) -> np.ndarray:
    """Direct filter onto orders +q and -q (each once, also for q = 0)."""
    if q == 0:
        return coherence_project(A, 0)
    return coherence_project(A, q) + coherence_project(A, -q)


# ---------------------------------------------------------- maximal-rank zigzag


def zigzag_pairs(N: int, q: int) -> list[tuple[int, int]]:
    """Basis-state pairs (a, b) with m_a - m_b = q forming a maximum matching.

    Each Zeeman chain up-count = k, k+q, k+2q, ... is walked upward from its
    lowest manifold: states left unmatched by the manifold below are matched
    to fresh states of the current manifold. On a chain of complete
    bipartite links this greedy leaf-first matching is maximal.
    """
    _check_size(N)
    if not 1 <= q <= N:
        raise ValueError(f"need 1 <= q <= N, got q={q}, N={N}")
    up = up_counts(N)
    manifolds = {u: [int(b) for b in np.flatnonzero(up == u)] for u in range(N + 1)}
    pairs = []
    for k in range(q):
        free: list[int] = []
        for u in range(k, N + 1, q):
            states = manifolds[u]
            n_match = min(len(free), len(states))
            pairs.extend((states[i], free[i]) for i in range(n_match))
            free = states[n_match:]
    return pairs


def zigzag_max_rank_operator(N: int, q: int, weights=None) -> np.ndarray:
    """Hermitian operator on orders +-q with rank R^N_q.

    ``weights`` (one per matched pair) scales the pair operators
    |a><b| + |b><a|; by default every weight is 1, so the spectrum is
    {+1, -1} once per pair and zero elsewhere.
    """
    pairs = zigzag_pairs(N, q)
    if weights is None:
        weights = np.ones(len(pairs))
    if len(weights) != len(pairs):
        raise ValueError(f"expected {len(pairs)} weights, got {len(weights)}")
    dim = 1 << N
    O = np.zeros((dim, dim), dtype=complex)
    for (a, b), w in zip(pairs, weights):
        O[a, b] = w
        O[b, a] = w
    return O


def numerical_rank(A: np.ndarray, rel_tol: float = 1e-10) -> int:
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


# ------------------------------------------------------- eigenvalue alignment


def is_hermitian(A: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    scale = max(1.0, float(np.max(np.abs(A))))
    return bool(np.max(np.abs(A - A.conj().T)) <= tol * scale)


def is_unitary(U: np.ndarray, tol: float = UNITARY_TOL * 100) -> bool:
    return bool(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) <= tol)


def overlap(A: np.ndarray, B: np.ndarray, U: np.ndarray) -> float:
    """(B | U A U^dag) = Tr(B^dag U A U^dag)."""
    return float(np.real(np.trace(B.conj().T @ U @ A @ U.conj().T)))


def max_overlap(A: np.ndarray, B: np.ndarray, basis_a=None, basis_b=None):
    """Largest Tr(B U A U^dag) over unitaries, and a unitary attaining it.

    The optimum pairs the i-th smallest eigenvalue of A with the i-th
    smallest of B. Explicit eigenbases (columns, ascending eigenvalues) can
    be supplied when a particular choice inside degenerate eigenspaces
    matters.
    """
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    if not (is_hermitian(A) and is_hermitian(B)):
        raise ValueError("max_overlap needs Hermitian operators")
    if basis_a is None:
        evals_a, basis_a = np.linalg.eigh(A)
    else:
        evals_a = np.real(np.einsum("ji,jk,ki->i", basis_a.conj(), A, basis_a))
    if basis_b is None:
        evals_b, basis_b = np.linalg.eigh(B)
    else:
        evals_b = np.real(np.einsum("ji,jk,ki->i", basis_b.conj(), B, basis_b))
    value = float(np.dot(np.sort(evals_a), np.sort(evals_b)))
    order_a = np.argsort(evals_a, kind="stable")
    order_b = np.argsort(evals_b, kind="stable")
    U = basis_b[:, order_b] @ basis_a[:, order_a].conj().T
    return value, U


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (X + X.conj().T) / 2


def random_order_q_hermitian(N: int, q: int, rng: np.random.Generator) -> np.ndarray:
    """Gaussian Hermitian operator filtered onto orders +-q."""
    H = projector_pm(random_hermitian(1 << N, rng), q)
    return (H + H.conj().T) / 2


# ----------------------------------------------------------- signal protocols


def phase_cycle_experiment(N: int, q: int, p: float, U: np.ndarray, V: np.ndarray) -> float:
    """I^N_q from 2N+1 phase-encoded scans and a real Fourier transform."""
    _check_size(N)
    if not (is_unitary(U) and is_unitary(V)):
        raise ValueError("phase cycling needs unitary U and V")
    ops = build_spin_operators(N)
    rho = U @ _sigma_cached(N, p) @ U.conj().T
    M = 2 * N + 1
    total = 0.0
    for k in range(M):
        R = ops.rz(2 * np.pi * k / M)
        state = V @ R @ rho @ R.conj().T @ V.conj().T
        signal = np.real(np.trace(ops.Pz @ state))
        total += signal * np.cos(2 * np.pi * k * q / M)
    return 2.0 / M * total


def projected_signal(N: int, q: int, p: float, U: np.ndarray, V: np.ndarray) -> float:
    """Tr{P_z V P_{+-q}(U sigma_p U^dag) V^dag}."""
    ops = build_spin_operators(N)
    rho = projector_pm(U @ _sigma_cached(N, p) @ U.conj().T, q)
    return float(np.real(np.trace(ops.Pz @ V @ rho @ V.conj().T)))


@dataclass
class AchievedSignal:
    value: float
    U: np.ndarray
    V: np.ndarray
    degenerate: bool = False  # sigma_p had no +-q content to project


def _pair_eigenbasis(N: int, pairs, weights) -> np.ndarray:
    """Columns ordered by ascending eigenvalue of the weighted zigzag:
    -w_1 <= ... <= -w_r, the unmatched basis states, w_r <= ... <= w_1."""
    dim = 1 << N
    matched = {s for pair in pairs for s in pair}
    cols_minus, cols_plus = [], []
    for a, b in pairs:
        plus = np.zeros(dim, dtype=complex)
        minus = np.zeros(dim, dtype=complex)
        plus[a] = plus[b] = 1 / np.sqrt(2)
        minus[a], minus[b] = 1 / np.sqrt(2), -1 / np.sqrt(2)
        cols_plus.append(plus)
        cols_minus.append(minus)
    order = np.argsort(-np.asarray(weights), kind="stable")  # w_1 >= w_2 >= ...
    kernel = [np.eye(dim, dtype=complex)[:, s] for s in range(dim) if s not in matched]
    cols = [cols_minus[i] for i in order] + kernel + [cols_plus[i] for i in order[::-1]]
    return np.column_stack(cols)


def achievable_signal(N: int, q: int, p: float) -> AchievedSignal:
    """Signal of the constructive (U_p, V) pair behind the lower bound.

    U_p aligns sigma_p with a maximal-rank zigzag whose pair weights are
    the paired eigenvalue gaps of sigma_p; V then aligns the normalised
    +-q projection X_p with P_z. The result is (P_z | V | X_p)(X_p | U_p sigma_p).
    """
    _check_size(N, MAX_OPTIMISE_N)
    if not 1 <= q <= N:
        raise ValueError(f"need 1 <= q <= N, got q={q}, N={N}")
    ops = build_spin_operators(N)
    dim = 1 << N
    sigma = sigma_state(N, p)
    pairs = zigzag_pairs(N, q)
    r = len(pairs)

    diag = np.real(np.diag(sigma))
    order = np.argsort(diag, kind="stable")
    ascending = diag[order]
    weights = ascending[::-1][:r] - ascending[:r]
    if not np.any(weights > 0):
        I = np.eye(dim, dtype=complex)
        return AchievedSignal(0.0, I, I, degenerate=True)
    norm = np.sqrt(2 * np.sum(weights**2))
    B = zigzag_max_rank_operator(N, q, weights / norm)

    basis_sigma = np.eye(dim, dtype=complex)[:, order]
    _, U = max_overlap(sigma, B, basis_a=basis_sigma, basis_b=_pair_eigenbasis(N, pairs, weights))

    projected = projector_pm(U @ sigma @ U.conj().T, q)
    amplitude = np.sqrt(np.real(np.trace(projected.conj().T @ projected)))
    X = projected / amplitude
    alignment, V = max_overlap(X, ops.Pz)
    return AchievedSignal(alignment * amplitude, U, V)
