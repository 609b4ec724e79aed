"""Oracle invariant suite behind ``mqcbound verify``.

Every check compares a closed formula or a block-spectrum computation
with explicit dense linear algebra at small N and records the worst
residual it saw.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from mqcbound import oracle
from mqcbound.bounds import lower_bound, upper_bound
from mqcbound.combinatorics import max_rank

POLARISATIONS = (0.25, 0.5, 0.75, 1.0)


@dataclass
class CheckRecord:
    check: str
    params: dict
    passed: bool
    residual: float
    detail: str = ""

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.residual = float(self.residual)


@dataclass
class VerifyReport:
    max_n: int
    seed: int
    records: list[CheckRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def to_dict(self) -> dict:
        return {
            "max_n": self.max_n,
            "seed": self.seed,
            "passed": self.passed,
            "records": [asdict(r) for r in self.records],
        }


_CHECK_IDS = {
    "rank_zigzag": 1,
    "rank_random": 2,
    "spectral_pairing": 3,
    "rotational_antisymmetry": 4,
    "reconstruction": 5,
    "commutator": 6,
    "projector_equivalence": 7,
    "alignment_dominance": 8,
    "achievable_signal": 9,
    "phase_cycle_bounded": 10,
}


def _rng(seed: int, check: str, *params) -> np.random.Generator:
    """Independent stream per (check, instance) so the report does not depend on run order."""
    return np.random.default_rng([seed, _CHECK_IDS[check], *[int(round(1000 * x)) for x in params]])


def verify_rank_formula(max_n: int, seed: int = 0, samples: int = 1000) -> list[CheckRecord]:
    """Rank formula against the zigzag construction and random order-q operators."""
    out = []
    for N in range(1, max_n + 1):
        for q in range(1, N + 1):
            R = max_rank(N, q)
            zz = oracle.numerical_rank(oracle.zigzag_max_rank_operator(N, q))
            out.append(CheckRecord("rank_zigzag", {"N": N, "q": q, "rank": zz}, zz == R, float(abs(zz - R)),
                                   f"max_rank={R}"))

            rng = _rng(seed, "rank_random", N, q)
            ranks = [oracle.numerical_rank(oracle.random_order_q_hermitian(N, q, rng)) for _ in range(samples)]
            top = max(ranks)
            # generic operators reach the maximum; none may exceed it
            out.append(CheckRecord("rank_random", {"N": N, "q": q, "samples": samples}, top == R,
                                   float(abs(top - R)), f"max sampled rank={top}, max_rank={R}"))

            rng = _rng(seed, "spectral_pairing", N, q)
            worst = 0.0
            for _ in range(50):
                O = oracle.random_order_q_hermitian(N, q, rng)
                ev = np.linalg.eigvalsh(O)
                worst = max(worst, float(np.max(np.abs(ev + ev[::-1]))) / max(1.0, float(np.max(np.abs(ev)))))
            out.append(CheckRecord("spectral_pairing", {"N": N, "q": q}, worst <= 1e-10, worst))

            rng = _rng(seed, "rotational_antisymmetry", N, q)
            O = oracle.random_order_q_hermitian(N, q, rng)
            Rz = oracle.build_spin_operators(N).rz(np.pi / q)
            res = float(np.max(np.abs(Rz @ O @ Rz.conj().T + O)))
            out.append(CheckRecord("rotational_antisymmetry", {"N": N, "q": q}, res <= 1e-10, res))
    return out


def _projection_checks(max_n: int, seed: int, samples: int) -> list[CheckRecord]:
    out = []
    for N in range(1, max_n + 1):
        dim = 1 << N
        ops = oracle.build_spin_operators(N)
        rng = _rng(seed, "reconstruction", N)
        worst_rec = worst_comm = 0.0
        for _ in range(samples):
            A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            parts = oracle.coherence_decomposition(A)
            worst_rec = max(worst_rec, float(np.max(np.abs(sum(parts.values()) - A))))
            for q, Aq in parts.items():
                comm = ops.Iz @ Aq - Aq @ ops.Iz - q * Aq
                worst_comm = max(worst_comm, float(np.max(np.abs(comm))))
        out.append(CheckRecord("reconstruction", {"N": N, "samples": samples}, worst_rec <= 1e-12, worst_rec))
        out.append(CheckRecord("commutator", {"N": N, "samples": samples}, worst_comm <= 1e-12, worst_comm))

        for q in range(0, N + 1):
            rng = _rng(seed, "projector_equivalence", N, q)
            A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            direct = oracle.coherence_project(A, q) + oracle.coherence_project(A, -q)
            res = float(np.max(np.abs(oracle.projector_fourier(A, q, N) - direct)))
            out.append(CheckRecord("projector_equivalence", {"N": N, "q": q}, res <= 1e-10, res))
    return out


def _alignment_checks(max_n: int, seed: int, samples: int) -> list[CheckRecord]:
    out = []
    for N in range(1, max_n + 1):
        dim = 1 << N
        rng = _rng(seed, "alignment_dominance", N)
        A = oracle.random_hermitian(dim, rng)
        B = oracle.random_hermitian(dim, rng)
        value, U = oracle.max_overlap(A, B)
        attained = abs(oracle.overlap(A, B, U) - value)
        margin = min(value - oracle.overlap(A, B, oracle.random_unitary(dim, rng)) for _ in range(samples))
        ok = margin >= -1e-10 and attained <= 1e-10 * max(1.0, abs(value))
        out.append(CheckRecord("alignment_dominance", {"N": N, "samples": samples}, ok, attained,
                               f"min margin over random unitaries={margin:.3e}"))
    return out


def _signal_checks(max_n: int, seed: int, samples: int) -> list[CheckRecord]:
    out = []
    for N in range(1, min(max_n, 4) + 1):
        dim = 1 << N
        for q in range(1, N + 1):
            for p in POLARISATIONS:
                achieved = oracle.achievable_signal(N, q, p)
                b = lower_bound(N, q, p)
                replay = oracle.phase_cycle_experiment(N, q, p, achieved.U, achieved.V)
                res = max(abs(achieved.value - b), abs(replay - b))
                out.append(CheckRecord("achievable_signal", {"N": N, "q": q, "p": p}, res <= 1e-9, res))

                B = upper_bound(N, q, p)
                B_half = upper_bound(N, q, p, half_rank=True)
                rng = _rng(seed, "phase_cycle_bounded", N, q, p)
                worst_excess = -np.inf
                worst_route = 0.0
                for _ in range(samples):
                    U = oracle.random_unitary(dim, rng)
                    V = oracle.random_unitary(dim, rng)
                    s = oracle.phase_cycle_experiment(N, q, p, U, V)
                    worst_route = max(worst_route, abs(s - oracle.projected_signal(N, q, p, U, V)))
                    worst_excess = max(worst_excess, s - min(B, B_half, 2 * p))
                ok = worst_excess <= 1e-9 and worst_route <= 1e-10
                out.append(CheckRecord("phase_cycle_bounded", {"N": N, "q": q, "p": p, "samples": samples}, ok,
                                       float(max(worst_excess, 0.0)),
                                       f"max excess over bound={worst_excess:.3e}, route mismatch={worst_route:.3e}"))
    return out


def run_verification(max_n: int, seed: int = 0, *, rank_samples: int = 1000, projection_samples: int = 500,
                     alignment_samples: int = 1000, signal_samples: int = 200) -> VerifyReport:
    if not 1 <= max_n <= oracle.MAX_DENSE_N:
        raise ValueError(f"verification supports 1 <= max_n <= {oracle.MAX_DENSE_N}, got {max_n}")
    report = VerifyReport(max_n, seed)
    records = []
    records += verify_rank_formula(min(max_n, oracle.MAX_OPTIMISE_N), seed, rank_samples)
    records += _projection_checks(min(max_n, oracle.MAX_OPTIMISE_N), seed, projection_samples)
    records += _alignment_checks(max_n, seed, alignment_samples)
    records += _signal_checks(max_n, seed, signal_samples)
    records.sort(key=lambda r: (r.check, sorted(r.params.items())))
    report.records = records
    return report
