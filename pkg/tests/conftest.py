import math

import numpy as np
import pytest


def explicit_eigenvalues(N, p):
    """(P_z, sigma_p) eigenvalues over all 2^N basis states, each sorted ascending.

    Built by direct enumeration of up-counts, independent of the block code.
    """
    ups = np.array([bin(b).count("1") for b in range(1 << N)])
    pz = np.sort((2 * ups - N) / N)
    sigma = np.sort(((1 + p) / 2) ** ups * ((1 - p) / 2) ** (N - ups))
    return pz, sigma


def naive_lower(N, p, r):
    pz, sigma = explicit_eigenvalues(N, p)
    return float(pz[:r] @ sigma[:r] + pz[::-1][:r] @ sigma[::-1][:r])


def naive_upper(N, p, window):
    pz, sigma = explicit_eigenvalues(N, p)
    d_pz = np.linalg.norm(pz[:window] - pz[::-1][:window])
    d_sigma = np.linalg.norm(sigma[:window] - sigma[::-1][:window])
    return min(2 * p, d_pz * d_sigma / 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def record_criterion(label, passed, detail):
    """Log one acceptance verdict; echoed in the terminal summary."""
    line = f"{'PASS' if passed else 'FAIL'} {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
