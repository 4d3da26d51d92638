import numpy as np
import pytest

# (criterion, passed, detail) tuples recorded by test_acceptance.py
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for crit, passed, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {crit:2d}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def naive_dft(m):
    """Unitary Fourier matrix with kernel exp(+2 pi i jk/m), built entrywise."""
    j = np.arange(m)
    return np.exp(2j * np.pi * np.outer(j, j) / m) / np.sqrt(m)


def naive_dst1(n):
    i = np.arange(1, n + 1)
    return np.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(i, i) / (n + 1))


def dense_toeplitz(col):
    n = len(col)
    return np.array([[col[abs(i - j)] for j in range(n)] for i in range(n)])


def dense_bdf2(nt):
    C = np.zeros((nt, nt))
    C[0, 0] = 1.0
    for k in range(1, nt):
        C[k, k] = 1.5
        C[k, k - 1] = -2.0
        if k >= 2:
            C[k, k - 2] = 0.5
    return C


def dense_alpha_circulant(nt, alpha):
    """Strang alpha-circulant from the BDF2 coefficients, entry by entry."""
    r = {0: 1.5, 1: -2.0, 2: 0.5}
    C = np.zeros((nt, nt))
    for i in range(nt):
        for j in range(nt):
            d = (i - j) % nt
            if d in r:
                C[i, j] = r[d] * (alpha if j > i else 1.0)
    return C
