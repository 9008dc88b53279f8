import numpy as np
import pytest

from subspace_update.core import Factorization, RankOneUpdate

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_stiefel(rng, n, p):
    Q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    return Q


def random_case(rng, n, p, kind="qr"):
    X = rng.standard_normal((n, p))
    f = Factorization.from_qr(X) if kind == "qr" else Factorization.from_svd(X)
    up = RankOneUpdate(rng.standard_normal(n), rng.standard_normal(p))
    return f, up


@pytest.fixture
def hand_case():
    """n=2, p=1: X = e1, a = e2, b = 1, so X_new = (1, 1)^T."""
    f = Factorization(np.array([[1.0], [0.0]]), np.array([[1.0]]))
    return f, RankOneUpdate(np.array([0.0, 1.0]), np.array([1.0]))
