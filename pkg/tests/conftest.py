import numpy as np
import pytest

from qmle.model import MeasurementEnsemble


def random_hermitian(rng, dim, scale=1.0):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (a + a.conj().T) / 2


def random_density(rng, dim, rank=None):
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, dim):
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_ensemble(rng, dim, n=None):
    """Random rank-one and full-rank PSD effects with trivial common kernel."""
    n = 2 * dim if n is None else n
    elems = []
    for i in range(n):
        if i < dim:
            v = random_unitary(rng, dim)[:, i]
            elems.append(np.outer(v, v.conj()))
        else:
            elems.append(random_density(rng, dim, rank=rng.integers(1, dim + 1)))
    w = rng.uniform(0.1, 1.0, n)
    return MeasurementEnsemble(np.array(elems), w / w.sum())


def random_commuting_ensemble(rng, dim, n=None):
    n = 2 * dim if n is None else n
    u = random_unitary(rng, dim)
    a = rng.uniform(0.0, 1.0, (n, dim))
    a[rng.uniform(size=(n, dim)) < 0.3] = 0.0
    a[np.arange(dim) % n, np.arange(dim)] += 0.5  # every coordinate covered
    elems = np.array([(u * row) @ u.conj().T for row in a])
    w = rng.uniform(0.1, 1.0, n)
    return MeasurementEnsemble(elems, w / w.sum()), u, a


P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)
PLUS = np.full((2, 2), 0.5, dtype=complex)
MINUS = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def two_projector_half():
    return MeasurementEnsemble(np.array([P0, P1]), np.array([0.5, 0.5]))


@pytest.fixture
def two_projector_skew():
    return MeasurementEnsemble(np.array([P0, P1]), np.array([0.75, 0.25]))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail=""):
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}"
    if detail:
        line += f"  [{detail}]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
