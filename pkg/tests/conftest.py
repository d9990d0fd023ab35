import numpy as np
import pytest

from rmls.instance import GeneratorConfig, QlspInstance, generate_with_kappa


def random_instance(n: int, seed: int, kappa: float = 4.0, tol: float = 3.0, d: int = None):
    """Quick instance with loosely post-selected kappa (default window [1, 7])."""
    d = min(2 ** n, 4) if d is None else d
    return generate_with_kappa(GeneratorConfig(n, d, kappa, kappa_tol=tol, seed=seed))


def diag_instance(diag, b) -> QlspInstance:
    diag = np.asarray(diag, dtype=float)
    n = int(np.log2(diag.size))
    b = np.asarray(b, dtype=complex)
    return QlspInstance(n, np.diag(diag).astype(complex), b / np.linalg.norm(b), d=1)


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_hermitian(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (m + m.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture(scope="session")
def inst3():
    return random_instance(3, seed=11)


@pytest.fixture(scope="session")
def inst_k2():
    return generate_with_kappa(GeneratorConfig(2, 2, 2.0, kappa_tol=1e-3, seed=3))


@pytest.fixture(scope="session")
def inst_k10():
    return generate_with_kappa(GeneratorConfig(3, 4, 10.0, kappa_tol=1e-3, seed=5))


ACCEPTANCE_LINES = []


def report(criterion: str, ok: bool, detail: str) -> None:
    """Record and print one acceptance line; callers assert ``ok`` afterwards."""
    line = f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
