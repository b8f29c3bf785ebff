import numpy as np
import pytest

from gbfpos.library import (FermionicToyConfig, IntervalTheoryConfig, build_fermionic_toy,
                            build_interval_theory)

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def interval(U, **kw):
    U = np.asarray(U, dtype=complex)
    return build_interval_theory(IntervalTheoryConfig(U.shape[0], [U], **kw))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def qubit_identity():
    return interval(np.eye(2))


@pytest.fixture(scope="session")
def qubit_hadamard():
    return interval(HADAMARD)


@pytest.fixture(scope="session")
def fermionic_toy():
    return build_fermionic_toy(FermionicToyConfig(seed=3))


@pytest.fixture(scope="session")
def krein_toy():
    return build_fermionic_toy(FermionicToyConfig(d=3, fdeg=(0, 0, 1), sig=(0, 1, 0), seed=4))


# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
