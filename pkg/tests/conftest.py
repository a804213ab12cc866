import numpy as np
import pytest

from lgweak.evolution import ScenarioConfig
from lgweak.probe_field import GridSpec
from lgweak.quantum_core import SystemState, identity, pauli, tensor_product
from lgweak.scenario import load_bundled

ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def pauli_zz():
    return load_bundled("pauli_zz")


@pytest.fixture(scope="session")
def zz_ops():
    sz, eye = pauli("sigma_z"), pauli("I")
    return tensor_product(sz, eye), tensor_product(eye, sz)


@pytest.fixture
def rng():
    return np.random.default_rng(20121016)


def identity_scenario(g=0.05, l=2, n=256):
    pre = SystemState.normalized([1, 0])
    post = SystemState.normalized([1, 1])
    return ScenarioConfig(identity(2), identity(2), pre, post, g=g, l=l, grid=GridSpec.for_mode(l, n=n))


def random_state(rng, dim):
    return SystemState.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_hermitian(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2
