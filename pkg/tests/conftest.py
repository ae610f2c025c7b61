import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from intrinsic_chern import (
    Geometry,
    atomic_insulator,
    build_hamiltonian,
    chern_model,
    fermi_projector,
)

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

# acceptance lines collected by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@functools.lru_cache(maxsize=None)
def projector(model_name: str, kind: str, size: int, m: float = 1.0):
    """Cached Fermi projector at eF = 0; dense eigh is the dominant cost of the suite."""
    d = 2
    model = {"chern": lambda: chern_model(m), "atomic": lambda: atomic_insulator(2, m)}[model_name]()
    geom = Geometry.torus(d, size) if kind == "torus" else Geometry.box(d, size)
    return fermi_projector(build_hamiltonian(model, geom), 0.0)


@pytest.fixture(scope="session")
def chern_torus_24():
    return projector("chern", "torus", 24)


@pytest.fixture(scope="session")
def chern_box_12():
    return projector("chern", "box", 12)


@pytest.fixture(scope="session")
def chern_box_8():
    return projector("chern", "box", 8)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
