import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from superdirective.fieldmodel import (ElementModel, linear_array, make_angular_grid,
                                       synth_element_fields)

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []
# every GA evaluation made anywhere in the session: [evaluated individuals, out-of-range amplitudes]
GA_AUDIT = {"individuals": 0, "violations": 0, "calls": 0}


def pytest_collection_modifyitems(items):
    # acceptance checks run last so the GA audit covers the whole suite
    items.sort(key=lambda item: item.fspath.basename == "test_acceptance.py")


@pytest.fixture(scope="session", autouse=True)
def audit_ga_evaluations():
    import superdirective.ga as ga

    original = ga.population_fitness

    def audited(pop, spec, A):
        amp = ga.decode_amplitudes(pop, spec)
        GA_AUDIT["calls"] += 1
        GA_AUDIT["individuals"] += amp.size // amp.shape[-1]
        GA_AUDIT["violations"] += int(np.count_nonzero((amp < 1.0) | (amp > spec.P)))
        return original(pop, spec, A)

    ga.population_fitness = audited
    yield
    ga.population_fitness = original


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def grid_1deg():
    return make_angular_grid(180, 360)


@pytest.fixture(scope="session")
def grid_2deg():
    return make_angular_grid(90, 180)


@pytest.fixture(scope="session")
def grid_coarse():
    return make_angular_grid(24, 48)


@pytest.fixture(scope="session")
def dipole_pair(grid_2deg):
    geom = linear_array(2, 0.2, 1.6e9)
    model = ElementModel("half-wave-dipole")
    return geom, model, synth_element_fields(geom, model, grid_2deg)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
