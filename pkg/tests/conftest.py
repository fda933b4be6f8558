import numpy as np
import pytest

from covercount import shift as sh
from covercount import transfer as tr
from covercount.groupfile import load_any, load_group


@pytest.fixture(scope="session")
def group_b():
    return load_group("fixture:b")


@pytest.fixture(scope="session")
def group_c():
    return load_group("fixture:c")


@pytest.fixture(scope="session")
def group_d0():
    return load_group("fixture:d0")


@pytest.fixture(scope="session")
def group_d1():
    return load_group("fixture:d1")


@pytest.fixture(scope="session")
def toy2():
    return load_any("fixture:toy2")


@pytest.fixture(scope="session")
def toy2_spec(toy2):
    return tr.OperatorSpec(toy2)


@pytest.fixture(scope="session")
def shift_b(group_b):
    return sh.from_schottky(group_b)


@pytest.fixture(scope="session")
def spec_b(shift_b):
    return tr.OperatorSpec(shift_b, nodes_per_disk=24)


@pytest.fixture(scope="session")
def delta_b(spec_b):
    return tr.critical_exponent(spec_b)


@pytest.fixture(scope="session")
def surface_b(spec_b):
    return tr.pressure_surface(spec_b)


@pytest.fixture(scope="session")
def spectral_b(spec_b, delta_b):
    return tr.leading_eigenvalue(spec_b, delta_b, want_measure=True)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260808)
