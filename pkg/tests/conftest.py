import pytest

from abelym.dec import build_operators
from abelym.mesh import annulus_gluing_map, collar, gen_annulus, gen_circle, gen_disk, glue


@pytest.fixture(scope="session")
def disk():
    return gen_disk(16)


@pytest.fixture(scope="session")
def annulus():
    return gen_annulus(16, 1.0, 2.0)


@pytest.fixture(scope="session")
def circle():
    return gen_circle(16)


@pytest.fixture(scope="session")
def circle_collar(circle):
    return collar(circle, 4, 1.0)


@pytest.fixture(scope="session")
def torus(annulus):
    return glue(annulus, annulus_gluing_map(annulus))


@pytest.fixture(scope="session")
def disk_ops(disk):
    return build_operators(disk)


@pytest.fixture(scope="session")
def annulus_ops(annulus):
    return build_operators(annulus)


@pytest.fixture(scope="session")
def circle_ops(circle):
    return build_operators(circle)


@pytest.fixture(scope="session")
def collar_ops(circle_collar):
    return build_operators(circle_collar)


@pytest.fixture(scope="session")
def torus_ops(torus):
    return build_operators(torus)


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance_log(request):
    """Collects one summary line per acceptance criterion."""
    return request.config.stash[_ACCEPTANCE]


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
