from pathlib import Path

import pytest

from app.core.config import Settings
from app.models.graph import Graph, build_graph
from app.services.generator_service import GeneratorService
from tests.strategies import PETERSEN_EDGES

FIXTURES = Path(__file__).parent / "fixtures"


def pytest_addoption(parser):
    parser.addoption(
        "--update-golden", action="store_true", default=False,
        help="record outputs of golden tests under tests/fixtures instead of comparing",
    )


class GoldenFiles:
    """Recorded outputs under tests/fixtures, compared byte for byte"""

    def __init__(self, root: Path, update: bool):
        self.root = root
        self.update = update

    def path(self, name: str) -> Path:
        return self.root / name

    def check(self, name: str, text: str) -> None:
        path = self.path(name)
        if self.update:
            path.write_text(text)
            return
        if not path.exists():
            pytest.skip(f"{name} is not recorded yet; run this test with --update-golden")
        assert text == path.read_text()


@pytest.fixture
def golden(request) -> GoldenFiles:
    return GoldenFiles(FIXTURES, request.config.getoption("--update-golden"))


@pytest.fixture
def settings():
    """Settings with library defaults, independent of the environment"""
    return Settings(
        PERC_LAB_THREADS=1,
        PERC_LAB_LOG_LEVEL="INFO",
        PERC_LAB_SPECTRAL_TOL=1e-9,
        PERC_LAB_SPECTRAL_MAX_ITER=100_000,
        PERC_LAB_RESTART_CAP=10_000,
    )


@pytest.fixture
def generator(settings):
    return GeneratorService(settings)


@pytest.fixture
def k4(generator) -> Graph:
    return generator.complete_graph(4)


@pytest.fixture
def k5(generator) -> Graph:
    return generator.complete_graph(5)


@pytest.fixture
def c8(generator) -> Graph:
    return generator.cycle_graph(8)


@pytest.fixture
def petersen() -> Graph:
    return build_graph(10, PETERSEN_EDGES)


@pytest.fixture
def path4() -> Graph:
    return build_graph(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def two_triangles() -> Graph:
    return build_graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
