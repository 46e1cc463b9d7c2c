"""
Pytest configuration and fixtures
Shared fixtures available to all test modules
"""
from pathlib import Path

import numpy as np
import pytest

from chem.realism import build_registry
from chem.smiles import parse
from config.config import Config
from config.run_config import ASPIRIN, RunConfig
from utils.data_reader import DataReader
from utils.logger import get_logger

logger = get_logger(__name__)


# Pytest command line options
def pytest_addoption(parser):
    """Add custom command line options"""
    parser.addoption(
        "--corpus",
        action="store",
        default=str(Config.CORPUS_PATH),
        help="SMILES-per-line corpus used to build the test registry"
    )


@pytest.fixture(scope="session", autouse=True)
def setup_test_environment():
    """
    Session setup and teardown
    Runs once at the beginning and end of test session
    """
    logger.info("=" * 80)
    logger.info("TEST SESSION STARTED")
    logger.info(f"Configuration: {Config.get_config_summary()}")
    logger.info("=" * 80)

    Config.create_directories()

    yield

    logger.info("=" * 80)
    logger.info("TEST SESSION COMPLETED")
    logger.info("=" * 80)


@pytest.fixture(scope="session")
def corpus_path(request):
    """Get corpus path from command line"""
    return Path(request.config.getoption("--corpus"))


@pytest.fixture(scope="session")
def corpus_lines(corpus_path):
    """
    Raw corpus lines, comments included

    Returns:
        list: Lines without terminators
    """
    return DataReader.read_lines(corpus_path)


@pytest.fixture(scope="session")
def registry(corpus_lines):
    """Reference registry (diameter 4) built from the test corpus"""
    logger.info("Building session registry")
    return build_registry(corpus_lines, max_diameter=4)


@pytest.fixture(scope="session")
def registry_file(registry, tmp_path_factory):
    """Registry saved to a session temporary directory"""
    path = tmp_path_factory.mktemp("registry") / "sample.swreg"
    registry.save(path)
    return path


@pytest.fixture
def aspirin():
    """Acetylsalicylic acid graph"""
    return parse(ASPIRIN)


@pytest.fixture
def rng():
    """Seeded random source"""
    return np.random.default_rng(12345)


@pytest.fixture
def output_dir(tmp_path):
    """Fresh directory for run outputs"""
    path = tmp_path / "results"
    path.mkdir()
    return path


@pytest.fixture
def quick_config():
    """
    Small policy-mode configuration for fast engine tests

    Returns:
        RunConfig: 3 steps, 3 parents, 10 attempts per parent
    """
    return RunConfig(steps=3, parents_per_step=3, attempts_per_parent=10)
