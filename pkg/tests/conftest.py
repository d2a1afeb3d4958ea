import logging
import sys
from pathlib import Path

import numpy as np
import pytest

# Add the project root to the Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from seqce_app.config import Config
from test_result_logger import get_summary, reset_results

logger = logging.getLogger(__name__)


@pytest.fixture
def rng():
    """Fresh seeded generator for each test."""
    return np.random.default_rng(12345)


@pytest.fixture
def write_config(tmp_path):
    """Write KEY=VALUE lines to a config file and return its path."""
    def _write(text: str, name: str = "experiment.env") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf8")
        return path
    return _write


@pytest.fixture
def minimal_sim_config(write_config):
    """1 SNR, 2 copies, 10 realizations, 1 estimator."""
    return write_config(
        "SNR_DB_LIST=0\n"
        "NUM_SUBCARRIERS=4\n"
        "NUM_COPIES=2\n"
        "NUM_REALIZATIONS=10\n"
        "SEED=7\n"
        "CHANNEL=iid_flat\n"
        "ESTIMATORS=proposed\n"
    )


@pytest.fixture
def small_block_size(monkeypatch):
    """Several blocks even for small realization counts."""
    monkeypatch.setattr(Config, "BLOCK_SIZE", 7)
    return Config.BLOCK_SIZE


@pytest.fixture(scope="session")
def acceptance_results():
    """Start a fresh metrics file for the session and report the tally at the end."""
    reset_results()
    yield
    summary = get_summary()
    logger.info(f"Acceptance runs: {summary['passed']} passed, {summary['failed']} failed of {summary['total']}")
