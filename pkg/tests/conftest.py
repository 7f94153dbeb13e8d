import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for `oracles` / helpers

from hangul_coach.demo import build_demo, build_toy_training


@pytest.fixture(scope="session")
def demo_dir(tmp_path_factory) -> Path:
    """Demo corpus + mock table + init model + config, built once."""
    dest = tmp_path_factory.mktemp("demo")
    build_demo(dest)
    return dest


@pytest.fixture(scope="session")
def toy_dir(tmp_path_factory) -> Path:
    """Two-class toy training WAVs + pairs.json, built once."""
    dest = tmp_path_factory.mktemp("toy")
    build_toy_training(dest)
    return dest


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
