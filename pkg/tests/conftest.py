"""
Shared fixtures for the test suite.
"""

import pytest

from core.parser import load_model
from core.semantics import derive_graph
from utils.constants import FIG1_MODEL_PATH, FIG2_MODEL_PATH


@pytest.fixture
def fig1_env():
    """Two-state model leaking its high activity."""
    return load_model(FIG1_MODEL_PATH)


@pytest.fixture
def fig2_env():
    """Three-state model satisfying PSNI."""
    return load_model(FIG2_MODEL_PATH)


@pytest.fixture
def fig1_graph(fig1_env):
    return derive_graph(fig1_env)


@pytest.fixture
def fig2_graph(fig2_env):
    return derive_graph(fig2_env)


@pytest.fixture
def write_model(tmp_path):
    """Write model source to a temporary .pepa file and return its path."""
    def _write(source: str, name: str = "model.pepa"):
        path = tmp_path / name
        path.write_text(source, encoding="utf-8")
        return path
    return _write
