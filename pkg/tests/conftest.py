"""Pytest configuration and shared fixtures."""

from pathlib import Path

import pytest

from src.cli.commands import load_validated
from src.core.kripke import ExplorationConfig, explore

DATA_DIR = Path(__file__).parent.parent / "data"


@pytest.fixture
def sn_path():
    """Path of the bundled social-network scenario."""
    return DATA_DIR / "sn_scenario.model"


@pytest.fixture
def sn_aware_path():
    """Scenario with Alice suspicious (awareness intervention)."""
    return DATA_DIR / "sn_aware.model"


@pytest.fixture
def sn_no_readers_path():
    """Scenario with the diary posted without readers."""
    return DATA_DIR / "sn_no_readers.model"


@pytest.fixture
def sn_model(sn_path):
    """Validated social-network scenario."""
    return load_validated(str(sn_path))


@pytest.fixture
def sn_aware_model(sn_aware_path):
    return load_validated(str(sn_aware_path))


@pytest.fixture
def sn_no_readers_model(sn_no_readers_path):
    return load_validated(str(sn_no_readers_path))


def _explore(model, **limits):
    return explore(model.initial, model.declarations, model.postables, ExplorationConfig(**limits))


@pytest.fixture
def sn_kripke(sn_model):
    """Completely explored Kripke model of the scenario."""
    return _explore(sn_model)


@pytest.fixture
def sn_aware_kripke(sn_aware_model):
    return _explore(sn_aware_model)


@pytest.fixture
def sn_no_readers_kripke(sn_no_readers_model):
    return _explore(sn_no_readers_model)
