"""Tests for the entry point's logging setup."""

import logging

import pytest

from src.cli.settings import load_config
from src.main import DEFAULT_LOG_FORMAT, logging_settings
from tests.conftest import DATA_DIR


@pytest.mark.unit
class TestLoggingSettings:
    """Tests for logging_settings."""

    def test_from_config(self):
        """Test level and format come from the logging section."""
        config = {"logging": {"level": "debug", "format": "%(levelname)s %(message)s"}}
        assert logging_settings(config) == (logging.DEBUG, "%(levelname)s %(message)s")

    def test_environment_fallback(self, monkeypatch):
        """Test LOG_LEVEL applies when the config has no level."""
        monkeypatch.setenv("LOG_LEVEL", "INFO")
        assert logging_settings({}) == (logging.INFO, DEFAULT_LOG_FORMAT)

    def test_unknown_level(self):
        """Test an unknown level name falls back to WARNING."""
        assert logging_settings({"logging": {"level": "chatty"}})[0] == logging.WARNING

    def test_bundled_config(self, monkeypatch):
        """Test the bundled config reads LOG_LEVEL through its placeholder."""
        monkeypatch.setenv("LOG_LEVEL", "ERROR")
        config = load_config(DATA_DIR.parent / "configs" / "config.yaml")
        level, log_format = logging_settings(config)
        assert level == logging.ERROR
        assert log_format == DEFAULT_LOG_FORMAT
