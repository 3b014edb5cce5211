"""
Entry point for the insider-threat model checker.

Loads ``.env``, configures logging from the ``logging`` config section and
runs the command-line interface.
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, Optional, Sequence, Tuple

from dotenv import load_dotenv

from src.cli.commands import run_command
from src.cli.settings import load_config, section

DEFAULT_LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

load_dotenv()
logger = logging.getLogger(__name__)


def logging_settings(config: Dict[str, Any]) -> Tuple[int, str]:
    """Level and format from the config, falling back to ``LOG_LEVEL``."""
    values = section(config, "logging")
    level_name = str(values.get("level") or os.getenv("LOG_LEVEL", "WARNING"))
    return getattr(logging, level_name.upper(), logging.WARNING), values.get("format", DEFAULT_LOG_FORMAT)


def _config_path(argv: Sequence[str]) -> Optional[str]:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", default=None)
    known, _ = parser.parse_known_args(argv)
    return known.config


def main() -> int:
    """Console-script entry point."""
    argv = sys.argv[1:]
    level, log_format = logging_settings(load_config(_config_path(argv)))
    logging.basicConfig(level=level, format=log_format, stream=sys.stderr)
    code = run_command(argv)
    logger.debug(f"Exiting with code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
