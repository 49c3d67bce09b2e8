"""
Structured logging configuration.
Loads from config/logging.yaml and sets up handlers.
"""

import logging
import logging.config
import logging.handlers
import os
from typing import Optional

import yaml

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
JSON_FORMAT = '{"time":"%(asctime)s","level":"%(levelname)s","logger":"%(name)s","message":"%(message)s"}'


def setup_logging(
    config_path: str = "config/logging.yaml",
    default_level: int = logging.INFO,
    log_dir: Optional[str] = None,
):
    """
    Initialize logging from YAML config.
    Falls back to basic config (stderr) if the YAML file is unavailable.

    Args:
        config_path: dictConfig YAML file
        default_level: root level; overrides the YAML root level
        log_dir: if given, also write JSON-line logs to <log_dir>/pegnn.log
    """
    if os.path.exists(config_path):
        with open(config_path, "r", encoding="utf-8") as f:
            config = yaml.safe_load(f)
        logging.config.dictConfig(config)
        logging.getLogger().setLevel(default_level)
        logging.getLogger(__name__).debug(f"Logging configured from {config_path}")
    else:
        logging.basicConfig(level=default_level, format=LOG_FORMAT, datefmt=DATE_FORMAT, force=True)
        logging.getLogger(__name__).warning(
            f"Logging config not found at {config_path}, using basic config"
        )

    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        handler = logging.handlers.RotatingFileHandler(
            os.path.join(log_dir, "pegnn.log"), maxBytes=10 * 1024 * 1024, backupCount=3, encoding="utf-8"
        )
        handler.setLevel(logging.DEBUG)
        handler.setFormatter(logging.Formatter(JSON_FORMAT, datefmt="%Y-%m-%dT%H:%M:%S"))
        logging.getLogger().addHandler(handler)
