"""Logging setup shared by the command-line scripts."""

import logging
import os
from datetime import datetime

from config import LOGS_DIR


def setup_logging(log_dir: str = LOGS_DIR, prefix: str = "run", level: int = logging.INFO) -> str:
    """
    Set up logging to both file and console.

    The console handler writes to stderr so that tables and JSON written to
    stdout stay machine-readable.

    Args:
        log_dir: Directory for the log file
        prefix: Log file name prefix, usually the command name
        level: Root logging level

    Returns:
        Path to the log file
    """
    os.makedirs(log_dir, exist_ok=True)

    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    log_file = os.path.join(log_dir, f"{prefix}_{timestamp}.log")

    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_file),
            logging.StreamHandler()
        ],
        force=True,
    )

    return log_file
