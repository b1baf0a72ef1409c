"""Logging configuration for the application"""
import logging
import os
from datetime import datetime

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def log_path(log_dir, day=None):
    """One file per calendar day, appended to by every run of that day"""
    day = day or datetime.now()
    return os.path.join(log_dir, f"sinkhorn-lab_{day.strftime('%Y%m%d')}.log")


def setup_logger(log_dir="logs", level=logging.INFO, to_file=True):
    """Configure logging for the entire application

    Args:
        log_dir: Directory receiving the dated log file
        level: Root logging level
        to_file: Disable to log to the console only (used by tests and `predict`)
    """
    handlers = [logging.StreamHandler()]
    if to_file:
        os.makedirs(log_dir, exist_ok=True)
        handlers.insert(0, logging.FileHandler(log_path(log_dir)))

    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers)
    return logging.getLogger("sinkhorn_lab")
