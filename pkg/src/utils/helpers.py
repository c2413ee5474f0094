"""
Helper utilities for CovertLink
"""

import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Union

import numpy as np

logger = logging.getLogger(__name__)

VERSION_FILE = Path(__file__).resolve().parents[2] / "config" / "version.json"


def ensure_directory_exists(directory_path: Union[str, Path]) -> bool:
    """Create directory if it doesn't exist"""
    try:
        os.makedirs(directory_path, exist_ok=True)
        return True
    except OSError as e:
        logger.error(f"Failed to create directory {directory_path}: {e}")
        return False


def format_duration(seconds: float) -> str:
    """Format duration in seconds to human readable format"""
    if seconds < 60:
        return f"{seconds:.1f}s"
    elif seconds < 3600:
        minutes = seconds // 60
        remaining_seconds = seconds % 60
        return f"{int(minutes)}m {remaining_seconds:.0f}s"
    else:
        hours = seconds // 3600
        minutes = (seconds % 3600) // 60
        return f"{int(hours)}h {int(minutes)}m"


def to_plain(value: Any) -> Any:
    """
    Convert numpy scalars/arrays and non-finite floats into JSON-safe values

    NaN and infinities become None so documents stay standard JSON.
    """
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def load_json_safely(file_path: Union[str, Path]) -> dict:
    """Load JSON file safely with error handling"""
    try:
        with open(file_path, 'r') as f:
            return json.load(f)
    except FileNotFoundError:
        logger.warning(f"JSON file not found: {file_path}")
        return {}
    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in {file_path}: {e}")
        return {}


def get_version_info() -> dict:
    """Version metadata from config/version.json, with safe defaults"""
    info = load_json_safely(VERSION_FILE)
    return {
        'current_version': info.get('current_version', '0.0.0'),
        'release_date': info.get('release_date', ''),
        'schema_version': int(info.get('schema_version', 1)),
    }
