"""Canonical JSON encoding for bit-stable exports and input hashing."""

import hashlib
import json
import math
from typing import Any

import numpy as np

from src.utils.logger import get_logger

logger = get_logger(__name__)


def to_plain(obj: Any) -> Any:
    """Convert numpy values, tuples and non-finite floats into JSON-ready objects.

    Floats stay Python floats, so json writes their shortest round-trip repr.
    NaN and infinities become None.

    Args:
        obj (Any): Object to convert.

    Returns:
        Any: Plain structure of dict, list, str, int, float, bool and None.
    """
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def dumps_canonical(obj: Any, indent: int = 2) -> str:
    """Serialize with sorted keys and shortest round-trip floats.

    Args:
        obj (Any): Object to serialize.
        indent (int): Indentation; 0 gives a compact single line.

    Returns:
        str: JSON text terminated by a newline.
    """
    if indent:
        text = json.dumps(to_plain(obj), sort_keys=True, indent=indent, allow_nan=False)
    else:
        text = json.dumps(
            to_plain(obj), sort_keys=True, separators=(",", ":"), allow_nan=False
        )
    return text + "\n"


def input_hash(obj: Any) -> str:
    """SHA-256 of the compact canonical JSON of obj.

    Args:
        obj (Any): Resolved configuration.

    Returns:
        str: Hex digest.
    """
    digest = hashlib.sha256(dumps_canonical(obj, indent=0).encode("utf-8")).hexdigest()
    logger.debug(f"Input hash {digest[:12]}")
    return digest


def format_float(value: float) -> str:
    """Shortest round-trip decimal of a binary64 value, 'nan'/'inf' for non-finite.

    Args:
        value (float): Value to format.

    Returns:
        str: Decimal text.
    """
    return repr(float(value))
