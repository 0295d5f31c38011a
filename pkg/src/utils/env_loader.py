import logging
import os
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

ENV_PREFIX = "REVINT_"


def get_env_var(key: str, default: Optional[str] = None) -> Optional[str]:
    """Retrieve an environment variable.

    Args:
        key (str): Environment variable name.
        default (Optional[str]): Default value.

    Returns:
        Optional[str]: Environment variable value.
    """
    return os.getenv(key, default)


def get_env_flag(key: str, default: bool = False) -> bool:
    """Read a boolean switch such as REVINT_LOG_JSON=1.

    Args:
        key (str): Environment variable name.
        default (bool): Value when unset.

    Returns:
        bool: True for 1/true/yes/on.
    """
    value = get_env_var(key)
    if value is None:
        return default
    return value.strip().lower() in ("1", "true", "yes", "on")


def get_env_int(key: str, default: int) -> int:
    """Read an integer setting, falling back to the default on garbage.

    Args:
        key (str): Environment variable name.
        default (int): Value when unset or unparsable.

    Returns:
        int: Parsed value.
    """
    value = get_env_var(key)
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        return default


def get_log_level(default: int = logging.INFO) -> int:
    """Resolve REVINT_LOG_LEVEL to a logging level.

    Args:
        default (int): Level when unset or unknown.

    Returns:
        int: Logging level.
    """
    name = (get_env_var(f"{ENV_PREFIX}LOG_LEVEL") or "").strip().upper()
    level = logging.getLevelName(name) if name else default
    return level if isinstance(level, int) else default
