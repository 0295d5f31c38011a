import contextvars
import logging
import sys
from logging.handlers import RotatingFileHandler
from typing import TYPE_CHECKING, Dict, Optional, Union

from src.utils.env_loader import ENV_PREFIX, get_env_flag, get_env_var, get_log_level

if TYPE_CHECKING:
    from pythonjsonlogger import jsonlogger
else:
    try:
        from pythonjsonlogger import jsonlogger
    except ImportError:
        jsonlogger = None

run_id_var: contextvars.ContextVar[Optional[str]] = contextvars.ContextVar("run_id", default=None)
command_var: contextvars.ContextVar[Optional[str]] = contextvars.ContextVar(
    "command", default=None
)

TEXT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - [%(command)s %(run_id)s] - %(message)s"
JSON_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s %(command)s %(run_id)s"

# integrator step logs drown everything else at DEBUG
QUIET_MODULES = {"src.integrator": logging.INFO}


class RunIDFilter(logging.Filter):
    """Stamp every record with the active run ID and subcommand."""

    def filter(self, record: logging.LogRecord) -> bool:
        """Add run_id and command attributes.

        Args:
            record (logging.LogRecord): Log record to tag.

        Returns:
            bool: Always returns True.
        """
        record.run_id = run_id_var.get() or "none"
        record.command = command_var.get() or "-"
        return True


class RunContext:
    """Tag log records emitted inside the block with one run's hash prefix."""

    def __init__(self, run_id: Optional[str] = None, command: Optional[str] = None):
        """Initialize run context.

        Args:
            run_id (Optional[str]): Short input hash of the run.
            command (Optional[str]): Subcommand being executed.
        """
        self.run_id = run_id
        self.command = command
        self._tokens: list = []

    def __enter__(self) -> "RunContext":
        if self.run_id:
            self._tokens.append((run_id_var, run_id_var.set(self.run_id)))
        if self.command:
            self._tokens.append((command_var, command_var.set(self.command)))
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        while self._tokens:
            var, token = self._tokens.pop()
            var.reset(token)


def setup_logging(
    level: int = logging.INFO,
    log_file: Optional[str] = None,
    json_format: bool = False,
    module_levels: Optional[Dict[str, int]] = None,
    max_bytes: int = 10 * 1024 * 1024,
    backup_count: int = 5,
) -> None:
    """Configure the root logger.

    Console output goes to stderr; stdout carries command results only.

    Args:
        level (int): Default logging level.
        log_file (Optional[str]): Rotating log file path.
        json_format (bool): One JSON object per record.
        module_levels (Optional[Dict[str, int]]): Per-module log levels.
        max_bytes (int): Max log file size before rotation.
        backup_count (int): Number of backup files to keep.
    """
    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()

    formatter: Union[jsonlogger.JsonFormatter, logging.Formatter]
    if json_format and jsonlogger:
        formatter = jsonlogger.JsonFormatter(JSON_FORMAT, datefmt="%Y-%m-%d %H:%M:%S")
    else:
        if json_format:
            logging.warning("python-json-logger not installed, using standard format")
        formatter = logging.Formatter(TEXT_FORMAT, datefmt="%Y-%m-%d %H:%M:%S")

    handlers: list = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(
            RotatingFileHandler(log_file, maxBytes=max_bytes, backupCount=backup_count)
        )
    for handler in handlers:
        handler.setLevel(level)
        handler.setFormatter(formatter)
        handler.addFilter(RunIDFilter())
        root_logger.addHandler(handler)

    for module_name, module_level in (module_levels or {}).items():
        logging.getLogger(module_name).setLevel(module_level)


def setup_logging_from_env(level_name: Optional[str] = None) -> None:
    """Configure logging from a --log-level flag and REVINT_LOG_* variables.

    The flag wins over REVINT_LOG_LEVEL. REVINT_LOG_JSON switches to JSON records and
    REVINT_LOG_FILE adds a rotating file handler.

    Args:
        level_name (Optional[str]): Level name such as "DEBUG", or None.
    """
    level = get_log_level() if level_name is None else getattr(logging, level_name.upper())
    quiet = {name: max(lvl, level) for name, lvl in QUIET_MODULES.items()}
    if get_env_flag(f"{ENV_PREFIX}LOG_INTEGRATOR"):
        quiet = {name: logging.NOTSET for name in QUIET_MODULES}
    setup_logging(
        level=level,
        log_file=get_env_var(f"{ENV_PREFIX}LOG_FILE"),
        json_format=get_env_flag(f"{ENV_PREFIX}LOG_JSON"),
        module_levels=quiet,
    )


def get_logger(name: str) -> logging.Logger:
    """Return a logger with the specified name.

    Args:
        name (str): Logger name.

    Returns:
        logging.Logger: Logger instance.
    """
    return logging.getLogger(name)


def get_run_id() -> Optional[str]:
    """Get the current run ID from context.

    Returns:
        Optional[str]: Current run ID.
    """
    return run_id_var.get()
