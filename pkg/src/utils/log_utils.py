import os
import sys
import copy
import logging
import threading
from typing import Dict, Optional

from colorama import Fore, Back, Style, init

# Initialize colorama
init(autoreset=True)

# Global log lock to prevent race conditions when writing to log files
LOG_LOCK = threading.RLock()

# Color mapping for the library components
COMPONENT_COLORS: Dict[str, str] = {
    'models': Fore.CYAN,
    'timegrid': Fore.BLUE,
    'waveop': Fore.GREEN,
    'diagnostics': Fore.MAGENTA,
    'oracle': Fore.YELLOW,
    'runner': Fore.WHITE + Style.BRIGHT,
}

# Colors for the stages of a run
STAGE_COLORS: Dict[str, str] = {
    'build': Fore.CYAN,
    'solve': Fore.GREEN,
    'diagnostics': Fore.MAGENTA,
    'write': Fore.BLUE,
}

# Log levels colors
LEVEL_COLORS = {
    'DEBUG': Fore.BLUE,
    'INFO': Fore.GREEN,
    'WARNING': Fore.YELLOW,
    'ERROR': Fore.RED,
    'CRITICAL': Fore.RED + Back.WHITE
}

# Define base log directory
BASE_LOG_DIR = os.path.join(os.getcwd(), "output", "logs")


class ColoredFormatter(logging.Formatter):
    """Formatter that prefixes the component (and run stage) of each record."""

    def __init__(self, fmt=None, datefmt=None, use_color: bool = True):
        super().__init__(fmt, datefmt)
        self.use_color = use_color

    def format(self, record):
        # Work on a copy so file and console handlers do not stack prefixes
        record = copy.copy(record)
        component = getattr(record, 'component', record.name.split('.')[-1])
        stage = getattr(record, 'stage', None)
        message = record.getMessage()

        if self.use_color:
            component_color = COMPONENT_COLORS.get(component, '')
            level_color = LEVEL_COLORS.get(record.levelname, '')
            message = f"{component_color}[{component}] {level_color}{message}{Style.RESET_ALL}"
            if stage:
                message = f"{STAGE_COLORS.get(stage, '')}[{stage}] {message}"
        else:
            message = f"[{component}] {message}"
            if stage:
                message = f"[{stage}] {message}"

        record.msg = message
        record.args = None
        return super().format(record)


class SafeFileHandler(logging.FileHandler):
    """Thread-safe file handler that uses a lock when writing."""

    def emit(self, record):
        with LOG_LOCK:
            super().emit(record)
            self.flush()


class _ComponentFilter(logging.Filter):
    """Attach a fixed component name to every record."""

    def __init__(self, component: str):
        super().__init__()
        self.component = component

    def filter(self, record):
        if not hasattr(record, 'component'):
            record.component = self.component
        return True


def setup_logger(name: str, log_file: Optional[str] = None, level=logging.INFO,
                 formatter=None, console=True):
    """
    Set up a logger with file and optional console handlers

    Args:
        name: Logger name
        log_file: Path to log file (optional)
        level: Logging level
        formatter: Optional formatter to use
        console: Whether to add console handler

    Returns:
        Logger object
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.propagate = False

    # Remove existing handlers to prevent duplicates
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)
        handler.close()

    if formatter is None:
        console_formatter = ColoredFormatter('%(asctime)s | %(message)s',
                                             datefmt='%Y-%m-%d %H:%M:%S')
        file_formatter = ColoredFormatter('%(asctime)s | %(levelname)s | %(message)s',
                                          datefmt='%Y-%m-%d %H:%M:%S',
                                          use_color=False)
    else:
        console_formatter = formatter
        file_formatter = formatter

    if console:
        console_handler = logging.StreamHandler(stream=sys.stdout)
        console_handler.setFormatter(console_formatter)
        logger.addHandler(console_handler)

    if log_file:
        os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)
        file_handler = SafeFileHandler(log_file, mode='a', encoding='utf-8')
        file_handler.setFormatter(file_formatter)
        logger.addHandler(file_handler)

        # Errors also go to a companion log
        error_log = log_file.replace('.log', '_errors.log')
        error_handler = SafeFileHandler(error_log, mode='a', encoding='utf-8', delay=True)
        error_handler.setFormatter(file_formatter)
        error_handler.setLevel(logging.ERROR)
        logger.addHandler(error_handler)

    return logger


def get_module_logger(component: str, level=None):
    """
    Get the console logger of a library component.

    Args:
        component: Component name (e.g. 'waveop', 'models')
        level: Optional level override; defaults to WAVEOP_LOG_LEVEL or INFO

    Returns:
        Logger instance
    """
    name = f"waveop.{component}"
    logger = logging.getLogger(name)
    if logger.handlers and level is None:
        return logger

    if level is None:
        level = os.environ.get("WAVEOP_LOG_LEVEL", "INFO").upper()
    logger = setup_logger(name, level=level)
    for handler in logger.handlers:
        handler.addFilter(_ComponentFilter(component))
    return logger


def get_run_logger(run_name: str, log_dir: Optional[str] = None, level=logging.INFO):
    """
    Get a logger for one run, writing to <log_dir>/<run_name>.log.

    Args:
        run_name: Name of the run (preset or config name)
        log_dir: Directory for the log files (defaults to output/logs/runs)
        level: Logging level

    Returns:
        Logger instance
    """
    log_dir = log_dir or os.path.join(BASE_LOG_DIR, "runs")
    log_file = os.path.join(log_dir, f"{run_name}.log")
    logger = setup_logger(f"waveop.run.{run_name}", log_file, level=level)
    for handler in logger.handlers:
        handler.addFilter(_ComponentFilter('runner'))
    return logger


def attach_file_handler(logger: logging.Logger, log_file: str) -> logging.Handler:
    """
    Mirror an existing component logger into a run log file.

    Returns:
        The handler, so the caller can detach it when the run ends
    """
    os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)
    handler = SafeFileHandler(log_file, mode='a', encoding='utf-8')
    handler.setFormatter(ColoredFormatter('%(asctime)s | %(levelname)s | %(message)s',
                                          datefmt='%Y-%m-%d %H:%M:%S', use_color=False))
    logger.addHandler(handler)
    return handler


def log_with_context(logger, level, message, stage=None, **kwargs):
    """
    Log a message with run-stage context.

    Args:
        logger: Logger to use
        level: Log level name (e.g., 'INFO', 'ERROR')
        message: Log message
        stage: Run stage ('build', 'solve', 'diagnostics', 'write')
        **kwargs: Additional log record attributes
    """
    extra = dict(kwargs)
    if stage:
        extra['stage'] = stage
    logger.log(getattr(logging, level, logging.INFO), message, extra=extra)
