"""
Logging utility for the molecular design toolkit
Colored console output at the configured level, full DEBUG detail (per-step records,
skipped corpus lines) in logs/molevo.log
"""
import logging
import colorlog
from config.config import Config

LOG_FILE_NAME = 'molevo.log'
MESSAGE_FORMAT = '%(asctime)s [%(levelname)s] %(name)s: %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'
LOG_COLORS = {
    'DEBUG': 'cyan',
    'INFO': 'green',
    'WARNING': 'yellow',
    'ERROR': 'red',
    'CRITICAL': 'bold_red',
}

# marks handlers installed here, so pytest's own root handlers do not block setup
_OWNED = '_molevo_handler'


def _level_number(level):
    if isinstance(level, str):
        number = logging.getLevelName(level.upper())
        if not isinstance(number, int):
            raise ValueError(f"unknown log level: {level}")
        return number
    return int(level)


def _own(handler, level):
    handler.setLevel(level)
    setattr(handler, _OWNED, True)
    return handler


def setup_logger(name, log_file=None, level=logging.INFO, file_level=logging.DEBUG):
    """
    Setup logger with a colored console handler and an optional file handler

    Args:
        name: Logger name (None or '' configures the root logger)
        log_file: Log file path (optional); its directory is created if missing
        level: Console logging level, name or number
        file_level: File logging level, name or number

    Returns:
        logging.Logger: Configured logger instance
    """
    logger = logging.getLogger(name)
    if any(getattr(handler, _OWNED, False) for handler in logger.handlers):
        return logger

    console_level = _level_number(level)
    lowest = console_level

    console_handler = _own(colorlog.StreamHandler(), console_level)
    console_handler.setFormatter(
        colorlog.ColoredFormatter('%(log_color)s' + MESSAGE_FORMAT, datefmt=DATE_FORMAT, log_colors=LOG_COLORS)
    )
    logger.addHandler(console_handler)

    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_number = _level_number(file_level)
        file_handler = _own(logging.FileHandler(log_file, encoding='utf-8'), file_number)
        file_handler.setFormatter(logging.Formatter(MESSAGE_FORMAT, datefmt=DATE_FORMAT))
        logger.addHandler(file_handler)
        lowest = min(lowest, file_number)

    logger.setLevel(lowest)
    if name:
        # named loggers print for themselves; the root would repeat them once the CLI configures it
        logger.propagate = False
    return logger


def get_logger(name):
    """
    Get logger instance for module

    Args:
        name: Logger name (typically __name__)

    Returns:
        logging.Logger: Logger instance
    """
    return setup_logger(name, log_file=Config.LOGS_DIR / LOG_FILE_NAME, level=Config.LOG_LEVEL)


def configure_root_logging(level=None):
    """
    Configure the root logger once for command-line use

    Library modules log through ``logging.getLogger(__name__)`` and inherit these handlers.

    Args:
        level: Console level name or number; defaults to Config.LOG_LEVEL

    Returns:
        logging.Logger: Root logger
    """
    return setup_logger(None, log_file=Config.LOGS_DIR / LOG_FILE_NAME, level=level or Config.LOG_LEVEL)
