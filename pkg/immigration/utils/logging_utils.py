"""Logging for the command line and for replicate worker processes.

Every process logs through its own ``immigration-process-<pid>`` logger; the
level travels between processes in ``IMMIGRATION_LOG_LEVEL``. Pool workers are
started with :func:`init_worker` so they pick up the parent's level even when
the pool uses the ``spawn`` start method, and messages about one replicate go
through :func:`replicate_logger` so they carry the replicate index.
Everything is written to stderr; stdout holds only the one-line run summary.
"""

import logging
import os


LOGGER_NAME = "immigration"
LOGLEVEL_KEY = "IMMIGRATION_LOG_LEVEL"
DEFAULT_LEVEL = "WARNING"


def _get_formatter(loglevel="INFO"):
    warn_fmt = "[%(asctime)s] %(levelname)s - %(message)s"
    debug_fmt = "[%(asctime)s] [%(processName)s %(filename)s:%(lineno)d] %(levelname)s - %(message)s"
    fmt = debug_fmt if loglevel.upper() == "DEBUG" else warn_fmt
    return logging.Formatter(
        fmt=fmt,
        datefmt="%Y-%b-%d %H:%M:%S %Z",
    )


def remove_all_handlers(logger):
    while logger.handlers:
        logger.removeHandler(logger.handlers[0])


def current_level() -> str:
    """Level exported by the last :func:`configure_logger` call."""
    return os.environ.get(LOGLEVEL_KEY, DEFAULT_LEVEL).upper()


def configure_logger(loglevel=None, logger_name=LOGGER_NAME, logfile=None):
    """Configure the stderr (and optional file) handler of an immigration logger.

    The level is exported through ``IMMIGRATION_LOG_LEVEL`` so that replicate
    workers started later configure themselves identically.
    """
    if loglevel is None:
        loglevel = current_level()
    else:
        os.environ[LOGLEVEL_KEY] = loglevel
    loglevel = loglevel.upper()

    logger = logging.getLogger(logger_name)
    logger.setLevel(loglevel)
    remove_all_handlers(logger)
    logger.propagate = False

    formatter = _get_formatter(loglevel)

    def _prep_handler(handler):
        handler.setLevel(loglevel)
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    _prep_handler(logging.StreamHandler())

    if logfile is not None:
        _prep_handler(logging.FileHandler(logfile, mode="a"))

    return logger


def get_logger(base_name=LOGGER_NAME):
    """Logger of the calling process, configured on first use."""
    logger_name = f"{base_name}-process-{os.getpid()}"
    logger = logging.getLogger(logger_name)
    if not logger.handlers:
        configure_logger(loglevel=os.environ.get(LOGLEVEL_KEY), logger_name=logger_name)
    return logger


def init_worker(loglevel: str):
    """``ProcessPoolExecutor`` initializer for replicate workers."""
    configure_logger(loglevel, logger_name=f"{LOGGER_NAME}-process-{os.getpid()}")


class ReplicateAdapter(logging.LoggerAdapter):
    def process(self, msg, kwargs):
        return f"replicate {self.extra['replicate']}: {msg}", kwargs


def replicate_logger(index: int) -> ReplicateAdapter:
    return ReplicateAdapter(get_logger(), {"replicate": int(index)})
