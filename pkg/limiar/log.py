"""Logging helpers.

Library modules obtain their logger with ``get_logger(__name__)`` and never
touch handlers. Only the CLI calls :func:`configure_logging`, which sends
records to stderr so that stdout summaries and ``--out`` files stay clean.
"""

import logging
import sys

ROOT_LOGGER_NAME = "limiar"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

logging.getLogger(ROOT_LOGGER_NAME).addHandler(logging.NullHandler())


def get_logger(name: str) -> logging.Logger:
    """Return a logger inside the ``limiar`` namespace.

    Args:
        name: Usually ``__name__`` of the calling module.

    Returns:
        logging.Logger: The named logger.
    """
    if name != ROOT_LOGGER_NAME and not name.startswith(ROOT_LOGGER_NAME + "."):
        name = f"{ROOT_LOGGER_NAME}.{name}"
    return logging.getLogger(name)


def configure_logging(level: str | int = "WARNING") -> None:
    """Install a single stderr handler on the package logger.

    Calling it again replaces the previous handler instead of stacking them.

    Args:
        level: A level name such as ``"INFO"`` or a numeric level.
    """
    root = logging.getLogger(ROOT_LOGGER_NAME)
    for handler in list(root.handlers):
        if not isinstance(handler, logging.NullHandler):
            root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    if isinstance(level, str):
        level = level.upper()
    root.setLevel(level)
