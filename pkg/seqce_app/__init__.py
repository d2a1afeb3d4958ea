import logging
from pathlib import Path

# Get the package directory
package_root = Path(__file__).parent

__version__ = (package_root / "VERSION").read_text(encoding="utf8").strip()


def setup_logging(level=None):
    """Configure root logging for the seqce tools and return the package logger."""
    from seqce_app.config import Config

    level = level or Config.LOG_LEVEL
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    logging.getLogger("seqce_app.services").setLevel(level)

    # Get a logger for the app
    logger = logging.getLogger("seqce")
    logger.setLevel(level)

    logger.debug(f"seqce {__version__} logging configured at {logging.getLevelName(level)}")
    return logger
