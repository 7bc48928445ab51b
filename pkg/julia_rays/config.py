import logging
import os

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 30
DEFAULT_SUBSTEPS = 4


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"{name}={raw!r} is not an integer, using {default}")
        return default
    if value < 1:
        logger.warning(f"{name}={raw!r} must be positive, using {default}")
        return default
    return value


def thread_count() -> int:
    """Worker cap for tracing, sampling and rendering (JULIA_RAYS_THREADS)."""
    raw = os.getenv("JULIA_RAYS_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    return _int_env("JULIA_RAYS_THREADS", 1)


def log_level() -> str:
    return os.getenv("JULIA_RAYS_LOG_LEVEL", "INFO").upper()


def default_depth() -> int:
    return _int_env("JULIA_RAYS_DEFAULT_DEPTH", DEFAULT_DEPTH)


def default_substeps() -> int:
    return _int_env("JULIA_RAYS_DEFAULT_SUBSTEPS", DEFAULT_SUBSTEPS)


def configure_logging() -> None:
    """Called by entry points only; library modules never configure logging."""
    logging.basicConfig(
        level=getattr(logging, log_level(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
