import sys
from loguru import logger
from chiralwalk.config import settings

CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan> - <level>{message}</level>"
)


def configure(level: str = None) -> None:
    """(Re)install the console sink and, if enabled, the rotating file sink."""
    logger.remove()

    logger.add(
        sys.stderr,
        colorize=True,
        format=CONSOLE_FORMAT,
        level=(level or ("DEBUG" if settings.DEBUG else settings.LOG_LEVEL)).upper()
    )

    if settings.LOG_TO_FILE:
        settings.LOG_DIR.mkdir(parents=True, exist_ok=True)
        logger.add(
            settings.LOG_DIR / "chiralwalk.log",
            rotation="500 MB",
            retention="10 days",
            level="INFO"
        )


configure()
