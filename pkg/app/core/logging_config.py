import os
import sys

from dotenv import load_dotenv
from loguru import logger

load_dotenv()

LOG_DIR = os.getenv("RADIAL_LOG_DIR")
LOG_LEVEL = os.getenv("RADIAL_LOG_LEVEL", "WARNING")

# Remove default handler
logger.remove()

# Console: stays quiet so the error JSON on stderr is the last line
logger.add(
    sys.stderr,
    level=LOG_LEVEL,
    format="{time:HH:mm:ss} | {level} | {message}",
)

if LOG_DIR:
    # Create folder if missing
    if not os.path.exists(LOG_DIR):
        os.makedirs(LOG_DIR)

    # General application log
    logger.add(
        f"{LOG_DIR}/app.log",
        rotation="1 week",
        retention="4 weeks",
        level="INFO",
        enqueue=True,
        format="{time} | {level} | {message}"
    )

    # Integration / blow-up logs
    logger.add(
        f"{LOG_DIR}/solver.log",
        rotation="1 week",
        retention="4 weeks",
        level="DEBUG",
        enqueue=True,
        filter=lambda record: record["extra"].get("log_type") in ("solver", "picard"),
        format="{time} | {level} | {message}"
    )

    # Sweep progress logs
    logger.add(
        f"{LOG_DIR}/sweep.log",
        rotation="1 week",
        retention="4 weeks",
        level="INFO",
        enqueue=True,
        filter=lambda record: record["extra"].get("log_type") == "sweep",
        format="{time} | {level} | {message}"
    )

    # Error logs
    logger.add(
        f"{LOG_DIR}/errors.log",
        rotation="1 week",
        retention="8 weeks",
        level="ERROR",
        enqueue=True,
    )


def get_logger():
    return logger
