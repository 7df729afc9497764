import sys

from loguru import logger

from qstat.config import environment

logger_format = (
    # "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)
logger.remove()
logger.add(sys.stderr, format=logger_format, level=environment().log_level)

logger.add("qstat.log", rotation="10 MB", retention="7 days", level="DEBUG")
