import logging
import logging.handlers
import os
from datetime import datetime

from core._compat import UTC

LOG_DIR = "logs"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(log_level: int = logging.INFO, tool_name: str | None = None, log_dir: str = LOG_DIR):
    os.makedirs(log_dir, exist_ok=True)

    log_formatter = logging.Formatter(LOG_FORMAT, datefmt="%Y-%m-%d %H:%M:%S")
    log_formatter.converter = lambda *args: datetime.now(UTC).timetuple()

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(log_formatter)
    console_handler.setLevel(log_level)

    if tool_name:
        log_file_name = os.path.join(log_dir, f"{tool_name.lower().replace(' ', '_')}.log")
    else:
        log_file_name = os.path.join(log_dir, "pec.log")

    file_handler = logging.handlers.TimedRotatingFileHandler(
        log_file_name, when="midnight", interval=1, backupCount=7, encoding="utf-8"
    )
    file_handler.setFormatter(log_formatter)
    file_handler.setLevel(log_level)

    app_logger = logging.getLogger()
    if not app_logger.handlers:
        app_logger.setLevel(log_level)
        app_logger.addHandler(console_handler)
        app_logger.addHandler(file_handler)
        app_logger.info(
            f"Logging setup complete. Log level: {logging.getLevelName(log_level)}. Logging to: {log_file_name}"
        )
    else:
        app_logger.setLevel(log_level)
        for handler in app_logger.handlers:
            handler.setLevel(log_level)


def parse_log_level(name: str | None, default: int = logging.INFO) -> int:
    "Maps 'DEBUG', 'info', ... to the logging constant; unknown names give `default`."
    if not name:
        return default
    level = logging.getLevelName(str(name).upper())
    return level if isinstance(level, int) else default


def get_tool_logger(tool_name: str) -> logging.Logger:
    return logging.getLogger(f"tool.{tool_name}")
