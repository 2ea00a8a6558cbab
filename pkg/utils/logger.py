import logging
from dataclasses import dataclass, field
from typing import Optional

from utils.configHandler import ConfigHandler
from utils.helper import HelperReport

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


@dataclass
class LoggerHandler:
    """
    Handles application logging by configuring console and file loggers.

    Attributes:
        name (str): Logger name.
        config_data (ConfigHandler): settings for the log file, size and level.
        logger (logging.Logger): Configured logger instance.

    Methods:
        get_logger() -> logging.Logger: Returns the configured logger instance.
    """

    name: str = "causabound"
    config_data: Optional[ConfigHandler] = None
    logger: logging.Logger = field(init=False)

    def __post_init__(self):
        config_handler = self.config_data or ConfigHandler()
        HelperReport(config_handler).check_log_sizes()
        level = getattr(logging, config_handler.get_log_level(), logging.INFO)

        self.logger = logging.getLogger(self.name)
        self.logger.setLevel(level)

        # previous handlers would duplicate every line on re-initialisation
        if self.logger.hasHandlers():
            self.logger.handlers.clear()

        console_handler = logging.StreamHandler()
        console_handler.setLevel(level)
        file_handler = logging.FileHandler(str(config_handler.get_name_log()), mode="a", encoding="utf-8")
        file_handler.setLevel(level)

        formatter = logging.Formatter(LOG_FORMAT)
        console_handler.setFormatter(formatter)
        file_handler.setFormatter(formatter)

        self.logger.addHandler(console_handler)
        self.logger.addHandler(file_handler)

    def get_logger(self) -> logging.Logger:
        return self.logger
