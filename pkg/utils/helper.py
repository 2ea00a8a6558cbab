import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from utils.configHandler import ConfigHandler


@dataclass
class HelperReport:
    """
    Manages log file size and the number format of every written artefact.

    Attributes:
        config_data (ConfigHandler): settings; the default config.ini when omitted.
        LOG_FILE (str): Path to the log file.
        MAX_LOG_SIZE (int): Maximum allowed log file size in bytes.
        SIGNIFICANT_DIGITS (int): digits kept by format_number.

    Methods:
        check_log_sizes(): Deletes the log file if it exceeds the maximum size.
        format_number(value) -> str: positional text with fixed significant digits, empty for None.
    """

    config_data: Optional[ConfigHandler] = None
    LOG_FILE: str = field(init=False)
    MAX_LOG_SIZE: int = field(init=False)
    SIGNIFICANT_DIGITS: int = field(init=False)

    def __post_init__(self):
        config_handler = self.config_data or ConfigHandler()
        self.LOG_FILE = str(config_handler.get_name_log())
        self.MAX_LOG_SIZE = int(config_handler.get_log_size())
        self.SIGNIFICANT_DIGITS = int(config_handler.get_significant_digits())

    def check_log_sizes(self):
        if os.path.exists(self.LOG_FILE) and os.path.getsize(self.LOG_FILE) > self.MAX_LOG_SIZE:
            os.remove(self.LOG_FILE)

    def format_number(self, value: Optional[float]) -> str:
        if value is None or math.isnan(value):
            return ""
        # -0 and 0 print the same; positional, never exponent form
        return np.format_float_positional(float(value) + 0.0, precision=self.SIGNIFICANT_DIGITS, unique=False,
                                          fractional=False, trim="-")
