from .configHandler import ConfigHandler, RunConfigHandler
from .helper import HelperReport
from .logger import LoggerHandler
