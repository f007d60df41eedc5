from chp_power.utils.logger import ChpLogger, get_logger

__all__ = ["ChpLogger", "get_logger"]
