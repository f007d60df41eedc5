"""
Structured logging configuration for the CHP market power engine.
Uses structlog; records go to stderr so stdout carries only results.
"""
import logging
import sys
from typing import Any, List

import structlog
from structlog.contextvars import merge_contextvars
from structlog.processors import (
    JSONRenderer,
    TimeStamper,
    UnicodeDecoder,
    add_log_level,
    format_exc_info,
)
from structlog.stdlib import BoundLogger, LoggerFactory, add_logger_name, filter_by_level
from structlog.types import Processor

from chp_power.core.config.settings import settings


class ChpLogger:
    """Main logger class for the engine."""

    _configured = False

    @classmethod
    def _get_processors(cls) -> List[Processor]:
        """Get log processors based on the configured format."""
        processors: List[Processor] = [
            merge_contextvars,
            add_log_level,
            add_logger_name,
            TimeStamper(fmt="iso", utc=True),
            UnicodeDecoder(),
            filter_by_level,
            format_exc_info,
        ]

        if settings.LOG_FORMAT == "json":
            processors.append(JSONRenderer())
        else:
            processors.append(structlog.dev.ConsoleRenderer(colors=False))

        return processors

    @classmethod
    def _configure_logging(cls) -> None:
        """Configure structlog and standard logging."""
        if cls._configured:
            return

        log_level_num = getattr(logging, settings.LOG_LEVEL, logging.INFO)

        structlog.configure(
            processors=cls._get_processors(),
            wrapper_class=structlog.make_filtering_bound_logger(log_level_num),
            logger_factory=LoggerFactory(),
            cache_logger_on_first_use=False,
        )

        logging.basicConfig(format="%(message)s", level=log_level_num, stream=sys.stderr)
        if settings.LOG_FILE:
            handler = logging.FileHandler(settings.LOG_FILE, encoding="utf-8")
            handler.setFormatter(logging.Formatter("%(message)s"))
            logging.getLogger().addHandler(handler)

        cls._configured = True

    @classmethod
    def reset(cls) -> None:
        """Forget the current configuration so the next logger re-reads settings."""
        structlog.reset_defaults()
        cls._configured = False

    @classmethod
    def get_logger(cls, name: str = "chp_power") -> BoundLogger:
        """Get a logger instance."""
        cls._configure_logging()
        return structlog.get_logger(name)

    @classmethod
    def bind_context(cls, **kwargs: Any) -> None:
        """Bind context variables to all subsequent log calls."""
        structlog.contextvars.bind_contextvars(**kwargs)

    @classmethod
    def clear_context(cls) -> None:
        structlog.contextvars.clear_contextvars()


def get_logger(name: str = "chp_power") -> BoundLogger:
    """Get a named logger instance."""
    return ChpLogger.get_logger(name)

