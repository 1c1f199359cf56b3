# hnls/observability/logger.py
"""
Structured logger. Writes JSON lines to stderr and, when HNLS_EVENT_LOG is
set, appends the same lines to that file.
stdout stays free for command results.
"""

import logging
import os
import sys
from typing import Any, Dict, Optional

import structlog

_configured = False


def _append_event_log(logger, method_name, rendered: str) -> str:
    path = os.getenv("HNLS_EVENT_LOG")
    if path:
        with open(path, "a", encoding="utf-8") as f:
            f.write(rendered + "\n")
    return rendered


def configure_logging(level: Optional[str] = None) -> None:
    """(Re)configure structlog. Level defaults to HNLS_LOG_LEVEL or INFO."""
    global _configured
    level_name = (level or os.getenv("HNLS_LOG_LEVEL", "INFO")).upper()
    numeric = logging.getLevelName(level_name)
    if not isinstance(numeric, int):
        numeric = logging.INFO
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso", utc=True, key="ts"),
            structlog.processors.format_exc_info,
            structlog.processors.JSONRenderer(sort_keys=True),
            _append_event_log,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
    _configured = True


def get_logger(name: str):
    if not _configured:
        configure_logging()
    return structlog.get_logger().bind(logger=name)


def log_event(event_type: str, payload: Dict[str, Any]) -> None:
    """One record per event: {"ts", "event", "payload", "level"}."""
    get_logger("hnls.events").info(event_type, payload=payload)
