import logging
import sys
from fractions import Fraction
from typing import Any, Optional

import structlog

from tilelat.config import get_settings

def get_log_level(level_name: str) -> int:
    """Convert log level name to logging module level"""
    return getattr(logging, level_name.upper(), logging.INFO)


def _render_exact(value: Any) -> Any:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if hasattr(value, "to_json"):
        return value.to_json()
    if isinstance(value, (list, tuple)):
        return [_render_exact(item) for item in value]
    if isinstance(value, dict):
        return {k: _render_exact(v) for k, v in value.items()}
    return value


def _exact_values_processor(logger, method_name, event_dict):
    """Structlog processor that renders exact values for the JSON renderer.

    Fractions become "num/den" strings and sparse vectors their
    [[index, "num/den"], ...] form, so no float ever reaches a log line.
    """
    for key, value in list(event_dict.items()):
        event_dict[key] = _render_exact(value)
    return event_dict


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> None:
    """Configure structlog for the process; safe to call more than once"""
    settings = get_settings()
    level = level or settings.log_level
    fmt = fmt or settings.log_format
    renderer = structlog.dev.ConsoleRenderer() if fmt == "console" else structlog.processors.JSONRenderer()

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            _exact_values_processor,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(get_log_level(level)),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


class RunAuditLogger:
    """Audit logger for CLI runs, certificates and violations"""

    def __init__(self):
        self.logger = structlog.get_logger("audit")

    def log_command(self, command: str, config: dict, status: str, exit_code: int, duration_ms: float):
        """Log one finished command"""
        self.logger.bind(
            kind="COMMAND",
            command=command,
            config=config,
            status=status,
            exit_code=exit_code,
            duration_ms=round(duration_ms, 2),
        ).info("command_finished")

    def log_certificate(self, check: str, kind: str, count: Optional[int] = None, bound: Optional[dict] = None):
        """Log an issued certificate"""
        self.logger.bind(
            kind="CERTIFICATE",
            check=check,
            certificate=kind,
            count=count,
            bound=bound or {},
        ).info("certificate_issued")

    def log_violation(self, check: str, error: str, message: str, witness: Any = None):
        """Log a verified violation with its witness"""
        self.logger.bind(
            kind="VIOLATION",
            check=check,
            error=error,
            witness=witness,
        ).warning(message)


_audit_logger = None

def get_audit_logger() -> RunAuditLogger:
    """Get or create the run audit logger singleton"""
    global _audit_logger
    if _audit_logger is None:
        _audit_logger = RunAuditLogger()
    return _audit_logger
