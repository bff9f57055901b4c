"""Machine-readable logging: one JSON object per line on stderr."""

from __future__ import annotations

import json
import logging
import sys


class JsonLineFormatter(logging.Formatter):
    """Formats records as single-line JSON with a stage tag."""

    def format(self, record: logging.LogRecord) -> str:
        payload = {
            "level": record.levelname.lower(),
            "stage": getattr(record, "stage", record.name.split(".")[-1]),
            "event": record.getMessage(),
        }
        extra = getattr(record, "fields", None)
        if extra:
            payload.update(extra)
        return json.dumps(payload, ensure_ascii=False, default=str)


def configure_logging(level: int = logging.INFO) -> None:
    """Install the JSON-lines handler on the package logger (idempotent)."""
    root = logging.getLogger("ecograph")
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(JsonLineFormatter())
        root.addHandler(handler)
    root.setLevel(level)


class _StageAdapter(logging.LoggerAdapter):
    """Merges the stage tag with per-call extras instead of replacing them."""

    def process(self, msg, kwargs):
        extra = dict(self.extra)
        extra.update(kwargs.get("extra") or {})
        kwargs["extra"] = extra
        return msg, kwargs


def stage_logger(stage: str) -> logging.LoggerAdapter:
    """Logger whose records carry a pipeline stage tag.

    Call sites pass structured fields via ``extra={"fields": {...}}``.
    """
    logger = logging.getLogger(f"ecograph.{stage}")
    return _StageAdapter(logger, {"stage": stage})
