from __future__ import annotations

import json
import logging
import sys
from typing import Any

from .config import settings

_EXTRA_KEYS = ("scenario", "p", "seed", "replicates", "threads", "check", "path")


class RunIdFilter(logging.Filter):
    """Stamp every record with the active run id (scenario + seed)."""

    def __init__(self, run_id: str = "") -> None:
        super().__init__()
        self.run_id = run_id

    def filter(self, record: logging.LogRecord) -> bool:
        if not getattr(record, "run_id", ""):
            record.run_id = self.run_id
        return True


class JsonFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        obj: dict[str, Any] = {
            "ts": record.created,
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        run_id = getattr(record, "run_id", None)
        if run_id:
            obj["run_id"] = run_id
        if record.exc_info and record.exc_info[0]:
            obj["exception"] = self.formatException(record.exc_info)
        for key in _EXTRA_KEYS:
            val = getattr(record, key, None)
            if val is not None:
                obj[key] = val
        return json.dumps(obj, default=str)


def get_logger(name: str | None = None) -> logging.Logger:
    return logging.getLogger(name or "paradigmlab")


def setup_logging(run_id: str = "", *, level: str | None = None, fmt: str | None = None) -> None:
    level_name = (level or settings.log_level).upper()
    root = logging.getLogger()
    root.setLevel(getattr(logging, level_name, logging.INFO))
    for h in root.handlers[:]:
        root.removeHandler(h)
    # stderr keeps stdout free for `paradigm-lab params` output.
    handler = logging.StreamHandler(sys.stderr)
    handler.addFilter(RunIdFilter(run_id))
    if (fmt or settings.log_format) == "json":
        handler.setFormatter(JsonFormatter())
    else:
        handler.setFormatter(
            logging.Formatter("%(asctime)s | %(levelname)-8s | %(name)s | %(message)s")
        )
    root.addHandler(handler)
