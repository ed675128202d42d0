from __future__ import annotations
import logging, sys
from contextvars import ContextVar
from typing import Any

import numpy as np
import orjson
import structlog

run_id_var: ContextVar[str | None] = ContextVar("run_id", default=None)

_RUN_KEYS = ("run_id", "scenario", "kind")


def _plain_numbers(_logger, _method, event_dict: dict[str, Any]) -> dict[str, Any]:
    """numpy scalars render as bare numbers; small float arrays become lists."""
    for key, value in event_dict.items():
        if isinstance(value, np.generic):
            event_dict[key] = value.item()
        elif isinstance(value, np.ndarray) and value.size <= 16:
            event_dict[key] = value.tolist()
    return event_dict


def _dumps(obj: Any, **_kw: Any) -> str:
    return orjson.dumps(obj, default=str, option=orjson.OPT_SERIALIZE_NUMPY).decode()


def configure_logging(level: str = "INFO", json_logs: bool = False) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        stream=sys.stdout,
        format="%(message)s",
    )

    processors = [
        structlog.contextvars.merge_contextvars,
        structlog.processors.add_log_level,
        structlog.processors.TimeStamper(fmt="iso", utc=True),
        _plain_numbers,
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
    ]
    if json_logs:
        processors.append(structlog.processors.JSONRenderer(serializer=_dumps))
    else:
        processors.append(structlog.dev.ConsoleRenderer())

    structlog.configure(
        processors=processors,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.make_filtering_bound_logger(
            getattr(logging, level.upper(), logging.INFO)
        ),
        cache_logger_on_first_use=False,
    )

def get_logger(name: str = "reconnect2d"):
    return structlog.get_logger(name)

def bind_run_id(run_id: str | None, **context: Any) -> None:
    """Tag every event of the current run; ``context`` may carry scenario and kind."""
    run_id_var.set(run_id)
    structlog.contextvars.bind_contextvars(run_id=run_id or "-", **context)

def clear_run_id() -> None:
    run_id_var.set(None)
    structlog.contextvars.unbind_contextvars(*_RUN_KEYS)
