"""
report_io.py

JSON / JSON-lines output. One record is one line, written under a
process-wide lock so concurrent writers never interleave partial lines.
"""

from __future__ import annotations

import json
import os
import sys
import threading
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, TextIO

_EMIT_LOCK = threading.Lock()


def utc_now() -> str:
    return datetime.now(timezone.utc).replace(tzinfo=None).isoformat() + "Z"


def ensure_dir(path: str) -> None:
    if path:
        os.makedirs(path, exist_ok=True)


def _default(value: Any) -> Any:
    # Fractions, flint scalars and numpy scalars fall back to text / float
    if hasattr(value, "item"):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return str(value)


def to_json_line(record: Dict[str, Any]) -> str:
    return json.dumps(record, ensure_ascii=False, default=_default)


def emit_record(record: Dict[str, Any], path: Optional[str] = None, stream: Optional[TextIO] = None) -> str:
    """Append one record as a JSON line to `path`, or write it to stdout."""
    line = to_json_line(record)
    with _EMIT_LOCK:
        if path:
            ensure_dir(os.path.dirname(path))
            with open(path, "a", encoding="utf-8") as f:
                f.write(line + "\n")
        else:
            out = stream or sys.stdout
            out.write(line + "\n")
            out.flush()
    return line


def load_jsonl(path: str) -> List[Dict[str, Any]]:
    out = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def render_human(record: Dict[str, Any]) -> str:
    """Aligned `key: value` lines; nested values stay JSON."""
    if not record:
        return ""
    width = max(len(str(k)) for k in record)
    lines = []
    for k, v in record.items():
        text = v if isinstance(v, str) else json.dumps(v, ensure_ascii=False, default=_default)
        lines.append(f"{str(k).ljust(width)}: {text}")
    return "\n".join(lines)
