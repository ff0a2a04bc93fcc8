"""JSON utilities for configs, summaries and numpy payloads."""

import json
from pathlib import Path
from typing import Any, Dict

import numpy as np


def safe_json_parse(text: str) -> tuple[Dict[str, Any], str]:
    """
    Safely parse a JSON object with error handling.

    Args:
        text: JSON string to parse

    Returns:
        Tuple of (parsed_dict or {}, error_message or "")
    """
    try:
        parsed = json.loads(text)
    except json.JSONDecodeError as e:
        return {}, f"JSON parsing error at line {e.lineno} column {e.colno}: {e.msg}"

    if not isinstance(parsed, dict):
        return {}, "Parsed JSON is not an object"

    return parsed, ""


def load_json_file(path: str | Path) -> tuple[Dict[str, Any], str]:
    """
    Read and parse a JSON object from disk.

    Returns:
        Tuple of (parsed_dict or {}, error_message or "")
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        return {}, f"Cannot read {path}: {e}"
    return safe_json_parse(text)


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays (and NaN) into plain JSON values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def format_json_pretty(data: Dict[str, Any]) -> str:
    """
    Format dictionary as pretty-printed JSON.

    Args:
        data: Dictionary to format

    Returns:
        Pretty-printed JSON string
    """
    return json.dumps(to_jsonable(data), indent=2, ensure_ascii=False)


def dump_json(data: Dict[str, Any], path: str | Path) -> Path:
    """Write ``data`` as pretty JSON, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_json_pretty(data))
        f.write("\n")
    return path
