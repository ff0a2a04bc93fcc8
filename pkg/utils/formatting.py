"""Console formatting utilities."""

from typing import Any, Dict, Optional

import pandas as pd


def format_header(title: str, subtitle: Optional[str] = None, width: int = 60) -> str:
    """Banner for a command's console output, with an optional context line under the title."""
    rule = "=" * width
    lines = ["", rule, title.center(width)]
    if subtitle:
        lines.append(subtitle.center(width))
    lines.extend([rule, ""])
    return "\n".join(lines)


def format_table(table: pd.DataFrame, digits: int = 4, max_rows: int = 40) -> str:
    """
    Render a DataFrame as a plain-text table.

    Args:
        table: Rows to show
        digits: Significant digits for floats
        max_rows: Rows beyond this are elided

    Returns:
        Table string
    """
    if len(table) > max_rows:
        head = table.head(max_rows // 2)
        tail = table.tail(max_rows // 2)
        body = pd.concat([head, tail])
        text = body.to_string(index=False, float_format=lambda v: f"{v:.{digits}g}")
        lines = text.splitlines()
        cut = 1 + len(head)
        lines.insert(cut, f"  ... ({len(table) - len(body)} rows omitted)")
        return "\n".join(lines)
    return table.to_string(index=False, float_format=lambda v: f"{v:.{digits}g}")


def format_params(params: Dict[str, Any]) -> str:
    """One line per parameter, e.g. the fixed point or a run summary."""
    width = max((len(k) for k in params), default=0)
    lines = []
    for key, value in params.items():
        shown = f"{value:.6g}" if isinstance(value, float) else str(value)
        lines.append(f"  {key.ljust(width)} : {shown}")
    return "\n".join(lines)
