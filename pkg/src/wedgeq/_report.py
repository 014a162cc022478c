"""Deterministic report emission.

All floating-point output is rounded to 12 significant digits, formatted
locale-independently, with '\\n' line endings; non-finite values emit as
JSON null / empty CSV cells.  Byte-stable output for identical inputs is
a contract, not an accident.
"""

import json
import math


def round_sig(value: float) -> float:
    """Round to the 12-significant-digit emission precision."""
    return float(format(value, ".12g"))


def clean(obj):
    """Recursively convert a payload into JSON-safe emission form."""
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return round_sig(obj)
    if isinstance(obj, dict):
        return {key: clean(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(value) for value in obj]
    item = getattr(obj, "item", None)
    if item is not None:  # NumPy scalars
        return clean(item())
    raise TypeError(f"cannot serialize {type(obj).__name__} in a report")


def render_json(payload) -> str:
    return json.dumps(clean(payload), indent=2, allow_nan=False) + "\n"


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if not math.isfinite(value):
            return ""
        return format(value, ".12g")
    return str(value)


def render_csv(header, rows, comments=()) -> str:
    lines = [f"# {comment}" for comment in comments]
    lines.append(",".join(header))
    lines.extend(",".join(format_cell(cell) for cell in row) for row in rows)
    return "\n".join(lines) + "\n"
