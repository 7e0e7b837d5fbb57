"""Deterministic report and CSV emission.

Reports are JSON documents with keys {"command", "config", "results",
"checks"}; floats are serialized with 17 significant digits so values
round-trip exactly and reruns with the same configuration are byte-identical.
Timestamps and runtimes go to a separate metadata file.
"""

from __future__ import annotations

import math
from pathlib import Path


def format_float(x: float) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return format(x, ".17g")
    return repr(x)


def _serialize(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = []
        for key in obj:  # insertion order is deterministic by construction
            rows.append(f'{pad}  "{key}": {_serialize(obj[key], indent + 1)}')
        return "{\n" + ",\n".join(rows) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            return "[]"
        rows = [f"{pad}  {_serialize(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(rows) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {type(obj)}")


def dump_json(doc: dict) -> str:
    return _serialize(doc) + "\n"


def write_report(path, command: str, config: dict, results: dict,
                 checks: list, version: str = None) -> bool:
    """Write the report JSON; returns True when every check passes."""
    doc = {"command": command, "config": config, "results": results,
           "checks": checks}
    if version is not None:
        doc["toolkit_version"] = version
    Path(path).write_text(dump_json(doc))
    return all(c["pass"] for c in checks)


def write_meta(path, runtime_seconds: float, version: str):
    import datetime
    doc = {"timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
           "runtime_seconds": runtime_seconds, "toolkit_version": version}
    Path(path).write_text(dump_json(doc))


def write_csv(path, header: list, rows) -> None:
    """Comma-separated table, decimal points, no locale formatting."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, float):
                cells.append(format(v, ".17g"))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def check(name: str, value: float, tolerance: float, passed=None) -> dict:
    if passed is None:
        passed = bool(value <= tolerance)
    return {"name": name, "value": float(value), "tolerance": float(tolerance),
            "pass": bool(passed)}
