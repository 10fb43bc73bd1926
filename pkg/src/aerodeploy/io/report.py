"""Plain ``key: value`` reports."""

from __future__ import annotations

from pathlib import Path


def format_report(fields, comments=()) -> str:
    lines = [f"# {c}" for c in comments]
    lines += [f"{k}: {v}" for k, v in fields.items()]
    return "\n".join(lines) + "\n"


def write_report(path, fields, comments=()) -> None:
    Path(path).write_text(format_report(fields, comments))


def read_report(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, _, value = line.partition(":")
        out[key.strip()] = value.strip()
    return out
