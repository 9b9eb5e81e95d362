"""key=value config files with flag > file > default precedence."""

from __future__ import annotations

from pathlib import Path


def parse_kv_file(path: str | Path) -> dict[str, str]:
    """Parse a config file of key=value lines. '#' starts a comment."""
    values: dict[str, str] = {}
    for line_number, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line {line_number}: {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ValueError(f"bad config line {line_number}: {raw!r}")
        values[key] = value.strip()
    return values


def resolve(cli_value, file_values: dict[str, str], key: str, default, cast=str):
    """Pick the effective value: CLI flag, then config file, then default."""
    if cli_value is not None:
        return cli_value
    if key in file_values:
        return cast(file_values[key])
    return default
