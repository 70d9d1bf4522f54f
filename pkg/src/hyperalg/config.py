"""Experiment config files: flat ``key = value`` lines grouped in ``[sections]``.

Example::

    # Fig. 2 style sweep
    seed = 7

    [capacity]
    model = bsc, map, fhrr
    dim = 256
    lengths = 2..50

Keys before the first section apply to every command; a ``[name]`` section
applies only to the command of that name. Every value keeps its line number
so errors can point at it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from .errors import HyperalgError

_SECTION = re.compile(r"^\[\s*([A-Za-z0-9_-]+)\s*\]$")
_PAIR = re.compile(r"^([A-Za-z][A-Za-z0-9_-]*)\s*=\s*(.*)$")


class ConfigError(HyperalgError, ValueError):
    """Invalid configuration; ``line`` is set when it comes from a config file."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        self.message = message
        where = ""
        if line is not None:
            where = f"{source or 'config'}:{line}: "
        elif source:
            where = f"{source}: "
        super().__init__(where + message)


@dataclass(frozen=True)
class Entry:
    value: str
    line: int | None
    source: str


def parse_config_text(text: str, source: str = "config") -> dict[str, dict[str, Entry]]:
    """Parse into ``{section: {key: Entry}}``; top-level keys go to section ``""``."""
    out: dict[str, dict[str, Entry]] = {"": {}}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            section = m.group(1).lower()
            out.setdefault(section, {})
            continue
        m = _PAIR.match(line)
        if not m:
            raise ConfigError(f"expected 'key = value' or '[section]', got {raw.strip()!r}", lineno, source)
        key = m.group(1).replace("-", "_").lower()
        if key in out[section]:
            raise ConfigError(f"duplicate key {key!r} (first set on line {out[section][key].line})", lineno, source)
        out[section][key] = Entry(m.group(2).strip(), lineno, source)
    return out


def load_config_file(path: str) -> dict[str, dict[str, Entry]]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc.strerror}", source=path) from None
    return parse_config_text(text, source=path)


# ---------------------------------------------------------------- value types


def as_int(s: str) -> int:
    return int(s.strip())


def as_float(s: str) -> float:
    return float(s.strip())


def as_str(s: str) -> str:
    s = s.strip()
    if not s:
        raise ValueError("empty value")
    return s


def as_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def as_int_list(s: str) -> tuple[int, ...]:
    """Comma-separated integers and inclusive ranges, e.g. ``2..5,8`` -> (2, 3, 4, 5, 8)."""
    out: list[int] = []
    for part in s.split(","):
        part = part.strip()
        if not part:
            raise ValueError("empty list item")
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(lo_i, hi_i + 1))
        else:
            out.append(int(part))
    return tuple(out)


def as_str_list(s: str) -> tuple[str, ...]:
    items = tuple(p.strip().lower() for p in s.split(","))
    if not items or any(not p for p in items):
        raise ValueError("empty list item")
    return items


Converter = Callable[[str], object]


def resolve(
    command: str,
    schema: dict[str, Converter],
    file_cfg: dict[str, dict[str, Entry]] | None,
    flags: dict[str, object],
    aliases: dict[str, str] | None = None,
) -> dict[str, object]:
    """Merge file values (typed by ``schema``) with flag values; flags win.

    ``aliases`` maps alternative file keys to schema keys.
    """
    values: dict[str, object] = {}
    aliases = aliases or {}
    if file_cfg:
        for section in ("", command):
            seen: dict[str, Entry] = {}
            for key, entry in file_cfg.get(section, {}).items():
                key = aliases.get(key, key)
                if key in seen:
                    raise ConfigError(f"{key!r} given twice (first on line {seen[key].line})", entry.line, entry.source)
                seen[key] = entry
                if key not in schema:
                    if section == "":
                        # top-level keys may belong to other commands
                        continue
                    raise ConfigError(f"unknown key {key!r} for command {command}", entry.line, entry.source)
                try:
                    values[key] = schema[key](entry.value)
                except ValueError as exc:
                    raise ConfigError(f"bad value for {key!r}: {exc}", entry.line, entry.source) from None
    for key, val in flags.items():
        if val is not None:
            values[key] = val
    return values


def flag_type(conv: Converter) -> Callable[[str], object]:
    """Wrap a converter so argparse reports a readable error."""

    def parse(s: str):
        try:
            return conv(s)
        except ValueError as exc:
            raise ValueError(str(exc)) from None

    parse.__name__ = getattr(conv, "__name__", "value").replace("as_", "")
    return parse
