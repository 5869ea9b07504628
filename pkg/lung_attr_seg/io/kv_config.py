"""
Flat ``key = value`` configuration files.

Format
======

Line-oriented text, read the same way for run configs and generator
configs:

  - lines starting with '#' or ';' are comments, blank lines are ignored
  - ``[section]`` headers are allowed for readability and do not scope keys
  - ``key = value`` or ``key: value``; surrounding quotes are stripped,
    so a flat TOML file with quoted strings reads identically

Values stay strings here; :func:`apply_overrides` coerces them to the
field types of the target dataclass.
"""

from __future__ import annotations

import dataclasses
import re
import types
import typing
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Tuple

from lung_attr_seg.errors import ConfigError

_HEADER_RE = re.compile(r"^\[(.+)\]$")
_ENTRY_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_.\-]*)\s*[=:]\s*(.*)$")


def parse_kv_text(text: str) -> Dict[str, str]:
    props: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#") or stripped.startswith(";"):
            continue
        if _HEADER_RE.match(stripped):
            continue
        m = _ENTRY_RE.match(stripped)
        if not m:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key = m.group(1).strip().lower().replace("-", "_")
        val = m.group(2).split(" #", 1)[0].strip()
        if len(val) >= 2 and val[0] == val[-1] and val[0] in "\"'":
            val = val[1:-1]
        props[key] = val
    return props


def load_kv_file(filepath: str | Path) -> Dict[str, str]:
    filepath = Path(filepath)
    if not filepath.exists():
        raise ConfigError(f"config file not found: {filepath}")
    return parse_kv_text(filepath.read_text(encoding="utf-8"))


def parse_assignment(text: str) -> Tuple[str, str]:
    """Split a ``key=value`` command-line override."""
    if "=" not in text:
        raise ConfigError(f"override must look like key=value, got {text!r}")
    key, val = text.split("=", 1)
    return key.strip().lower().replace("-", "_"), val.strip()


def dump_kv(values: Mapping[str, Any], header: str = "") -> str:
    lines = [f"# {h}" for h in header.splitlines()] if header else []
    for key, val in values.items():
        lines.append(f"{key} = {format_value(val)}")
    return "\n".join(lines) + "\n"


def format_value(val: Any) -> str:
    if isinstance(val, bool):
        return "true" if val else "false"
    if val is None:
        return "none"
    if isinstance(val, (list, tuple)):
        return ",".join(format_value(v) for v in val)
    return str(val)


def coerce(raw: str, annotation: Any, key: str = "") -> Any:
    """Convert ``raw`` to the type named by a dataclass annotation."""
    origin = typing.get_origin(annotation)
    args = typing.get_args(annotation)
    try:
        if origin in (typing.Union, types.UnionType):
            inner = [a for a in args if a is not type(None)]
            if raw.lower() in ("none", "null", ""):
                return None
            return coerce(raw, inner[0], key)
        if origin in (tuple, list):
            item = args[0] if args else str
            parts = [p.strip() for p in raw.split(",") if p.strip()]
            seq = [coerce(p, item, key) for p in parts]
            return tuple(seq) if origin is tuple else seq
        if annotation is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if annotation is int:
            f = float(raw)
            if f != int(f):
                raise ValueError(f"not an integer: {raw!r}")
            return int(f)
        if annotation is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def apply_overrides(instance: Any, values: Mapping[str, str], strict: bool = True) -> Any:
    """Return a copy of dataclass ``instance`` with string ``values`` applied.

    Unknown keys raise ``ConfigError`` when ``strict``; validation in the
    dataclass' ``__post_init__`` runs on the new instance.
    """
    hints = typing.get_type_hints(type(instance))
    names = {f.name for f in dataclasses.fields(instance) if f.init}
    changes = {}
    for key, raw in values.items():
        if key not in names:
            if strict:
                raise ConfigError(f"unknown config key {key!r}")
            continue
        changes[key] = coerce(raw, hints[key], key)
    return dataclasses.replace(instance, **changes)


def dataclass_items(instance: Any) -> Iterable[Tuple[str, Any]]:
    for f in dataclasses.fields(instance):
        if f.init:
            yield f.name, getattr(instance, f.name)
