"""
JSON output for lung-attr-seg.

Result envelope
===============
{
  "metadata": {
    "version": "0.1.0",              // package __version__
    "timestamp": "...",              // omitted when deterministic=True
    "generator": "lung-attr-seg v0.1.0",
    "command": "eval",
    "computation_time": 1.23         // optional, omitted when deterministic
  },
  "config": { ... },                 // resolved run config
  "results": { ... }                 // e.g. EvalResult.to_dict()
}

Training log
============
JSON lines, one object per optimisation step
``{"epoch", "step", "l_c", "l_a", "l_st", "l_total", "coverage"}`` and one
``{"event": "eval", ...}`` object per evaluation.
"""

from __future__ import annotations

import datetime
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, TextIO

import numpy as np


def save_json_output(
    results: Dict[str, Any],
    filepath: str | Path,
    command: str = "",
    config: Optional[Dict[str, Any]] = None,
    computation_time: float | None = None,
    deterministic: bool = False,
) -> None:
    """Write ``results`` inside the metadata envelope.

    With ``deterministic=True`` wall-clock fields are left out so two
    seeded runs produce byte-identical files.
    """
    from lung_attr_seg import __version__

    metadata: Dict[str, Any] = {
        "version": __version__,
        "generator": f"lung-attr-seg v{__version__}",
        "command": command,
    }
    if not deterministic:
        metadata["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
        if computation_time is not None:
            metadata["computation_time"] = computation_time

    output = {"metadata": metadata, "config": config or {}, "results": results}
    filepath = Path(filepath)
    with open(filepath, "w", encoding="utf-8") as f:
        json.dump(output, f, indent=2, sort_keys=True, default=_json_default)
        f.write("\n")


def load_json_output(filepath: str | Path) -> Dict[str, Any]:
    with open(filepath, encoding="utf-8") as f:
        return json.load(f)


class JsonLinesWriter:
    """Append-only JSON-lines log; usable as a context manager."""

    def __init__(self, filepath: str | Path) -> None:
        self.filepath = Path(filepath)
        self._fh: Optional[TextIO] = open(self.filepath, "w", encoding="utf-8")

    def write(self, record: Dict[str, Any]) -> None:
        if self._fh is None:
            raise ValueError(f"log {self.filepath} is closed")
        self._fh.write(json.dumps(record, sort_keys=True, default=_json_default) + "\n")
        self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "JsonLinesWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_jsonl(filepath: str | Path) -> List[Dict[str, Any]]:
    return list(iter_jsonl(filepath))


def iter_jsonl(filepath: str | Path) -> Iterator[Dict[str, Any]]:
    with open(filepath, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                yield json.loads(line)


def _json_default(obj):
    """Handle non-serializable types."""
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        return str(obj)
    raise TypeError(f"Object of type {type(obj)} is not JSON serializable")
