"""
Attribute taxonomy: the M attribute definitions and their category sets.

The default taxonomy has four attributes:

  ==  =============================================  ==========================
  m   description                                     values
  ==  =============================================  ==========================
  1   unilateral or bilateral of lung infection       unilateral, bilateral
  2   number of infected areas                        one .. six
  3   location of the infected area, left part        all, upper, middle, lower,
                                                      upper middle, middle lower,
                                                      no
  4   location of the infected area, right part       (same as m=3)
  ==  =============================================  ==========================

Taxonomy file format
====================

Line-oriented text.  Lines starting with '#' or ';' are comments and
blank lines are ignored.  Each ``[ATTRIBUTE]`` header opens a new block
holding ``id``, ``description`` and ``values`` (comma-separated).  An
optional ``[ALIASES]`` block lists ``wrong = right`` word rectifications
used by the description parser.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple

from lung_attr_seg.errors import ConfigError, InvalidLabels

#: Value-set sizes a_m of the default taxonomy.
DEFAULT_SIZES: Tuple[int, ...] = (2, 6, 7, 7)

#: Attribute ids with a fixed grammatical role in clinical descriptions.
SIDE_COUNT, AREA_COUNT, LEFT_POSITION, RIGHT_POSITION = 1, 2, 3, 4


@dataclass(frozen=True)
class AttributeDef:
    """One attribute: its 1-based id, meaning and ordered category values."""

    id: int
    description: str
    values: Tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.values)) != len(self.values):
            raise ConfigError(f"attribute {self.id}: duplicate category values {self.values}")
        if not self.values:
            raise ConfigError(f"attribute {self.id}: empty value set")

    @property
    def size(self) -> int:
        return len(self.values)

    def index(self, value: str) -> int:
        """Class index of ``value`` (case-insensitive)."""
        key = value.strip().lower()
        for i, v in enumerate(self.values):
            if v == key:
                return i
        raise InvalidLabels(f"attribute {self.id} has no value {value!r}")


@dataclass(frozen=True)
class AttributeTaxonomy:
    """Ordered attribute definitions plus the spelling alias table."""

    attributes: Tuple[AttributeDef, ...]
    aliases: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ids = [a.id for a in self.attributes]
        if ids != list(range(1, len(ids) + 1)):
            raise ConfigError(f"attribute ids must be 1..M in order, got {ids}")

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def default(cls) -> "AttributeTaxonomy":
        """The packaged four-attribute taxonomy."""
        text = resources.files("lung_attr_seg.attributes").joinpath(
            "default_taxonomy.txt"
        ).read_text(encoding="utf-8")
        return cls.from_text(text)

    @classmethod
    def from_file(cls, filepath: str | Path) -> "AttributeTaxonomy":
        filepath = Path(filepath)
        if not filepath.exists():
            raise FileNotFoundError(f"taxonomy file not found: {filepath}")
        return cls.from_text(filepath.read_text(encoding="utf-8"))

    @classmethod
    def from_text(cls, text: str) -> "AttributeTaxonomy":
        blocks: List[Dict[str, str]] = []
        aliases: Dict[str, str] = {}
        current: Dict[str, str] | None = None
        in_aliases = False

        for line in text.splitlines():
            stripped = line.strip()
            if not stripped or stripped.startswith("#") or stripped.startswith(";"):
                continue
            m = re.match(r"^\[(.+)\]$", stripped)
            if m:
                header = m.group(1).strip().upper()
                in_aliases = header == "ALIASES"
                if header == "ATTRIBUTE":
                    current = {}
                    blocks.append(current)
                elif not in_aliases:
                    raise ConfigError(f"unknown taxonomy section [{m.group(1)}]")
                continue
            if "=" not in stripped:
                raise ConfigError(f"taxonomy line is not 'key = value': {stripped!r}")
            key, val = (p.strip() for p in stripped.split("=", 1))
            if in_aliases:
                aliases[key.lower()] = val.lower()
            elif current is None:
                raise ConfigError(f"taxonomy entry outside an [ATTRIBUTE] block: {stripped!r}")
            else:
                current[key.lower()] = val

        attributes = []
        for block in blocks:
            try:
                attr_id = int(block["id"])
                values = tuple(v.strip().lower() for v in block["values"].split(",") if v.strip())
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"malformed [ATTRIBUTE] block {block}: {exc}") from exc
            attributes.append(
                AttributeDef(id=attr_id, description=block.get("description", ""), values=values)
            )
        return cls(attributes=tuple(attributes), aliases=aliases)

    def to_text(self) -> str:
        """Serialise back to the taxonomy file format."""
        out = []
        for a in self.attributes:
            out += ["[ATTRIBUTE]", f"id = {a.id}", f"description = {a.description}",
                    f"values = {', '.join(a.values)}", ""]
        if self.aliases:
            out.append("[ALIASES]")
            out += [f"{k} = {v}" for k, v in sorted(self.aliases.items())]
        return "\n".join(out) + "\n"

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------
    @property
    def M(self) -> int:
        return len(self.attributes)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(a.size for a in self.attributes)

    def attribute(self, attr_id: int) -> AttributeDef:
        return self.attributes[attr_id - 1]

    def n_combinations(self) -> int:
        n = 1
        for s in self.sizes:
            n *= s
        return n

    def vocabulary(self) -> List[str]:
        """Every word occurring in some category value, in first-seen order."""
        words: List[str] = []
        for a in self.attributes:
            for v in a.values:
                for w in v.split():
                    if w not in words:
                        words.append(w)
        return words

    def validate(self, categories: Sequence[int]) -> Tuple[int, ...]:
        """Check a category vector against the taxonomy and return it as a tuple."""
        cats = tuple(int(c) for c in categories)
        if len(cats) != self.M:
            raise InvalidLabels(f"expected {self.M} categories, got {len(cats)}")
        for a, c in zip(self.attributes, cats):
            if not 0 <= c < a.size:
                raise InvalidLabels(
                    f"attribute {a.id}: category {c} outside [0, {a.size})"
                )
        return cats

    def is_default_shape(self) -> bool:
        """True when the taxonomy has the side/count/left/right layout."""
        return self.sizes == DEFAULT_SIZES
