"""
Clinical description parser and attribute-description builder.

Grammar
=======

A clinical description is three comma-separated clauses::

    Bilateral pulmonary infection, three infected areas,
    middle lower left lung and upper middle right lung.

  clause 1  side-count adjective        -> attribute 1 (unilateral/bilateral)
  clause 2  leading number word          -> attribute 2 (one .. six)
  clause 3  per-side position phrases    -> attributes 3 (left) and 4 (right)
            joined by "and"

Matching is case-insensitive and whitespace tolerant.  Words are first
rectified through the taxonomy's alias table; after that every word of a
clause must be either a category word or one of the clause's glue words,
otherwise ``UnparseableClause`` is raised.  A lung side missing from
clause 3 gets the category "no".

The compact attribute description A joins the four category strings:
``"Bilateral, three, middle lower, upper middle."``
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from lung_attr_seg.attributes.taxonomy import (
    AREA_COUNT,
    LEFT_POSITION,
    RIGHT_POSITION,
    SIDE_COUNT,
    AttributeTaxonomy,
)
from lung_attr_seg.errors import InvalidLabels, MissingClause, UnparseableClause

REQUIRED_CLAUSES = 3
NO_POSITION = "no"

_WORD_RE = re.compile(r"[a-z0-9]+")
_TOKEN_RE = re.compile(r"[a-z0-9]+|[.,]")

_SIDE_GLUE = frozenset({"pulmonary", "infection", "infections", "lung", "lungs"})
_COUNT_GLUE = frozenset({"infected", "area", "areas", "infection", "infections", "region", "regions"})
_POSITION_GLUE = frozenset({"of", "the"})
_LUNG_WORDS = frozenset({"lung", "lungs"})
_SIDE_WORDS = {"left": LEFT_POSITION, "right": RIGHT_POSITION}


@dataclass(frozen=True)
class AttributeLabels:
    """One category index per attribute, in taxonomy order."""

    categories: Tuple[int, ...]

    @classmethod
    def from_values(cls, values: Sequence[str], taxonomy: Optional[AttributeTaxonomy] = None) -> "AttributeLabels":
        """Build labels from category strings, e.g. ``("bilateral", "three", ...)``."""
        taxonomy = taxonomy or _default_taxonomy()
        if len(values) != taxonomy.M:
            raise InvalidLabels(f"expected {taxonomy.M} values, got {len(values)}")
        return cls(tuple(a.index(v) for a, v in zip(taxonomy.attributes, values)))

    def values(self, taxonomy: Optional[AttributeTaxonomy] = None) -> Tuple[str, ...]:
        taxonomy = taxonomy or _default_taxonomy()
        cats = taxonomy.validate(self.categories)
        return tuple(a.values[c] for a, c in zip(taxonomy.attributes, cats))

    def swap_sides(self) -> "AttributeLabels":
        """Labels of the mirror image: left and right positions exchanged."""
        cats = list(self.categories)
        cats[LEFT_POSITION - 1], cats[RIGHT_POSITION - 1] = (
            cats[RIGHT_POSITION - 1],
            cats[LEFT_POSITION - 1],
        )
        return AttributeLabels(tuple(cats))


@dataclass(frozen=True)
class AttributeDescription:
    """The compact attribute sentence A and its token list."""

    text: str
    tokens: Tuple[str, ...]


_DEFAULT: Dict[str, AttributeTaxonomy] = {}


def _default_taxonomy() -> AttributeTaxonomy:
    if "tax" not in _DEFAULT:
        _DEFAULT["tax"] = AttributeTaxonomy.default()
    return _DEFAULT["tax"]


def tokenize(text: str) -> List[str]:
    """Lower-cased word and punctuation tokens."""
    return _TOKEN_RE.findall(text.lower())


def _words(clause: str, taxonomy: AttributeTaxonomy) -> List[str]:
    return [taxonomy.aliases.get(w, w) for w in _WORD_RE.findall(clause.lower())]


# ----------------------------------------------------------------------
# Clinical description -> labels
# ----------------------------------------------------------------------
def parse_description(raw_text: str, taxonomy: Optional[AttributeTaxonomy] = None) -> AttributeLabels:
    """Parse a three-clause clinical description into attribute labels.

    Raises
    ------
    MissingClause
        Fewer than three non-empty comma-separated clauses; an empty
        clause such as the gap in ``"a,, b, c"`` does not count.
    UnparseableClause
        A clause holds a word outside the taxonomy and its glue words, or
        no category value at all.  ``clause_index`` is 1-based.
    """
    taxonomy = taxonomy or _default_taxonomy()
    if taxonomy.M != 4:
        raise InvalidLabels(
            f"clinical descriptions need the four-attribute taxonomy, got M={taxonomy.M}"
        )
    text = raw_text.strip() if raw_text else ""
    if not text:
        raise MissingClause(0, REQUIRED_CLAUSES, raw_text or "")

    clauses = [c.strip() for c in text.split(",", REQUIRED_CLAUSES - 1)]
    clauses = [c for c in clauses if c.strip(" .")]
    if len(clauses) < REQUIRED_CLAUSES:
        raise MissingClause(len(clauses), REQUIRED_CLAUSES, raw_text)

    side = _single_value(1, clauses[0], taxonomy, SIDE_COUNT, _SIDE_GLUE)
    count = _single_value(2, clauses[1], taxonomy, AREA_COUNT, _COUNT_GLUE)
    left, right = _positions(clauses[2], taxonomy)
    return AttributeLabels((side, count, left, right))


def _single_value(index: int, clause: str, taxonomy: AttributeTaxonomy, attr_id: int, glue) -> int:
    attr = taxonomy.attribute(attr_id)
    found = []
    for w in _words(clause, taxonomy):
        if w in glue:
            continue
        if w in attr.values:
            found.append(w)
        else:
            raise UnparseableClause(index, clause, f"unknown word {w!r}")
    if len(found) != 1:
        raise UnparseableClause(
            index, clause, f"expected one {attr.description!r} value, found {len(found)}"
        )
    return attr.values.index(found[0])


def _positions(clause: str, taxonomy: AttributeTaxonomy) -> Tuple[int, int]:
    words = _words(clause, taxonomy)
    phrases: List[List[str]] = [[]]
    for w in words:
        if w == "and":
            phrases.append([])
        else:
            phrases[-1].append(w)

    found: Dict[int, int] = {}
    for phrase in phrases:
        while phrase and phrase[-1] in _LUNG_WORDS:
            phrase = phrase[:-1]
        if not phrase or phrase[-1] not in _SIDE_WORDS:
            raise UnparseableClause(3, clause, "position phrase must end in 'left lung' or 'right lung'")
        attr_id = _SIDE_WORDS[phrase[-1]]
        if attr_id in found:
            raise UnparseableClause(3, clause, f"side {phrase[-1]!r} given twice")
        attr = taxonomy.attribute(attr_id)
        position = " ".join(w for w in phrase[:-1] if w not in _POSITION_GLUE)
        if position not in attr.values:
            raise UnparseableClause(3, clause, f"unknown position {position!r}")
        found[attr_id] = attr.values.index(position)

    out = []
    for attr_id in (LEFT_POSITION, RIGHT_POSITION):
        if attr_id in found:
            out.append(found[attr_id])
            continue
        attr = taxonomy.attribute(attr_id)
        if NO_POSITION not in attr.values:
            raise UnparseableClause(3, clause, f"attribute {attr_id} has no {NO_POSITION!r} category")
        out.append(attr.values.index(NO_POSITION))
    return out[0], out[1]


# ----------------------------------------------------------------------
# Labels -> text
# ----------------------------------------------------------------------
def render_description(labels: AttributeLabels, taxonomy: Optional[AttributeTaxonomy] = None) -> str:
    """Render labels as a clinical description that ``parse_description`` inverts.

    A side whose position is "no" is left out unless both sides are "no".
    """
    taxonomy = taxonomy or _default_taxonomy()
    side, count, left, right = labels.values(taxonomy)
    n_areas = taxonomy.attribute(AREA_COUNT).values.index(count) + 1
    area_word = "area" if n_areas == 1 else "areas"

    phrases = [
        f"{pos} {name} lung"
        for pos, name in ((left, "left"), (right, "right"))
        if pos != NO_POSITION
    ]
    if not phrases:
        phrases = [f"{NO_POSITION} left lung", f"{NO_POSITION} right lung"]
    return (
        f"{side.capitalize()} pulmonary infection, {count} infected {area_word}, "
        f"{' and '.join(phrases)}."
    )


def to_attribute_description(labels: AttributeLabels, taxonomy: Optional[AttributeTaxonomy] = None) -> AttributeDescription:
    """Comma-join the category strings in attribute order, ending with a period."""
    taxonomy = taxonomy or _default_taxonomy()
    text = ", ".join(labels.values(taxonomy))
    text = text[:1].upper() + text[1:] + "."
    return AttributeDescription(text=text, tokens=tuple(tokenize(text)))


def parse_attribute_description(text: str, taxonomy: Optional[AttributeTaxonomy] = None) -> AttributeLabels:
    """Inverse of :func:`to_attribute_description`."""
    taxonomy = taxonomy or _default_taxonomy()
    parts = [p.strip(" .").lower() for p in text.strip().rstrip(".").split(",")]
    if len(parts) != taxonomy.M:
        raise MissingClause(len(parts), taxonomy.M, text)
    cats = []
    for i, (attr, part) in enumerate(zip(taxonomy.attributes, parts), start=1):
        value = " ".join(taxonomy.aliases.get(w, w) for w in part.split())
        if value not in attr.values:
            raise UnparseableClause(i, part, f"unknown {attr.description!r} value")
        cats.append(attr.values.index(value))
    return AttributeLabels(tuple(cats))


def encode_targets(labels: AttributeLabels, taxonomy: Optional[AttributeTaxonomy] = None) -> List[np.ndarray]:
    """One float32 one-hot vector of length a_m per attribute."""
    taxonomy = taxonomy or _default_taxonomy()
    cats = taxonomy.validate(labels.categories)
    out = []
    for size, c in zip(taxonomy.sizes, cats):
        v = np.zeros(size, dtype=np.float32)
        v[c] = 1.0
        out.append(v)
    return out


def enumerate_labels(taxonomy: Optional[AttributeTaxonomy] = None) -> Iterator[AttributeLabels]:
    """Every valid label combination (Π a_m of them)."""
    taxonomy = taxonomy or _default_taxonomy()
    for cats in itertools.product(*(range(s) for s in taxonomy.sizes)):
        yield AttributeLabels(tuple(cats))
