"""
Batch attribute extraction over text tables.

Input is a two-column UTF-8 TSV ``sample_id<TAB>raw_text`` (an optional
header row starting with ``sample_id`` is skipped).  Output is a TSV with
columns ``sample_id, c1, c2, c3, c4, attribute_description`` where the
``c*`` columns hold category strings.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from lung_attr_seg.attributes.parser import (
    AttributeLabels,
    parse_description,
    to_attribute_description,
)
from lung_attr_seg.attributes.taxonomy import AttributeTaxonomy
from lung_attr_seg.errors import LungSegError, SampleParseError

logger = logging.getLogger(__name__)


@dataclass
class ParsedRow:
    sample_id: str
    raw_text: str
    labels: AttributeLabels


@dataclass
class BatchResult:
    """Parsed rows plus the rows that failed, in file order."""

    rows: List[ParsedRow] = field(default_factory=list)
    failures: List[SampleParseError] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def read_text_table(filepath: str | Path) -> List[Tuple[str, str]]:
    """Read ``(sample_id, raw_text)`` pairs from a two-column TSV."""
    filepath = Path(filepath)
    if not filepath.exists():
        raise FileNotFoundError(f"text table not found: {filepath}")
    pairs = []
    with open(filepath, newline="", encoding="utf-8") as f:
        for i, row in enumerate(csv.reader(f, delimiter="\t")):
            if not row or not any(cell.strip() for cell in row):
                continue
            if i == 0 and row[0].strip().lower() == "sample_id":
                continue
            sample_id = row[0].strip()
            raw_text = row[1].strip() if len(row) > 1 else ""
            pairs.append((sample_id, raw_text))
    return pairs


def parse_table(
    pairs: List[Tuple[str, str]],
    taxonomy: Optional[AttributeTaxonomy] = None,
) -> BatchResult:
    """Parse every row, collecting failures instead of stopping at the first."""
    taxonomy = taxonomy or AttributeTaxonomy.default()
    result = BatchResult()
    for sample_id, raw_text in pairs:
        try:
            labels = parse_description(raw_text, taxonomy)
        except LungSegError as exc:
            logger.warning("row %s: %s", sample_id, exc)
            result.failures.append(SampleParseError(sample_id, exc))
            continue
        result.rows.append(ParsedRow(sample_id, raw_text, labels))
    return result


def write_attribute_table(
    rows: List[ParsedRow],
    filepath: str | Path,
    taxonomy: Optional[AttributeTaxonomy] = None,
) -> None:
    taxonomy = taxonomy or AttributeTaxonomy.default()
    with open(filepath, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        writer.writerow(
            ["sample_id"] + [f"c{a.id}" for a in taxonomy.attributes] + ["attribute_description"]
        )
        for row in rows:
            desc = to_attribute_description(row.labels, taxonomy)
            writer.writerow([row.sample_id, *row.labels.values(taxonomy), desc.text])


def write_text_table(pairs: List[Tuple[str, str]], filepath: str | Path) -> None:
    """Write ``(sample_id, raw_text)`` pairs with a header row."""
    with open(filepath, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        writer.writerow(["sample_id", "raw_text"])
        writer.writerows(pairs)
