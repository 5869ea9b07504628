"""Text attribute extraction: taxonomy, clinical-description parser, batch mode."""

from lung_attr_seg.attributes.taxonomy import AttributeDef, AttributeTaxonomy
from lung_attr_seg.attributes.parser import (
    AttributeDescription,
    AttributeLabels,
    encode_targets,
    enumerate_labels,
    parse_attribute_description,
    parse_description,
    render_description,
    to_attribute_description,
    tokenize,
)
from lung_attr_seg.attributes.batch import (
    parse_table,
    read_text_table,
    write_attribute_table,
    write_text_table,
)

__all__ = [
    "AttributeDef",
    "AttributeTaxonomy",
    "AttributeDescription",
    "AttributeLabels",
    "encode_targets",
    "enumerate_labels",
    "parse_attribute_description",
    "parse_description",
    "render_description",
    "to_attribute_description",
    "tokenize",
    "parse_table",
    "read_text_table",
    "write_attribute_table",
    "write_text_table",
]
