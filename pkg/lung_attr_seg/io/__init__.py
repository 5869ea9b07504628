"""Input/output: key-value configs, JSON envelopes and logs, PNG images."""

from lung_attr_seg.io.kv_config import apply_overrides, dump_kv, load_kv_file, parse_kv_text
from lung_attr_seg.io.json_io import JsonLinesWriter, load_json_output, read_jsonl, save_json_output
from lung_attr_seg.io.png_io import read_image, read_mask, write_image, write_mask

__all__ = [
    "apply_overrides",
    "dump_kv",
    "load_kv_file",
    "parse_kv_text",
    "JsonLinesWriter",
    "load_json_output",
    "read_jsonl",
    "save_json_output",
    "read_image",
    "read_mask",
    "write_image",
    "write_mask",
]
