"""Line-delimited JSON helpers with deterministic serialization.

All file formats in this toolkit are written through `dumps` so that two
writes of the same data are byte-identical: fixed key order (insertion
order of the dict built by the caller), compact separators, UTF-8, one
record per line.
"""

import json

from .errors import FormatError


def dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dumps(rec))
            fh.write("\n")


def iter_jsonl(path):
    """Yield (record_number, parsed_object) pairs, 1-based numbering."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(
                    f"{path}: record {lineno}: invalid JSON ({exc.msg})"
                ) from exc
