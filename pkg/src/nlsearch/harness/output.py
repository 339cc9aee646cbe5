"""JSON and CSV emission of result records.

Both formats round-trip every float exactly: JSON through repr, CSV through
17 significant digits.  List-valued fields go into one CSV cell joined by ';'.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, is_dataclass

LIST_SEP = ";"
# never coerced to numbers: hex tables like "02" must stay strings
TEXT_FIELDS = ("mode", "model", "oracle_hex", "flags_history")


def _plain(record) -> dict:
    d = asdict(record) if is_dataclass(record) else dict(record)
    checks = d.pop("checks", None)
    if checks is not None:
        d["passed"] = all(checks.values())
        for name, ok in checks.items():
            d[f"check_{name}"] = bool(ok)
    return d


def to_json(config: dict, records) -> str:
    payload = {"config": config, "results": [_plain(r) for r in records]}
    return json.dumps(payload, indent=2, allow_nan=True)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (list, tuple)):
        return LIST_SEP.join(_cell(v) for v in value)
    return str(value)


def to_csv(records) -> str:
    rows = [_plain(r) for r in records]
    header: list[str] = []
    for row in rows:
        header.extend(k for k in row if k not in header)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(row.get(k)) for k in header])
    return buf.getvalue()


def _parse_scalar(text: str, keep_text: bool = False):
    if text == "":
        return None
    if keep_text:
        return text
    if text in ("true", "false"):
        return text == "true"
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def read_csv(text: str, list_fields=(), text_fields=TEXT_FIELDS) -> list[dict]:
    """Parse CSV written by :func:`to_csv`; ``list_fields`` are split on ';'."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        parsed = {}
        for k, v in row.items():
            keep = k in text_fields
            if k in list_fields:
                parsed[k] = [_parse_scalar(x, keep) for x in v.split(LIST_SEP)] if v else []
            else:
                parsed[k] = _parse_scalar(v, keep)
        out.append(parsed)
    return out
