"""JSON helpers: canonical serialization and extraction from model prose.

Model responses are allowed to wrap their JSON in explanations or code
fences. ``extract_first_json`` scans for the first position where a JSON
object or array actually decodes, which skips fence markers and stray
bracket characters in prose without any format-specific stripping.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import ParseFailure

_decoder = json.JSONDecoder()


def canonical_json(value: Any) -> str:
    """Serialize deterministically: sorted keys, no whitespace, UTF-8 text."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def extract_first_json(text: str) -> Any:
    """Return the first well-formed JSON object or array found in ``text``.

    Raises ParseFailure when nothing decodes.
    """
    for idx, ch in enumerate(text):
        if ch not in "{[":
            continue
        try:
            value, _ = _decoder.raw_decode(text, idx)
        except ValueError:
            continue
        return value
    raise ParseFailure("no JSON object or array found in response", code="no_json")
