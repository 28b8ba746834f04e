"""Prompt template registry.

Templates live in assets/prompts.json and are addressed by slash-joined
keys like "gen/cot/image". Placeholders are written {name}; some names
contain spaces, so rendering is literal substring replacement rather
than str.format.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from .errors import FormatError

_ASSET = "prompts.json"


@lru_cache(maxsize=1)
def _registry() -> dict[str, str]:
    text = resources.files(__package__).joinpath("assets", _ASSET).read_text("utf-8")
    data = json.loads(text)
    if not isinstance(data, dict):
        raise FormatError(f"{_ASSET} must hold an object of key -> template")
    return data


def template_keys() -> list[str]:
    return sorted(_registry())


def get_template(key: str) -> str:
    reg = _registry()
    if key not in reg:
        raise KeyError(f"unknown prompt template {key!r}; known: {', '.join(sorted(reg))}")
    return reg[key]


def render(key: str, values: dict[str, str] | None = None) -> str:
    """Fill a template's {placeholder} slots by literal replacement.

    Unreferenced values are ignored; placeholders without a value are
    left in place so callers can chain fills.
    """
    out = get_template(key)
    for name, value in (values or {}).items():
        out = out.replace("{" + name + "}", value)
    return out


def all_templates() -> dict[str, str]:
    """A copy of the whole registry, for export."""
    return dict(_registry())
