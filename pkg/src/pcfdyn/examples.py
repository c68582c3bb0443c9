"""Built-in example data shipped with the package."""

from __future__ import annotations

import json
from importlib import resources

from .errors import ValidationError

EXAMPLES = (
    "lattes_bundle",
    "lattes_core",
    "lattes_map",
    "lattes_spec",
    "middle_thirds",
    "permutation",
    "z3_spec",
)


def load_example(name: str) -> dict:
    """The JSON document ``name`` (without extension) from the data directory."""
    if name not in EXAMPLES:
        raise ValidationError(f"unknown example {name!r}; choose from {list(EXAMPLES)}")
    text = resources.files("pcfdyn").joinpath("data").joinpath(f"{name}.json").read_text()
    return json.loads(text)
