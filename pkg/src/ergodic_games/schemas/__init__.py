"""JSON schemas shipped with the package (game files and every CLI output document)."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from typing import Any, Dict

import jsonschema


@lru_cache(maxsize=None)
def load_schema(name: str) -> Dict[str, Any]:
    text = resources.files(__name__).joinpath(f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_document(doc: Any, name: str) -> None:
    """Raise jsonschema.ValidationError if doc does not match schema `name`."""
    jsonschema.validate(instance=doc, schema=load_schema(name))
