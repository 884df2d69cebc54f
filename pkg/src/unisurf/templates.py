"""Versioned template data shipped with the package.

``UNISURF_TEMPLATES`` names a directory that replaces the bundled one.
"""

from __future__ import annotations

import json
import os
from functools import lru_cache
from importlib import resources
from pathlib import Path

FORMAT = 1
ENV_VAR = "UNISURF_TEMPLATES"


class TemplateError(RuntimeError):
    pass


def template_dir() -> Path:
    override = os.environ.get(ENV_VAR)
    if override:
        return Path(override)
    return Path(str(resources.files("unisurf") / "templates"))


@lru_cache(maxsize=None)
def _load(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise TemplateError(f"template file {path} not found") from None
    except json.JSONDecodeError as err:
        raise TemplateError(f"template file {path}: {err}") from None
    if data.get("format") != FORMAT:
        raise TemplateError(f"template file {path} has format {data.get('format')!r}, expected {FORMAT}")
    return data


def load(name: str) -> dict:
    """Template ``name`` (``moves`` or ``universal``) after the version gate."""
    return _load(str(template_dir() / f"{name}.json"))


def clear_cache():
    _load.cache_clear()
