"""Bundled example models, loadable by stem name (``load("two_cycles_joined")``)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from ..modelio import parse_model
from ..errors import ModelError


def names() -> list[str]:
    root = resources.files(__name__)
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".dcp"))


def path(name: str) -> Path:
    return Path(str(resources.files(__name__).joinpath(f"{name}.dcp")))


def text(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.dcp").read_text("utf-8")


def load(name: str):
    result = parse_model(text(name))
    if not result.ok:
        raise ModelError(f"bundled model {name} is invalid", result.diagnostics)
    return result.problem
