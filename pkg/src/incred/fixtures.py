"""Bundled example systems.

The JSON files under ``incred/fixtures/`` are the single source of truth
for the worked examples: the CLI, the unit tests and the acceptance
suite all load them from here rather than re-declaring systems inline.
"""

from __future__ import annotations

from importlib import resources

from .setmaps import SystemDef, load_system

__all__ = ["available_fixtures", "fixture_path", "load_fixture"]


def _root():
    return resources.files(__package__) / "fixtures"


def available_fixtures() -> list[str]:
    return sorted(p.name[:-5] for p in _root().iterdir()
                  if p.name.endswith(".json"))


def fixture_path(name: str) -> str:
    path = _root() / f"{name}.json"
    if not path.is_file():
        raise FileNotFoundError(
            f"no fixture {name!r}; available: {', '.join(available_fixtures())}")
    return str(path)


def load_fixture(name: str) -> SystemDef:
    return load_system(fixture_path(name))
