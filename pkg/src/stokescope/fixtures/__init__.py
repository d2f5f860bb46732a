"""Frozen oracle values (see scripts/make_fixtures.py for regeneration)."""

import json
import os
import pathlib

_DIR = pathlib.Path(__file__).resolve().parent


def directory() -> pathlib.Path:
    override = os.environ.get("STOKESCOPE_FIXTURES")
    return pathlib.Path(override) if override else _DIR


def load(name: str = "oracles.json") -> dict:
    return json.loads((directory() / name).read_text())
