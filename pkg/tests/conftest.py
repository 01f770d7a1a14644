from __future__ import annotations

import os
from pathlib import Path

import pytest

from diffcoh.ringfile import load_ring

RINGS = Path(__file__).resolve().parents[1] / "rings"


def pytest_collection_modifyitems(config, items):
    if os.environ.get("DIFFCOH_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="slow suite; set DIFFCOH_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def ring():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = load_ring(RINGS / f"{name}.ring")
        return cache[name]

    return get
