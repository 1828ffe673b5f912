"""Shared fixtures: a session-wide grid cache keyed by distribution spec."""

from __future__ import annotations

import pytest

from biscv import shape

_GRID_CACHE: dict = {}


def grid_for(d, n: int = shape.DEFAULT_GRID_POINTS,
             eps: float = shape.DEFAULT_EPS) -> shape.Grid:
    key = (d.spec_string(), n, eps)
    if key not in _GRID_CACHE:
        _GRID_CACHE[key] = shape.make_grid(d, n, eps)
    return _GRID_CACHE[key]


@pytest.fixture(scope="session")
def grid_cache():
    return grid_for
