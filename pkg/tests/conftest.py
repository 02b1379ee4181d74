"""Shared fixtures: a six-tile row whose middle bond survives only while
the assembly is small, under the growing threshold τ(n) = n - 1."""

from __future__ import annotations

import pytest

from sdta.core import (
    Glue,
    System,
    TemperatureFunction,
    TileSet,
    TileType,
    assembly_of,
)


def row_tile_set(strengths: tuple[int, ...]) -> TileSet:
    """Tile types r0..rn forming a west-to-east row; strengths[i] bonds ri to ri+1."""
    n = len(strengths) + 1
    tiles = []
    for i in range(n):
        west = Glue(f"g{i - 1}", strengths[i - 1]) if i > 0 else None
        east = Glue(f"g{i}", strengths[i]) if i < n - 1 else None
        tiles.append(TileType(name=f"r{i}", east=east, west=west))
    return TileSet(tuple(tiles))


def row_assembly(first: int, last: int):
    """The contiguous row r{first}..r{last} placed at y=0."""
    return assembly_of((i, 0, f"r{i}") for i in range(first, last + 1))


GROWING_TAU = TemperatureFunction(steps=((2, 1), (3, 2), (4, 3), (5, 4), (6, 5)), default=6)


@pytest.fixture
def six_row_system() -> System:
    """Six-tile row: bonds 2,2,1,2,2 under the growing threshold.

    The strength-1 middle bond admits the 5+1 combination (threshold 1) but
    the finished six-row splits 3+3 because the 3-vs-3 threshold is 2.
    """
    return System(tile_set=row_tile_set((2, 2, 1, 2, 2)), temperature=GROWING_TAU)
