"""Core data model for size-dependent two-handed tile assembly.

Tiles are unit squares with a glue on each side. Two glues bind exactly
when their labels match, contributing the glue strength to the bond graph.
Assemblies are finite non-overlapping placements of tiles on the integer
grid, considered up to translation, and the binding threshold is a
nondecreasing step function of assembly size rather than a single number.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

Position = tuple[int, int]

DIRECTIONS = ("n", "e", "s", "w")
OPPOSITE = {"n": "s", "s": "n", "e": "w", "w": "e"}
OFFSET: dict[str, Position] = {"n": (0, 1), "e": (1, 0), "s": (0, -1), "w": (-1, 0)}


@dataclass(frozen=True, order=True)
class Glue:
    """A labelled bond site with positive integer strength."""

    label: str
    strength: int

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("glue label must be nonempty")
        if not isinstance(self.strength, int) or self.strength < 1:
            raise ValueError(f"glue strength must be a positive int, got {self.strength!r}")


@dataclass(frozen=True)
class TileType:
    """A named unit square with an optional glue on each side."""

    name: str
    north: Glue | None = None
    east: Glue | None = None
    south: Glue | None = None
    west: Glue | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("tile name must be nonempty")

    def glue(self, direction: str) -> Glue | None:
        if direction == "n":
            return self.north
        if direction == "e":
            return self.east
        if direction == "s":
            return self.south
        if direction == "w":
            return self.west
        raise ValueError(f"unknown direction {direction!r}")


def bond_strength(a: TileType, direction: str, b: TileType) -> int:
    """Strength of the bond formed when ``b`` sits in ``direction`` from ``a``.

    Zero when either facing side is bare or the labels differ.
    """
    ga = a.glue(direction)
    gb = b.glue(OPPOSITE[direction])
    if ga is None or gb is None or ga.label != gb.label:
        return 0
    if ga.strength != gb.strength:
        raise ValueError(f"glue label {ga.label!r} used with two strengths")
    return ga.strength


@dataclass(frozen=True)
class TileSet:
    """An immutable collection of tile types with unique names.

    Every occurrence of a glue label must carry the same strength, so the
    label alone determines the bond.
    """

    tiles: tuple[TileType, ...]

    def __post_init__(self) -> None:
        tiles = tuple(self.tiles)
        object.__setattr__(self, "tiles", tiles)
        if not tiles:
            raise ValueError("tile set must be nonempty")
        names = [t.name for t in tiles]
        if len(set(names)) != len(names):
            raise ValueError("duplicate tile names")
        strengths: dict[str, int] = {}
        for t in tiles:
            for d in DIRECTIONS:
                g = t.glue(d)
                if g is None:
                    continue
                if strengths.setdefault(g.label, g.strength) != g.strength:
                    raise ValueError(f"glue label {g.label!r} used with two strengths")

    @cached_property
    def _by_name(self) -> dict[str, TileType]:
        return {t.name: t for t in self.tiles}

    def __getitem__(self, name: str) -> TileType:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"no tile named {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __iter__(self) -> Iterator[TileType]:
        return iter(self.tiles)

    def __len__(self) -> int:
        return len(self.tiles)

    @cached_property
    def glues(self) -> tuple[Glue, ...]:
        """Distinct glues in label order."""
        seen = {g.label: g for t in self.tiles for d in DIRECTIONS if (g := t.glue(d))}
        return tuple(seen[label] for label in sorted(seen))


@dataclass(frozen=True)
class TemperatureFunction:
    """Nondecreasing step function from assembly size to binding threshold.

    ``steps`` lists ``(bound, value)`` pairs with strictly increasing bounds:
    the value applies to every size up to and including the bound. Sizes
    beyond the last bound get ``default``.
    """

    steps: tuple[tuple[int, int], ...] = ()
    default: int = 2

    def __post_init__(self) -> None:
        steps = tuple((int(n), int(v)) for n, v in self.steps)
        object.__setattr__(self, "steps", steps)
        prev_bound = 0
        prev_value = 1
        for bound, value in steps:
            if bound <= prev_bound:
                raise ValueError("step bounds must be strictly increasing and >= 1")
            if value < prev_value:
                raise ValueError("threshold values must be nondecreasing and >= 1")
            prev_bound, prev_value = bound, value
        if self.default < prev_value:
            raise ValueError("default must be >= every step value and >= 1")

    def value(self, size: int) -> int:
        """Threshold applying to an interface whose smaller side has ``size`` tiles."""
        if size < 1:
            raise ValueError(f"size must be >= 1, got {size}")
        for bound, value in self.steps:
            if size <= bound:
                return value
        return self.default

    def __call__(self, size: int) -> int:
        return self.value(size)

    @property
    def max_value(self) -> int:
        return self.default

    @classmethod
    def constant(cls, tau: int) -> "TemperatureFunction":
        return cls(steps=(), default=tau)


@dataclass(frozen=True)
class System:
    """A tile set together with its size-dependent binding threshold."""

    tile_set: TileSet
    temperature: TemperatureFunction


@dataclass(frozen=True, order=True)
class Placement:
    """One tile instance at a grid position."""

    x: int
    y: int
    tile: str


@dataclass(frozen=True)
class Assembly:
    """A finite set of placements with distinct positions.

    Cells are kept sorted by position so equality and hashing do not depend
    on construction order. Translation classes are handled by
    :func:`canonicalize` and :class:`Supertile`.
    """

    cells: tuple[Placement, ...]

    def __post_init__(self) -> None:
        cells = tuple(sorted(self.cells))
        object.__setattr__(self, "cells", cells)
        if not cells:
            raise ValueError("assembly must be nonempty")
        if len({(p.x, p.y) for p in cells}) != len(cells):
            raise ValueError("assembly has overlapping placements")

    def __len__(self) -> int:
        return len(self.cells)

    @cached_property
    def grid(self) -> dict[Position, str]:
        return {(p.x, p.y): p.tile for p in self.cells}

    @cached_property
    def positions(self) -> frozenset[Position]:
        return frozenset(self.grid)

    @cached_property
    def key(self) -> tuple[tuple[int, int, str], ...]:
        """Plain-tuple form, convenient as a dict key."""
        return tuple((p.x, p.y, p.tile) for p in self.cells)

    def bounds(self) -> tuple[int, int, int, int]:
        """(min_x, min_y, max_x, max_y)."""
        xs = [p.x for p in self.cells]
        ys = [p.y for p in self.cells]
        return min(xs), min(ys), max(xs), max(ys)


def assembly_of(cells: Iterable[tuple[int, int, str]]) -> Assembly:
    """Build an assembly from ``(x, y, tile_name)`` triples."""
    return Assembly(tuple(Placement(x, y, t) for x, y, t in cells))


def translate(assembly: Assembly, dx: int, dy: int) -> Assembly:
    if dx == 0 and dy == 0:
        return assembly
    return Assembly(tuple(Placement(p.x + dx, p.y + dy, p.tile) for p in assembly.cells))


def canonicalize(assembly: Assembly) -> Assembly:
    """Translate so the bounding box corner sits at the origin."""
    min_x, min_y, _, _ = assembly.bounds()
    return translate(assembly, -min_x, -min_y)


@dataclass(frozen=True)
class Supertile:
    """A translation class of assemblies, stored in canonical position."""

    assembly: Assembly

    def __post_init__(self) -> None:
        min_x, min_y, _, _ = self.assembly.bounds()
        if min_x != 0 or min_y != 0:
            raise ValueError("supertile assembly must be in canonical position")

    @classmethod
    def of(cls, assembly: Assembly) -> "Supertile":
        return cls(canonicalize(assembly))

    def __len__(self) -> int:
        return len(self.assembly)

    @property
    def key(self) -> tuple[tuple[int, int, str], ...]:
        return self.assembly.key


Edge = tuple[Position, Position, int]


@dataclass(frozen=True)
class BondGraph:
    """Positions as nodes, positive-strength bonds as weighted edges."""

    nodes: tuple[Position, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes)))
        edges = []
        node_set = set(self.nodes)
        for u, v, w in self.edges:
            if u > v:
                u, v = v, u
            if u not in node_set or v not in node_set:
                raise ValueError(f"edge endpoint not a node: {u} {v}")
            if w < 1:
                raise ValueError("bond edges must have positive strength")
            edges.append((u, v, w))
        object.__setattr__(self, "edges", tuple(sorted(edges)))

    @cached_property
    def adjacency(self) -> dict[Position, tuple[tuple[Position, int], ...]]:
        adj: dict[Position, list[tuple[Position, int]]] = {u: [] for u in self.nodes}
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return {u: tuple(nbrs) for u, nbrs in adj.items()}

    @property
    def total_strength(self) -> int:
        return sum(w for _, _, w in self.edges)


def build_bond_graph(assembly: Assembly, tile_set: TileSet) -> BondGraph:
    """Bond graph of an assembly: one weighted edge per positive bond."""
    grid = assembly.grid
    edges: list[Edge] = []
    for (x, y), name in grid.items():
        tile = tile_set[name]
        for d in ("n", "e"):
            dx, dy = OFFSET[d]
            nbr = (x + dx, y + dy)
            other = grid.get(nbr)
            if other is None:
                continue
            w = bond_strength(tile, d, tile_set[other])
            if w > 0:
                edges.append(((x, y), nbr, w))
    return BondGraph(nodes=tuple(grid), edges=tuple(edges))


def cut_strength(graph: BondGraph, side: frozenset[Position] | set[Position]) -> int:
    """Total strength of bonds crossing the bipartition ``(side, rest)``."""
    node_set = set(graph.nodes)
    if not side or not node_set - set(side):
        raise ValueError("side must be a nonempty proper subset of the nodes")
    if not set(side) <= node_set:
        raise ValueError("side contains positions outside the graph")
    return sum(w for u, v, w in graph.edges if (u in side) != (v in side))


def is_connected(graph: BondGraph) -> bool:
    """Whether every node is reachable through positive bonds."""
    if not graph.nodes:
        return True
    adj = graph.adjacency
    seen = {graph.nodes[0]}
    queue = deque(seen)
    while queue:
        u = queue.popleft()
        for v, _ in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == len(graph.nodes)


def connected_components(graph: BondGraph) -> tuple[frozenset[Position], ...]:
    """Bond-graph components, each a frozenset of positions, in sorted order."""
    adj = graph.adjacency
    seen: set[Position] = set()
    comps: list[frozenset[Position]] = []
    for start in graph.nodes:
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        seen.add(start)
        while queue:
            u = queue.popleft()
            for v, _ in adj[u]:
                if v not in seen:
                    seen.add(v)
                    comp.add(v)
                    queue.append(v)
        comps.append(frozenset(comp))
    return tuple(sorted(comps, key=lambda c: sorted(c)))


def sub_assembly(assembly: Assembly, positions: Iterable[Position]) -> Assembly:
    """The restriction of an assembly to the given positions."""
    wanted = set(positions)
    cells = tuple(p for p in assembly.cells if (p.x, p.y) in wanted)
    if len(cells) != len(wanted):
        raise ValueError("positions not all present in assembly")
    return Assembly(cells)


# ---------------------------------------------------------------------------
# JSON forms. Parsers are strict: unknown or missing fields are errors and
# an empty string stands for a bare tile side.


def _check_keys(obj: object, keys: tuple[str, ...], where: str) -> dict:
    if not isinstance(obj, dict):
        raise ValueError(f"{where}: expected an object")
    extra = set(obj) - set(keys)
    missing = set(keys) - set(obj)
    if extra:
        raise ValueError(f"{where}: unknown fields {sorted(extra)}")
    if missing:
        raise ValueError(f"{where}: missing fields {sorted(missing)}")
    return obj


def _check_int(value: object, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{where}: expected an integer, got {value!r}")
    return value


def _check_str(value: object, where: str) -> str:
    if not isinstance(value, str):
        raise ValueError(f"{where}: expected a string, got {value!r}")
    return value


def system_to_json(system: System) -> dict:
    glues = [
        {"label": g.label, "strength": g.strength} for g in system.tile_set.glues
    ]
    tiles = []
    for t in system.tile_set:
        row = {"name": t.name}
        for d in DIRECTIONS:
            g = t.glue(d)
            row[d] = g.label if g else ""
        tiles.append(row)
    temp = {
        "steps": [[n, v] for n, v in system.temperature.steps],
        "default": system.temperature.default,
    }
    return {"glues": glues, "tiles": tiles, "temperature": temp}


def system_from_json(data: object) -> System:
    top = _check_keys(data, ("glues", "tiles", "temperature"), "system")
    if not isinstance(top["glues"], list) or not isinstance(top["tiles"], list):
        raise ValueError("system: glues and tiles must be arrays")
    by_label: dict[str, Glue] = {}
    for i, entry in enumerate(top["glues"]):
        row = _check_keys(entry, ("label", "strength"), f"glues[{i}]")
        label = _check_str(row["label"], f"glues[{i}].label")
        strength = _check_int(row["strength"], f"glues[{i}].strength")
        if label in by_label:
            raise ValueError(f"glues[{i}]: duplicate label {label!r}")
        by_label[label] = Glue(label, strength)

    def side(raw: object, where: str) -> Glue | None:
        label = _check_str(raw, where)
        if label == "":
            return None
        if label not in by_label:
            raise ValueError(f"{where}: undeclared glue {label!r}")
        return by_label[label]

    tiles = []
    for i, entry in enumerate(top["tiles"]):
        row = _check_keys(entry, ("name", "n", "e", "s", "w"), f"tiles[{i}]")
        tiles.append(
            TileType(
                name=_check_str(row["name"], f"tiles[{i}].name"),
                north=side(row["n"], f"tiles[{i}].n"),
                east=side(row["e"], f"tiles[{i}].e"),
                south=side(row["s"], f"tiles[{i}].s"),
                west=side(row["w"], f"tiles[{i}].w"),
            )
        )

    traw = _check_keys(top["temperature"], ("steps", "default"), "temperature")
    if not isinstance(traw["steps"], list):
        raise ValueError("temperature.steps must be an array")
    steps = []
    for i, pair in enumerate(traw["steps"]):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ValueError(f"temperature.steps[{i}]: expected [bound, value]")
        steps.append(
            (
                _check_int(pair[0], f"temperature.steps[{i}][0]"),
                _check_int(pair[1], f"temperature.steps[{i}][1]"),
            )
        )
    temperature = TemperatureFunction(
        steps=tuple(steps), default=_check_int(traw["default"], "temperature.default")
    )
    return System(tile_set=TileSet(tuple(tiles)), temperature=temperature)


def assembly_to_json(assembly: Assembly) -> dict:
    return {
        "placements": [{"x": p.x, "y": p.y, "tile": p.tile} for p in assembly.cells]
    }


def assembly_from_json(data: object) -> Assembly:
    top = _check_keys(data, ("placements",), "assembly")
    if not isinstance(top["placements"], list):
        raise ValueError("assembly.placements must be an array")
    cells = []
    for i, entry in enumerate(top["placements"]):
        row = _check_keys(entry, ("x", "y", "tile"), f"placements[{i}]")
        cells.append(
            Placement(
                x=_check_int(row["x"], f"placements[{i}].x"),
                y=_check_int(row["y"], f"placements[{i}].y"),
                tile=_check_str(row["tile"], f"placements[{i}].tile"),
            )
        )
    return Assembly(tuple(cells))
