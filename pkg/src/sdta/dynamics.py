"""Assembly dynamics: pairwise combination, breaking, and state exploration.

Two producible supertiles combine when some non-overlapping placement binds
them with total strength at least the threshold for the smaller piece (and
at least one actual bond). A producible breaks when it splits into exactly
two connected pieces across a cut lighter than the threshold for the
smaller piece. Exploration closes the singleton set under both moves.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

from sdta.core import (
    Assembly,
    OFFSET,
    OPPOSITE,
    Placement,
    Position,
    Supertile,
    System,
    TileSet,
    build_bond_graph,
    sub_assembly,
)
from sdta.stability import (
    SearchBudgetExceeded,
    canonical_side,
    loose_fragments,
)

SupertileKey = tuple[tuple[int, int, str], ...]


@dataclass(frozen=True)
class Combination:
    """A successful pairwise attachment at a fixed relative placement."""

    offset: tuple[int, int]
    strength: int
    threshold: int
    result: Supertile


@dataclass(frozen=True)
class Break:
    """A split of one assembly into two connected pieces across a light cut."""

    side: frozenset[Position]
    strength: int
    threshold: int
    parts: tuple[Supertile, Supertile]


Surface = dict[tuple[str, str], tuple[Position, ...]]


def surface_sites(supertile: Supertile, tile_set: TileSet) -> Surface:
    """Exposed glue sites of a supertile, grouped by (direction, label).

    A site is exposed when its glue faces a cell the assembly does not
    occupy. Any bond formed with a disjoint partner uses exposed sites on
    both sides, so candidate placements only need these.
    """
    grid = supertile.assembly.grid
    sites: dict[tuple[str, str], list[Position]] = {}
    for (x, y), name in grid.items():
        tile = tile_set[name]
        for d in ("n", "e", "s", "w"):
            g = tile.glue(d)
            if g is None:
                continue
            dx, dy = OFFSET[d]
            if (x + dx, y + dy) in grid:
                continue
            sites.setdefault((d, g.label), []).append((x, y))
    return {sig: tuple(ps) for sig, ps in sites.items()}


@lru_cache(maxsize=65536)
def _surface(supertile: Supertile, tile_set: TileSet) -> Surface:
    return surface_sites(supertile, tile_set)


def combinations(
    a: Supertile,
    b: Supertile,
    system: System,
    a_surface: Surface | None = None,
    b_surface: Surface | None = None,
) -> list[Combination]:
    """All ways a copy of ``b`` can attach to ``a``.

    The returned offsets translate ``b``; results are canonical supertiles.
    Sorted by (offset, result key) for determinism.
    """
    # scan the smaller piece's cells against the bigger grid
    if len(b) > len(a):
        mirrored = combinations(b, a, system, b_surface, a_surface)
        found = [
            Combination(
                offset=(-c.offset[0], -c.offset[1]),
                strength=c.strength,
                threshold=c.threshold,
                result=c.result,
            )
            for c in mirrored
        ]
        found.sort(key=lambda c: c.offset)
        return found

    tiles = system.tile_set
    tau = system.temperature
    threshold = tau.value(min(len(a), len(b)))
    a_grid = a.assembly.grid
    b_grid = b.assembly.grid

    # candidate offsets come from exposed facing glues with equal labels
    if a_surface is None:
        a_surface = _surface(a, tiles)
    if b_surface is None:
        b_surface = _surface(b, tiles)
    offsets: set[tuple[int, int]] = set()
    for (d, label), a_sites in a_surface.items():
        b_sites = b_surface.get((OPPOSITE[d], label))
        if not b_sites:
            continue
        dx, dy = OFFSET[d]
        for ax, ay in a_sites:
            for bx, by in b_sites:
                offsets.add((ax + dx - bx, ay + dy - by))
    if not offsets:
        return []

    found: list[Combination] = []
    a_positions = a.assembly.positions
    for ox, oy in sorted(offsets):
        shifted = {(x + ox, y + oy): t for (x, y), t in b_grid.items()}
        if not a_positions.isdisjoint(shifted):
            continue
        strength = 0
        for (x, y), name in shifted.items():
            tile = tiles[name]
            for d in ("n", "e", "s", "w"):
                dx, dy = OFFSET[d]
                other = a_grid.get((x + dx, y + dy))
                if other is None:
                    continue
                g = tile.glue(d)
                h = tiles[other].glue(OPPOSITE[d])
                if g is not None and h is not None and g.label == h.label:
                    strength += g.strength
        if strength >= threshold:
            cells = list(a.assembly.cells)
            cells.extend(Placement(x, y, t) for (x, y), t in shifted.items())
            found.append(
                Combination(
                    offset=(ox, oy),
                    strength=strength,
                    threshold=threshold,
                    result=Supertile.of(Assembly(tuple(cells))),
                )
            )
    return found


def breaks(
    assembly: Assembly, system: System, max_states: int | None = None
) -> list[Break]:
    """All splits into two connected pieces across a sub-threshold cut."""
    from sdta.stability import DEFAULT_MAX_STATES

    if max_states is None:
        max_states = DEFAULT_MAX_STATES
    n = len(assembly)
    if n < 2:
        return []
    tau = system.temperature
    tau_cap = tau.value(n // 2)
    graph = build_bond_graph(assembly, system.tile_set)
    adjacency = graph.adjacency
    all_positions = frozenset(graph.nodes)

    seen: set[frozenset[Position]] = set()
    out: list[Break] = []
    for cells, cost in loose_fragments(graph, tau_cap, max_states):
        other = all_positions - cells
        if cost >= tau.value(min(len(cells), len(other))):
            continue
        side = canonical_side(all_positions, cells)
        if side in seen:
            continue
        # the complement must be connected too
        start = next(iter(other))
        stack = [start]
        reached = {start}
        while stack:
            u = stack.pop()
            for v, _ in adjacency[u]:
                if v in other and v not in reached:
                    reached.add(v)
                    stack.append(v)
        if len(reached) != len(other):
            continue
        seen.add(side)
        first = Supertile.of(sub_assembly(assembly, side))
        second = Supertile.of(sub_assembly(assembly, all_positions - side))
        out.append(
            Break(
                side=side,
                strength=cost,
                threshold=tau.value(min(len(cells), len(other))),
                parts=(first, second),
            )
        )
    out.sort(key=lambda b: (b.strength, min(len(b.side), n - len(b.side)), sorted(b.side)))
    return out


@dataclass(frozen=True)
class Event:
    """One applied move in an exploration, referring to supertiles by key."""

    kind: str  # "combine" or "break"
    inputs: tuple[SupertileKey, ...]
    outputs: tuple[SupertileKey, ...]
    strength: int
    threshold: int
    kept: bool


@dataclass
class ExploreResult:
    """Closure of the singleton set under combination and breaking.

    ``truncated`` reports whether any size or count cap was hit, in which
    case terminality is only relative to the enumerated supertiles.
    """

    supertiles: dict[SupertileKey, Supertile]
    singletons: tuple[SupertileKey, ...]
    terminals: tuple[SupertileKey, ...]
    events: tuple[Event, ...]
    truncated: bool
    notes: tuple[str, ...] = ()

    def supertile(self, key: SupertileKey) -> Supertile:
        return self.supertiles[key]


def _pair_worker(args):
    a, b, system, a_surface, b_surface = args
    return combinations(a, b, system, a_surface, b_surface)


def explore(
    system: System,
    max_size: int | None = None,
    max_supertiles: int = 20000,
    threads: int = 1,
    max_states: int | None = None,
) -> ExploreResult:
    """Enumerate producible supertiles by closing under both moves.

    Candidate partners for each new supertile come from an index of exposed
    glue signatures, so only pairs that share a complementary exposed glue
    are ever tested; other pairs cannot bond at all.

    Deterministic regardless of ``threads``: pairs are generated in a fixed
    order and results merged in that order.
    """
    tiles = system.tile_set
    singles = sorted(
        (Supertile.of(Assembly((Placement(0, 0, t.name),))) for t in tiles),
        key=lambda s: s.key,
    )
    known: dict[SupertileKey, Supertile] = {}
    by_id: list[Supertile] = []
    id_of: dict[SupertileKey, int] = {}
    surfaces: list[Surface] = []
    # (direction, label) -> ids of supertiles exposing it, ascending
    index: dict[tuple[str, str], list[int]] = {}
    can_combine: set[SupertileKey] = set()
    can_break: set[SupertileKey] = set()
    events: list[Event] = []
    truncated = False
    notes: list[str] = []

    def admit(s: Supertile) -> None:
        sid = len(by_id)
        known[s.key] = s
        id_of[s.key] = sid
        by_id.append(s)
        surf = surface_sites(s, tiles)
        surfaces.append(surf)
        for sig in surf:
            index.setdefault(sig, []).append(sid)

    frontier: list[Supertile] = []
    for s in singles:
        if s.key not in known:
            admit(s)
            frontier.append(s)
    singleton_keys = tuple(s.key for s in frontier)

    while frontier:
        # break moves for the new supertiles
        wave_new: dict[SupertileKey, Supertile] = {}
        for s in frontier:
            try:
                splits = breaks(s.assembly, system, max_states)
            except SearchBudgetExceeded as exc:
                truncated = True
                notes.append(f"break search gave up on {len(s)} tiles: {exc}")
                splits = []
            for br in splits:
                can_break.add(s.key)
                outputs = tuple(p.key for p in br.parts)
                events.append(
                    Event(
                        kind="break",
                        inputs=(s.key,),
                        outputs=outputs,
                        strength=br.strength,
                        threshold=br.threshold,
                        kept=True,
                    )
                )
                for part in br.parts:
                    if part.key not in known and part.key not in wave_new:
                        wave_new[part.key] = part

        # combination moves: each new supertile against every indexed
        # candidate sharing a complementary exposed glue, in id order
        pairs: list[tuple[Supertile, Supertile, Surface, Surface]] = []
        frontier_ids = {id_of[s.key] for s in frontier}
        for s in frontier:
            sid = id_of[s.key]
            surf = surfaces[sid]
            cand: set[int] = set()
            for d, label in surf:
                hits = index.get((OPPOSITE[d], label))
                if hits:
                    cand.update(hits)
            for cid in sorted(cand):
                if cid in frontier_ids and cid > sid:
                    continue  # the mirrored pair covers it
                pairs.append((s, by_id[cid], surf, surfaces[cid]))
        if threads > 1 and len(pairs) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(
                    pool.map(_pair_worker, ((a, b, system, sa, sb) for a, b, sa, sb in pairs))
                )
        else:
            results = [combinations(a, b, system, sa, sb) for a, b, sa, sb in pairs]
        for (a, b, _, _), combos in zip(pairs, results):
            for combo in combos:
                can_combine.add(a.key)
                can_combine.add(b.key)
                result = combo.result
                kept = max_size is None or len(result) <= max_size
                if not kept:
                    truncated = True
                events.append(
                    Event(
                        kind="combine",
                        inputs=(a.key, b.key),
                        outputs=(result.key,),
                        strength=combo.strength,
                        threshold=combo.threshold,
                        kept=kept,
                    )
                )
                if kept and result.key not in known and result.key not in wave_new:
                    wave_new[result.key] = result

        frontier = [wave_new[k] for k in sorted(wave_new)]
        for s in frontier:
            admit(s)
        if len(known) > max_supertiles:
            truncated = True
            notes.append(f"supertile cap {max_supertiles} reached")
            break

    terminals = tuple(
        s.key for s in by_id if s.key not in can_combine and s.key not in can_break
    )
    return ExploreResult(
        supertiles=known,
        singletons=singleton_keys,
        terminals=terminals,
        events=tuple(events),
        truncated=truncated,
        notes=tuple(notes),
    )


def keys_reaching_any(
    result: ExploreResult, targets: tuple[SupertileKey, ...]
) -> frozenset[SupertileKey]:
    """All enumerated supertiles from which some target is reachable.

    Follows kept events backward (an input of a move reaches its outputs).
    The targets themselves are included.
    """
    incoming: dict[SupertileKey, set[SupertileKey]] = {}
    for event in result.events:
        if not event.kept:
            continue
        for out in event.outputs:
            for inp in event.inputs:
                incoming.setdefault(out, set()).add(inp)
    reached = set(targets)
    stack = list(targets)
    while stack:
        node = stack.pop()
        for parent in incoming.get(node, ()):
            if parent not in reached:
                reached.add(parent)
                stack.append(parent)
    return frozenset(k for k in reached if k in result.supertiles)


def keys_reaching(result: ExploreResult, target: SupertileKey) -> frozenset[SupertileKey]:
    """All enumerated supertiles from which ``target`` is reachable."""
    return keys_reaching_any(result, (target,))
