"""Stability analysis for assemblies under size-dependent thresholds.

An assembly is stable when every bipartition of its tiles is held by bonds
of total strength at least the threshold for the smaller side's size. The
search here enumerates "loose fragments": connected tile sets whose bond
boundary is lighter than the largest relevant threshold. Any violating
bipartition is a union of pairwise non-touching loose fragments, so
checking fragment families is a complete decision procedure whenever the
enumeration finishes within budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from sdta.core import (
    Assembly,
    BondGraph,
    Position,
    System,
    TileSet,
    build_bond_graph,
    connected_components,
    cut_strength,
)

DEFAULT_MAX_STATES = 2_000_000
EXACT_SIZE_LIMIT = 24


class SearchBudgetExceeded(RuntimeError):
    """Raised when a stability search exceeds its state budget."""


@dataclass(frozen=True)
class Cut:
    """A bipartition witness: one side, its bond strength, and the threshold
    it was measured against (the threshold for the smaller side's size)."""

    side: frozenset[Position]
    strength: int
    threshold: int


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of a stability check.

    ``stable`` is None when the search ran out of budget before deciding.
    ``witness`` is a violating cut when ``stable`` is False.
    """

    stable: bool | None
    witness: Cut | None
    method: str
    note: str = ""


def canonical_side(all_positions: frozenset[Position], side: frozenset[Position]) -> frozenset[Position]:
    """Pick the smaller side of a bipartition; break ties lexicographically."""
    other = all_positions - side
    a, b = sorted(side), sorted(other)
    if (len(a), a) <= (len(b), b):
        return frozenset(side)
    return frozenset(other)


def loose_fragments(
    graph: BondGraph, budget: int, max_states: int = DEFAULT_MAX_STATES
) -> list[tuple[frozenset[Position], int]]:
    """All connected proper subsets whose bond boundary weighs under ``budget``.

    Each fragment is reported exactly once as ``(cells, boundary_weight)``.
    Enumeration is a binary include/exclude search rooted at each node in
    sorted order; pruning uses only boundary weight already forced by the
    decisions taken, so large fragments behind light seams are still found.
    """
    nodes = graph.nodes
    n = len(nodes)
    if budget <= 0 or n < 2:
        return []
    if n > 600:
        raise SearchBudgetExceeded(f"assembly too large for fragment search ({n} tiles)")
    index = {u: i for i, u in enumerate(nodes)}
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for u, v, w in graph.edges:
        i, j = index[u], index[v]
        adj[i].append((j, w))
        adj[j].append((i, w))

    out: list[tuple[frozenset[Position], int]] = []
    states = 0

    def grow(
        root: int,
        included: set[int],
        excluded: set[int],
        border: list[int],
        in_border: set[int],
        cost: int,
    ) -> None:
        nonlocal states
        states += 1
        if states > max_states:
            raise SearchBudgetExceeded(f"fragment search exceeded {max_states} states")
        cand = next((c for c in border if c not in excluded and c not in included), None)
        if cand is None:
            if len(included) < n:
                out.append((frozenset(nodes[i] for i in included), cost))
            return
        pos = border.index(cand)
        rest = border[pos:]
        # exclude branch: edges from the included set to cand become boundary
        drop = sum(w for j, w in adj[cand] if j in included)
        if cost + drop < budget:
            excluded.add(cand)
            grow(root, included, excluded, rest, in_border, cost + drop)
            excluded.remove(cand)
        # include branch: edges from cand to already-dead cells become boundary
        gain = sum(w for j, w in adj[cand] if j in excluded or j < root)
        if cost + gain < budget:
            included.add(cand)
            added = []
            for j, _ in adj[cand]:
                if j > root and j not in in_border and j not in included:
                    in_border.add(j)
                    added.append(j)
            grow(root, included, excluded, rest + sorted(added), in_border, cost + gain)
            for j in added:
                in_border.discard(j)
            included.remove(cand)

    for root in range(n):
        base = sum(w for j, w in adj[root] if j < root)
        if base >= budget:
            continue
        border = sorted(j for j, _ in adj[root] if j > root)
        grow(root, {root}, set(), border, set(border), base)
    out.sort(key=lambda item: (item[1], len(item[0]), sorted(item[0])))
    return out


def find_violation(
    assembly: Assembly, system: System, max_states: int = DEFAULT_MAX_STATES
) -> Cut | None:
    """The best witness of instability, or None when the assembly is stable.

    Among violating bipartitions the witness minimizes (strength, smaller
    side size, lexicographic side). Raises SearchBudgetExceeded when the
    search cannot finish within budget.
    """
    graph = build_bond_graph(assembly, system.tile_set)
    n = len(graph.nodes)
    if n < 2:
        return None
    tau = system.temperature
    tau_cap = tau.value(n // 2)
    if tau_cap <= 0:
        return None
    comps = connected_components(graph)
    if len(comps) > 16:
        raise SearchBudgetExceeded("too many bond-graph components for family search")

    frags = loose_fragments(graph, tau_cap, max_states)
    all_positions = frozenset(graph.nodes)
    halos: list[frozenset[Position]] = []
    neighbor_map = {u: frozenset(v for v, _ in nbrs) for u, nbrs in graph.adjacency.items()}
    for cells, _ in frags:
        halo = set(cells)
        for u in cells:
            halo |= neighbor_map[u]
        halos.append(frozenset(halo))

    best: tuple[int, int, list[Position]] | None = None
    best_cut: Cut | None = None
    states = 0

    def consider(union: frozenset[Position], strength: int) -> None:
        nonlocal best, best_cut
        small = min(len(union), n - len(union))
        threshold = tau.value(small)
        if strength >= threshold:
            return
        side = canonical_side(all_positions, union)
        key = (strength, small, sorted(side))
        if best is None or key < best:
            best = key
            best_cut = Cut(side=side, strength=strength, threshold=threshold)

    def extend(start: int, union: frozenset[Position], strength: int) -> None:
        nonlocal states
        for i in range(start, len(frags)):
            cells, cost = frags[i]
            if strength + cost >= tau_cap:
                break  # fragments are cost-sorted, later ones only cost more
            if not union.isdisjoint(halos[i]):
                continue
            states += 1
            if states > max_states:
                raise SearchBudgetExceeded("family search exceeded state budget")
            new_union = union | cells
            if len(new_union) < n:
                consider(new_union, strength + cost)
            extend(i + 1, new_union, strength + cost)

    for i, (cells, cost) in enumerate(frags):
        if cost < tau_cap:
            consider(cells, cost)
            extend(i + 1, cells, cost)
    return best_cut


def is_stable_bounded(
    assembly: Assembly, system: System, max_states: int = DEFAULT_MAX_STATES
) -> StabilityReport:
    """Decide stability by bounded cut search.

    Complete whenever it finishes: a violating bipartition has crossing
    strength under tau_max = threshold(floor(n/2)), so each connected piece
    of either side is a loose fragment, and the family search above revisits
    every union of non-touching fragments. A budget overrun yields an
    inconclusive report (stable=None) rather than a guess.
    """
    try:
        witness = find_violation(assembly, system, max_states)
    except SearchBudgetExceeded as exc:
        return StabilityReport(stable=None, witness=None, method="bounded", note=str(exc))
    if witness is None:
        return StabilityReport(stable=True, witness=None, method="bounded")
    return StabilityReport(stable=False, witness=witness, method="bounded")


def is_stable_exact(
    assembly: Assembly, system: System, size_limit: int = EXACT_SIZE_LIMIT
) -> StabilityReport:
    """Decide stability by checking every bipartition. Refuses large inputs."""
    n = len(assembly)
    if n > size_limit:
        raise ValueError(
            f"exact mode enumerates all bipartitions and is capped at {size_limit} "
            f"tiles (got {n}); use is_stable_bounded for larger assemblies"
        )
    witness = exhaustive_violation(assembly, system)
    if witness is None:
        return StabilityReport(stable=True, witness=None, method="exact")
    return StabilityReport(stable=False, witness=witness, method="exact")


def is_stable_constant(assembly: Assembly, system: System) -> StabilityReport:
    """Constant-threshold special case: stable iff the global min cut holds.

    Only valid when the temperature function is a single constant c; then
    every bipartition faces the same threshold, so stability reduces to one
    weighted min-cut computation.
    """
    tau = system.temperature
    values = {value for _, value in tau.steps} | {tau.default}
    if len(values) != 1:
        raise ValueError("constant mode requires a constant temperature function")
    c = tau.default
    if len(assembly) < 2:
        return StabilityReport(stable=True, witness=None, method="constant")
    strength, side = global_min_cut(assembly, system.tile_set)
    if strength >= c:
        return StabilityReport(stable=True, witness=None, method="constant")
    all_positions = frozenset(assembly.positions)
    witness = Cut(side=canonical_side(all_positions, side), strength=strength, threshold=c)
    return StabilityReport(stable=False, witness=witness, method="constant")


_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


def exhaustive_violation(assembly: Assembly, system: System) -> Cut | None:
    """Reference check over every bipartition; limited to EXACT_SIZE_LIMIT tiles.

    Same witness ordering as :func:`find_violation`, found by brute force.
    """
    graph = build_bond_graph(assembly, system.tile_set)
    nodes = graph.nodes
    n = len(nodes)
    if n < 2:
        return None
    if n > EXACT_SIZE_LIMIT:
        raise ValueError(f"exhaustive check limited to {EXACT_SIZE_LIMIT} tiles, got {n}")
    index = {u: i for i, u in enumerate(nodes)}
    masks = np.arange(1, 1 << (n - 1), dtype=np.uint32)
    cut = np.zeros(masks.shape, dtype=np.int64)
    for u, v, w in graph.edges:
        i, j = index[u], index[v]
        bu = (masks >> (i - 1)) & 1 if i > 0 else np.zeros(masks.shape, dtype=np.uint32)
        bv = (masks >> (j - 1)) & 1 if j > 0 else np.zeros(masks.shape, dtype=np.uint32)
        cut += w * np.asarray(bu ^ bv, dtype=np.int64)
    ones = (
        _POPCOUNT[masks & 0xFF]
        + _POPCOUNT[(masks >> 8) & 0xFF]
        + _POPCOUNT[(masks >> 16) & 0xFF]
        + _POPCOUNT[(masks >> 24) & 0xFF]
    ).astype(np.int64)
    small = np.minimum(ones, n - ones)
    tau_by_size = np.array(
        [system.temperature.value(s) for s in range(1, n // 2 + 1)], dtype=np.int64
    )
    thresholds = tau_by_size[small - 1]
    violating = cut < thresholds
    if not bool(violating.any()):
        return None
    idx = np.flatnonzero(violating)
    order = np.lexsort((masks[idx], small[idx], cut[idx]))
    contenders = idx[order]
    all_positions = frozenset(nodes)
    best_key = None
    best_cut = None
    # mask order settles strength and size; scan the tied prefix for the lex side
    lead = contenders[0]
    for m in contenders:
        if cut[m] != cut[lead] or small[m] != small[lead]:
            break
        bits = int(masks[m])
        side_one = frozenset(nodes[i] for i in range(1, n) if (bits >> (i - 1)) & 1)
        side = canonical_side(all_positions, side_one)
        key = sorted(side)
        if best_key is None or key < best_key:
            best_key = key
            best_cut = Cut(
                side=side,
                strength=int(cut[m]),
                threshold=system.temperature.value(int(small[m])),
            )
    return best_cut


LEX_REFINE_LIMIT = 64


def _weighted_graph(graph: BondGraph) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(graph.nodes)
    for u, v, w in graph.edges:
        g.add_edge(u, v, weight=w, capacity=w)
    return g


def _min_side_feasible(
    graph: BondGraph, value: int, inside: set[Position], outside: set[Position]
) -> bool:
    """Whether some global-minimum cut side contains ``inside`` and avoids
    ``outside``. Contracts both sets and compares the s-t min cut against the
    known global value (any s-t cut is a global cut, so equality decides)."""
    g = nx.Graph()

    def rep(u: Position):
        if u in inside:
            return "__in__"
        if u in outside:
            return "__out__"
        return u

    g.add_node("__in__")
    for u in graph.nodes:
        g.add_node(rep(u))
    for u, v, w in graph.edges:
        ru, rv = rep(u), rep(v)
        if ru == rv:
            continue
        if g.has_edge(ru, rv):
            g[ru][rv]["capacity"] += w
        else:
            g.add_edge(ru, rv, capacity=w)
    if outside:
        return nx.minimum_cut_value(g, "__in__", "__out__", capacity="capacity") == value
    rest = [u for u in graph.nodes if u not in inside]
    return any(
        nx.minimum_cut_value(g, "__in__", t, capacity="capacity") == value for t in rest
    )


def _lex_min_side(graph: BondGraph, value: int) -> frozenset[Position]:
    """The lexicographically smallest minimum-cut side containing the
    smallest node, built element by element.

    A shorter sorted tuple beats any extension of it and extensions only
    append larger elements, so committing the smallest feasible next element
    (or stopping once the committed set already cuts at the minimum) is
    optimal at every step.
    """
    nodes = list(graph.nodes)
    n = len(nodes)
    in_set: set[Position] = {nodes[0]}
    last = nodes[0]
    while True:
        if len(in_set) < n and cut_strength(graph, in_set) == value:
            return frozenset(in_set)
        committed = False
        if len(in_set) + 1 < n:  # the side must stay a proper subset
            for y in nodes:
                if y <= last:
                    continue
                outside = {z for z in nodes if z < y} - in_set
                if _min_side_feasible(graph, value, in_set | {y}, outside):
                    in_set.add(y)
                    last = y
                    committed = True
                    break
        if not committed:
            raise AssertionError("lex-min cut search lost feasibility")


def global_min_cut(assembly: Assembly, tile_set: TileSet) -> tuple[int, frozenset[Position]]:
    """Minimum bond cut over all bipartitions, with a deterministic witness.

    The returned side contains the lexicographically smallest coordinate;
    among minimum cuts the lexicographically smallest such side wins (for
    assemblies past LEX_REFINE_LIMIT tiles, the refinement is skipped and a
    deterministic flow-based side is returned instead). Disconnected input
    yields strength 0 with that coordinate's component as the side.
    Requires at least two tiles.
    """
    graph = build_bond_graph(assembly, tile_set)
    nodes = graph.nodes
    if len(nodes) < 2:
        raise ValueError("min cut needs at least two tiles")
    source = nodes[0]
    comps = connected_components(graph)
    if len(comps) > 1:
        side = next(c for c in comps if source in c)
        return 0, frozenset(side)
    g = _weighted_graph(graph)
    value, _ = nx.stoer_wagner(g, weight="weight")
    value = int(value)
    if len(nodes) <= LEX_REFINE_LIMIT:
        return value, _lex_min_side(graph, value)
    best_side: frozenset[Position] | None = None
    for sink in nodes[1:]:
        flow, (reachable, rest) = nx.minimum_cut(g, source, sink, capacity="capacity")
        if flow != value:
            continue
        side = frozenset(reachable if source in reachable else rest)
        if best_side is None or sorted(side) < sorted(best_side):
            best_side = side
    if best_side is None:
        raise AssertionError("no sink matched the global min cut value")
    return value, best_side
