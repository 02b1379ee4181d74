"""Stability verdicts cross-checked between exact, bounded, and min-cut modes."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdta.core import (
    Glue,
    System,
    TemperatureFunction,
    TileSet,
    TileType,
    assembly_of,
    build_bond_graph,
    cut_strength,
)
from sdta.stability import (
    SearchBudgetExceeded,
    canonical_side,
    exhaustive_violation,
    find_violation,
    global_min_cut,
    is_stable_bounded,
    is_stable_constant,
    is_stable_exact,
    loose_fragments,
)

from conftest import row_assembly, row_tile_set
from test_dynamics import small_setup


class TestSixRow:
    def test_exact_finds_the_half_split(self, six_row_system):
        report = is_stable_exact(row_assembly(0, 5), six_row_system)
        assert report.stable is False
        assert report.method == "exact"
        cut = report.witness
        assert cut.strength == 1
        assert cut.threshold == 2
        assert cut.side == frozenset({(0, 0), (1, 0), (2, 0)})

    def test_bounded_agrees_with_exact(self, six_row_system):
        exact = is_stable_exact(row_assembly(0, 5), six_row_system)
        bounded = is_stable_bounded(row_assembly(0, 5), six_row_system)
        assert bounded.stable is False
        assert bounded.method == "bounded"
        assert bounded.witness == exact.witness

    def test_five_row_is_stable(self, six_row_system):
        assert is_stable_exact(row_assembly(0, 4), six_row_system).stable is True
        assert is_stable_bounded(row_assembly(0, 4), six_row_system).stable is True

    def test_witness_reevaluates(self, six_row_system):
        assembly = row_assembly(0, 5)
        cut = is_stable_exact(assembly, six_row_system).witness
        graph = build_bond_graph(assembly, six_row_system.tile_set)
        assert cut_strength(graph, cut.side) == cut.strength
        small = min(len(cut.side), len(assembly) - len(cut.side))
        assert cut.threshold == six_row_system.temperature.value(small)
        assert cut.strength < cut.threshold


class TestSmallCases:
    def test_single_tile_stable(self, six_row_system):
        assert is_stable_exact(row_assembly(0, 0), six_row_system).stable is True
        assert is_stable_bounded(row_assembly(0, 0), six_row_system).stable is True

    def test_strong_pair_stable(self):
        tiles = TileSet(
            (
                TileType(name="a", east=Glue("j", 3)),
                TileType(name="b", west=Glue("j", 3)),
            )
        )
        system = System(tile_set=tiles, temperature=TemperatureFunction.constant(3))
        pair = assembly_of([(0, 0, "a"), (1, 0, "b")])
        assert is_stable_exact(pair, system).stable is True
        assert is_stable_constant(pair, system).stable is True

    def test_exact_refuses_large_input(self):
        tiles = row_tile_set(tuple([2] * 29))
        system = System(tile_set=tiles, temperature=TemperatureFunction.constant(1))
        with pytest.raises(ValueError, match="bounded"):
            is_stable_exact(row_assembly(0, 29), system)

    def test_bounded_reports_budget_overrun(self, six_row_system):
        report = is_stable_bounded(row_assembly(0, 5), six_row_system, max_states=2)
        assert report.stable is None
        assert report.witness is None
        assert report.note

    def test_constant_mode_requires_constant_tau(self, six_row_system):
        with pytest.raises(ValueError, match="constant"):
            is_stable_constant(row_assembly(0, 2), six_row_system)


class TestMinCut:
    def test_weak_end_of_row(self):
        tiles = row_tile_set((1, 2))
        system = System(tile_set=tiles, temperature=TemperatureFunction.constant(1))
        strength, side = global_min_cut(row_assembly(0, 2), system.tile_set)
        assert strength == 1
        assert side == frozenset({(0, 0)})

    def test_unit_square_block(self):
        tiles = TileSet(
            (
                TileType(name="sw", east=Glue("s_", 1), north=Glue("w_", 1)),
                TileType(name="se", west=Glue("s_", 1), north=Glue("e_", 1)),
                TileType(name="nw", east=Glue("n_", 1), south=Glue("w_", 1)),
                TileType(name="ne", west=Glue("n_", 1), south=Glue("e_", 1)),
            )
        )
        block = assembly_of([(0, 0, "sw"), (1, 0, "se"), (0, 1, "nw"), (1, 1, "ne")])
        strength, side = global_min_cut(block, tiles)
        assert strength == 2
        assert side == frozenset({(0, 0)})

    def test_disconnected_returns_zero(self):
        tiles = row_tile_set((2,))
        far = assembly_of([(0, 0, "r0"), (5, 5, "r1")])
        strength, side = global_min_cut(far, tiles)
        assert strength == 0
        assert side == frozenset({(0, 0)})

    def test_requires_two_tiles(self):
        tiles = row_tile_set((2,))
        with pytest.raises(ValueError):
            global_min_cut(assembly_of([(0, 0, "r0")]), tiles)


class TestFragments:
    def test_six_row_fragments_under_budget(self, six_row_system):
        graph = build_bond_graph(row_assembly(0, 5), six_row_system.tile_set)
        frags = loose_fragments(graph, budget=2)
        sides = {cells for cells, _ in frags}
        assert sides == {
            frozenset({(0, 0), (1, 0), (2, 0)}),
            frozenset({(3, 0), (4, 0), (5, 0)}),
        }
        assert all(cost == 1 for _, cost in frags)

    def test_budget_zero_finds_nothing(self, six_row_system):
        graph = build_bond_graph(row_assembly(0, 5), six_row_system.tile_set)
        assert loose_fragments(graph, budget=0) == []

    def test_canonical_side_prefers_smaller(self):
        cells = frozenset({(0, 0), (1, 0), (2, 0)})
        assert canonical_side(cells, frozenset({(0, 0)})) == frozenset({(0, 0)})
        assert canonical_side(cells, frozenset({(0, 0), (1, 0)})) == frozenset({(2, 0)})


@given(small_setup())
@settings(max_examples=150, deadline=None)
def test_bounded_matches_exact(setup):
    system, assembly = setup
    exact = exhaustive_violation(assembly, system)
    bounded = find_violation(assembly, system)
    if exact is None:
        assert bounded is None
    else:
        assert bounded == exact


@given(small_setup(), st.integers(min_value=1, max_value=6))
@settings(max_examples=100, deadline=None)
def test_constant_mode_matches_exact(setup, tau):
    _, assembly = setup
    system = System(
        tile_set=setup[0].tile_set, temperature=TemperatureFunction.constant(tau)
    )
    exact = is_stable_exact(assembly, system)
    constant = is_stable_constant(assembly, system)
    assert constant.stable == exact.stable
    if constant.witness is not None:
        graph = build_bond_graph(assembly, system.tile_set)
        assert cut_strength(graph, constant.witness.side) == constant.witness.strength
        assert constant.witness.strength < tau


@given(small_setup())
@settings(max_examples=80, deadline=None)
def test_lowering_tau_preserves_stability(setup):
    system, assembly = setup
    if is_stable_exact(assembly, system).stable is not True:
        return
    tau = system.temperature
    lowered = TemperatureFunction(
        steps=tuple((b, max(1, v - 1)) for b, v in tau.steps),
        default=max(1, tau.default - 1),
    )
    eased = System(tile_set=system.tile_set, temperature=lowered)
    assert is_stable_exact(assembly, eased).stable is True


@given(small_setup())
@settings(max_examples=80, deadline=None)
def test_min_cut_matches_bipartition_scan(setup):
    system, assembly = setup
    graph = build_bond_graph(assembly, system.tile_set)
    positions = sorted(assembly.positions)
    source = positions[0]
    best = None
    # scan every side containing the smallest coordinate
    rest = positions[1:]
    for mask in range(0, 1 << len(rest)):
        side = frozenset([source] + [p for i, p in enumerate(rest) if (mask >> i) & 1])
        if len(side) == len(positions):
            continue
        strength = cut_strength(graph, side)
        key = (strength, sorted(side))
        if best is None or key < best:
            best = key
    got_strength, got_side = global_min_cut(assembly, system.tile_set)
    if got_strength == 0:
        # disconnected: contract pins the side to the source's component
        assert got_strength == best[0]
        assert source in got_side
        assert cut_strength(graph, got_side) == 0
    else:
        assert (got_strength, sorted(got_side)) == best


@given(small_setup())
@settings(max_examples=80, deadline=None)
def test_unstable_witness_is_genuine(setup):
    system, assembly = setup
    report = is_stable_bounded(assembly, system)
    if report.stable is not False:
        return
    cut = report.witness
    graph = build_bond_graph(assembly, system.tile_set)
    assert cut_strength(graph, cut.side) == cut.strength
    small = min(len(cut.side), len(assembly) - len(cut.side))
    assert cut.strength < system.temperature.value(small)
