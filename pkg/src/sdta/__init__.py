"""Size-dependent two-handed tile assembly: simulator and analysis tools."""

from sdta.core import (
    Assembly,
    BondGraph,
    Glue,
    Placement,
    Supertile,
    System,
    TemperatureFunction,
    TileSet,
    TileType,
    assembly_from_json,
    assembly_of,
    assembly_to_json,
    bond_strength,
    build_bond_graph,
    canonicalize,
    connected_components,
    cut_strength,
    is_connected,
    sub_assembly,
    system_from_json,
    system_to_json,
    translate,
)

__all__ = [
    "Assembly",
    "BondGraph",
    "Glue",
    "Placement",
    "Supertile",
    "System",
    "TemperatureFunction",
    "TileSet",
    "TileType",
    "assembly_from_json",
    "assembly_of",
    "assembly_to_json",
    "bond_strength",
    "build_bond_graph",
    "canonicalize",
    "connected_components",
    "cut_strength",
    "is_connected",
    "sub_assembly",
    "system_from_json",
    "system_to_json",
    "translate",
]
