"""Walkthrough: chase a source instance and shrink the result to its core.

Run with:  python3 demos/01_exchange_and_core.py
"""

from pathlib import Path

from dx import (
    atom_blocks,
    blocks_packed,
    canonical_solution,
    core_of,
    find_homomorphism,
    parse_instance,
    parse_mapping,
    serialize_instance,
)
from dx.textio import SourceText

DATA = Path(__file__).parent / "data"

mapping = parse_mapping(SourceText.from_file(DATA / "chain.dx"))
source = parse_instance(SourceText.from_file(DATA / "chain.inst"), mapping.source)

print("source instance:")
print(serialize_instance(source))

# The chase fires every dependency once per body match, inventing a fresh
# null for each existential variable.
cansol = canonical_solution(mapping, source)
print("canonical solution:")
print(serialize_instance(cansol))

# The core is the smallest homomorphically equivalent subinstance; it is the
# preferred materialization because it also answers monotone queries.
core = core_of(cansol)
print("core solution:")
print(serialize_instance(core))

print("core embeds back into the chase result:",
      find_homomorphism(core, cansol) is not None)

# Atom blocks group atoms connected through shared nulls; packed blocks
# (every two atoms share a null) are what the fast query path needs.
partition = atom_blocks(core)
print(f"blocks: {len(partition.blocks)}, packed: {blocks_packed(core)}")
