"""Walkthrough: one mapping, one query, seven answer semantics.

The single dependency "P(x) -> exists z: E(x,z)" with source {P(a)} is the
classic stress test: the open-world reading answers nothing, a closed-world
reading that demands a unique minimal solution also answers nothing, and the
union-of-minimal-solutions reading keeps exactly the guaranteed fact.

Run with:  python3 demos/02_seven_semantics.py
"""

from pathlib import Path

from dx import Budget, answers_semantics, parse_instance, parse_mapping, parse_query
from dx.textio import SourceText

DATA = Path(__file__).parent / "data"

mapping = parse_mapping(SourceText.from_file(DATA / "successor.dx"))
source = parse_instance(SourceText.from_file(DATA / "successor.inst"), mapping.source)
budget = Budget(fresh_constants=3, max_atoms=8, max_fixpoint_rounds=2)

for query_file in ("successor_some.q", "successor_unique.q"):
    query = parse_query(SourceText.from_file(DATA / query_file), mapping.target)
    print(f"query {query_file}:")
    for semantics in ("owa", "cwa", "rcwa", "gcwa", "egcwa", "pws", "gcwa-star"):
        result = answers_semantics(mapping, source, query, semantics, budget)
        answers = sorted(tuple(v.name for v in t) for t in result.answers)
        note = result.meta.get("diagnostic", "")
        print(f"  {semantics:>9}: {answers}  {note}")
    print()

print(
    "Note how rcwa refuses (no unique minimal solution), cwa commits to a\n"
    "single successor, and gcwa-star keeps the guaranteed fact without\n"
    "excluding further successors."
)
