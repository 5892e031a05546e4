"""Brute-force ground-truth laboratory for the seven query semantics.

Everything here enumerates finite families of ground instances over a
budgeted universe (the source constants, the constants of the constraints and
the query, plus a pool of fresh constants).  Results are exact relative to
those budgets; the test suite guards adequacy by checking that one extra
fresh constant never changes an answer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from .errors import BudgetExceeded, UnsupportedSemantics
from . import chase
from .corelib import core_of
from .logic import (
    CountExists,
    FOQuery,
    Forall,
    Formula,
    Not,
    Or,
    RelAtom,
    Eq,
    cert_poss,
    eval_fo,
    fresh_constants,
    is_ucq,
    query_answers,
    all_constants,
)
from .minrep import enum_min_c
from .model import (
    Atom,
    Const,
    Instance,
    SchemaMapping,
    Term,
    Value,
    Var,
    apply_map,
    atom_key,
    instance_key,
    match_conjunction,
    value_key,
)

SEMANTICS = ("owa", "cwa", "rcwa", "gcwa", "egcwa", "pws", "gcwa-star")

UNION_CLOSURE_CAP = 60_000
SUBSET_SEARCH_CAP = 300_000
EXTENSION_NODE_CAP = 200_000


@dataclass(frozen=True)
class Budget:
    """Enumeration bounds; defaults are documented in the README."""

    fresh_constants: int = 4
    max_atoms: int = 12
    max_fixpoint_rounds: int = 3

    def as_dict(self) -> Dict[str, int]:
        return {
            "fresh_constants": self.fresh_constants,
            "max_atoms": self.max_atoms,
            "max_fixpoint_rounds": self.max_fixpoint_rounds,
        }


@dataclass(frozen=True)
class SolutionFamily:
    instances: Tuple[Instance, ...]
    role: str
    meta: Dict[str, object] = field(default_factory=dict, hash=False, compare=False)

    def __iter__(self) -> Iterator[Instance]:
        return iter(self.instances)

    def __len__(self) -> int:
        return len(self.instances)

    def __contains__(self, inst: Instance) -> bool:
        return inst in set(self.instances)


@dataclass(frozen=True)
class SemanticsAnswer:
    answers: FrozenSet[Tuple[Const, ...]]
    semantics: str
    meta: Dict[str, object] = field(default_factory=dict, hash=False, compare=False)


def _sorted_family(instances: Iterable[Instance]) -> Tuple[Instance, ...]:
    return tuple(sorted(set(instances), key=instance_key))


# ---------------------------------------------------------------- universe


def mapping_constants(mapping: SchemaMapping) -> Set[Const]:
    out: Set[Const] = set()
    for tgd in mapping.st_tgds:
        for pa in tgd.body + tgd.head:
            out.update(t for t in pa.terms if isinstance(t, Const))
    for egd in mapping.egds:
        for pa in egd.body:
            out.update(t for t in pa.terms if isinstance(t, Const))
    for sentence in mapping.general_constraints:
        out.update(sentence.consts())
    return out


def universe_of(
    mapping: SchemaMapping,
    source: Instance,
    budget: Budget,
    extra: Iterable[Const] = (),
) -> Tuple[Const, ...]:
    pool = set(source.consts()) | mapping_constants(mapping) | set(extra)
    pool |= set(fresh_constants(budget.fresh_constants))
    return tuple(sorted(pool, key=value_key))


def target_atom_pool(mapping: SchemaMapping, universe: Sequence[Const]) -> Tuple[Atom, ...]:
    atoms = []
    for rel, arity in mapping.target.relations:
        for args in itertools.product(universe, repeat=arity):
            atoms.append(Atom(rel, args))
    return tuple(sorted(atoms, key=atom_key))


# ---------------------------------------------------------------- horn closure

# General constraints in universal Horn shape (at most one positive literal,
# head variables bound by the body) admit a deterministic repair closure; the
# rest of the constraints are only ever checked, with a bounded search for
# repairs on top.


@dataclass(frozen=True)
class _HornRule:
    body: Tuple[Tuple[str, Tuple[Term, ...]], ...]
    head_atom: Optional[Tuple[str, Tuple[Term, ...]]]  # None: denial clause
    head_eq: Optional[Tuple[Term, Term]]


def _push_negations(matrix: Formula, negate: bool = False) -> Optional[Formula]:
    """NNF for quantifier-free matrices; bails out (None) when a counting
    quantifier would have to be negated."""
    from .logic import And as _And

    if isinstance(matrix, (RelAtom, Eq)):
        return Not(matrix) if negate else matrix
    if isinstance(matrix, Not):
        return _push_negations(matrix.sub, not negate)
    if isinstance(matrix, _And):
        parts = [_push_negations(p, negate) for p in matrix.parts]
        if any(p is None for p in parts):
            return None
        return Or(tuple(parts)) if negate else _And(tuple(parts))
    if isinstance(matrix, Or):
        parts = [_push_negations(p, negate) for p in matrix.parts]
        if any(p is None for p in parts):
            return None
        return _And(tuple(parts)) if negate else Or(tuple(parts))
    if isinstance(matrix, CountExists) and not negate:
        return matrix
    return None


def _as_horn(sentence: FOQuery) -> Optional[_HornRule]:
    body_vars: Set[Var] = set()
    matrix = sentence.body
    while isinstance(matrix, Forall):
        matrix = matrix.sub
    matrix = _push_negations(matrix)
    if matrix is None:
        return None
    literals = _flatten_or(matrix)
    if literals is None:
        return None
    body: List[Tuple[str, Tuple[Term, ...]]] = []
    head_atom = None
    head_eq = None
    for lit in literals:
        if isinstance(lit, Not) and isinstance(lit.sub, RelAtom):
            body.append((lit.sub.rel, lit.sub.terms))
            body_vars.update(t for t in lit.sub.terms if isinstance(t, Var))
        elif isinstance(lit, RelAtom):
            if head_atom or head_eq:
                return None
            head_atom = (lit.rel, lit.terms)
        elif isinstance(lit, Eq):
            if head_atom or head_eq:
                return None
            head_eq = (lit.left, lit.right)
        else:
            return None
    head_vars: Set[Var] = set()
    if head_atom:
        head_vars = {t for t in head_atom[1] if isinstance(t, Var)}
    if head_eq:
        head_vars = {t for t in head_eq if isinstance(t, Var)}
    if not head_vars <= body_vars:
        return None
    return _HornRule(tuple(body), head_atom, head_eq)


def _flatten_or(matrix: Formula) -> Optional[List[Formula]]:
    if isinstance(matrix, Or):
        out: List[Formula] = []
        for p in matrix.parts:
            sub = _flatten_or(p)
            if sub is None:
                return None
            out.extend(sub)
        return out
    if isinstance(matrix, (RelAtom, Eq)) or (
        isinstance(matrix, Not) and isinstance(matrix.sub, (RelAtom, Eq))
    ):
        return [matrix]
    return None


class _ConstraintEngine:
    """Splits a mapping's target constraints into a Horn part (closed under a
    deterministic consequence operator) and a residue that is only checked."""

    def __init__(self, mapping: SchemaMapping):
        self.mapping = mapping
        self.horn: List[_HornRule] = []
        self.residue: List[FOQuery] = []
        for egd in mapping.egds:
            self.horn.append(
                _HornRule(
                    tuple((a.rel, a.terms) for a in egd.body),
                    None,
                    (egd.equated[0], egd.equated[1]),
                )
            )
        for sentence in mapping.general_constraints:
            rule = _as_horn(sentence)
            if rule is not None:
                self.horn.append(rule)
            else:
                self.residue.append(sentence)

    def close(self, source: Instance, target: Instance) -> Optional[Instance]:
        """Add every Horn-forced target atom; None when a clause is violated
        beyond repair (an equality over distinct constants, a denial, or a
        forced source atom)."""
        current = set(target.atoms)
        changed = True
        while changed:
            changed = False
            combined = Instance(current | source.atoms)
            for rule in self.horn:
                for bnd in match_conjunction(list(rule.body), combined):
                    if rule.head_eq is not None:
                        l, r = rule.head_eq
                        lv = l if isinstance(l, Const) else bnd[l]
                        rv = r if isinstance(r, Const) else bnd[r]
                        if lv != rv:
                            return None
                        continue
                    if rule.head_atom is None:
                        return None
                    rel, terms = rule.head_atom
                    atom = Atom(
                        rel,
                        tuple(t if isinstance(t, Const) else bnd[t] for t in terms),
                    )
                    if atom in combined:
                        continue
                    if rel not in self.mapping.target:
                        return None  # constraint forces a source fact
                    current.add(atom)
                    changed = True
        return Instance(current)

    def residue_satisfied(self, source: Instance, target: Instance) -> bool:
        if not self.residue:
            return True
        combined = source.union(target)
        return all(eval_fo(s.body, combined) for s in self.residue)

    def residue_hopeless(self, source: Instance, target: Instance) -> bool:
        """True when some violated residue constraint can never be repaired
        by adding atoms (currently: a bounded count already above its upper
        limit)."""
        combined = source.union(target)
        for sentence in self.residue:
            if _overcount_violation(sentence.body, combined):
                return True
        return False


def _overcount_violation(body: Formula, combined: Instance) -> bool:
    matrix = body
    while isinstance(matrix, Forall):
        matrix = matrix.sub
    matrix = _push_negations(matrix)
    if matrix is None:
        return False
    literals = _flatten_or_loose(matrix)
    if literals is None:
        return False
    counts = [l for l in literals if isinstance(l, CountExists)]
    negs = [
        (l.sub.rel, l.sub.terms)
        for l in literals
        if isinstance(l, Not) and isinstance(l.sub, RelAtom)
    ]
    if len(counts) != 1 or len(negs) + 1 != len(literals):
        return False
    count = counts[0]
    if not isinstance(count.sub, RelAtom):
        return False
    for bnd in match_conjunction(negs, combined):
        witnesses = 0
        for v in combined.dom():
            args = tuple(
                v if t == count.var else (t if isinstance(t, Const) else bnd[t])
                for t in count.sub.terms
            )
            if Atom(count.sub.rel, args) in combined:
                witnesses += 1
        if witnesses > count.hi:
            return True
    return False


def _flatten_or_loose(matrix: Formula) -> Optional[List[Formula]]:
    if isinstance(matrix, Or):
        out: List[Formula] = []
        for p in matrix.parts:
            sub = _flatten_or_loose(p)
            if sub is None:
                return None
            out.extend(sub)
        return out
    return [matrix]


# ---------------------------------------------------------------- minimal solutions


def _st_minimal_solutions(
    mapping: SchemaMapping,
    source: Instance,
    universe: Sequence[Const],
    null_cap: int = 8,
) -> List[Instance]:
    """Ground instances over the universe that are minimal with respect to
    the st-tgds alone: injective fresh instantiations of the minimal
    representatives of the core of the chased source."""
    core = core_of(chase.canonical_solution(mapping, source))
    base_consts = set(core.consts()) | mapping_constants(mapping)
    reps = enum_min_c(core, base_consts, null_cap=null_cap, product_cap=60_000)
    available = [c for c in universe if c not in base_consts]
    out: Set[Instance] = set()
    for rep in reps.representatives:
        nulls = sorted(rep.nulls(), key=value_key)
        if len(nulls) > len(available):
            raise BudgetExceeded(
                f"{len(nulls)} fresh values needed but only {len(available)} in the universe"
            )
        for images in itertools.permutations(available, len(nulls)):
            v: Dict[Value, Value] = {c: c for c in rep.consts()}
            v.update(zip(nulls, images))
            out.add(apply_map(v, rep))
    return sorted(out, key=instance_key)


def _minimal_extensions(
    base: Instance,
    mapping: SchemaMapping,
    source: Instance,
    engine: _ConstraintEngine,
    pool: Sequence[Atom],
    max_atoms: int,
    node_cap: int = EXTENSION_NODE_CAP,
) -> List[Instance]:
    """All minimal ground solutions that contain ``base``, within budget."""
    closed = engine.close(source, base)
    if closed is None or len(closed) > max_atoms:
        return []
    if engine.residue_satisfied(source, closed):
        return [closed]
    if engine.residue_hopeless(source, closed):
        return []
    candidates = [a for a in pool if a not in closed]
    found: List[Instance] = []
    nodes = 0
    budget_left = max_atoms - len(closed)
    for size in range(1, budget_left + 1):
        for extra in itertools.combinations(candidates, size):
            nodes += 1
            if nodes > node_cap:
                raise BudgetExceeded("extension search exceeded its node cap")
            cand_base = Instance(closed.atoms | frozenset(extra))
            if any(f.subset_of(cand_base) for f in found):
                continue
            cand = engine.close(source, cand_base)
            if cand is None or len(cand) > max_atoms:
                continue
            if any(f.subset_of(cand) for f in found):
                continue
            if engine.residue_satisfied(source, cand):
                found.append(cand)
    minimal: List[Instance] = []
    for inst in sorted(found, key=instance_key):
        if not any(other.proper_subset_of(inst) for other in found):
            minimal.append(inst)
    return minimal


def minimal_ground_solutions(
    mapping: SchemaMapping,
    source: Instance,
    budget: Budget = Budget(),
    extra_constants: Iterable[Const] = (),
) -> SolutionFamily:
    """Subset-minimal ground solutions over the budget universe."""
    universe = universe_of(mapping, source, budget, extra_constants)
    engine = _ConstraintEngine(mapping)
    seeds = _st_minimal_solutions(mapping, source, universe)
    pool = target_atom_pool(mapping, universe)
    collected: Set[Instance] = set()
    for seed in seeds:
        if len(seed) > budget.max_atoms:
            continue
        for inst in _minimal_extensions(
            seed, mapping, source, engine, pool, budget.max_atoms
        ):
            collected.add(inst)
    minimal = [
        inst
        for inst in collected
        if not any(other.proper_subset_of(inst) for other in collected)
    ]
    return SolutionFamily(
        _sorted_family(minimal),
        "minimal",
        {"universe": [c.name for c in universe], "budget": budget.as_dict()},
    )


# ---------------------------------------------------------------- fixpoint


def _union_closure(
    members: Sequence[Instance], max_atoms: int, cap: int = UNION_CLOSURE_CAP
) -> List[Instance]:
    """All distinct unions of nonempty subsets of the members, capped by size."""
    base: List[FrozenSet[Atom]] = []
    seen: Set[FrozenSet[Atom]] = set()
    for m in sorted(set(members), key=instance_key):
        if len(m.atoms) <= max_atoms and m.atoms not in seen:
            seen.add(m.atoms)
            base.append(m.atoms)
    frontier = list(base)
    work = 0
    while frontier:
        nxt: List[FrozenSet[Atom]] = []
        for u in frontier:
            for m in base:
                work += 1
                if work > 40 * cap:
                    raise BudgetExceeded("union closure exceeded its work cap")
                if m <= u:
                    continue
                w = u | m
                if len(w) <= max_atoms and w not in seen:
                    if len(seen) >= cap:
                        raise BudgetExceeded("union closure exceeded its cap")
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return [Instance(a) for a in seen]


def _is_union_of(instance: Instance, members: Sequence[Instance]) -> bool:
    contained = [m for m in members if m.subset_of(instance)]
    if not contained:
        return False
    covered = frozenset(a for m in contained for a in m.atoms)
    return covered == instance.atoms


@dataclass(frozen=True)
class FixpointResult:
    family: SolutionFamily
    levels: Tuple[Tuple[Instance, ...], ...]
    converged: bool


def tstar_fixpoint(
    mapping: SchemaMapping,
    source: Instance,
    budget: Budget = Budget(),
    extra_constants: Iterable[Const] = (),
) -> FixpointResult:
    """Iterate the closure operator over unions of previously found members.

    Level 0 holds the minimal ground solutions; each later level adds, for
    every union of earlier members, the minimal ground solutions above it.
    Members that are themselves unions of other members are not stored (they
    add nothing to the family of unions), so each level lists the new
    union-irredundant representatives.  Convergence within the round budget
    is reported, never assumed.
    """
    universe = universe_of(mapping, source, budget, extra_constants)
    engine = _ConstraintEngine(mapping)
    pool = target_atom_pool(mapping, universe)
    level0 = list(
        minimal_ground_solutions(mapping, source, budget, extra_constants).instances
    )
    levels: List[Tuple[Instance, ...]] = [tuple(level0)]
    generators: List[Instance] = list(level0)
    converged = False
    if mapping.is_st_only():
        # dependencies with existential-positive heads survive unions, so
        # every union is already a solution and the levels stabilize at 0
        converged = True
    for _ in range(budget.max_fixpoint_rounds if not converged else 0):
        added: List[Instance] = []
        for union in sorted(_union_closure(generators, budget.max_atoms), key=instance_key):
            if chase.is_solution(mapping, source, union):
                continue  # its own minimal extension, already a union
            for ext in _minimal_extensions(
                union, mapping, source, engine, pool, budget.max_atoms
            ):
                if _is_union_of(ext, generators + added):
                    continue
                added.append(ext)
        if not added:
            converged = True
            break
        added = list(_sorted_family(added))
        levels.append(tuple(added))
        generators.extend(added)
    family = SolutionFamily(
        _sorted_family(generators),
        f"tstar_level({len(levels) - 1})",
        {
            "rounds": len(levels) - 1,
            "converged": converged,
            "budget": budget.as_dict(),
        },
    )
    return FixpointResult(family, tuple(levels), converged)


def gcwa_star_solutions(
    mapping: SchemaMapping,
    source: Instance,
    budget: Budget = Budget(),
    extra_constants: Iterable[Const] = (),
) -> SolutionFamily:
    """Ground solutions that are unions of fixpoint members, within budget."""
    fix = tstar_fixpoint(mapping, source, budget, extra_constants)
    unions = _union_closure(list(fix.family.instances), budget.max_atoms)
    if mapping.is_st_only():
        chosen = unions  # dependencies with existential heads survive unions
    else:
        chosen = [u for u in unions if chase.is_solution(mapping, source, u)]
    meta = dict(fix.family.meta)
    meta["tstar_size"] = len(fix.family)
    meta["converged"] = fix.converged
    return SolutionFamily(_sorted_family(chosen), "gcwa_star", meta)


def is_gcwa_star_solution(
    mapping: SchemaMapping,
    source: Instance,
    target: Instance,
    budget: Budget = Budget(),
) -> bool:
    """For mappings of st-tgds and egds: a union of at least one minimal
    ground solution that also satisfies the egds."""
    if mapping.general_constraints:
        raise UnsupportedSemantics(
            "the membership test handles st-tgds and egds only"
        )
    if not target.is_ground:
        return False
    st_only = SchemaMapping(
        mapping.source, mapping.target, mapping.st_tgds, (), ()
    )
    minimal = minimal_ground_solutions(
        st_only, source, budget, extra_constants=target.consts()
    )
    if not _is_union_of(target, list(minimal.instances)):
        return False
    return all(chase.egd_satisfied(egd, target) for egd in mapping.egds)


# ---------------------------------------------------------------- semantics


def _intersect(
    q: FOQuery, family: Iterable[Instance]
) -> Tuple[Optional[Set[Tuple[Value, ...]]], int]:
    common: Optional[Set[Tuple[Value, ...]]] = None
    count = 0
    for inst in family:
        count += 1
        answers = query_answers(q, inst)
        common = answers if common is None else (common & answers)
        if not common:
            break
    return common, count


def _const_answers(common: Optional[Set[Tuple[Value, ...]]]) -> FrozenSet[Tuple[Const, ...]]:
    if not common:
        return frozenset()
    return frozenset(t for t in common if all_constants(t))


def _solution_subsets(
    mapping: SchemaMapping,
    source: Instance,
    pool: Sequence[Atom],
    max_atoms: int,
    cap: int = SUBSET_SEARCH_CAP,
) -> Iterator[Instance]:
    """All ground solutions assembled from the atom pool, smallest first."""
    count = 0
    for size in range(0, min(len(pool), max_atoms) + 1):
        for combo in itertools.combinations(pool, size):
            count += 1
            if count > cap:
                raise BudgetExceeded("solution enumeration exceeded its cap")
            inst = Instance(combo)
            if chase.is_solution(mapping, source, inst):
                yield inst


def _justified_atoms(
    mapping: SchemaMapping, source: Instance, target: Instance
) -> Set[Atom]:
    """Atoms covered by some dependency firing whose whole head lies in the
    target (the witness tuple ranges over the target's domain)."""
    justified: Set[Atom] = set()
    for tgd in mapping.st_tgds:
        body_patterns = [(a.rel, a.terms) for a in tgd.body]
        head_patterns = [(a.rel, a.terms) for a in tgd.head]
        for bnd in match_conjunction(body_patterns, source):
            seed = {v: bnd[v] for v in tgd.frontier_vars()}
            for full in match_conjunction(head_patterns, target, seed):
                for pa in tgd.head:
                    justified.add(
                        Atom(
                            pa.rel,
                            tuple(
                                t if isinstance(t, Const) else full[t]
                                for t in pa.terms
                            ),
                        )
                    )
    return justified


def answers_semantics(
    mapping: SchemaMapping,
    source: Instance,
    q: FOQuery,
    semantics: str,
    budget: Budget = Budget(),
    empty_policy: str = "none",
) -> SemanticsAnswer:
    """Evaluate the query under one of the seven supported semantics."""
    semantics = semantics.lower()
    if semantics not in SEMANTICS:
        raise UnsupportedSemantics(f"unknown semantics {semantics!r}")
    meta: Dict[str, object] = {"budget": budget.as_dict(), "path": "oracle"}
    extra = tuple(q.consts())
    universe = universe_of(mapping, source, budget, extra)

    def finish(answers: FrozenSet[Tuple[Const, ...]]) -> SemanticsAnswer:
        return SemanticsAnswer(answers, semantics, meta)

    def empty_family_answers() -> FrozenSet[Tuple[Const, ...]]:
        if empty_policy == "all":
            return frozenset(itertools.product(universe, repeat=q.width))
        return frozenset()

    if semantics == "cwa":
        if not mapping.is_st_only():
            raise UnsupportedSemantics(
                "the closed-world semantics is defined for st-tgd mappings only"
            )
        answers = cert_poss(q, chase.canonical_solution(mapping, source))
        meta["path"] = "cansol-valuations"
        return finish(frozenset(answers))

    if semantics == "owa":
        if is_ucq(q) and mapping.is_st_only():
            meta["path"] = "universal-solution"
            answers = {
                t
                for t in query_answers(q, chase.canonical_solution(mapping, source))
                if all_constants(t)
            }
            return finish(frozenset(answers))
        pool = target_atom_pool(mapping, universe)
        common, seen = _intersect(
            q, _solution_subsets(mapping, source, pool, budget.max_atoms)
        )
        meta["solutions_checked"] = seen
        if seen == 0:
            return finish(empty_family_answers())
        return finish(_const_answers(common))

    if semantics == "egcwa":
        family = minimal_ground_solutions(mapping, source, budget, extra)
        meta["family_size"] = len(family)
        if not len(family):
            meta["diagnostic"] = "no minimal ground solution within budget"
            return finish(empty_family_answers())
        common, _ = _intersect(q, family)
        return finish(_const_answers(common))

    if semantics == "rcwa":
        family = minimal_ground_solutions(mapping, source, budget, extra)
        if len(family) == 1:
            meta["rcwa_solution"] = True
            common, _ = _intersect(q, family)
            return finish(_const_answers(common))
        meta["diagnostic"] = "no RCWA-solution"
        meta["minimal_count"] = len(family)
        return finish(empty_family_answers())

    if semantics == "gcwa":
        family = minimal_ground_solutions(mapping, source, budget, extra)
        meta["family_size"] = len(family)
        if not len(family):
            meta["diagnostic"] = "no minimal ground solution within budget"
            return finish(empty_family_answers())
        covered = sorted(
            {a for inst in family for a in inst.atoms},
            key=atom_key,
        )
        common, seen = _intersect(
            q, _solution_subsets(mapping, source, covered, budget.max_atoms)
        )
        meta["solutions_checked"] = seen
        if seen == 0:
            meta["diagnostic"] = "no GCWA-solution"
            return finish(empty_family_answers())
        return finish(_const_answers(common))

    if semantics == "pws":
        if not mapping.is_st_only():
            raise UnsupportedSemantics(
                "the possible-worlds semantics is defined for st-tgd mappings only"
            )
        head_pool: Set[Atom] = set()
        for tgd in mapping.st_tgds:
            body_patterns = [(a.rel, a.terms) for a in tgd.body]
            for bnd in match_conjunction(body_patterns, source):
                frontier = {v: bnd[v] for v in tgd.frontier_vars()}
                for images in itertools.product(universe, repeat=len(tgd.exists_vars)):
                    assignment = dict(frontier)
                    assignment.update(zip(tgd.exists_vars, images))
                    for pa in tgd.head:
                        head_pool.add(
                            Atom(
                                pa.rel,
                                tuple(
                                    t if isinstance(t, Const) else assignment[t]
                                    for t in pa.terms
                                ),
                            )
                        )
        pool = sorted(head_pool, key=atom_key)

        def pws_family() -> Iterator[Instance]:
            for inst in _solution_subsets(mapping, source, pool, budget.max_atoms):
                if inst.atoms <= _justified_atoms(mapping, source, inst):
                    yield inst

        common, seen = _intersect(q, pws_family())
        meta["solutions_checked"] = seen
        if seen == 0:
            meta["diagnostic"] = "no PWS-solution"
            return finish(empty_family_answers())
        return finish(_const_answers(common))

    # gcwa-star
    if is_ucq(q) and mapping.is_st_only():
        # monotone query: certain answers over all unions coincide with the
        # certain answers over the minimal members alone
        family = minimal_ground_solutions(mapping, source, budget, extra)
        meta["path"] = "oracle-minimal-members"
    else:
        family = gcwa_star_solutions(mapping, source, budget, extra)
        meta["converged"] = family.meta.get("converged")
    meta["family_size"] = len(family)
    if not len(family):
        meta["diagnostic"] = "no gcwa-star solution within budget"
        return finish(empty_family_answers())
    common, _ = _intersect(q, family)
    return finish(_const_answers(common))
