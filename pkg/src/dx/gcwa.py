"""Certain-answer evaluation under the union-of-minimal-worlds semantics.

The fast path decides universal queries on a packed core: the negated query
is split into existential conjuncts, and a conjunct is satisfiable over some
finite union of minimal possible worlds iff the block-wise minimal
representatives can be joined compatibly into a witness instance padded with
disjoint copies of the core.  The general evaluator realizes the same test by
bounded brute force (no packedness needed) and is exponential.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

from .corelib import blocks_packed, core_solution, is_core
from .errors import (
    BudgetExceeded,
    NotHomomorphismClosed,
    NotUniversal,
    PreconditionViolated,
)
from .logic import (
    And,
    Eq,
    FOQuery,
    Formula,
    Not,
    Or,
    RelAtom,
    all_constants,
    dnf_literals,
    is_ucq,
    prenex,
    query_answers,
)
from .minrep import BlockRep, _minimal_images, all_block_reps
from .model import (
    Atom,
    Const,
    Instance,
    Null,
    SchemaMapping,
    Term,
    Value,
    Var,
    apply_map,
    match_conjunction,
    value_key,
)

GENERAL_VALUATION_CAP = 400_000


# ---------------------------------------------------------------- conjuncts

def _term_key(t: Term):
    return (0, t.name) if isinstance(t, Const) else (1, t.name)


def _lit_key(lit: Tuple[str, Tuple[Term, ...]]):
    rel, terms = lit
    return (rel, tuple(_term_key(x) for x in terms))


def _pair_key(pair: Tuple[Term, Term]):
    return (_term_key(pair[0]), _term_key(pair[1]))



@dataclass(frozen=True)
class DisjunctTemplate:
    """One disjunct of the negated universal query, free variables still
    symbolic; positive equalities are resolved later, during specialization."""

    positives: Tuple[Tuple[str, Tuple[Term, ...]], ...]
    negatives: Tuple[Tuple[str, Tuple[Term, ...]], ...]
    equalities: Tuple[Tuple[Term, Term], ...]
    disequalities: Tuple[Tuple[Term, Term], ...]
    quantified: bool = False  # the negated query had a nonempty exists-prefix


class Unsatisfiable:
    """Marker for a disjunct that died during specialization."""

    def __repr__(self):
        return "UNSAT"


UNSAT = Unsatisfiable()


@dataclass(frozen=True)
class ExistentialConjunct:
    """A ground-free-variable conjunct: positive and negated relational
    literals plus disequalities, existentially quantified."""

    positives: Tuple[Tuple[str, Tuple[Term, ...]], ...]
    negatives: Tuple[Tuple[str, Tuple[Term, ...]], ...]
    disequalities: Tuple[Tuple[Term, Term], ...]
    quantified: bool = False  # quantifiers remain even if their literals left

    @property
    def k(self) -> int:
        return len(self.positives)

    @property
    def copy_count(self) -> int:
        """k + total negated-atom width + 2 * #disequalities."""
        return (
            self.k
            + sum(len(terms) for _, terms in self.negatives)
            + 2 * len(self.disequalities)
        )

    def variables(self) -> Tuple[Var, ...]:
        out: Set[Var] = set()
        for _, terms in self.positives + self.negatives:
            out.update(t for t in terms if isinstance(t, Var))
        for a, b in self.disequalities:
            out.update(t for t in (a, b) if isinstance(t, Var))
        return tuple(sorted(out, key=lambda v: v.name))

    def consts(self) -> Tuple[Const, ...]:
        out: Set[Const] = set()
        for _, terms in self.positives + self.negatives:
            out.update(t for t in terms if isinstance(t, Const))
        for a, b in self.disequalities:
            out.update(t for t in (a, b) if isinstance(t, Const))
        return tuple(sorted(out, key=value_key))

    @property
    def is_empty(self) -> bool:
        return not (self.positives or self.negatives or self.disequalities)


def normalize_negation(q: FOQuery) -> Tuple[DisjunctTemplate, ...]:
    """Negate a universal query into existential-conjunct templates.

    Contradictory disjuncts (same-term disequalities, distinct-constant
    equalities, complementary literal pairs) are dropped here; positive
    equalities survive into the templates and are resolved by ``specialize``.
    """
    p = prenex(q.body)
    if p is None or any(kind != "forall" for kind, _ in p[0]):
        raise NotUniversal(f"query {q.name} is not a universal query")
    prefix, matrix = p
    negated = _negate_matrix(matrix)
    templates: List[DisjunctTemplate] = []
    for literals in dnf_literals(negated):
        t = _build_template(literals, quantified=bool(prefix))
        if t is not None:
            templates.append(t)
    return tuple(templates)


def _negate_matrix(matrix: Formula) -> Formula:
    if isinstance(matrix, (RelAtom, Eq)):
        return Not(matrix)
    if isinstance(matrix, Not):
        return matrix.sub
    if isinstance(matrix, And):
        return Or(tuple(_negate_matrix(p) for p in matrix.parts))
    if isinstance(matrix, Or):
        return And(tuple(_negate_matrix(p) for p in matrix.parts))
    raise NotUniversal("quantifier left inside a prenex matrix")


def _build_template(
    literals: Sequence[Formula], quantified: bool = False
) -> Optional[DisjunctTemplate]:
    positives: Set[Tuple[str, Tuple[Term, ...]]] = set()
    negatives: Set[Tuple[str, Tuple[Term, ...]]] = set()
    equalities: Set[Tuple[Term, Term]] = set()
    disequalities: Set[Tuple[Term, Term]] = set()
    for lit in literals:
        if isinstance(lit, RelAtom):
            positives.add((lit.rel, lit.terms))
        elif isinstance(lit, Not) and isinstance(lit.sub, RelAtom):
            negatives.add((lit.sub.rel, lit.sub.terms))
        elif isinstance(lit, Eq):
            l, r = lit.left, lit.right
            if l == r:
                continue
            if isinstance(l, Const) and isinstance(r, Const):
                return None  # distinct constants can never be equal
            equalities.add((l, r))
        elif isinstance(lit, Not) and isinstance(lit.sub, Eq):
            l, r = lit.sub.left, lit.sub.right
            if l == r:
                return None  # t != t is contradictory
            if isinstance(l, Const) and isinstance(r, Const):
                continue  # trivially true
            disequalities.add((l, r))
        else:
            raise NotUniversal(f"unexpected literal {lit!r}")
    if positives & negatives:
        return None
    return DisjunctTemplate(
        tuple(sorted(positives, key=_lit_key)),
        tuple(sorted(negatives, key=_lit_key)),
        tuple(sorted(equalities, key=_pair_key)),
        tuple(sorted(disequalities, key=_pair_key)),
        quantified,
    )


def specialize(
    template: DisjunctTemplate,
    free_vars: Sequence[Var],
    values: Sequence[Const],
) -> Union[ExistentialConjunct, Unsatisfiable]:
    """Plug a candidate tuple into a template and resolve its equalities by
    unification; the result has no free variables left."""
    sub: Dict[Term, Term] = dict(zip(free_vars, values))

    def subst(t: Term) -> Term:
        return sub.get(t, t)

    # union-find over terms, constants win as representatives
    parent: Dict[Term, Term] = {}

    def find(t: Term) -> Term:
        parent.setdefault(t, t)
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    def union(a: Term, b: Term) -> bool:
        ra, rb = find(a), find(b)
        if ra == rb:
            return True
        if isinstance(ra, Const) and isinstance(rb, Const):
            return False
        if isinstance(ra, Const):
            parent[rb] = ra
        elif isinstance(rb, Const):
            parent[ra] = rb
        else:
            lo, hi = sorted((ra, rb), key=lambda v: v.name)
            parent[hi] = lo
        return True

    for l, r in template.equalities:
        if not union(subst(l), subst(r)):
            return UNSAT

    def resolve(t: Term) -> Term:
        return find(subst(t))

    positives = {
        (rel, tuple(resolve(t) for t in terms)) for rel, terms in template.positives
    }
    negatives = {
        (rel, tuple(resolve(t) for t in terms)) for rel, terms in template.negatives
    }
    if positives & negatives:
        return UNSAT
    disequalities = set()
    for l, r in template.disequalities:
        rl, rr = resolve(l), resolve(r)
        if rl == rr:
            return UNSAT
        if isinstance(rl, Const) and isinstance(rr, Const):
            continue
        disequalities.add(tuple(sorted((rl, rr), key=_term_key)))
    return ExistentialConjunct(
        tuple(sorted(positives, key=_lit_key)),
        tuple(sorted(negatives, key=_lit_key)),
        tuple(sorted(disequalities, key=_pair_key)),
        template.quantified,
    )


def satisfies_conjunct(
    instance: Instance,
    conjunct: ExistentialConjunct,
    context: Iterable[Const] = (),
) -> bool:
    """Active-domain satisfaction of an existential conjunct, evaluated by
    joining the positive literals first (nulls count as plain values).

    ``context`` carries the constants of the whole query the conjunct came
    from: splitting a query into disjuncts must not shrink the domain its
    quantifiers range over.
    """
    adom = sorted(
        set(instance.dom()) | set(conjunct.consts()) | set(context), key=value_key
    )
    if conjunct.quantified and not adom:
        return False  # an existential prefix needs a nonempty active domain
    if conjunct.is_empty:
        return True
    positive_vars: Set[Var] = set()
    for _, terms in conjunct.positives:
        positive_vars.update(t for t in terms if isinstance(t, Var))
    loose = [v for v in conjunct.variables() if v not in positive_vars]

    def check(bnd: Dict[Var, Value]) -> bool:
        for rel, terms in conjunct.negatives:
            args = tuple(t if isinstance(t, Const) else bnd[t] for t in terms)
            if Atom(rel, args) in instance:
                return False
        for l, r in conjunct.disequalities:
            lv = l if isinstance(l, Const) else bnd[l]
            rv = r if isinstance(r, Const) else bnd[r]
            if lv == rv:
                return False
        return True

    for bnd in match_conjunction(list(conjunct.positives), instance):
        if not loose:
            if check(bnd):
                return True
            continue
        for extra in itertools.product(adom, repeat=len(loose)):
            full = dict(bnd)
            full.update(zip(loose, extra))
            if check(full):
                return True
    return False


# ---------------------------------------------------------------- compatibility


@dataclass(frozen=True)
class CandidatePair:
    """A renamed block representative together with an assignment that places
    one positive literal inside it."""

    instance: Instance
    assignment: Tuple[Tuple[Var, Value], ...]

    def values(self) -> Tuple[Value, ...]:
        return tuple(v for _, v in self.assignment)

    def as_dict(self) -> Dict[Var, Value]:
        return dict(self.assignment)


def compatible_and_relation(
    pairs: Sequence[CandidatePair],
) -> Optional[Dict[Value, FrozenSet[Value]]]:
    """The smallest equivalence relation witnessing compatibility, or None.

    Forced identifications: assignments must agree on shared variables; a
    class may not contain two distinct constants (nor a constant and a null),
    and merging may not collapse two distinct values of one assignment.
    """
    domain: Set[Value] = set()
    for p in pairs:
        domain.update(p.values())
    parent: Dict[Value, Value] = {v: v for v in domain}

    def find(v: Value) -> Value:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(a: Value, b: Value) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            lo, hi = sorted((ra, rb), key=value_key)
            parent[hi] = lo

    for p1, p2 in itertools.combinations(pairs, 2):
        d1, d2 = p1.as_dict(), p2.as_dict()
        for var in set(d1) & set(d2):
            union(d1[var], d2[var])

    classes: Dict[Value, Set[Value]] = {}
    for v in domain:
        classes.setdefault(find(v), set()).add(v)
    # no class may identify distinct constants, or a constant with a null
    for members in classes.values():
        consts = [v for v in members if isinstance(v, Const)]
        if consts and len(members) > 1:
            return None
    # merging may not identify two distinct values of one assignment
    for p in pairs:
        vals = p.values()
        for a, b in itertools.combinations(set(vals), 2):
            if find(a) == find(b):
                return None
    return {v: frozenset(classes[find(v)]) for v in domain}


def join_pairs(
    pairs: Sequence[CandidatePair],
    relation: Dict[Value, FrozenSet[Value]],
) -> Tuple[Instance, Dict[Var, Value]]:
    """Glue compatible pairs into one instance and one assignment.

    Every equivalence class is collapsed onto its first-seen member (pairs in
    order, variables per pair in name order), which fixes the linear order the
    construction needs.
    """
    order: List[Value] = []
    seen: Set[Value] = set()
    for p in pairs:
        for var, val in sorted(p.assignment, key=lambda it: it[0].name):
            if val not in seen:
                seen.add(val)
                order.append(val)
    rank = {v: i for i, v in enumerate(order)}

    def representative(v: Value) -> Value:
        return min(relation[v], key=lambda u: rank[u])

    glued_atoms: Set[Atom] = set()
    assignment: Dict[Var, Value] = {}
    for p in pairs:
        image_of = {val: representative(val) for val in p.values()}
        remap = {v: image_of.get(v, v) for v in p.instance.dom()}
        glued_atoms.update(apply_map(remap, p.instance).atoms)
        for var, val in p.assignment:
            assignment[var] = image_of[val]
    return Instance(glued_atoms), assignment


# ---------------------------------------------------------------- core evaluation


def _copy_renamer(instance: Instance, tag: str) -> Dict[Value, Value]:
    remap: Dict[Value, Value] = {c: c for c in instance.consts()}
    for j, n in enumerate(sorted(instance.nulls(), key=value_key)):
        remap[n] = Null(tag, j)
    return remap


class CoreEvaluator:
    """Evaluates existential conjuncts over the minimal possible worlds of a
    fixed packed core; block representatives are cached per constant pool."""

    def __init__(self, core: Instance, block_bound: Optional[int] = None):
        if not blocks_packed(core):
            raise PreconditionViolated("NotPacked", "an atom block is not packed")
        if not is_core(core):
            raise PreconditionViolated("NotCore", "the instance is not a core")
        self.core = core
        self.block_bound = block_bound
        self._reps: Dict[FrozenSet[Const], Tuple[BlockRep, ...]] = {}

    def reps_for(self, constants: Iterable[Const]) -> Tuple[BlockRep, ...]:
        key = frozenset(constants)
        if key not in self._reps:
            self._reps[key] = all_block_reps(self.core, key, self.block_bound)
        return self._reps[key]

    def conjunct_satisfiable(
        self, conjunct: ExistentialConjunct, context: Iterable[Const] = ()
    ) -> bool:
        """Is there a nonempty finite union of minimal possible worlds of the
        core that satisfies the conjunct?"""
        context = frozenset(context) | frozenset(conjunct.consts())
        if conjunct.is_empty:
            # any nonempty union works; its active domain must be nonempty
            # when the (dropped) existential prefix still quantifies
            return not conjunct.quantified or bool(context) or len(self.core) > 0
        s = conjunct.copy_count
        copies = [
            apply_map(_copy_renamer(self.core, f"cp{i + 1}"), self.core)
            for i in range(s)
        ]
        if conjunct.k == 0:
            padding = Instance(a for c in copies for a in c.atoms)
            return satisfies_conjunct(padding, conjunct, context)

        reps = self.reps_for(context)
        candidate_sets: List[List[CandidatePair]] = []
        for i, (rel, terms) in enumerate(conjunct.positives):
            renamed: List[CandidatePair] = []
            seen = set()
            for rep in reps:
                remap = _copy_renamer(rep.instance, f"cp{i + 1}")
                inst = apply_map(remap, rep.instance)
                for anchor in sorted(rep.anchors, key=lambda a: repr(a)):
                    if anchor.rel != rel or len(anchor.args) != len(terms):
                        continue
                    alpha = _match_pattern(terms, apply_map_atom_args(remap, anchor))
                    if alpha is None:
                        continue
                    pair = CandidatePair(inst, tuple(sorted(alpha.items(), key=lambda it: it[0].name)))
                    if (pair.instance, pair.assignment) not in seen:
                        seen.add((pair.instance, pair.assignment))
                        renamed.append(pair)
            if not renamed:
                return False  # a positive literal has no witness anywhere
            candidate_sets.append(renamed)

        padding = Instance(
            a for c in copies[conjunct.k :] for a in c.atoms
        )
        chosen: List[CandidatePair] = []

        def search(i: int) -> bool:
            if i == len(candidate_sets):
                relation = compatible_and_relation(chosen)
                if relation is None:
                    return False
                glued, _ = join_pairs(chosen, relation)
                probe = glued.union(padding)
                return satisfies_conjunct(probe, conjunct, context)
            for pair in candidate_sets[i]:
                chosen.append(pair)
                if compatible_and_relation(chosen) is not None and search(i + 1):
                    return True
                chosen.pop()
            return False

        return search(0)


def apply_map_atom_args(remap: Dict[Value, Value], atom: Atom) -> Atom:
    return Atom(atom.rel, tuple(remap[v] for v in atom.args))


def _match_pattern(
    terms: Tuple[Term, ...], atom: Atom
) -> Optional[Dict[Var, Value]]:
    alpha: Dict[Var, Value] = {}
    for t, v in zip(terms, atom.args):
        if isinstance(t, Const):
            if t != v:
                return None
        else:
            if alpha.setdefault(t, v) != v:
                return None
    return alpha


def core_eval(
    core: Instance,
    conjunct: ExistentialConjunct,
    block_bound: Optional[int] = None,
    context: Iterable[Const] = (),
) -> bool:
    """One-shot form of :meth:`CoreEvaluator.conjunct_satisfiable`."""
    return CoreEvaluator(core, block_bound).conjunct_satisfiable(conjunct, context)


# ---------------------------------------------------------------- fast path


def candidate_constants(core: Instance, q: FOQuery) -> Tuple[Const, ...]:
    return tuple(sorted(set(core.consts()) | set(q.consts()), key=value_key))


def eval_gcwa_star_universal(
    core: Instance,
    q: FOQuery,
    values: Sequence[Const],
    block_bound: Optional[int] = None,
    _evaluator: Optional[CoreEvaluator] = None,
) -> bool:
    """Is the tuple a certain answer of the universal query on the core?

    Polynomial-time path; requires the instance to be a packed core (the
    shape cores of packed-dependency mappings always have).
    """
    templates = normalize_negation(q)
    allowed = set(candidate_constants(core, q))
    if len(values) != q.width or any(v not in allowed for v in values):
        return False
    evaluator = _evaluator or CoreEvaluator(core, block_bound)
    context = frozenset(q.consts()) | frozenset(values)
    for template in templates:
        conjunct = specialize(template, q.free_vars, values)
        if isinstance(conjunct, Unsatisfiable):
            continue
        if evaluator.conjunct_satisfiable(conjunct, context):
            return False
    return True


def answers_gcwa_star_universal(
    core: Instance,
    q: FOQuery,
    block_bound: Optional[int] = None,
) -> Set[Tuple[Const, ...]]:
    """All certain answers of a universal query on a packed core."""
    evaluator = CoreEvaluator(core, block_bound)
    pool = candidate_constants(core, q)
    out = set()
    for tup in itertools.product(pool, repeat=q.width):
        if eval_gcwa_star_universal(core, q, tup, _evaluator=evaluator):
            out.add(tup)
    return out


def answers_owa_homclosed(core: Instance, q: FOQuery) -> Set[Tuple[Const, ...]]:
    """Answers of a homomorphism-preserved query on a universal solution:
    evaluate directly and keep the all-constant tuples.  These coincide with
    both the open-world and the union-of-minimal-worlds certain answers."""
    if not is_ucq(q):
        raise NotHomomorphismClosed(
            f"query {q.name} is outside the positive-existential fragment"
        )
    return {t for t in query_answers(q, core) if all_constants(t)}


# ---------------------------------------------------------------- general path
#
# Deterministic realization of the bounded-guess procedure for arbitrary
# st-tgd mappings.  A conjunct is satisfiable over some finite union of
# minimal possible worlds iff there is a witness assignment into the core's
# constants, the conjunct's constants, and a few canonical fresh constants,
# such that every positive literal (and every loose fresh witness value) is
# covered by a minimal-world representative whose null-free atoms avoid the
# negated facts.  Values outside the witness can always be renamed apart
# member by member, so per-member fresh null images never interact.


class _GeneralEvaluator:
    def __init__(self, core: Instance, valuation_cap: int):
        self.core = core
        self.valuation_cap = valuation_cap
        self._cache: Dict[Tuple[FrozenSet[Const], int], tuple] = {}

    def _reps(self, base: FrozenSet[Const], fresh_count: int):
        key = (base, fresh_count)
        if key in self._cache:
            return self._cache[key]
        fresh = tuple(Const(f"#b{i + 1}") for i in range(fresh_count))
        pool = sorted(set(self.core.dom()) | set(base) | set(fresh), key=value_key)
        nulls = sorted(self.core.nulls(), key=value_key)
        total = len(pool) ** len(nulls)
        if total > self.valuation_cap:
            raise BudgetExceeded(
                f"{total} valuations exceed the cap of {self.valuation_cap}"
            )
        images = set()
        for choice in itertools.product(pool, repeat=len(nulls)):
            v: Dict[Value, Value] = {c: c for c in self.core.consts()}
            v.update(zip(nulls, choice))
            images.add(apply_map(v, self.core))
        minimal = _minimal_images(images)
        visible: List[FrozenSet[Atom]] = [
            frozenset(a for a in rep.atoms if a.is_ground) for rep in minimal
        ]
        atom_index: Dict[Atom, Set[int]] = {}
        value_index: Dict[Value, Set[int]] = {}
        for idx, rep in enumerate(minimal):
            for a in visible[idx]:
                atom_index.setdefault(a, set()).add(idx)
            for v in rep.dom():
                value_index.setdefault(v, set()).add(idx)
        result = (minimal, visible, atom_index, value_index, fresh)
        self._cache[key] = result
        return result

    def conjunct_satisfiable(
        self, conjunct: ExistentialConjunct, context: Iterable[Const] = ()
    ) -> bool:
        if conjunct.is_empty:
            return (
                not conjunct.quantified
                or bool(context)
                or bool(conjunct.consts())
                or len(self.core) > 0
            )
        ys = conjunct.variables()
        base = frozenset(
            set(self.core.consts()) | set(conjunct.consts()) | set(context)
        )
        minimal, visible, atom_index, value_index, fresh = self._reps(base, len(ys))
        if not minimal:
            return False
        all_ids = frozenset(range(len(minimal)))
        base_values = sorted(base, key=value_key)
        dirty_cache: Dict[FrozenSet[Atom], FrozenSet[int]] = {}

        def ground(term: Term, beta: Dict[Var, Const]) -> Const:
            return term if isinstance(term, Const) else beta[term]

        def dirty_for(negated: FrozenSet[Atom]) -> FrozenSet[int]:
            if negated not in dirty_cache:
                bad: Set[int] = set()
                for atom in negated:
                    bad |= atom_index.get(atom, set())
                dirty_cache[negated] = frozenset(bad)
            return dirty_cache[negated]

        def clean_member_exists(ids: Set[int], dirty: FrozenSet[int]) -> bool:
            if not ids:
                return False
            if not dirty:
                return True
            return any(i not in dirty for i in ids)

        def check(beta: Dict[Var, Const]) -> bool:
            for l, r in conjunct.disequalities:
                if ground(l, beta) == ground(r, beta):
                    return False
            negated = frozenset(
                Atom(rel, tuple(ground(t, beta) for t in terms))
                for rel, terms in conjunct.negatives
            )
            dirty = dirty_for(negated)
            if len(dirty) == len(minimal):
                return False
            covered_fresh: Set[Const] = set()
            for rel, terms in conjunct.positives:
                atom = Atom(rel, tuple(ground(t, beta) for t in terms))
                if not clean_member_exists(atom_index.get(atom, set()), dirty):
                    return False
                covered_fresh.update(v for v in atom.args if v in fresh_set)
            loose = {
                beta[v] for v in ys if beta[v] in fresh_set
            } - covered_fresh
            for b in loose:
                if not clean_member_exists(value_index.get(b, set()), dirty):
                    return False
            if not conjunct.positives and not loose:
                # still need at least one member in the union
                if not clean_member_exists(set(all_ids), dirty):
                    return False
            return True

        fresh_set = set(fresh)
        ys_list = list(ys)

        def assign(i: int, beta: Dict[Var, Const], used_fresh: int) -> bool:
            if i == len(ys_list):
                return check(beta)
            var = ys_list[i]
            for v in base_values:
                beta[var] = v
                if assign(i + 1, beta, used_fresh):
                    return True
            for j in range(min(used_fresh + 1, len(fresh))):
                beta[var] = fresh[j]
                if assign(i + 1, beta, max(used_fresh, j + 1)):
                    return True
            del beta[var]
            return False

        if not ys_list:
            return check({})
        return assign(0, {}, 0)


def eval_gcwa_star_universal_general(
    mapping: SchemaMapping,
    source: Instance,
    q: FOQuery,
    values: Sequence[Const],
    valuation_cap: int = GENERAL_VALUATION_CAP,
    _core: Optional[Instance] = None,
    _evaluator: Optional[_GeneralEvaluator] = None,
) -> bool:
    """Exponential evaluator for universal queries over any mapping made of
    source-to-target dependencies; packedness is not required."""
    if mapping.egds or mapping.general_constraints:
        raise PreconditionViolated(
            "TargetConstraints", "the general evaluator handles st-tgds only"
        )
    core = _core if _core is not None else core_solution(mapping, source)
    allowed = set(candidate_constants(core, q))
    if len(values) != q.width or any(v not in allowed for v in values):
        return False
    templates = normalize_negation(q)
    evaluator = _evaluator or _GeneralEvaluator(core, valuation_cap)
    context = frozenset(q.consts()) | frozenset(values)
    for template in templates:
        conjunct = specialize(template, q.free_vars, values)
        if isinstance(conjunct, Unsatisfiable):
            continue
        if evaluator.conjunct_satisfiable(conjunct, context):
            return False
    return True


def answers_gcwa_star_universal_general(
    mapping: SchemaMapping,
    source: Instance,
    q: FOQuery,
    valuation_cap: int = GENERAL_VALUATION_CAP,
) -> Set[Tuple[Const, ...]]:
    core = core_solution(mapping, source)
    pool = candidate_constants(core, q)
    evaluator = _GeneralEvaluator(core, valuation_cap)
    out = set()
    for tup in itertools.product(pool, repeat=q.width):
        if eval_gcwa_star_universal_general(
            mapping, source, q, tup, valuation_cap, _core=core, _evaluator=evaluator
        ):
            out.add(tup)
    return out
