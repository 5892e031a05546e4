"""First-order query AST, active-domain evaluation, and certain answers.

Evaluation is naive: nulls inside an instance are treated as if they were
ordinary constants, equality compares values by identity, and quantifiers
range over dom(I) together with the constants of the formula being evaluated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

from .errors import BudgetExceeded, DxError, UnboundVariable
from .model import Atom, Const, Instance, Term, Value, Var, value_key

ORACLE_NULL_CAP = 8


# ---------------------------------------------------------------- formula AST


@dataclass(frozen=True)
class RelAtom:
    rel: str
    terms: Tuple[Term, ...]


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    parts: Tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    parts: Tuple["Formula", ...]


@dataclass(frozen=True)
class Exists:
    var: Var
    sub: "Formula"


@dataclass(frozen=True)
class Forall:
    var: Var
    sub: "Formula"


@dataclass(frozen=True)
class CountExists:
    """Bounded counting quantifier: the number of witnesses lies in [lo, hi].

    Only allowed inside a mapping's general constraints, never in user
    queries.
    """

    lo: int
    hi: int
    var: Var
    sub: "Formula"


Formula = Union[RelAtom, Eq, Not, And, Or, Exists, Forall, CountExists]


@dataclass(frozen=True)
class FOQuery:
    """A named query with an explicit tuple of free variables."""

    name: str
    free_vars: Tuple[Var, ...]
    body: Formula

    def __post_init__(self):
        loose = formula_free_vars(self.body) - set(self.free_vars)
        if loose:
            names = ", ".join(sorted(v.name for v in loose))
            raise DxError(f"free variables not declared in the query head: {names}")

    def consts(self) -> FrozenSet[Const]:
        return formula_consts(self.body)

    @property
    def width(self) -> int:
        return len(self.free_vars)


def formula_consts(f: Formula) -> FrozenSet[Const]:
    out: Set[Const] = set()

    def walk(g: Formula):
        if isinstance(g, RelAtom):
            out.update(t for t in g.terms if isinstance(t, Const))
        elif isinstance(g, Eq):
            out.update(t for t in (g.left, g.right) if isinstance(t, Const))
        elif isinstance(g, Not):
            walk(g.sub)
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p)
        elif isinstance(g, (Exists, Forall, CountExists)):
            walk(g.sub)

    walk(f)
    return frozenset(out)


def formula_free_vars(f: Formula) -> Set[Var]:
    if isinstance(f, RelAtom):
        return {t for t in f.terms if isinstance(t, Var)}
    if isinstance(f, Eq):
        return {t for t in (f.left, f.right) if isinstance(t, Var)}
    if isinstance(f, Not):
        return formula_free_vars(f.sub)
    if isinstance(f, (And, Or)):
        out: Set[Var] = set()
        for p in f.parts:
            out |= formula_free_vars(p)
        return out
    if isinstance(f, (Exists, Forall, CountExists)):
        return formula_free_vars(f.sub) - {f.var}
    raise DxError(f"unknown formula node {f!r}")


def contains_counting(f: Formula) -> bool:
    if isinstance(f, CountExists):
        return True
    if isinstance(f, Not):
        return contains_counting(f.sub)
    if isinstance(f, (And, Or)):
        return any(contains_counting(p) for p in f.parts)
    if isinstance(f, (Exists, Forall)):
        return contains_counting(f.sub)
    return False


# ---------------------------------------------------------------- evaluation


def _term_value(t: Term, assignment: Dict[Var, Value]) -> Value:
    if isinstance(t, Const):
        return t
    try:
        return assignment[t]
    except KeyError:
        raise UnboundVariable(f"variable {t.name} has no value")


def active_domain(instance: Instance, formula: Formula) -> Tuple[Value, ...]:
    dom = set(instance.dom()) | set(formula_consts(formula))
    return tuple(sorted(dom, key=value_key))


def eval_fo(
    formula: Formula,
    instance: Instance,
    assignment: Optional[Dict[Var, Value]] = None,
    adom: Optional[Tuple[Value, ...]] = None,
) -> bool:
    """Naive satisfaction with quantifiers ranging over dom(I) + dom(phi).

    ``adom`` can be supplied by callers that evaluate a subformula of a
    larger query; by default it is computed from ``formula`` itself.
    """
    if adom is None:
        adom = active_domain(instance, formula)
    assignment = dict(assignment or {})

    def rec(f: Formula) -> bool:
        if isinstance(f, RelAtom):
            args = tuple(_term_value(t, assignment) for t in f.terms)
            return Atom(f.rel, args) in instance
        if isinstance(f, Eq):
            return _term_value(f.left, assignment) == _term_value(f.right, assignment)
        if isinstance(f, Not):
            return not rec(f.sub)
        if isinstance(f, And):
            return all(rec(p) for p in f.parts)
        if isinstance(f, Or):
            return any(rec(p) for p in f.parts)
        if isinstance(f, Exists):
            saved = assignment.get(f.var)
            for v in adom:
                assignment[f.var] = v
                if rec(f.sub):
                    _restore(assignment, f.var, saved)
                    return True
            _restore(assignment, f.var, saved)
            return False
        if isinstance(f, Forall):
            saved = assignment.get(f.var)
            for v in adom:
                assignment[f.var] = v
                if not rec(f.sub):
                    _restore(assignment, f.var, saved)
                    return False
            _restore(assignment, f.var, saved)
            return True
        if isinstance(f, CountExists):
            saved = assignment.get(f.var)
            count = 0
            for v in adom:
                assignment[f.var] = v
                if rec(f.sub):
                    count += 1
                    if count > f.hi:
                        break
            _restore(assignment, f.var, saved)
            return f.lo <= count <= f.hi
        raise DxError(f"unknown formula node {f!r}")

    return rec(formula)


def _restore(assignment: Dict[Var, Value], var: Var, saved: Optional[Value]) -> None:
    if saved is None:
        assignment.pop(var, None)
    else:
        assignment[var] = saved


def query_answers(q: FOQuery, instance: Instance) -> Set[Tuple[Value, ...]]:
    """All width-|free| tuples over dom(I) + dom(q) satisfying the body.

    Answers may contain nulls; a Boolean query yields {()} or the empty set.
    """
    adom = active_domain(instance, q.body)
    out: Set[Tuple[Value, ...]] = set()
    for tup in itertools.product(adom, repeat=q.width):
        assignment = dict(zip(q.free_vars, tup))
        if eval_fo(q.body, instance, assignment, adom=adom):
            out.add(tup)
    return out


# ---------------------------------------------------------------- certain answers


def all_constants(tup: Tuple[Value, ...]) -> bool:
    return all(isinstance(v, Const) for v in tup)


def certain_answers(
    q: FOQuery,
    instances: Iterable[Instance],
    empty_policy: str = "none",
    universe: Optional[Sequence[Const]] = None,
) -> Set[Tuple[Const, ...]]:
    """Intersection of query answers over the family, constants only.

    An empty family yields the empty set under the default policy; the
    alternative ``empty_policy="all"`` returns every constant tuple over the
    supplied universe (the set-theoretic reading of an empty intersection).
    """
    instances = list(instances)
    if not instances:
        if empty_policy == "all":
            if universe is None:
                raise DxError("empty_policy='all' needs an explicit universe")
            return set(itertools.product(tuple(universe), repeat=q.width))
        return set()
    common: Optional[Set[Tuple[Value, ...]]] = None
    for inst in instances:
        answers = query_answers(q, inst)
        common = answers if common is None else (common & answers)
        if not common:
            return set()
    return {t for t in common if all_constants(t)}


def fresh_constants(n: int, tag: str = "f") -> Tuple[Const, ...]:
    """Reserved-name constants that no parser can produce ('#' starts comments)."""
    return tuple(Const(f"#{tag}{i + 1}") for i in range(n))


def cert_poss(
    q: FOQuery,
    instance: Instance,
    null_cap: int = ORACLE_NULL_CAP,
    extra_fresh: int = 0,
) -> Set[Tuple[Const, ...]]:
    """Certain answers of q over all valuations of the instance.

    The infinite family poss(T) is enumerated finitely: valuation images only
    matter up to the equality pattern among null images and collisions with
    const(T) and dom(q), so a pool with |nulls(T)| fresh constants suffices.
    ``extra_fresh`` widens the pool (used by the genericity self-check).
    """
    nulls = sorted(instance.nulls(), key=value_key)
    if len(nulls) > null_cap:
        raise BudgetExceeded(
            f"instance has {len(nulls)} nulls; the valuation cap is {null_cap}"
        )
    pool: List[Const] = sorted(
        set(instance.consts()) | set(q.consts()), key=value_key
    )
    pool += list(fresh_constants(len(nulls) + extra_fresh))
    family = set()
    for images in itertools.product(pool, repeat=len(nulls)):
        v: Dict[Value, Value] = {c: c for c in instance.consts()}
        v.update(zip(nulls, images))
        family.add(
            Instance(Atom(a.rel, tuple(v[x] for x in a.args)) for a in instance.atoms)
        )
    return certain_answers(q, family)


# ---------------------------------------------------------------- classification


class _Renamer:
    def __init__(self):
        self.count = 0

    def fresh(self, base: str) -> Var:
        self.count += 1
        return Var(f"{base}~{self.count}")


def _substitute(f: Formula, mapping: Dict[Var, Term]) -> Formula:
    if isinstance(f, RelAtom):
        return RelAtom(f.rel, tuple(mapping.get(t, t) if isinstance(t, Var) else t for t in f.terms))
    if isinstance(f, Eq):
        sub = lambda t: mapping.get(t, t) if isinstance(t, Var) else t
        return Eq(sub(f.left), sub(f.right))
    if isinstance(f, Not):
        return Not(_substitute(f.sub, mapping))
    if isinstance(f, And):
        return And(tuple(_substitute(p, mapping) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(_substitute(p, mapping) for p in f.parts))
    if isinstance(f, (Exists, Forall)):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        return type(f)(f.var, _substitute(f.sub, inner))
    if isinstance(f, CountExists):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        return CountExists(f.lo, f.hi, f.var, _substitute(f.sub, inner))
    raise DxError(f"unknown formula node {f!r}")


def to_nnf(f: Formula, negate: bool = False) -> Formula:
    """Negation normal form; counting quantifiers are not supported here."""
    if isinstance(f, (RelAtom, Eq)):
        return Not(f) if negate else f
    if isinstance(f, Not):
        return to_nnf(f.sub, not negate)
    if isinstance(f, And):
        parts = tuple(to_nnf(p, negate) for p in f.parts)
        return Or(parts) if negate else And(parts)
    if isinstance(f, Or):
        parts = tuple(to_nnf(p, negate) for p in f.parts)
        return And(parts) if negate else Or(parts)
    if isinstance(f, Exists):
        inner = to_nnf(f.sub, negate)
        return Forall(f.var, inner) if negate else Exists(f.var, inner)
    if isinstance(f, Forall):
        inner = to_nnf(f.sub, negate)
        return Exists(f.var, inner) if negate else Forall(f.var, inner)
    raise DxError("counting quantifier has no negation normal form here")


def prenex(f: Formula) -> Optional[Tuple[Tuple[Tuple[str, Var], ...], Formula]]:
    """Rewrite to a prenex form ((kind, var), ...), matrix.

    Bound variables are renamed apart, negations are pushed to the literals.
    Returns None when the formula contains a counting quantifier.
    """
    if contains_counting(f):
        return None
    renamer = _Renamer()

    def rec(g: Formula) -> Tuple[List[Tuple[str, Var]], Formula]:
        if isinstance(g, (RelAtom, Eq)):
            return [], g
        if isinstance(g, Not):
            # NNF guarantees Not is only over literals
            return [], g
        if isinstance(g, (And, Or)):
            prefix: List[Tuple[str, Var]] = []
            parts = []
            for p in g.parts:
                pre, matrix = rec(p)
                prefix.extend(pre)
                parts.append(matrix)
            return prefix, type(g)(tuple(parts))
        if isinstance(g, (Exists, Forall)):
            fresh = renamer.fresh(g.var.name)
            body = _substitute(g.sub, {g.var: fresh})
            pre, matrix = rec(body)
            kind = "exists" if isinstance(g, Exists) else "forall"
            return [(kind, fresh)] + pre, matrix
        raise DxError(f"unknown formula node {g!r}")

    prefix, matrix = rec(to_nnf(f))
    return tuple(prefix), matrix


def is_universal(q: FOQuery) -> bool:
    """Rewritable to a prenex all-universal query with a quantifier-free matrix."""
    p = prenex(q.body)
    return p is not None and all(kind == "forall" for kind, _ in p[0])


def is_existential(q: FOQuery) -> bool:
    p = prenex(q.body)
    return p is not None and all(kind == "exists" for kind, _ in p[0])


def is_ucq(q: FOQuery) -> bool:
    """Positive-existential shape: the shipped sufficient condition for
    preservation under homomorphisms."""

    def walk(f: Formula) -> bool:
        if isinstance(f, (RelAtom, Eq)):
            return True
        if isinstance(f, (And, Or)):
            return all(walk(p) for p in f.parts)
        if isinstance(f, Exists):
            return walk(f.sub)
        return False

    return walk(q.body)


def is_cq_neg(q: FOQuery) -> bool:
    """Existentially quantified conjunction of literals."""
    p = prenex(q.body)
    if p is None or not all(kind == "exists" for kind, _ in p[0]):
        return False
    _, matrix = p
    literals = matrix.parts if isinstance(matrix, And) else (matrix,)
    for lit in literals:
        inner = lit.sub if isinstance(lit, Not) else lit
        if not isinstance(inner, (RelAtom, Eq)):
            return False
    return True


def dnf_literals(matrix: Formula) -> List[List[Formula]]:
    """Disjunctive normal form of a quantifier-free NNF matrix, as literal lists."""
    if isinstance(matrix, Or):
        out: List[List[Formula]] = []
        for p in matrix.parts:
            out.extend(dnf_literals(p))
        return out
    if isinstance(matrix, And):
        disjuncts: List[List[Formula]] = [[]]
        for p in matrix.parts:
            sub = dnf_literals(p)
            disjuncts = [d + s for d in disjuncts for s in sub]
        return disjuncts
    return [[matrix]]
