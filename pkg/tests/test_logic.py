import itertools
import random

import pytest

from dx import (
    And,
    Atom,
    Const,
    CountExists,
    Eq,
    Exists,
    FOQuery,
    Forall,
    Instance,
    Not,
    Null,
    Or,
    RelAtom,
    Var,
    certain_answers,
    cert_poss,
    eval_fo,
    is_cq_neg,
    is_existential,
    is_ucq,
    is_universal,
    query_answers,
)
from dx.errors import BudgetExceeded, UnboundVariable
from dx.logic import active_domain, dnf_literals, prenex, to_nnf

a, b, c, d, e = (Const(x) for x in "abcde")
x, y, z, z1, z2 = (Var(n) for n in ("x", "y", "z", "z1", "z2"))


def test_eval_simple_exists():
    inst = Instance([Atom("E", (a, b))])
    assert eval_fo(Exists(z, RelAtom("E", (a, z))), inst)


def test_eval_universal_counterexample():
    # F(d,e) has no E-predecessor for d
    inst = Instance([Atom("E", (a, b)), Atom("F", (b, c)), Atom("F", (d, e))])
    body = Forall(
        z1,
        Forall(
            z2,
            Or((Not(RelAtom("F", (z1, z2))), Exists(x, RelAtom("E", (x, z1))))),
        ),
    )
    assert not eval_fo(body, inst)
    assert eval_fo(body, Instance([Atom("E", (a, b)), Atom("F", (b, c))]))


def test_eval_active_domain_restricts_witnesses():
    inst = Instance([Atom("P", (a,))])
    assert not eval_fo(Exists(x, Not(Eq(x, a))), inst)


def test_eval_unbound_variable():
    with pytest.raises(UnboundVariable):
        eval_fo(RelAtom("P", (x,)), Instance([Atom("P", (a,))]))


def test_count_exists_bounds():
    inst = Instance([Atom("E", (a, b)), Atom("E", (a, c))])
    body = CountExists(2, 3, z, RelAtom("E", (a, z)))
    assert eval_fo(body, inst)
    assert not eval_fo(
        CountExists(3, 4, z, RelAtom("E", (a, z))), inst
    )


def test_query_answers_basic():
    q = FOQuery("q", (x, y), RelAtom("R", (x, y)))
    assert query_answers(q, Instance([Atom("R", (a, b))])) == {(a, b)}


def test_query_answers_keeps_null_tuples():
    n = Null("t", 0)
    q = FOQuery("q", (x,), Exists(z, RelAtom("E", (x, z))))
    assert query_answers(q, Instance([Atom("E", (a, n))])) == {(a,)}


def test_query_answers_nullary_convention():
    q = FOQuery("q", (), Eq(a, a))
    assert query_answers(q, Instance([Atom("P", (b,))])) == {()}


def test_certain_answers_intersection():
    q = FOQuery("q", (x,), RelAtom("E", (x, x)))
    fam = [Instance([Atom("E", (a, a))]), Instance([Atom("E", (a, a)), Atom("E", (b, b))])]
    assert certain_answers(q, fam) == {(a,)}


def test_certain_answers_empty_family_is_empty():
    q = FOQuery("q", (x,), RelAtom("P", (x,)))
    assert certain_answers(q, []) == set()
    assert certain_answers(q, [], empty_policy="all", universe=[a, b]) == {(a,), (b,)}


def test_certain_answers_disjoint():
    q = FOQuery("q", (x,), RelAtom("P", (x,)))
    fam = [Instance([Atom("P", (a,))]), Instance([Atom("P", (b,))])]
    assert certain_answers(q, fam) == set()


def test_cert_over_unions_property():
    rng = random.Random(3)
    q = FOQuery("q", (x,), Exists(z, RelAtom("E", (x, z))))
    pool = [a, b, c]
    for _ in range(25):
        fam_a = [
            Instance(Atom("E", (rng.choice(pool), rng.choice(pool))) for _ in range(2))
            for _ in range(rng.randint(1, 3))
        ]
        fam_b = [
            Instance(Atom("E", (rng.choice(pool), rng.choice(pool))) for _ in range(2))
            for _ in range(rng.randint(1, 3))
        ]
        assert certain_answers(q, fam_a + fam_b) == certain_answers(
            q, fam_a
        ) & certain_answers(q, fam_b)


# ------------------------------------------------------------- cert_poss

UNIQUE_SUCC = Exists(
    z, And((RelAtom("E", (x, z)), Forall(z2, Or((Not(RelAtom("E", (x, z2))), Eq(z2, z))))))
)


def test_cert_poss_keeps_guaranteed_edge():
    n = Null("t", 0)
    q = FOQuery("q", (x,), Exists(z, RelAtom("E", (x, z))))
    assert cert_poss(q, Instance([Atom("E", (a, n))])) == {(a,)}


def test_cert_poss_unique_successor():
    # one null successor: every valuation yields exactly one successor for a
    n = Null("t", 0)
    q = FOQuery("q", (x,), UNIQUE_SUCC)
    assert cert_poss(q, Instance([Atom("E", (a, n))])) == {(a,)}


def test_cert_poss_refuted_by_fresh_valuation():
    # expected value computed by enumerating the two valuation classes by
    # hand: the null maps to a (E(a,a) holds) or to anything else (it fails)
    n = Null("t", 0)
    q = FOQuery("q", (x,), RelAtom("E", (x, a)))
    inst = Instance([Atom("E", (a, n))])
    images = [Instance([Atom("E", (a, a))]), Instance([Atom("E", (a, b))])]
    expected = certain_answers(q, images)
    assert expected == set()
    assert cert_poss(q, inst) == expected


def test_cert_poss_null_cap():
    atoms = [Atom("E", (a, Null("t", i))) for i in range(9)]
    q = FOQuery("q", (x,), Exists(z, RelAtom("E", (x, z))))
    with pytest.raises(BudgetExceeded):
        cert_poss(q, Instance(atoms))


def test_cert_poss_ground_equals_filtered_answers():
    inst = Instance([Atom("E", (a, b)), Atom("E", (b, b))])
    q = FOQuery("q", (x,), RelAtom("E", (x, b)))
    assert cert_poss(q, inst) == {t for t in query_answers(q, inst)}


def test_cert_poss_fresh_budget_stability():
    # one extra fresh constant never changes the answers
    n, m = Null("t", 0), Null("t", 1)
    instances = [
        Instance([Atom("E", (a, n))]),
        Instance([Atom("E", (a, n)), Atom("E", (n, m))]),
        Instance([Atom("E", (a, b))]),
    ]
    queries = [
        FOQuery("q", (x,), UNIQUE_SUCC),
        FOQuery("q", (x,), Exists(z, RelAtom("E", (x, z)))),
        FOQuery("q", (x,), RelAtom("E", (x, a))),
        FOQuery("q", (), Forall(z1, Forall(z2, Or((Not(RelAtom("E", (z1, z2))), Eq(z1, a)))))),
    ]
    for inst in instances:
        for q in queries:
            assert cert_poss(q, inst) == cert_poss(q, inst, extra_fresh=1)


# ------------------------------------------------------------- classification


def test_is_universal_allows_inner_quantifier_pull():
    body = And((RelAtom("Rp", (x, y)), Forall(z, Or((Not(RelAtom("Rp", (x, z))), Eq(z, y))))))
    assert is_universal(FOQuery("q", (x, y), body))


def test_is_universal_rejects_existential():
    assert not is_universal(FOQuery("q", (), Exists(z, RelAtom("P", (z,)))))
    assert is_existential(FOQuery("q", (), Exists(z, RelAtom("P", (z,)))))


def test_is_ucq():
    assert is_ucq(FOQuery("q", (x,), Exists(z, And((RelAtom("E", (x, z)), RelAtom("P", (z,)))))))
    assert is_ucq(FOQuery("q", (x,), Or((RelAtom("P", (x,)), RelAtom("Q", (x,))))))
    assert not is_ucq(FOQuery("q", (x,), Not(RelAtom("P", (x,)))))
    assert not is_ucq(FOQuery("q", (x,), Forall(z, RelAtom("E", (x, z)))))


def test_is_cq_neg():
    body = Exists(z, And((RelAtom("E", (x, z)), Not(RelAtom("P", (z,))))))
    assert is_cq_neg(FOQuery("q", (x,), body))
    assert not is_cq_neg(FOQuery("q", (x,), Forall(z, RelAtom("E", (x, z)))))


def test_counting_blocks_classification():
    q = FOQuery("q", (x,), CountExists(1, 2, z, RelAtom("E", (x, z))))
    assert not is_universal(q) and not is_existential(q)


# ------------------------------------------------------------- nnf / dnf oracle


def _ground_expand(body, inst, adom, assignment):
    """Independent evaluator: expands quantifiers over the active domain."""
    if isinstance(body, RelAtom):
        args = tuple(assignment.get(t, t) for t in body.terms)
        return Atom(body.rel, args) in inst
    if isinstance(body, Eq):
        l = assignment.get(body.left, body.left)
        r = assignment.get(body.right, body.right)
        return l == r
    if isinstance(body, Not):
        return not _ground_expand(body.sub, inst, adom, assignment)
    if isinstance(body, And):
        return all(_ground_expand(p, inst, adom, assignment) for p in body.parts)
    if isinstance(body, Or):
        return any(_ground_expand(p, inst, adom, assignment) for p in body.parts)
    if isinstance(body, Exists):
        return any(
            _ground_expand(body.sub, inst, adom, {**assignment, body.var: v})
            for v in adom
        )
    if isinstance(body, Forall):
        return all(
            _ground_expand(body.sub, inst, adom, {**assignment, body.var: v})
            for v in adom
        )
    if isinstance(body, CountExists):
        count = sum(
            1
            for v in adom
            if _ground_expand(body.sub, inst, adom, {**assignment, body.var: v})
        )
        return body.lo <= count <= body.hi
    raise AssertionError(body)


def _random_formula(rng, depth, vars_in_scope):
    pool = [a, b] + vars_in_scope
    if depth == 0 or rng.random() < 0.35:
        if rng.random() < 0.7:
            return RelAtom("E", (rng.choice(pool), rng.choice(pool)))
        return Eq(rng.choice(pool), rng.choice(pool))
    roll = rng.random()
    if roll < 0.2:
        return Not(_random_formula(rng, depth - 1, vars_in_scope))
    if roll < 0.45:
        return And(tuple(_random_formula(rng, depth - 1, vars_in_scope) for _ in range(2)))
    if roll < 0.7:
        return Or(tuple(_random_formula(rng, depth - 1, vars_in_scope) for _ in range(2)))
    var = Var(f"v{depth}{rng.randint(0, 1)}")
    inner = _random_formula(rng, depth - 1, vars_in_scope + [var])
    return Exists(var, inner) if roll < 0.85 else Forall(var, inner)


def test_eval_matches_ground_expansion_on_random_corpus():
    rng = random.Random(11)
    checked = 0
    while checked < 120:
        body = _random_formula(rng, 3, [])
        inst = Instance(
            Atom("E", (rng.choice([a, b, c]), rng.choice([a, b, c])))
            for _ in range(rng.randint(0, 4))
        )
        adom = active_domain(inst, body)
        assert eval_fo(body, inst) == _ground_expand(body, inst, adom, {})
        checked += 1


def test_prenex_preserves_meaning_on_nonempty_domains():
    rng = random.Random(23)
    checked = 0
    while checked < 80:
        body = _random_formula(rng, 3, [])
        p = prenex(body)
        assert p is not None
        prefix, matrix = p
        rebuilt = matrix
        for kind, var in reversed(prefix):
            rebuilt = (Exists if kind == "exists" else Forall)(var, rebuilt)
        inst = Instance(
            Atom("E", (rng.choice([a, b]), rng.choice([a, b])))
            for _ in range(rng.randint(1, 4))
        )
        assert eval_fo(body, inst) == eval_fo(rebuilt, inst), (body, rebuilt)
        checked += 1


def test_dnf_literals_cover_matrix():
    matrix = to_nnf(
        Or((And((RelAtom("E", (x, y)), Not(Eq(x, y)))), RelAtom("P", (x,))))
    )
    disjuncts = dnf_literals(matrix)
    assert [len(d) for d in disjuncts] == [2, 1]
