import itertools

import pytest

from dx import (
    Atom,
    Const,
    Instance,
    Null,
    apply_map,
    atom_blocks,
    atom_in_some_minimal,
    atoms_isomorphic,
    core_solution,
    enum_min_c,
    enum_min_c_block,
    find_homomorphism,
    is_core,
    blocks_packed,
)
from dx.errors import BudgetExceeded, PreconditionViolated
from dx.logic import fresh_constants
from dx.minrep import all_block_reps, block_reps
from dx.model import value_key

from fixtures import (
    BLK_INSTANCE,
    EF_MAP,
    EF_SRC,
    NAF_INSTANCE,
    E_SCHEMA,
    instance,
    mapping,
)

a, b, c = Const("a"), Const("b"), Const("c")


def _ef_core():
    m = mapping(EF_MAP)
    return core_solution(m, instance(EF_SRC, m.source))


# ------------------------------------------------------------- enum_min_c


def test_enum_min_c_single_null():
    n = Null("t", 0)
    inst = Instance([Atom("E", (a, n))])
    reps = enum_min_c(inst, set())
    assert set(reps.representatives) == {
        Instance([Atom("E", (a, n))]),
        Instance([Atom("E", (a, a))]),
    }


def test_enum_min_c_ground_instance():
    inst = Instance([Atom("E", (a, b))])
    assert set(enum_min_c(inst, {c}).representatives) == {inst}


def test_enum_min_c_blk_contains_cross_block_images():
    blk = instance(BLK_INSTANCE, E_SCHEMA)
    n1, m1, n2, m2 = sorted(blk.nulls(), key=value_key)
    g1 = {v: v for v in blk.dom()}
    g1.update({n1: n2, m1: b})
    g2 = {v: v for v in blk.dom()}
    g2.update({n2: n1, m2: b})
    reps = set(enum_min_c(blk, set()).representatives)
    assert apply_map(g1, blk) in reps
    assert apply_map(g2, blk) in reps


def test_enum_min_c_null_cap():
    atoms = [Atom("E", (a, Null("t", i))) for i in range(9)]
    with pytest.raises(BudgetExceeded):
        enum_min_c(Instance(atoms), set())


# ------------------------------------------------------------- per-block


def test_block_reps_of_ef_core():
    core = _ef_core()
    reps = enum_min_c_block(core, 0, set())
    null = next(iter(core.nulls()))
    expected = {
        core,
        Instance([Atom("E", (a, a)), Atom("F", (a, b))]),
        Instance([Atom("E", (a, b)), Atom("F", (b, b))]),
    }
    assert set(reps.representatives) == expected


def test_block_reps_ground_block():
    inst = Instance([Atom("E", (a, b))])
    reps = enum_min_c_block(inst, 0, set())
    assert set(reps.representatives) == {inst}


def test_block_reps_blk_fixture_contains_g1_image():
    blk = instance(BLK_INSTANCE, E_SCHEMA)
    n1, m1, n2, m2 = sorted(blk.nulls(), key=value_key)
    g1 = {v: v for v in blk.dom()}
    g1.update({n1: n2, m1: b})
    g1_image = apply_map(g1, blk)
    block_index = next(
        i for i, blkk in enumerate(atom_blocks(blk).blocks) if n1 in blkk.nulls()
    )
    reps = enum_min_c_block(blk, block_index, set())
    assert g1_image in set(reps.representatives)


# ------------------------------------------------------------- membership


def test_atom_membership_ef():
    core = _ef_core()
    assert atom_in_some_minimal(core, Atom("E", (a, c)))
    assert not atom_in_some_minimal(core, Atom("E", (b, c)))


def test_atom_membership_matches_whole_instance_oracle():
    core = _ef_core()
    for atom in [
        Atom("E", (a, c)),
        Atom("E", (b, c)),
        Atom("E", (a, a)),
        Atom("F", (c, b)),
        Atom("F", (b, a)),
    ]:
        consts = [v for v in atom.args]
        oracle = any(atom in rep for rep in enum_min_c(core, consts).representatives)
        assert atom_in_some_minimal(core, atom) == oracle


def test_atom_membership_rejects_unpacked_instance():
    naf = instance(NAF_INSTANCE, E_SCHEMA)
    probe = Atom("E", (c, a))
    with pytest.raises(PreconditionViolated) as err:
        atom_in_some_minimal(naf, probe)
    assert err.value.reason == "NotPacked"
    # the whole-instance oracle says no, while the block-local answer on the
    # three-atom block alone would say yes
    assert not any(probe in rep for rep in enum_min_c(naf, {c, a}).representatives)
    block = [blk for blk in atom_blocks(naf).blocks if len(blk) == 3][0]
    assert any(probe in rep for rep in enum_min_c(block, {c, a}).representatives)


# ------------------------------------------------------------- properties

SMALL_FIXTURES = []


def _small_fixtures():
    if SMALL_FIXTURES:
        return SMALL_FIXTURES
    n1, n2 = Null("t", 1), Null("t", 2)
    SMALL_FIXTURES.extend(
        [
            _ef_core(),
            instance(NAF_INSTANCE, E_SCHEMA),
            instance(BLK_INSTANCE, E_SCHEMA),
            Instance([Atom("E", (a, n1)), Atom("E", (n1, n2))]),
            Instance([Atom("E", (a, n1)), Atom("F", (n1, b)), Atom("E", (b, b))]),
        ]
    )
    return SMALL_FIXTURES


def test_min_c_members_are_cores():
    for inst in _small_fixtures():
        for rep in enum_min_c(inst, {a}).representatives:
            assert is_core(rep)


def test_core_is_its_own_representative():
    for inst in _small_fixtures():
        if is_core(inst):
            assert inst in set(enum_min_c(inst, {a}).representatives)


def test_block_reps_are_whole_instance_representatives():
    for inst in _small_fixtures():
        whole = set(enum_min_c(inst, {a}).representatives)
        partition = atom_blocks(inst)
        for idx in range(len(partition.blocks)):
            for rep in enum_min_c_block(inst, idx, {a}).representatives:
                assert rep in whole


def test_capture_of_minimal_possible_worlds():
    # bounded check: minimal valuation images over const+fresh pools are,
    # up to null identity, injective instantiations of the representatives
    for inst in _small_fixtures():
        nulls = sorted(inst.nulls(), key=value_key)
        pool = sorted(inst.consts(), key=value_key) + list(
            fresh_constants(len(nulls))
        )
        images = set()
        for choice in itertools.product(pool, repeat=len(nulls)):
            v = {cst: cst for cst in inst.consts()}
            v.update(zip(nulls, choice))
            images.add(apply_map(v, inst))
        minimal = [
            img
            for img in images
            if not any(other != img and other.subset_of(img) for other in images)
        ]
        reps = enum_min_c(inst, inst.consts()).representatives
        for world in minimal:
            assert any(
                _injectively_instantiates(rep, world, inst.consts())
                for rep in reps
            ), world


def _injectively_instantiates(rep, world, constants):
    if len(rep) != len(world):
        return False
    h = find_homomorphism(rep, world, require_injective=True)
    if h is None or apply_map(h, rep) != world:
        return False
    return all(h[n] not in constants for n in rep.nulls())


def test_atom_provenance_on_packed_cores():
    # every atom of every whole-instance representative appears, up to
    # isomorphism, in a per-block representative, with an onto homomorphism
    # mapping the witness atom to the original one
    for inst in _small_fixtures():
        if not (is_core(inst) and blocks_packed(inst)):
            continue
        constants = {a}
        whole = enum_min_c(inst, constants).representatives
        reps = all_block_reps(inst, constants)
        for world in whole:
            for atom in world.atoms:
                witnesses = []
                for rep in reps:
                    for cand in rep.instance.atoms:
                        if not atoms_isomorphic(cand, atom):
                            continue
                        h = find_homomorphism(rep.instance, world)
                        if h is None:
                            continue
                        if apply_map(h, rep.instance) != world:
                            continue
                        if Atom(cand.rel, tuple(h[v] for v in cand.args)) == atom:
                            witnesses.append((rep, cand))
                assert witnesses, (world, atom)
