"""Representatives of the minimal possible worlds of an instance.

``enum_min_c`` exhaustively enumerates all legal self-maps into dom(T) plus a
constant pool and keeps the subset-minimal images; it is oracle-grade
(exponential in the number of nulls) and gated by a null cap.  The per-block
variant only remaps the nulls of one atom block and is polynomial for a fixed
per-block null bound; it feeds the fast query-evaluation path.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

from .errors import BlockTooLarge, BudgetExceeded, PreconditionViolated
from .corelib import atom_blocks, blocks_packed, core_retract_fixing, is_core
from .model import (
    Atom,
    Const,
    Instance,
    Null,
    Value,
    apply_map,
    instance_key,
    value_key,
)

ORACLE_NULL_CAP = 8
ENUM_PRODUCT_CAP = 400_000


@dataclass(frozen=True)
class MinRepSet:
    """Enumerated representatives of minimal possible worlds."""

    base: Instance
    constants: Tuple[Const, ...]
    representatives: Tuple[Instance, ...]
    scope: Union[str, int]  # "whole" or a block index


def _minimal_images(images: Iterable[Instance]) -> List[Instance]:
    """Subset-minimal members, smallest first.

    A proper subset is strictly smaller and its first atom occurs in the
    candidate, so each candidate is only compared against the already-kept
    images anchored at one of its atoms.
    """
    distinct = sorted(set(images), key=instance_key)
    kept: List[Instance] = []
    by_anchor: Dict[Atom, List[Instance]] = {}
    for img in distinct:
        size = len(img)
        dominated = False
        for a in img.sorted_atoms():
            for other in by_anchor.get(a, ()):
                if len(other) < size and other.subset_of(img):
                    dominated = True
                    break
            if dominated:
                break
        if not dominated:
            kept.append(img)
            atoms = img.sorted_atoms()
            if atoms:
                by_anchor.setdefault(atoms[0], []).append(img)
    return kept


def enum_min_c(
    instance: Instance,
    constants: Iterable[Const],
    null_cap: int = ORACLE_NULL_CAP,
    product_cap: int = ENUM_PRODUCT_CAP,
) -> MinRepSet:
    """All subset-minimal images f(T) over legal maps f: dom(T) -> dom(T)+C."""
    nulls = sorted(instance.nulls(), key=value_key)
    if len(nulls) > null_cap:
        raise BudgetExceeded(
            f"{len(nulls)} nulls exceed the enumeration cap of {null_cap}"
        )
    constants = tuple(sorted(set(constants), key=value_key))
    pool = sorted(set(instance.dom()) | set(constants), key=value_key)
    if len(pool) ** len(nulls) > product_cap:
        raise BudgetExceeded(
            f"{len(pool)}^{len(nulls)} legal maps exceed the cap of {product_cap}"
        )
    images = set()
    for choice in itertools.product(pool, repeat=len(nulls)):
        f: Dict[Value, Value] = {c: c for c in instance.consts()}
        f.update(zip(nulls, choice))
        images.add(apply_map(f, instance))
    return MinRepSet(instance, constants, tuple(_minimal_images(images)), "whole")


@dataclass(frozen=True)
class BlockRep:
    """One per-block representative: the core of a minimal block image plus
    the freshly mapped block atoms that are guaranteed to survive in it."""

    instance: Instance
    anchors: FrozenSet[Atom]


def block_reps(
    instance: Instance,
    block_index: int,
    constants: Iterable[Const],
    max_block_nulls: Optional[int] = None,
) -> Tuple[BlockRep, ...]:
    partition = atom_blocks(instance)
    block = partition.blocks[block_index]
    rest = instance.minus(block.atoms)
    block_nulls = sorted(block.nulls(), key=value_key)
    if max_block_nulls is not None and len(block_nulls) > max_block_nulls:
        raise BlockTooLarge(
            f"block has {len(block_nulls)} nulls, cap is {max_block_nulls}"
        )
    constants = tuple(sorted(set(constants), key=value_key))
    pool = sorted(set(instance.dom()) | set(constants), key=value_key)
    rest_nulls = rest.nulls()
    block_null_set = set(block_nulls)

    candidates: List[Tuple[Instance, FrozenSet[Atom], Dict[Value, Value]]] = []
    for choice in itertools.product(pool, repeat=len(block_nulls)):
        f: Dict[Value, Value] = {v: v for v in instance.dom()}
        f.update(zip(block_nulls, choice))
        mapped_block = apply_map(f, block)
        fresh_atoms = mapped_block.atoms - rest.atoms
        ok = True
        for a in fresh_atoms:
            for v in a.args:
                if isinstance(v, Null) and v not in block_null_set:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        image = Instance(mapped_block.atoms | rest.atoms)
        candidates.append((image, frozenset(fresh_atoms), f))

    minimal_images = set(_minimal_images(img for img, _, _ in candidates))
    reps: List[BlockRep] = []
    seen = set()
    for image, anchors, _ in candidates:
        if image not in minimal_images:
            continue
        anchor_nulls = {v for a in anchors for v in a.args if isinstance(v, Null)}
        cored = core_retract_fixing(image, anchor_nulls)
        key = (cored, anchors)
        if key not in seen:
            seen.add(key)
            reps.append(BlockRep(cored, anchors))
    return tuple(reps)


def enum_min_c_block(
    instance: Instance,
    block_index: int,
    constants: Iterable[Const],
    max_block_nulls: Optional[int] = None,
) -> MinRepSet:
    reps = block_reps(instance, block_index, constants, max_block_nulls)
    distinct = tuple(
        sorted({r.instance for r in reps}, key=instance_key)
    )
    return MinRepSet(
        instance,
        tuple(sorted(set(constants), key=value_key)),
        distinct,
        block_index,
    )


def all_block_reps(
    instance: Instance,
    constants: Iterable[Const],
    max_block_nulls: Optional[int] = None,
) -> Tuple[BlockRep, ...]:
    """Per-block representatives over every atom block, deduplicated."""
    partition = atom_blocks(instance)
    out: List[BlockRep] = []
    seen = set()
    for idx in range(len(partition.blocks)):
        for rep in block_reps(instance, idx, constants, max_block_nulls):
            key = (rep.instance, rep.anchors)
            if key not in seen:
                seen.add(key)
                out.append(rep)
    return tuple(out)


def atom_in_some_minimal(instance: Instance, atom: Atom) -> bool:
    """Does the ground atom occur in a minimal possible world of the instance?

    Requires a packed core; on such instances the per-block representatives
    capture exactly the atoms of the whole-instance minimal representatives.
    """
    if not atom.is_ground:
        raise PreconditionViolated("NotGround", "the probe atom must be ground")
    if not blocks_packed(instance):
        raise PreconditionViolated("NotPacked", "an atom block is not packed")
    if not is_core(instance):
        raise PreconditionViolated("NotCore", "the instance is not a core")
    constants = [v for v in atom.args if isinstance(v, Const)]
    partition = atom_blocks(instance)
    for idx in range(len(partition.blocks)):
        for rep in block_reps(instance, idx, constants):
            if atom in rep.instance:
                return True
    return False
