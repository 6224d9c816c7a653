"""Primitivity of twisted wreath products, balanced subgroups and quotients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .group import PermGroup, core, intersection, orbit_labels, orbit_partition
from .grouptable import GroupTable, find_isomorphism
from .perm import Perm
from .structure import minimal_block, overgroups_of_point_stabilizer
from .twisted import TwistData, TwistError, build, explicit_action

# Exhaustive search for condition (iii) up to this order of M.
COND3_LIMIT = 100_000


@dataclass
class PrimitivityResult:
    primitive: Optional[bool]
    failing_condition: Optional[str]
    witness: Any = None
    conditions: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def verdict(self) -> str:
        if self.primitive is None:
            return "unknown"
        return "primitive" if self.primitive else "imprimitive"


def _relative(D: TwistData, M: Optional[PermGroup]) -> tuple[PermGroup, PermGroup, PermGroup]:
    if M is None:
        return D.P, D.U, D.V
    if not M.is_normal_in(D.P):
        raise TwistError("M is not a normal subgroup of P")
    U1, V1 = intersection(D.U, M), intersection(D.V, M)
    if D.V.order() * U1.order() != D.U.order() * V1.order():
        raise TwistError("MU != MV")
    return M, U1, V1


def condition_i(D: TwistData, U1: PermGroup, V1: PermGroup) -> bool:
    """V'/U' is isomorphic to T, by order and through phi(V') <= Inn(T)."""
    if V1.order() != U1.order() * D.T.size:
        return False
    img = PermGroup([Perm(D.phi(g), check=False) for g in V1.gens], D.T.size)
    if img.order() != D.T.size:
        return False
    return find_isomorphism(GroupTable.from_perm_group(img), D.T) is not None


def minimal_overgroup_generators(D: TwistData) -> list[tuple[list[int], Perm]]:
    """(atom block I containing 0, u with 0^u in I) for each minimal block I > {0}."""
    k = D.k
    gens = [g.restrict(k) for g in D.P.gens]
    Qk = [g.restrict(k) for g in D.Q.gens]
    blocks = []
    for orb in orbit_partition(Qk, k):
        if orb.start == 0:
            continue
        blocks.append(minimal_block(gens, k, [0, orb.start]))
    sets = {tuple(b) for b in blocks}
    atoms = [list(b) for b in sets if not any(set(o) < set(b) for o in sets)]
    atoms.sort(key=lambda b: (len(b), b))
    tree = orbit_partition(gens, k)[0]
    return [(b, tree.element(b[1], D.P.gens, D.nP)) for b in atoms]


def condition_ii(D: TwistData, U1: PermGroup, V1: PermGroup) -> tuple[bool, Optional[tuple]]:
    """Q = N_P(U') and N_P(V') jointly; fails iff a minimal overgroup normalizes both."""
    for blk, u in minimal_overgroup_generators(D):
        if all(U1.contains(g.conj(u)) for g in U1.gens) and all(V1.contains(g.conj(u)) for g in V1.gens):
            return False, (blk, u)
    return True, None


def condition_iii(D: TwistData, M: PermGroup, U1: PermGroup, V1: PermGroup) -> tuple[Optional[bool], Optional[Perm]]:
    """No R <= M normalised by Q with R meet V' = U' other than U'.

    Any such R contains some m outside V', hence contains the Q-invariant
    closure of <U', m>; it suffices to test one m per Q-class of M - V'.
    """
    if M.order() > COND3_LIMIT:
        return None, None
    E = M.elements()
    rows = E.arr
    in_v = V1.contains_rows(rows)
    n = E.size
    src, dst = [], []
    for q in D.Q.gens:
        qi = (~q).a
        conj = q.a[rows[:, qi]]
        src.append(np.arange(n))
        dst.append(E.index_rows(conj))
    src, dst = np.concatenate(src), np.concatenate(dst)
    graph = coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(n, n))
    _, labels = connected_components(graph, directed=True, connection="weak")
    reps: dict[int, int] = {}
    for idx in np.nonzero(~in_v)[0]:
        reps.setdefault(int(labels[idx]), int(idx))
    target = U1.order()
    for idx in reps.values():
        m = E.perm(idx)
        R = D.Q.normal_closure(U1.gens + [m])
        if R.order() > M.order():
            raise TwistError("closure left M (M is not normal)")
        if R.order() % V1.order() == 0 and all(R.contains(g) for g in V1.gens):
            continue
        meet = int(V1.contains_rows(R.elements().arr).sum())
        if meet == target:
            return False, m
    return True, None


def primitivity_check(D: TwistData, M: Optional[PermGroup] = None) -> PrimitivityResult:
    """Verdict from the three conditions on (U', V') = (U meet M, V meet M)."""
    M, U1, V1 = _relative(D, M)
    res = PrimitivityResult(None, None)
    ok = condition_i(D, U1, V1)
    res.conditions["i"] = ok
    if not ok:
        res.primitive, res.failing_condition = False, "i"
        res.witness = {"V'/U' order": V1.order() // max(U1.order(), 1)}
        return res
    ok, wit = condition_ii(D, U1, V1)
    res.conditions["ii"] = ok
    if not ok:
        res.primitive, res.failing_condition, res.witness = False, "ii", wit
        return res
    ok, wit = condition_iii(D, M, U1, V1)
    res.conditions["iii"] = ok
    if ok is None:
        res.notes.append(f"condition (iii) search skipped: |M| = {M.order()} > {COND3_LIMIT}")
        return res
    if not ok:
        res.primitive, res.failing_condition, res.witness = False, "iii", wit
        return res
    res.primitive, res.failing_condition = True, "none"
    return res


# -- block oracle on the explicit action ------------------------------

def block_oracle(D: TwistData) -> tuple[bool, Optional[np.ndarray]]:
    """Atkinson's test on G acting on B; returns (primitive, block as vectors)."""
    EA = explicit_action(D)
    n = EA.vectors.shape[0]
    gens = EA.p_gens + EA.b_gens
    labels = orbit_labels(EA.p_gens, n)
    sizes = np.bincount(labels)
    first = np.full(sizes.size, -1, dtype=np.int64)
    order = np.arange(n)[::-1]
    first[labels[order]] = order
    reps = [int(first[c]) for c in np.argsort(sizes, kind="stable") if first[c] != 0]
    for d in reps:
        blk = minimal_block(gens, n, [0, d])
        if len(blk) < n:
            return False, EA.vectors[blk]
    return True, None


# -- balanced subgroups ----------------------------------------------

@dataclass
class Balanced:
    group: PermGroup
    block: list[int]


def _core_V(S: PermGroup, block: list[int], V: PermGroup) -> PermGroup:
    kern = S.pointwise_stabilizer(block)
    return core(S, V, contains_core=kern)


def is_balanced(D: TwistData, S: PermGroup, block: list[int]) -> bool:
    """core_S(U) = core_S(V); since U <= V this is core_S(V) <= U."""
    c = _core_V(S, block, D.V)
    return all(D.U.contains(g) for g in c.gens)


def balanced_subgroups(D: TwistData) -> list[Balanced]:
    out = []
    for S, blk in overgroups_of_point_stabilizer(D.P, D.k):
        if is_balanced(D, S, blk):
            out.append(Balanced(S, blk))
    return out


def is_minimal_twisted(D: TwistData, balanced: Optional[list[Balanced]] = None) -> bool:
    balanced = balanced_subgroups(D) if balanced is None else balanced
    return len(balanced) == 1 and balanced[0].group.order() == D.P.order()


def minimal_balanced(balanced: list[Balanced]) -> list[Balanced]:
    return [b for b in balanced if not any(set(o.block) < set(b.block) for o in balanced)]


def quotient_build(D: TwistData, S: PermGroup, block: list[int], check_minimal: bool = True) -> TwistData:
    """T twr P-bar with P-bar = S/core_S(Q) acting on the block 0^S."""
    if not is_balanced(D, S, block):
        raise TwistError("S is not balanced")
    if check_minimal:
        for b in balanced_subgroups(D):
            if set(b.block) < set(block):
                raise TwistError(f"S is not minimal balanced (block of size {len(b.block)} is smaller)")
    block = sorted(block)
    pos = {p: j for j, p in enumerate(block)}
    m = len(block)

    def bar(g: Perm) -> Perm:
        return Perm([pos[int(g.a[p])] for p in block])

    Pbar = PermGroup([bar(g) for g in S.gens], m)
    kern = S.pointwise_stabilizer(block)
    if not all(D.U.contains(g) for g in kern.gens):
        raise TwistError("core_S(Q) is not inside ker(phi)")
    Pbar = PermGroup(Pbar.gens, m, order=S.order() // kern.order())
    pairs = [(bar(q), D.phi(q)) for q in D.Q.gens]
    return build(D.T, Pbar, pairs, name=f"{D.name}/quotient" if D.name else "quotient",
                 meta={"parent": D.name, "block": [b + 1 for b in block]}, seed=D.seed)
