"""Blocks, conjugacy classes, normal subgroups, sections and action classification."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Optional, Sequence

import numpy as np

from .group import ENUM_LIMIT, PermGroup, Unknown, element_orders, orbit_partition
from .grouptable import GroupTable, all_subgroups, find_isomorphism, quotient_table
from .perm import Perm

SUBGROUP_LIMIT = 2000
ATOM_LIMIT = 20


# -- blocks ------------------------------------------------------------

def minimal_block(gens: Sequence[Perm], n: int, points: Sequence[int]) -> list[int]:
    """Smallest block of <gens> containing all the given points (Atkinson)."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    arrs = [g.a for g in gens]
    queue = []
    pts = list(points)
    for p in pts[1:]:
        a, b = find(pts[0]), find(p)
        if a != b:
            parent[max(a, b)] = min(a, b)
            queue.append((pts[0], p))
    while queue:
        a, b = queue.pop()
        for arr in arrs:
            x, y = find(int(arr[a])), find(int(arr[b]))
            if x != y:
                parent[max(x, y)] = min(x, y)
                queue.append((x, y))
    r = find(pts[0])
    return [x for x in range(n) if find(x) == r]


def is_block(gens: Sequence[Perm], block: Sequence[int]) -> bool:
    s = set(block)
    for g in gens:
        img = {int(g.a[x]) for x in s}
        if img != s and img & s:
            return False
    return True


def _action_gens(P: PermGroup, m: Optional[int]) -> tuple[list[Perm], int]:
    if m is None or m == P.degree:
        return P.gens, P.degree
    return [g.restrict(m) for g in P.gens], m


def is_primitive(P: PermGroup, m: Optional[int] = None) -> tuple[bool, Optional[list[int]]]:
    """Primitivity of P on 0..m-1; returns (verdict, a nontrivial block or None)."""
    gens, n = _action_gens(P, m)
    if len(PermGroup(gens, n).orbit(0)) != n:
        raise ValueError("group is not transitive")
    if n <= 2:
        return True, None
    Q = PermGroup(gens, n).stabilizer(0)
    for orb in orbit_partition(Q.gens, n):
        d = orb.start
        if d == 0:
            continue
        blk = minimal_block(gens, n, [0, d])
        if len(blk) < n:
            return False, blk
    return True, None


def blocks_containing_zero(P: PermGroup, m: Optional[int] = None) -> list[list[int]]:
    """All blocks of P (on 0..m-1) containing 0, smallest first."""
    gens, n = _action_gens(P, m)
    Q = PermGroup(gens, n).stabilizer(0)
    found: dict[tuple, list[int]] = {(0,): [0]}
    atoms = []
    for orb in orbit_partition(Q.gens, n):
        if orb.start == 0:
            continue
        blk = minimal_block(gens, n, [0, orb.start])
        key = tuple(blk)
        if key not in found:
            found[key] = blk
            atoms.append(blk)
    frontier = list(atoms)
    while frontier:
        new = []
        for b in frontier:
            for a in atoms:
                if set(a) <= set(b):
                    continue
                j = minimal_block(gens, n, sorted(set(a) | set(b)))
                key = tuple(j)
                if key not in found:
                    found[key] = j
                    new.append(j)
        frontier = new
    return sorted(found.values(), key=lambda b: (len(b), b))


def overgroups_of_point_stabilizer(P: PermGroup, m: Optional[int] = None) -> list[tuple[PermGroup, list[int]]]:
    """All S with Q <= S <= P (Q the stabilizer of 0), paired with the block 0^S."""
    gens, n = _action_gens(P, m)
    Q = P.stabilizer(0)
    tree = {o.start: o for o in orbit_partition(gens, n)}[0]
    out = []
    for blk in blocks_containing_zero(P, m):
        extra = [tree.element(d, P.gens, P.degree) for d in blk if d != 0]
        S = PermGroup(Q.gens + extra, P.degree, order=Q.order() * len(blk))
        out.append((S, blk))
    return out


# -- conjugacy classes ---------------------------------------------------

@dataclass
class ClassInfo:
    rep: Perm
    size: int
    centralizer_order: int
    order: int


def _is_prime(p: int) -> bool:
    return p > 1 and all(p % d for d in range(2, int(p ** 0.5) + 1))


def class_labels(G: PermGroup) -> tuple[np.ndarray, int]:
    """Conjugacy class label of every element of an enumerable group."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    E = G.elements()
    N = E.size
    src, dst = [], []
    for g in G.gens:
        gi = (~g).a
        conj = g.a[E.arr[:, gi]]  # x -> g(e(g^-1(x))): g^-1 e g
        idx = E.index_rows(conj)
        src.append(np.arange(N))
        dst.append(idx)
    if not src:
        return np.zeros(N, dtype=np.int64), N
    src = np.concatenate(src)
    dst = np.concatenate(dst)
    mat = coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(N, N))
    k, lab = connected_components(mat, directed=True, connection="weak")
    return lab, k


def conjugacy_classes(G: PermGroup) -> list[ClassInfo]:
    if G.order() > ENUM_LIMIT:
        raise Unknown("class computation needs an enumerable group")
    E = G.elements()
    lab, k = class_labels(G)
    counts = np.bincount(lab, minlength=k)
    firsts = np.full(k, -1, dtype=np.int64)
    # representative: first element of each class in enumeration order
    order_idx = np.arange(E.size)
    firsts[lab[::-1]] = order_idx[::-1]
    out = []
    for c in range(k):
        rep = E.perm(int(firsts[c]))
        out.append(ClassInfo(rep, int(counts[c]), G.order() // int(counts[c]), rep.order()))
    out.sort(key=lambda ci: (ci.order, ci.size, tuple(ci.rep.cycle_type())))
    return out


def prime_order_class_reps(G: PermGroup) -> list[ClassInfo]:
    return [c for c in conjugacy_classes(G) if _is_prime(c.order)]


# -- normal subgroups ----------------------------------------------------

@dataclass
class NormalLattice:
    atoms: list[PermGroup]
    all_normals: list[PermGroup] = field(default_factory=list)


def _dedupe(groups: list[PermGroup]) -> list[PermGroup]:
    out: list[PermGroup] = []
    for H in groups:
        if not any(K.order() == H.order() and H.is_subgroup_of(K) for K in out):
            out.append(H)
    return out


def normal_lattice(G: PermGroup) -> NormalLattice:
    classes = conjugacy_classes(G)
    atoms = _dedupe([G.normal_closure([c.rep]) for c in classes if c.order > 1])
    if len(atoms) > ATOM_LIMIT:
        raise Unknown("too many normal closures for the lattice")
    allg = [PermGroup.trivial(G.degree)] + list(atoms)
    frontier = list(atoms)
    while frontier:
        new = []
        for A in frontier:
            for B in atoms:
                if B.is_subgroup_of(A):
                    continue
                J = PermGroup(A.gens + B.gens, G.degree)
                if not any(K.order() == J.order() and J.is_subgroup_of(K) for K in allg):
                    allg.append(J)
                    new.append(J)
        frontier = new
    allg.sort(key=lambda H: H.order())
    return NormalLattice(atoms, allg)


def is_semiregular(N: PermGroup, m: Optional[int] = None) -> bool:
    gens, n = _action_gens(N, m)
    order = N.order()
    return all(len(o.points) == order for o in orbit_partition(gens, n))


def is_transitive_on(N: PermGroup, m: int) -> bool:
    gens, n = _action_gens(N, m)
    return len(PermGroup(gens, n).orbit(0)) == n


@dataclass
class ActionInfo:
    transitive: bool
    primitive: object
    quasiprimitive: object
    semiprimitive: object
    soluble: object
    order_mod_4: int
    is_symmetric: bool
    is_alternating: bool
    order: int


def classify_action(P: PermGroup, m: Optional[int] = None) -> ActionInfo:
    """Classify the action of P on 0..m-1 (the induced group when P has extra points).

    Flags that cannot be decided within thresholds are reported as "unknown".
    """
    gens, n = _action_gens(P, m)
    R = PermGroup(gens, n) if (m is not None and m != P.degree) else P
    order = R.order()
    trans = len(R.orbit(0)) == n
    prim: object = is_primitive(R)[0] if trans else False
    try:
        sol: object = R.is_soluble()
    except Unknown:
        sol = "unknown"
    qp: object
    sp: object
    try:
        lat = normal_lattice(R)
        nontriv = [N for N in lat.all_normals if not N.is_trivial()]
        qp = all(len(N.orbit(0)) == n for N in nontriv) if trans else False
        sp = all(len(N.orbit(0)) == n or is_semiregular(N) for N in lat.all_normals) if trans else False
    except Unknown:
        if prim is True:
            qp, sp = True, True
        else:
            qp, sp = "unknown", "unknown"
    return ActionInfo(
        transitive=trans,
        primitive=prim,
        quasiprimitive=qp,
        semiprimitive=sp,
        soluble=sol,
        order_mod_4=order % 4,
        is_symmetric=trans and order == factorial(n),
        is_alternating=trans and n >= 3 and order == factorial(n) // 2,
        order=order,
    )


# -- sections ------------------------------------------------------------

@dataclass
class SectionResult:
    answer: str  # "yes" | "no" | "unknown"
    H: Optional[PermGroup] = None
    N: Optional[PermGroup] = None
    reason: str = ""


def _random_subgroup_witness(P: PermGroup, target: GroupTable, tries: int, seed: int) -> Optional[PermGroup]:
    from .grouptable import _best_pair

    if target.size == 1:
        return PermGroup.trivial(P.degree)
    t, s = _best_pair(target, seed)
    o = target.orders()
    want = (int(o[t]), int(o[s]), int(o[target.mul[t, s]]))
    rng = np.random.default_rng(seed)
    by_order: dict[int, np.ndarray] = {}
    if P.order() <= ENUM_LIMIT:
        E = P.elements()
        ords = element_orders(E.arr)
        for w in set(want[:2]):
            by_order[w] = np.nonzero(ords == w)[0]
        if any(by_order[w].size == 0 for w in want[:2]):
            return None

    def draw(w):
        if by_order:
            return E.perm(int(rng.choice(by_order[w])))
        for _ in range(200):
            g = P.uniform_random(rng)
            k = g.order()
            if k % w == 0:
                return g ** (k // w)
        return None

    for _ in range(tries):
        x, y = draw(want[0]), draw(want[1])
        if x is None or y is None:
            return None
        if (x * y).order() != want[2]:
            continue
        H = PermGroup([x, y], P.degree)
        if H.order() != target.size:
            continue
        if find_isomorphism(target, GroupTable.from_perm_group(H)) is not None:
            return H
    return None


def has_section(P: PermGroup, target: GroupTable, tries: int = 400, seed: int = 0) -> SectionResult:
    """Decide whether target is isomorphic to a quotient of a subgroup of P."""
    order = P.order()
    if order % target.size:
        return SectionResult("no", reason="Lagrange")
    H = _random_subgroup_witness(P, target, tries, seed)
    if H is not None:
        return SectionResult("yes", H, PermGroup.trivial(P.degree), reason="subgroup witness")
    if not target.is_abelian() and _table_soluble(target) is False:
        try:
            if P.is_soluble():
                return SectionResult("no", reason="P soluble, target not")
        except Unknown:
            pass
    if order <= SUBGROUP_LIMIT:
        tab = GroupTable.from_perm_group(P)
        subs = all_subgroups(tab)
        for Hm in subs:
            h = int(Hm.sum())
            if h % target.size:
                continue
            for Nm in subs:
                if int(Nm.sum()) * target.size != h or (Nm & ~Hm).any():
                    continue
                qt = quotient_table(tab, Hm, Nm)
                if qt is not None and find_isomorphism(target, qt) is not None:
                    Hg = _mask_group(tab, Hm, P.degree)
                    Ng = _mask_group(tab, Nm, P.degree)
                    return SectionResult("yes", Hg, Ng, reason="exhaustive")
        return SectionResult("no", reason="exhaustive subgroup enumeration")
    return SectionResult("unknown", reason="beyond exhaustive threshold")


def _mask_group(tab: GroupTable, mask: np.ndarray, degree: int) -> PermGroup:
    from .group import subgroup_from_rows

    return subgroup_from_rows(tab.perms[mask], degree)


def _table_soluble(T: GroupTable) -> bool:
    cur = np.ones(T.size, dtype=bool)
    while cur.sum() > 1:
        el = np.nonzero(cur)[0]
        comms = np.zeros(T.size, dtype=bool)
        for a in el:
            comms[T.mul[T.mul[T.inv[a], T.inv[el]], T.mul[a, el]]] = True
        nxt = T.closure(np.nonzero(comms)[0].tolist())
        if nxt.sum() == cur.sum():
            return False
        cur = nxt
    return True


def orbit_count(gens: Sequence[Perm], n: int) -> int:
    """Number of orbits of <gens> on n points (cycle count for a single element)."""
    return len(orbit_partition(list(gens), n))
