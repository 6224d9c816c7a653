"""Distinguishing numbers: exact search, counting of regular orbits, bounds."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .group import ENUM_LIMIT, PermGroup, element_orders
from .grouptable import GroupTable, all_subgroups
from .intmath import ceil_root, is_prime
from .perm import Perm
from .search import coloring_stabilizer
from .structure import SUBGROUP_LIMIT, classify_action, has_section, is_block

DIRECT_LIMIT = 10_000_000
WITNESS_TRIES = 400
TABLE_LIMIT = 200_000


class DistUnknown(Exception):
    pass


@dataclass
class Coloring:
    labels: np.ndarray
    d: int

    def parts(self) -> list[list[int]]:
        return [np.nonzero(self.labels == u)[0].tolist() for u in range(self.d)]


@dataclass
class DistResult:
    d: Optional[int]
    witness: Optional[Coloring]
    lower: int
    proven: bool
    method: str
    notes: list = field(default_factory=list)


def induced(P: PermGroup, m: Optional[int] = None) -> PermGroup:
    """The permutation group induced by P on 0..m-1."""
    if m is None or m == P.degree:
        return P
    gens = [g.restrict(m) for g in P.gens]
    return PermGroup(gens, m, name=P.name)


def is_distinguishing(G: PermGroup, labels: np.ndarray) -> bool:
    stab = coloring_stabilizer(G, np.asarray(labels), first_only=True)
    return stab.is_trivial() or stab.order() == 1


def order_lower_bound(order: int, n: int) -> int:
    """Smallest d with d^n > |G| (a regular orbit on d-colorings needs |G| < d^n)."""
    if order == 1:
        return 1
    d = max(2, ceil_root(order, n))
    while d ** n <= order:
        d += 1
    return d


# -- counting colorings with trivial stabilizer ---------------------------

def _cycle_partitions(rows: np.ndarray) -> np.ndarray:
    """Least point of the cycle through each point, per row (distinct rows only)."""
    N, n = rows.shape
    lab = np.tile(np.arange(n), (N, 1))
    cur = rows.copy()
    steps = 1
    while steps < n:
        lab = np.minimum(lab, np.take_along_axis(lab, cur, axis=1))
        cur = np.take_along_axis(cur, cur, axis=1)
        steps *= 2
    lab = np.minimum(lab, np.take_along_axis(lab, cur, axis=1))
    return np.unique(lab, axis=0)


def _prime_order_rows(G: PermGroup) -> np.ndarray:
    rows = G.elements().arr
    orders = element_orders(rows)
    prime = np.array([is_prime(int(o)) for o in orders])
    return rows[prime]


def free_colorings_direct(G: PermGroup, d: int) -> tuple[int, Optional[np.ndarray]]:
    """(number of d-colorings with trivial stabilizer, one such coloring) by marking."""
    n = G.degree
    total = d ** n
    if total > DIRECT_LIMIT or G.order() > ENUM_LIMIT:
        raise DistUnknown("direct enumeration infeasible")
    if G.order() == 1:
        return total, np.zeros(n, dtype=np.int64)
    marked = np.zeros(total, dtype=bool)
    powers = d ** np.arange(n, dtype=np.int64)
    for lab in _cycle_partitions(_prime_order_rows(G)):
        reps, cyc = np.unique(lab, return_inverse=True)
        c = reps.size
        codes = np.arange(d ** c, dtype=np.int64)
        digits = (codes[:, None] // (d ** np.arange(c, dtype=np.int64))[None, :]) % d
        marked[digits[:, cyc] @ powers] = True
    free = int(total - marked.sum())
    if free == 0:
        return 0, None
    code = int(np.argmin(marked))
    return free, (code // powers) % d


@lru_cache(maxsize=64)
def _mobius_data(key: bytes, degree: int) -> tuple[list[int], list[int]]:
    G = _MOBIUS_GROUPS.pop(key)
    tab = GroupTable.from_perm_group(G)
    masks = all_subgroups(tab, limit=SUBGROUP_LIMIT)
    perms = tab.perms
    bits = [int.from_bytes(np.packbits(m).tobytes(), "big") for m in masks]
    mu: list[int] = []
    omegas: list[int] = []
    for j, m in enumerate(masks):
        rows = perms[m]
        mins = rows.min(axis=0)
        omegas.append(int(np.unique(mins).size))
        if j == 0:
            mu.append(1)
            continue
        s = 0
        for i in range(j):
            if bits[i] != bits[j] and bits[i] & bits[j] == bits[i]:
                s += mu[i]
        mu.append(-s)
    return mu, omegas


_MOBIUS_GROUPS: dict[bytes, PermGroup] = {}


def free_colorings_mobius(G: PermGroup, d: int) -> int:
    """Colorings with trivial stabilizer: sum over subgroups H of mu(1, H) d^orbits(H)."""
    if G.order() > SUBGROUP_LIMIT:
        raise DistUnknown("subgroup lattice beyond threshold")
    key = b"".join(g.key() for g in G.gens) + str(G.degree).encode()
    _MOBIUS_GROUPS[key] = G
    mu, omegas = _mobius_data(key, G.degree)
    _MOBIUS_GROUPS.pop(key, None)
    return sum(m * d ** w for m, w in zip(mu, omegas))


def regular_coloring_orbit_count(H: PermGroup, d: int, method: str = "auto") -> int:
    """Number of regular H-orbits on d-colorings of H's domain."""
    direct_ok = d ** H.degree <= DIRECT_LIMIT and H.order() <= ENUM_LIMIT
    if method == "auto":
        method = "direct" if direct_ok else "mobius"
    if method == "mobius" and H.order() <= SUBGROUP_LIMIT:
        free = free_colorings_mobius(H, d)
    elif method == "direct":
        free, _ = free_colorings_direct(H, d)
    else:
        raise DistUnknown(f"method {method} infeasible")
    if free % H.order():
        raise ArithmeticError("free colorings not divisible by |H|")
    return free // H.order()


# -- exact distinguishing number ------------------------------------------

def _random_witness(G: PermGroup, d: int, tries: int, rng: np.random.Generator) -> Optional[np.ndarray]:
    n = G.degree
    if G.order() <= TABLE_LIMIT:
        rows = G.elements().arr
        for lo in range(0, tries, 64):
            batch = rng.integers(0, d, size=(min(64, tries - lo), n))
            for labels in batch:
                if int((labels[rows] == labels).all(axis=1).sum()) == 1:
                    return labels
        return None
    for _ in range(tries):
        labels = rng.integers(0, d, size=n)
        if is_distinguishing(G, labels):
            return labels
    return None


def _exact_free(G: PermGroup, d: int) -> tuple[Optional[int], Optional[np.ndarray], str]:
    """(free coloring count or None, a free coloring if at hand, method)."""
    try:
        free, labels = free_colorings_direct(G, d)
        return free, labels, "direct enumeration"
    except DistUnknown:
        pass
    try:
        return free_colorings_mobius(G, d), None, "subgroup lattice"
    except DistUnknown:
        return None, None, "random witness"


def dist_exact(P: PermGroup, m: Optional[int] = None, max_d: Optional[int] = None,
               tries: int = WITNESS_TRIES, seed: int = 0) -> DistResult:
    """Minimal number of colors in a distinguishing coloring of 0..m-1.

    Each candidate d from the order bound upward is settled by exact counting
    when feasible, otherwise by sampling; minimality is proven only if every
    smaller candidate was excluded by counting.
    """
    G = induced(P, m)
    n = G.degree
    order = G.order()
    if order == 1:
        return DistResult(1, Coloring(np.zeros(n, dtype=np.int64), 1), 1, True, "trivial")
    lower = order_lower_bound(order, n)
    max_d = n if max_d is None else max_d
    rng = np.random.default_rng(seed)
    proven_below = True
    notes = []
    if order > TABLE_LIMIT and lower <= max_d:
        # a witness at the order bound is already minimal
        labels = _random_witness(G, lower, min(tries, 50), rng)
        if labels is not None:
            return DistResult(lower, Coloring(np.asarray(labels, dtype=np.int64), lower), lower, True,
                              "witness at the order bound")
    for d in range(lower, max_d + 1):
        free, labels, method = _exact_free(G, d)
        if free == 0:
            continue
        if labels is None:
            labels = _random_witness(G, d, tries if free is None else 50 * tries, rng)
        if labels is None:
            if free is None:
                notes.append(f"no witness with {d} colors and no exhaustive method")
                proven_below = False
                continue
            notes.append(f"{d} colors suffice by counting; no witness sampled")
            return DistResult(d if proven_below else None, None, lower, proven_below, method, notes)
        col = Coloring(np.asarray(labels, dtype=np.int64), d)
        if not proven_below:
            return DistResult(None, col, lower, False, method, notes)
        return DistResult(d, col, lower, True, method, notes)
    return DistResult(None, None, lower, False, "exhausted", notes + [f"no witness up to {max_d}"])


# -- bounds ---------------------------------------------------------------

@dataclass
class DistBounds:
    order: int
    degree: int
    lower_from_order: int
    sandwich: Optional[bool]
    summary: dict
    notes: list = field(default_factory=list)


def sandwich_holds(order: int, n: int, d: int) -> bool:
    """|G|^(1/n) < d <= 48 |G|^(1/n), compared through n-th powers."""
    return order < d ** n and d ** n <= 48 ** n * order


def dist_bounds(P: PermGroup, m: Optional[int] = None, d_exact: Optional[int] = None) -> DistBounds:
    G = induced(P, m)
    n = G.degree
    order = G.order()
    info = classify_action(G)
    summary: dict = {}
    natural = info.is_symmetric or info.is_alternating
    if not natural and order > 1:
        if info.semiprimitive is True:
            summary["semiprimitive"] = 2 if n > 32 else 4
        if info.soluble is True:
            summary["soluble"] = 5
        if order % 2 == 1:
            summary["odd order"] = 2
        for s in range(3, 8):
            from .grouptable import named_table

            if s >= 5:
                target = named_table(f"A{s}")
            else:
                target = GroupTable.from_perm_group(PermGroup.alternating(s))
            if has_section(G, target).answer == "no":
                summary[f"no A{s} section"] = s
                break
    sandwich = None
    if d_exact is not None and info.transitive:
        sandwich = sandwich_holds(order, n, d_exact)
    return DistBounds(order, n, order_lower_bound(order, n), sandwich, summary)


def block_system(G: PermGroup, block: Sequence[int]) -> list[list[int]]:
    blocks = [sorted(block)]
    seen = {tuple(blocks[0])}
    i = 0
    while i < len(blocks):
        for g in G.gens:
            img = tuple(sorted(int(g.a[p]) for p in blocks[i]))
            if img not in seen:
                seen.add(img)
                blocks.append(list(img))
        i += 1
    return blocks


def block_actions(G: PermGroup, block: Sequence[int]) -> tuple[PermGroup, PermGroup]:
    """(H, K): the block stabilizer induced on the block, and the action on blocks."""
    if not is_block(G.gens, block):
        raise ValueError("not a block")
    blocks = block_system(G, block)
    where = np.empty(G.degree, dtype=np.int64)
    for j, b in enumerate(blocks):
        where[b] = j
    r = len(blocks)
    kgens = [Perm(where[g.a[[b[0] for b in blocks]]], check=False) for g in G.gens]
    K = PermGroup(kgens, r)
    graph = [Perm(np.concatenate([kg.a, g.a + r]), check=False) for kg, g in zip(kgens, G.gens)]
    S = PermGroup(graph, r + G.degree, order=G.order()).stabilizer(0)
    blk = blocks[0]
    pos = {p: i for i, p in enumerate(blk)}
    hgens = [Perm([pos[int(g.a[r + p]) - r] for p in blk], check=False) for g in S.gens]
    H = PermGroup(hgens, len(blk))
    return H, K


def dist_block_bound(G: PermGroup, block: Sequence[int], seed: int = 0) -> int:
    """d_Delta(H) * ceil(d_Sigma(K)^(1/m)) for a block Delta of size m."""
    H, K = block_actions(G, block)
    dH = dist_exact(H, seed=seed).d
    dK = dist_exact(K, seed=seed).d
    if dH is None or dK is None:
        raise DistUnknown("block or quotient distinguishing number unknown")
    return dH * ceil_root(dK, len(block))


# -- imprimitive wreath products ------------------------------------------

@dataclass
class ChanResult:
    d: int
    d_H: int
    d_K: int
    counts: dict


def chan_wreath_dist(H: PermGroup, K: PermGroup, seed: int = 0) -> ChanResult:
    """Least d for which H has at least d(K) regular orbits on d-colorings."""
    dK = dist_exact(K, seed=seed).d
    dH = dist_exact(H, seed=seed).d
    if dK is None or dH is None:
        raise DistUnknown("factor distinguishing numbers unknown")
    counts = {}
    d = max(dH, 1)
    while True:
        c = regular_coloring_orbit_count(H, d)
        counts[d] = c
        if c >= dK:
            return ChanResult(d, dH, dK, counts)
        d += 1


def _regular_reps(H: PermGroup, d: int, want: int, rng: np.random.Generator,
                  tries: int = 200_000) -> Optional[list[np.ndarray]]:
    """`want` d-colorings of H's domain in distinct regular H-orbits."""
    if H.order() > TABLE_LIMIT:
        return None
    rows = H.elements().arr
    seen: set[bytes] = set()
    reps = []
    for lo in range(0, tries, 256):
        for labels in rng.integers(0, d, size=(256, H.degree)):
            imgs = labels[rows]
            if int((imgs == labels).all(axis=1).sum()) != 1:
                continue
            key = min(r.tobytes() for r in imgs)
            if key not in seen:
                seen.add(key)
                reps.append(labels)
                if len(reps) == want:
                    return reps
    return None


def dist_wreath(H: PermGroup, K: PermGroup, seed: int = 0) -> DistResult:
    """d(H wr K) in imprimitive form (block j is j*m .. j*m+m-1), with a checked witness."""
    chan = chan_wreath_dist(H, K, seed)
    res_K = dist_exact(K, seed=seed)
    reps = _regular_reps(H, chan.d, chan.d_K, np.random.default_rng(seed))
    if reps is None or res_K.witness is None:
        return DistResult(chan.d, None, chan.d, False, "wreath formula",
                          ["no witness assembled from regular orbits"])
    labels = np.concatenate([reps[c] for c in res_K.witness.labels])
    from .constructions import wreath_imprimitive
    if not is_distinguishing(wreath_imprimitive(H, K), labels):
        raise ArithmeticError("assembled wreath coloring is not distinguishing")
    return DistResult(chan.d, Coloring(labels, chan.d), chan.d, True, "wreath formula")
