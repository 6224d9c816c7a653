"""Permutation groups with lazily built stabilizer chains."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Iterable, Optional, Sequence

import numpy as np

from .chain import RandomElements, StabChain, subgroup_search
from .perm import Perm, parse_perm

# Full element enumeration is allowed up to this order.
ENUM_LIMIT = 1_000_000


class Unknown(Exception):
    """Raised when a computation exceeds its desk-scale threshold."""


@dataclass
class Orbit:
    start: int
    points: list[int]
    parent_gen: dict[int, int]
    parent_pt: dict[int, int]

    def word(self, pt: int) -> list[int]:
        """Generator indices w with start^(g_w0 g_w1 ...) = pt."""
        w = []
        while pt != self.start:
            w.append(self.parent_gen[pt])
            pt = self.parent_pt[pt]
        return w[::-1]

    def element(self, pt: int, gens: Sequence[Perm], n: int) -> Perm:
        u = Perm.identity(n)
        for gi in self.word(pt):
            u = u * gens[gi]
        return u


def orbit_partition(gens: Sequence[Perm], n: int) -> list[Orbit]:
    """Orbits of <gens> on 0..n-1, each with a BFS Schreier tree."""
    for g in gens:
        if g.degree != n:
            raise ValueError(f"generator degree {g.degree} does not match domain size {n}")
    seen = np.zeros(n, dtype=bool)
    out = []
    arrs = [g.a for g in gens]
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        pts = [s]
        pg: dict[int, int] = {}
        pp: dict[int, int] = {}
        idx = 0
        while idx < len(pts):
            p = pts[idx]
            for gi, a in enumerate(arrs):
                q = int(a[p])
                if not seen[q]:
                    seen[q] = True
                    pg[q] = gi
                    pp[q] = p
                    pts.append(q)
            idx += 1
        out.append(Orbit(s, pts, pg, pp))
    return out


def orbit_labels(gens: Sequence[Perm], n: int) -> np.ndarray:
    """Orbit index of every point (orbits numbered by least point)."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    if not gens:
        return np.arange(n)
    src = np.concatenate([np.arange(n)] * len(gens))
    dst = np.concatenate([g.a for g in gens])
    m = coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(n, n))
    _, lab = connected_components(m, directed=True, connection="weak")
    # renumber by least point
    first = {}
    out = np.empty(n, dtype=np.int64)
    for i, l in enumerate(lab):
        if l not in first:
            first[l] = len(first)
        out[i] = first[l]
    return out


def element_orders(rows: np.ndarray) -> np.ndarray:
    """Orders of the permutations given as image rows (vectorised)."""
    rows = np.atleast_2d(rows)
    N, n = rows.shape
    cyc = np.zeros((N, n), dtype=np.int64)
    ident = np.arange(n)
    cur = rows.copy()
    for k in range(1, n + 1):
        hit = (cur == ident) & (cyc == 0)
        cyc[hit] = k
        if (cyc > 0).all():
            break
        cur = np.take_along_axis(rows, cur, axis=1)
    return np.lcm.reduce(cyc, axis=1)


class PermGroup:
    def __init__(self, gens: Iterable[Perm], degree: Optional[int] = None, order: Optional[int] = None, name: str = ""):
        gens = list(gens)
        if degree is None:
            if not gens:
                raise ValueError("degree required for a group without generators")
            degree = gens[0].degree
        for g in gens:
            if g.degree != degree:
                raise ValueError(f"generator of degree {g.degree} in a group of degree {degree}")
        self.degree = degree
        self.gens = [g for g in gens if not g.is_identity()]
        self.name = name
        self._order = order
        self._chain: Optional[StabChain] = None
        self._elements = None

    # -- construction helpers ---------------------------------------
    @classmethod
    def from_strings(cls, gens: Sequence[str], degree: int, name: str = "") -> "PermGroup":
        return cls([parse_perm(s, degree) for s in gens], degree, name=name)

    @classmethod
    def trivial(cls, degree: int) -> "PermGroup":
        return cls([], degree, order=1)

    @classmethod
    def symmetric(cls, n: int) -> "PermGroup":
        if n == 1:
            return cls.trivial(1)
        gens = [Perm.from_cycles([[0, 1]], n)]
        if n > 2:
            gens.append(Perm.from_cycles([list(range(n))], n))
        return cls(gens, n, order=factorial(n), name=f"S{n}")

    @classmethod
    def alternating(cls, n: int) -> "PermGroup":
        if n < 3:
            return cls.trivial(n)
        gens = [Perm.from_cycles([[i, i + 1, i + 2]], n) for i in range(n - 2)]
        return cls(gens, n, order=factorial(n) // 2, name=f"A{n}")

    @classmethod
    def cyclic(cls, n: int) -> "PermGroup":
        if n == 1:
            return cls.trivial(1)
        return cls([Perm.from_cycles([list(range(n))], n)], n, order=n, name=f"C{n}")

    @classmethod
    def dihedral(cls, n: int) -> "PermGroup":
        """Dihedral group of order 2n on n points."""
        r = Perm.from_cycles([list(range(n))], n)
        s = Perm([(-i) % n for i in range(n)])
        return cls([r, s], n, order=2 * n, name=f"D{2 * n}")

    # -- chain ------------------------------------------------------
    @property
    def chain(self) -> StabChain:
        if self._chain is None:
            self._chain = StabChain(self.degree, self.gens, order=self._order)
            self._order = self._chain.order()
        return self._chain

    def chain_with_base(self, prefix: Sequence[int]) -> StabChain:
        """A new chain whose base starts with prefix (order is reused)."""
        return StabChain(self.degree, self.chain.strong_gens(), base=prefix, order=self.order())

    def order(self) -> int:
        if self._order is None:
            self.chain
        return self._order

    def __len__(self) -> int:  # pragma: no cover - convenience only
        return self.order()

    def contains(self, g: Perm) -> bool:
        return self.chain.contains(g)

    __contains__ = contains

    def contains_rows(self, rows: np.ndarray) -> np.ndarray:
        return self.chain.sift_many(rows)

    def is_trivial(self) -> bool:
        return not self.gens

    def identity(self) -> Perm:
        return Perm.identity(self.degree)

    def random_elements(self, seed: int = 0) -> RandomElements:
        return RandomElements(self.chain.strong_gens() or self.gens, self.degree, np.random.default_rng(seed))

    def uniform_random(self, rng: np.random.Generator) -> Perm:
        """Exactly uniform element from the transversal factorisation."""
        g = Perm.identity(self.degree)
        for lev in reversed(self.chain.levels):
            pt = lev.orbit[int(rng.integers(len(lev.orbit)))]
            g = g * lev.rep(pt)
        return g

    # -- orbits -----------------------------------------------------
    def orbit(self, pt: int) -> list[int]:
        seen = np.zeros(self.degree, dtype=bool)
        seen[pt] = True
        pts = [pt]
        idx = 0
        arrs = [g.a for g in self.gens]
        while idx < len(pts):
            p = pts[idx]
            for a in arrs:
                q = int(a[p])
                if not seen[q]:
                    seen[q] = True
                    pts.append(q)
            idx += 1
        return pts

    def orbits(self) -> list[list[int]]:
        return [o.points for o in orbit_partition(self.gens, self.degree)]

    def is_transitive(self, m: Optional[int] = None) -> bool:
        m = self.degree if m is None else m
        return len(self.orbit(0)) == m

    # -- subgroups --------------------------------------------------
    def stabilizer(self, pt: int) -> "PermGroup":
        return self.pointwise_stabilizer([pt])

    def pointwise_stabilizer(self, pts: Sequence[int]) -> "PermGroup":
        if not pts:
            return self
        ch = self.chain_with_base(list(pts))
        i = len(set(pts))
        o = 1
        for lev in ch.levels[i:]:
            o *= len(lev.orbit)
        return PermGroup(ch.level_gens(i), self.degree, order=o)

    def restrict(self, m: int, name: str = "") -> "PermGroup":
        """Group induced on the invariant set 0..m-1 (order not preserved)."""
        return PermGroup([g.restrict(m) for g in self.gens], m, name=name or self.name)

    def is_subgroup_of(self, other: "PermGroup") -> bool:
        return all(other.contains(g) for g in self.gens)

    def normalizes(self, other: "PermGroup") -> bool:
        """True if every generator of self normalizes other."""
        return all(other.contains(h.conj(g)) for g in self.gens for h in other.gens)

    def is_normal_in(self, other: "PermGroup") -> bool:
        return self.is_subgroup_of(other) and other.normalizes(self)

    def conjugate(self, g: Perm) -> "PermGroup":
        return PermGroup([h.conj(g) for h in self.gens], self.degree, order=self._order)

    def join(self, other: "PermGroup") -> "PermGroup":
        return PermGroup(self.gens + other.gens, self.degree)

    def same_as(self, other: "PermGroup") -> bool:
        return self.order() == other.order() and self.is_subgroup_of(other)

    def normal_closure(self, gens: Sequence[Perm]) -> "PermGroup":
        """Normal closure in self of the subgroup generated by gens."""
        cur = PermGroup([g for g in gens], self.degree)
        queue = list(cur.gens)
        while queue:
            h = queue.pop()
            for g in self.gens:
                c = h.conj(g)
                if not cur.contains(c):
                    cur = PermGroup(cur.gens + [c], self.degree)
                    queue.append(c)
        return cur

    def derived_subgroup(self) -> "PermGroup":
        comms = []
        for i, a in enumerate(self.gens):
            for b in self.gens[i + 1:]:
                c = (~a) * (~b) * a * b
                if not c.is_identity():
                    comms.append(c)
        return self.normal_closure(comms)

    def is_soluble(self) -> bool:
        cur = self
        while not cur.is_trivial():
            nxt = cur.derived_subgroup()
            if nxt.order() == cur.order():
                return False
            cur = nxt
        return True

    def is_abelian(self) -> bool:
        return all(a * b == b * a for i, a in enumerate(self.gens) for b in self.gens[i + 1:])

    # -- enumeration ------------------------------------------------
    def enumerable(self, limit: int = ENUM_LIMIT) -> bool:
        return self.order() <= limit

    def elements(self) -> "ElementTable":
        if self._elements is None:
            if self.order() > ENUM_LIMIT:
                raise Unknown(f"group of order {self.order()} exceeds enumeration limit")
            self._elements = ElementTable(self)
        return self._elements

    def search(self, prop, prune=None, base: Sequence[int] = (), first_only: bool = False,
               node_limit: Optional[int] = None, partial=None) -> "PermGroup":
        """Subgroup of elements satisfying prop (which must define a subgroup)."""
        ch = self.chain_with_base(base) if base else self.chain
        gens, complete = subgroup_search(ch, prop, prune, first_only=first_only, node_limit=node_limit,
                                         partial=partial)
        if not complete:
            raise Unknown("backtrack node limit reached")
        return PermGroup(gens, self.degree)

    def __repr__(self) -> str:
        label = self.name or "PermGroup"
        return f"<{label} degree={self.degree} gens={len(self.gens)}>"


class ElementTable:
    """All elements of an enumerable group as rows, indexed by base images."""

    def __init__(self, group: PermGroup):
        ch = group.chain
        self.group = group
        self.n = group.degree
        self.base = np.asarray(ch.base, dtype=np.int64)
        self.arr = ch.elements_array()
        self.size = self.arr.shape[0]
        self._radix_ok = self.n ** max(len(self.base), 1) < 2 ** 62
        keys = self._keys(self.arr)
        if self._radix_ok:
            self._order = np.argsort(keys, kind="stable")
            self._sorted = keys[self._order]
        else:
            self._dict = {k: i for i, k in enumerate(keys)}

    def _keys(self, rows: np.ndarray):
        imgs = rows[:, self.base].astype(np.int64)
        if self._radix_ok:
            key = np.zeros(rows.shape[0], dtype=np.int64)
            for j in range(imgs.shape[1] - 1, -1, -1):
                key = key * self.n + imgs[:, j]
            return key
        return [r.tobytes() for r in imgs]

    def index_rows(self, rows: np.ndarray) -> np.ndarray:
        """Indices of the given elements (which must lie in the group)."""
        rows = np.atleast_2d(rows)
        return self.index_from_base_images(rows[:, self.base])

    def index_from_base_images(self, imgs: np.ndarray) -> np.ndarray:
        """Indices of elements given by their images of the base points."""
        imgs = np.atleast_2d(imgs).astype(np.int64)
        if self._radix_ok:
            key = np.zeros(imgs.shape[0], dtype=np.int64)
            for j in range(imgs.shape[1] - 1, -1, -1):
                key = key * self.n + imgs[:, j]
            pos = np.searchsorted(self._sorted, key)
            pos = np.minimum(pos, self._sorted.size - 1)
            if not (self._sorted[pos] == key).all():
                raise KeyError("base images do not belong to the group")
            return self._order[pos]
        return np.asarray([self._dict[r.tobytes()] for r in imgs], dtype=np.int64)

    def index(self, g: Perm) -> int:
        return int(self.index_rows(g.a[None, :])[0])

    def perm(self, i: int) -> Perm:
        return Perm(self.arr[i], check=False)

    def identity_index(self) -> int:
        return self.index(Perm.identity(self.n))

    def __len__(self) -> int:
        return self.size


def subgroup_from_rows(rows: np.ndarray, degree: int, seed: int = 0) -> PermGroup:
    """A PermGroup generated by the given rows, assumed to form a subgroup."""
    size = rows.shape[0]
    rng = np.random.default_rng(seed)
    gens: list[Perm] = []
    H = PermGroup([], degree, order=1)
    order = rng.permutation(size)
    for i in order:
        if H.order() == size:
            break
        g = Perm(rows[i], check=False)
        if not H.contains(g):
            gens.append(g)
            H = PermGroup(gens, degree)
    if H.order() != size:
        raise ValueError("rows do not form a subgroup")
    return PermGroup(gens, degree, order=size)


def filter_subgroup(G: PermGroup, mask_fn, seed: int = 0) -> PermGroup:
    """Subgroup {g in G : mask_fn(rows) true}, for enumerable G."""
    E = G.elements()
    mask = mask_fn(E.arr)
    return subgroup_from_rows(E.arr[mask], G.degree, seed)


def intersection(A: PermGroup, B: PermGroup) -> PermGroup:
    small, big = (A, B) if A.order() <= B.order() else (B, A)
    if small.order() <= ENUM_LIMIT:
        return filter_subgroup(small, big.contains_rows)
    return small.search(lambda g: big.contains(g))


def centralizer(G: PermGroup, x: Perm) -> PermGroup:
    if G.order() <= ENUM_LIMIT:
        xa = x.a
        return filter_subgroup(G, lambda rows: (rows[:, xa] == xa[rows]).all(axis=1))
    lengths = np.zeros(G.degree, dtype=np.int64)
    for c in x.cycles(include_fixed=True):
        lengths[c] = len(c)
    ch = G.chain

    def prune(level, imgs):
        return lengths[imgs] == lengths[ch.levels[level].point]

    return G.search(lambda g: g * x == x * g, prune)


def core(S: PermGroup, X: PermGroup, contains_core: Optional[PermGroup] = None) -> PermGroup:
    """Largest normal subgroup of S inside X (X need not lie in S)."""
    if S.normalizes(X) and X.is_subgroup_of(S):
        return X
    cur = X
    if contains_core is not None and contains_core.order() < cur.order():
        cur = intersection(contains_core, X)
    elif all(g(0) == 0 for g in X.gens):
        # the core fixes 0, hence every point of its S-orbit
        kern = S.pointwise_stabilizer(S.orbit(0))
        if kern.order() < cur.order():
            cur = intersection(kern, X)
    while True:
        if cur.is_trivial():
            return cur
        changed = False
        for g in S.gens:
            conj = cur.conjugate(g)
            if not cur.is_subgroup_of(conj):
                nxt = intersection(cur, conj)
                if nxt.order() < cur.order():
                    cur = nxt
                    changed = True
        if not changed:
            return cur
