"""Finite groups as multiplication tables, with isomorphism and automorphism search."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .group import PermGroup
from .perm import Perm


class GroupTable:
    """A group on indices 0..n-1 with identity 0.

    ``mul[a, b]`` is the index of the product ab (a first, then b, matching
    the permutation convention).
    """

    def __init__(self, mul: np.ndarray, name: str = "", perms: Optional[np.ndarray] = None,
                 labels: Optional[list[str]] = None, check: bool = True):
        mul = np.asarray(mul, dtype=np.int32)
        n = mul.shape[0]
        if mul.shape != (n, n):
            raise ValueError("multiplication table must be square")
        if check:
            if not (mul[0] == np.arange(n)).all() or not (mul[:, 0] == np.arange(n)).all():
                raise ValueError("index 0 is not the identity")
        self.size = n
        self.mul = mul
        self.inv = np.argmax(mul == 0, axis=1).astype(np.int32)
        if check and not (mul[np.arange(n), self.inv] == 0).all():
            raise ValueError("some element has no inverse")
        self.name = name
        self.perms = perms
        self.labels = labels
        self._orders = None
        self._simple = None
        self._tree = None
        if check:
            self.check_associative()

    @property
    def identity(self) -> int:
        return 0

    def __len__(self) -> int:
        return self.size

    # -- construction -----------------------------------------------
    @classmethod
    def from_perm_group(cls, G: PermGroup, name: str = "") -> "GroupTable":
        E = G.elements()
        arr = E.arr
        ident = E.identity_index()
        order = np.arange(E.size)
        order[[0, ident]] = order[[ident, 0]]
        arr = arr[order]
        # position of old index in new numbering
        newpos = np.empty(E.size, dtype=np.int64)
        newpos[order] = np.arange(E.size)
        mul = np.empty((E.size, E.size), dtype=np.int32)
        for i in range(E.size):
            prod = arr[:, arr[i]]  # row j: e_i then e_j ... composed as e_i * e_j? see below
            # arr[j][arr[i]] applies e_i first, then e_j, i.e. the product e_i e_j
            mul[i] = newpos[E.index_rows(prod)]
        labels = None
        return cls(mul, name=name or G.name, perms=arr, labels=labels, check=False)

    def check_associative(self, samples: int = 10_000, seed: int = 0) -> None:
        n = self.size
        mul = self.mul
        if n <= 200:
            a = np.arange(n)
            left = mul[mul[a[:, None], a[None, :]][:, :, None], a[None, None, :]]
            right = mul[a[:, None, None], mul[a[:, None], a[None, :]][None, :, :]]
            ok = (left == right).all()
        else:
            rng = np.random.default_rng(seed)
            x, y, z = rng.integers(n, size=(3, samples))
            ok = (mul[mul[x, y], z] == mul[x, mul[y, z]]).all()
        if not ok:
            raise ValueError("table is not associative")

    # -- basic data -------------------------------------------------
    def orders(self) -> np.ndarray:
        if self._orders is None:
            n = self.size
            o = np.ones(n, dtype=np.int64)
            cur = np.arange(n)
            done = cur == 0
            k = 1
            while not done.all():
                k += 1
                cur = self.mul[cur, np.arange(n)]
                newly = (cur == 0) & ~done
                o[newly] = k
                done |= newly
            self._orders = o
        return self._orders

    def conj_perm(self, x: int) -> np.ndarray:
        """Index permutation t -> x^-1 t x."""
        return self.mul[self.mul[self.inv[x], :], x]

    def classes(self) -> list[np.ndarray]:
        lab = np.full(self.size, -1, dtype=np.int64)
        out = []
        gens = self.generators()
        conj = [self.conj_perm(g) for g in gens]
        for t in range(self.size):
            if lab[t] >= 0:
                continue
            cls_ = [t]
            lab[t] = len(out)
            i = 0
            while i < len(cls_):
                for c in conj:
                    y = int(c[cls_[i]])
                    if lab[y] < 0:
                        lab[y] = len(out)
                        cls_.append(y)
                i += 1
            out.append(np.asarray(sorted(cls_)))
        return out

    def closure(self, gens: Sequence[int]) -> np.ndarray:
        """Boolean mask of the subgroup generated by gens."""
        mask = np.zeros(self.size, dtype=bool)
        mask[0] = True
        elems = [0]
        i = 0
        while i < len(elems):
            for g in gens:
                y = int(self.mul[elems[i], g])
                if not mask[y]:
                    mask[y] = True
                    elems.append(y)
            i += 1
        return mask

    def generators(self) -> list[int]:
        """A small generating set (a pair when one is found quickly)."""
        if self._tree is not None:
            return list(self._tree[0])
        gens = generating_pair(self)
        if gens is None:
            gens = []
            mask = self.closure([])
            for t in range(1, self.size):
                if not mask[t]:
                    gens.append(t)
                    mask = self.closure(gens)
        self._tree = (gens, None)
        return list(gens)

    def is_simple(self) -> bool:
        if self._simple is None:
            self._simple = self.size > 1 and all(
                self.normal_closure([int(c[0])]).sum() == self.size for c in self.classes() if c[0] != 0
            )
        return self._simple

    def is_abelian(self) -> bool:
        return bool((self.mul == self.mul.T).all())

    def normal_closure(self, gens: Sequence[int]) -> np.ndarray:
        tg = self.generators()
        cur = list(gens)
        mask = self.closure(cur)
        changed = True
        while changed:
            changed = False
            for x in list(np.nonzero(mask)[0]):
                for g in tg:
                    y = int(self.mul[self.mul[self.inv[g], x], g])
                    if not mask[y]:
                        cur.append(y)
                        mask = self.closure(cur)
                        changed = True
        return mask

    def inner_automorphisms(self) -> np.ndarray:
        """Rows c_x for all x (t -> x^-1 t x), indexed by x."""
        n = self.size
        return self.mul[self.mul[self.inv[:, None], np.arange(n)[None, :]], np.arange(n)[:, None]]

    def is_automorphism(self, img: np.ndarray) -> bool:
        img = np.asarray(img)
        if img.shape != (self.size,) or len(set(img.tolist())) != self.size:
            return False
        if self.size <= 400:
            return bool((img[self.mul] == self.mul[img[:, None], img[None, :]]).all())
        gens = self.generators()
        return all((img[self.mul[:, g]] == self.mul[img, img[g]]).all() for g in gens)

    def __repr__(self) -> str:
        return f"<GroupTable {self.name or ''} order={self.size}>"


def generating_pair(T: GroupTable, seed: int = 0, tries: int = 2000) -> Optional[tuple[int, int]]:
    """A random pair generating T, verified by closure."""
    rng = np.random.default_rng(seed)
    n = T.size
    if n == 1:
        return None
    for _ in range(tries):
        t, s = (int(v) for v in rng.integers(1, n, size=2))
        if T.closure([t, s]).all():
            return t, s
    return None


class _Cayley:
    """BFS layering of T over a generator list, for vectorised map extension."""

    def __init__(self, T: GroupTable, gens: Sequence[int]):
        self.layers = []  # (children, parents, generator slot)
        seen = np.zeros(T.size, dtype=bool)
        seen[0] = True
        frontier = np.array([0])
        while frontier.size:
            ch, pa, sl = [], [], []
            for j, g in enumerate(gens):
                y = T.mul[frontier, g]
                for c, p in zip(y, frontier):
                    if not seen[c]:
                        seen[c] = True
                        ch.append(c)
                        pa.append(p)
                        sl.append(j)
            if ch:
                self.layers.append((np.array(ch), np.array(pa), np.array(sl)))
            frontier = np.array(ch, dtype=np.int64)
        self.complete = bool(seen.all())


def _extend(T1: GroupTable, T2: GroupTable, cay: _Cayley, gens: Sequence[int], imgs: Sequence[int]) -> Optional[np.ndarray]:
    """Extend gens -> imgs to a homomorphism T1 -> T2 if possible (bijective when sizes agree)."""
    img = np.full(T1.size, -1, dtype=np.int64)
    img[0] = 0
    gi = np.asarray(imgs)
    for ch, pa, sl in cay.layers:
        img[ch] = T2.mul[img[pa], gi[sl]]
    for g, h in zip(gens, imgs):
        if not (img[T1.mul[:, g]] == T2.mul[img, h]).all():
            return None
    return img


def _invariant(T: GroupTable, t, s):
    o = T.orders()
    m = T.mul
    return (o[t], o[s], o[m[t, s]], o[m[t, T.inv[s]]], o[m[m[t, s], m[t, T.inv[s]]]])


def _candidate_pairs(T1: GroupTable, T2: GroupTable, t: int, s: int):
    inv1 = _invariant(T1, t, s)
    o2 = T2.orders()
    ts = np.nonzero(o2 == inv1[0])[0]
    ss = np.nonzero(o2 == inv1[1])[0]
    if ts.size == 0 or ss.size == 0:
        return
    m = T2.mul
    for a in ts:
        prod = m[a, ss]
        ok = o2[prod] == inv1[2]
        if not ok.any():
            continue
        cand = ss[ok]
        q = m[a, T2.inv[cand]]
        ok2 = o2[q] == inv1[3]
        cand = cand[ok2]
        if cand.size == 0:
            continue
        r = m[m[a, cand], m[a, T2.inv[cand]]]
        cand = cand[o2[r] == inv1[4]]
        for b in cand:
            yield int(a), int(b)


def _best_pair(T: GroupTable, seed: int = 0, samples: int = 60) -> tuple[int, int]:
    """A generating pair with few invariant-matching candidates."""
    rng = np.random.default_rng(seed)
    o = T.orders()
    counts = np.bincount(o)
    best, best_cost = None, None
    found = 0
    for _ in range(20000):
        t, s = (int(v) for v in rng.integers(1, T.size, size=2))
        if not T.closure([t, s]).all():
            continue
        cost = counts[o[t]] * counts[o[s]]
        if best_cost is None or cost < best_cost:
            best, best_cost = (t, s), cost
        found += 1
        if found >= samples:
            break
    if best is None:
        raise ValueError("no generating pair found")
    return best


def find_isomorphism(T1: GroupTable, T2: GroupTable) -> Optional[np.ndarray]:
    """An isomorphism T1 -> T2 as an index array, or None. T1 must be 2-generated."""
    if T1.size != T2.size:
        return None
    if not np.array_equal(np.bincount(T1.orders(), minlength=T1.size + 1),
                          np.bincount(T2.orders(), minlength=T1.size + 1)):
        return None
    if T1.size == 1:
        return np.zeros(1, dtype=np.int64)
    try:
        t, s = _best_pair(T1)
    except ValueError:
        return _find_iso_general(T1, T2)
    cay = _Cayley(T1, [t, s])
    for a, b in _candidate_pairs(T1, T2, t, s):
        img = _extend(T1, T2, cay, [t, s], [a, b])
        if img is not None and len(np.unique(img)) == T1.size:
            return img
    return None


def _find_iso_general(T1: GroupTable, T2: GroupTable) -> Optional[np.ndarray]:
    """Isomorphism search for groups needing more than two generators (small only)."""
    gens = T1.generators()
    cay = _Cayley(T1, gens)
    o1, o2 = T1.orders(), T2.orders()
    pools = [np.nonzero(o2 == o1[g])[0] for g in gens]

    def rec(j, chosen):
        if j == len(gens):
            img = _extend(T1, T2, cay, gens, chosen)
            if img is not None and len(np.unique(img)) == T1.size:
                return img
            return None
        for c in pools[j]:
            r = rec(j + 1, chosen + [int(c)])
            if r is not None:
                return r
        return None

    return rec(0, [])


@dataclass
class AutGroup:
    table: GroupTable
    gens: list[np.ndarray]
    order: int
    group: PermGroup = field(repr=False)

    def orbit_count(self) -> int:
        return len(self.group.orbits())


def automorphism_group(T: GroupTable) -> AutGroup:
    """Aut(T) as a permutation group on the element indices of T."""
    t, s = _best_pair(T)
    cay = _Cayley(T, [t, s])
    n = T.size
    inn = [T.conj_perm(g) for g in (t, s)]
    gens = [Perm(c) for c in inn if not (c == np.arange(n)).all()]
    A = PermGroup(gens, n)
    covered = _pair_orbit(A, t, s, n)
    for a, b in _candidate_pairs(T, T, t, s):
        if a * n + b in covered:
            continue
        img = _extend(T, T, cay, [t, s], [a, b])
        if img is None or len(np.unique(img)) != n:
            continue
        gens.append(Perm(img))
        A = PermGroup(gens, n)
        covered = _pair_orbit(A, t, s, n)
    return AutGroup(T, [g.a for g in gens], A.order(), A)


def _pair_orbit(A: PermGroup, t: int, s: int, n: int) -> set[int]:
    start = t * n + s
    seen = {start}
    queue = [(t, s)]
    arrs = [g.a for g in A.gens]
    while queue:
        x, y = queue.pop()
        for a in arrs:
            k = int(a[x]) * n + int(a[y])
            if k not in seen:
                seen.add(k)
                queue.append((int(a[x]), int(a[y])))
    return seen


# -- named simple groups -----------------------------------------------

@lru_cache(maxsize=None)
def named_table(name: str) -> GroupTable:
    """Built-in tables: An (n >= 5), PSL27."""
    key = name.upper().replace("(", "").replace(")", "").replace(",", "").replace(" ", "")
    if key in ("PSL27", "PSL2_7", "L27", "L32", "PSL32"):
        G = PermGroup.from_strings(["(1 2 3 4 5 6 7)", "(3 5)(6 7)"], 7, name="PSL27")
        if G.order() != 168:
            raise AssertionError("PSL(2,7) generators give the wrong order")
        return GroupTable.from_perm_group(G, name="PSL27")
    if key.startswith("A") and key[1:].isdigit():
        m = int(key[1:])
        return GroupTable.from_perm_group(PermGroup.alternating(m), name=f"A{m}")
    if key.startswith("S") and key[1:].isdigit():
        m = int(key[1:])
        return GroupTable.from_perm_group(PermGroup.symmetric(m), name=f"S{m}")
    raise ValueError(f"unknown built-in group {name!r}")


def quotient_table(T: GroupTable, H: np.ndarray, N: np.ndarray) -> Optional[GroupTable]:
    """Table of H/N for masks H >= N (N normal in H), or None if not normal."""
    h_el = np.nonzero(H)[0]
    n_el = np.nonzero(N)[0]
    for x in h_el:
        if not N[T.mul[T.mul[T.inv[x], n_el], x]].all():
            return None
    label = np.full(T.size, -1, dtype=np.int64)
    reps = []
    for x in h_el:
        if label[x] < 0:
            label[T.mul[n_el, x]] = len(reps)
            reps.append(int(x))
    reps_a = np.asarray(reps)
    mul = label[T.mul[reps_a[:, None], reps_a[None, :]]]
    # identity coset is the one containing 0, which is labelled 0 since 0 is first in h_el
    return GroupTable(mul, check=False)


def all_subgroups(T: GroupTable, limit: int = 2000) -> list[np.ndarray]:
    """Every subgroup of T as a boolean mask (exhaustive; |T| <= limit)."""
    if T.size > limit:
        raise ValueError("subgroup enumeration beyond threshold")
    mul = T.mul
    cyc: dict[bytes, tuple[np.ndarray, int]] = {}
    for g in range(T.size):
        m = T.closure([g])
        k = np.packbits(m).tobytes()
        if k not in cyc:
            cyc[k] = (m, g)
    cyc_list = list(cyc.values())
    subs: dict[bytes, tuple[np.ndarray, list[int]]] = {}
    for k, (m, g) in cyc.items():
        subs[k] = (m, [g] if g else [])
    frontier = [subs[k] for k in subs]
    while frontier:
        new = []
        for mask, gens in frontier:
            h_el = np.nonzero(mask)[0]
            for cmask, c in cyc_list:
                if mask[c]:
                    continue
                K = mask.copy()
                reps = [0]
                allg = gens + [c]
                i = 0
                while i < len(reps):
                    r = reps[i]
                    for g in allg:
                        y = int(mul[r, g])
                        if not K[y]:
                            K[mul[h_el, y]] = True
                            reps.append(y)
                    i += 1
                key = np.packbits(K).tobytes()
                if key not in subs:
                    subs[key] = (K, allg)
                    new.append(subs[key])
        frontier = new
    return [m for m, _ in sorted(subs.values(), key=lambda v: int(v[0].sum()))]
