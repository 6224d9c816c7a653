"""Stabilizer chains (Schreier-Sims) and backtrack subgroup search."""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from .perm import Perm

# Explicit coset representatives are cached per level while
# orbit length * degree stays below this many entries.
MEMO_LIMIT = 4_000_000


class Level:
    """One level of a stabilizer chain: base point, generators, Schreier tree."""

    def __init__(self, point: int, n: int):
        self.point = point
        self.n = n
        self.gens: list[Perm] = []
        self.inv_gens: list[Perm] = []
        self.orbit: list[int] = [point]
        self.parent_gen = np.full(n, -2, dtype=np.int32)
        self.parent_pt = np.full(n, -1, dtype=np.int32)
        self.parent_gen[point] = -1
        self.pos = np.full(n, -1, dtype=np.int64)
        self.pos[point] = 0
        self._inv_stack = None
        ident = Perm.identity(n)
        self.reps: dict[int, Perm] = {point: ident}
        self.inv_reps: dict[int, Perm] = {point: ident}

    def __len__(self) -> int:
        return len(self.orbit)

    def in_orbit(self, pt: int) -> bool:
        return self.parent_gen[pt] != -2

    def add_gen(self, g: Perm) -> None:
        """Add a generator, extending the BFS tree without disturbing old links."""
        self.gens.append(g)
        self.inv_gens.append(~g)
        gi = len(self.gens) - 1
        old = len(self.orbit)
        # old points only need the new generator
        for idx in range(old):
            self._visit(self.orbit[idx], gi)
        idx = old
        while idx < len(self.orbit):
            p = self.orbit[idx]
            for j in range(len(self.gens)):
                self._visit(p, j)
            idx += 1

    def _visit(self, p: int, gi: int) -> None:
        q = int(self.gens[gi].a[p])
        if self.parent_gen[q] == -2:
            self.parent_gen[q] = gi
            self.parent_pt[q] = p
            self.pos[q] = len(self.orbit)
            self.orbit.append(q)
            self._inv_stack = None

    def _memo(self) -> bool:
        return len(self.orbit) * self.n <= MEMO_LIMIT

    def rep(self, pt: int) -> Perm:
        """Element u of this level's group with point^u = pt."""
        r = self.reps.get(pt)
        if r is not None:
            return r
        if self.parent_gen[pt] == -2:
            raise KeyError(pt)
        path = []
        p = pt
        while p not in self.reps:
            path.append(p)
            p = int(self.parent_pt[p])
        u = self.reps[p]
        memo = self._memo()
        for q in reversed(path):
            u = u * self.gens[self.parent_gen[q]]
            if memo:
                self.reps[q] = u
        return u

    def rep_inv(self, pt: int) -> Perm:
        r = self.inv_reps.get(pt)
        if r is not None:
            return r
        r = ~self.rep(pt)
        if self._memo():
            self.inv_reps[pt] = r
        return r

    def inv_stack(self) -> Optional[np.ndarray]:
        """Inverse coset representatives stacked in orbit order, if affordable."""
        if not self._memo():
            return None
        if self._inv_stack is None:
            self._inv_stack = np.stack([self.rep_inv(p).a for p in self.orbit])
        return self._inv_stack

    def reduce(self, g: Perm, pt: int) -> Perm:
        """Return g * rep(pt)^-1, where pt = point^g."""
        if self._memo():
            return g * self.rep_inv(pt)
        p = pt
        while p != self.point:
            g = g * self.inv_gens[self.parent_gen[p]]
            p = int(self.parent_pt[p])
        return g


class RandomElements:
    """Product replacement generator of (nearly) uniform random elements."""

    def __init__(self, gens: Sequence[Perm], n: int, rng: np.random.Generator, slots: int = 10, warmup: int = 60):
        gens = [g for g in gens] or [Perm.identity(n)]
        self.slots = [gens[i % len(gens)] for i in range(max(slots, len(gens)))]
        self.acc = Perm.identity(n)
        self.rng = rng
        for _ in range(warmup):
            self.next()

    def next(self) -> Perm:
        m = len(self.slots)
        i, j = self.rng.choice(m, size=2, replace=False)
        if self.rng.random() < 0.5:
            self.slots[i] = self.slots[i] * self.slots[j]
        else:
            self.slots[i] = self.slots[i] * ~self.slots[j]
        self.acc = self.acc * self.slots[i]
        return self.acc


class StabChain:
    def __init__(self, n: int, gens: Sequence[Perm], base: Sequence[int] = (), order: Optional[int] = None, seed: int = 0):
        self.n = n
        self.levels: list[Level] = []
        gens = [g for g in gens if not g.is_identity()]
        for b in base:
            if any(l.point == b for l in self.levels):
                continue
            self.levels.append(Level(int(b), n))
        for g in gens:
            if all(g(l.point) == l.point for l in self.levels):
                self.levels.append(Level(g.first_moved(), n))
        for idx, lev in enumerate(self.levels):
            pref = [l.point for l in self.levels[:idx]]
            for g in gens:
                if all(g(p) == p for p in pref):
                    lev.add_gen(g)
        if order is not None:
            self._random_build(gens, order, seed)
        else:
            self._deterministic_build()

    # -- construction -------------------------------------------------
    def _insert(self, h: Perm, lo: int, j: int) -> int:
        if j == len(self.levels):
            self.levels.append(Level(h.first_moved(), self.n))
        for l in range(lo, j + 1):
            self.levels[l].add_gen(h)
        return j

    def _deterministic_build(self) -> None:
        checked: list[set] = [set() for _ in self.levels]
        i = len(self.levels) - 1
        while i >= 0:
            lev = self.levels[i]
            restart = False
            for bi in range(len(lev.orbit)):
                beta = lev.orbit[bi]
                for si in range(len(lev.gens)):
                    if (bi, si) in checked[i]:
                        continue
                    s = lev.gens[si]
                    img = s(beta)
                    sg = lev.reduce(lev.rep(beta) * s, img)
                    if not sg.is_identity():
                        h, j = self.strip(sg, i + 1)
                        if j < len(self.levels) or not h.is_identity():
                            self._insert(h, i + 1, j)
                            while len(checked) < len(self.levels):
                                checked.append(set())
                            i = j
                            restart = True
                            break
                    checked[i].add((bi, si))
                if restart:
                    break
            if not restart:
                i -= 1

    def _random_build(self, gens: Sequence[Perm], order: int, seed: int) -> None:
        rng = np.random.default_rng(seed)
        rand = RandomElements(gens, self.n, rng)
        fails = 0
        while self.order() < order:
            g = rand.next()
            h, j = self.strip(g, 0)
            if j < len(self.levels) or not h.is_identity():
                self._insert(h, min(1, j), j)
                fails = 0
            else:
                fails += 1
                if fails > 2000:
                    raise RuntimeError("random Schreier-Sims stalled; is the stated order right?")
        if self.order() != order:
            raise ValueError(f"group order {self.order()} exceeds stated order {order}")

    # -- queries ------------------------------------------------------
    def order(self) -> int:
        o = 1
        for l in self.levels:
            o *= len(l.orbit)
        return o

    @property
    def base(self) -> list[int]:
        return [l.point for l in self.levels]

    def strip(self, g: Perm, start: int = 0) -> tuple[Perm, int]:
        for l in range(start, len(self.levels)):
            lev = self.levels[l]
            pt = g(lev.point)
            if not lev.in_orbit(pt):
                return g, l
            if pt != lev.point:
                g = lev.reduce(g, pt)
        return g, len(self.levels)

    def sift_many(self, rows: np.ndarray, chunk: int = 1 << 16) -> np.ndarray:
        """Membership mask for a batch of permutations given as image rows."""
        rows = np.asarray(rows, dtype=np.int32)
        if rows.ndim == 1:
            rows = rows[None, :]
        out = np.empty(rows.shape[0], dtype=bool)
        ident = np.arange(self.n, dtype=np.int32)
        step = max(1, min(chunk, 20_000_000 // max(self.n, 1)))
        for lo in range(0, rows.shape[0], step):
            cur = rows[lo:lo + step]
            ok = np.ones(cur.shape[0], dtype=bool)
            for lev in self.levels:
                pos = lev.pos[cur[:, lev.point]]
                ok &= pos >= 0
                pos = np.where(pos < 0, 0, pos)
                stack = lev.inv_stack()
                if stack is None:
                    res = []
                    for r, p in zip(cur, pos):
                        res.append(lev.reduce(Perm(r, check=False), lev.orbit[int(p)]).a)
                    cur = np.stack(res) if res else cur
                else:
                    cur = stack[pos[:, None], cur]
            ok &= (cur == ident).all(axis=1)
            out[lo:lo + step] = ok
        return out

    def contains(self, g: Perm) -> bool:
        if g.degree != self.n:
            return False
        h, j = self.strip(g)
        return j == len(self.levels) and h.is_identity()

    def strong_gens(self) -> list[Perm]:
        out, seen = [], set()
        for l in self.levels:
            for g in l.gens:
                if g.key() not in seen:
                    seen.add(g.key())
                    out.append(g)
        return out

    def level_gens(self, i: int) -> list[Perm]:
        """Generators of the pointwise stabilizer of the first i base points."""
        if i >= len(self.levels):
            return []
        return list(self.levels[i].gens)

    def elements_array(self) -> np.ndarray:
        """All elements as rows of an image array (caller checks the size)."""
        rows = np.arange(self.n, dtype=np.int32)[None, :]
        for lev in reversed(self.levels):
            reps = np.stack([lev.rep(p).a for p in lev.orbit])
            # element = (deeper part) * rep, i.e. rep.a[deeper]
            rows = reps[:, rows].reshape(-1, self.n)
        return rows


def subgroup_search(
    chain: StabChain,
    prop: Callable[[Perm], bool],
    prune: Optional[Callable[[int, np.ndarray], np.ndarray]] = None,
    known: Sequence[Perm] = (),
    first_only: bool = False,
    node_limit: Optional[int] = None,
    partial: Optional[Callable[[int, Perm], bool]] = None,
) -> tuple[list[Perm], bool]:
    """Generators of {g in G : prop(g)}, assuming this set is a subgroup.

    ``prune(level, candidates)`` receives candidate images of the base point
    of ``level`` and returns a boolean mask of those worth exploring; it must
    never reject an image realised by an element with the property.
    ``partial(level, s)`` sees the partial product on entering ``level``; every
    element below it has the form h*s with h fixing the first ``level`` base points.
    With ``first_only`` the search stops at the first nontrivial element.
    Returns (generators, complete); complete is False if node_limit was hit.
    """
    n = chain.n
    levels = chain.levels
    m = len(levels)
    found: list[Perm] = [g for g in known]
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def absorb(g: Perm):
        a = g.a
        for x in range(n):
            y = int(a[x])
            if y != x:
                rx, ry = find(x), find(y)
                if rx != ry:
                    parent[max(rx, ry)] = min(rx, ry)

    for g in found:
        absorb(g)
    nodes = [0]
    orbit_arrays = [np.asarray(l.orbit, dtype=np.int32) for l in levels]

    class _Stop(Exception):
        pass

    def dfs(j: int, s: Perm) -> Optional[Perm]:
        if partial is not None and not partial(j, s):
            return None
        if j == m:
            return s if prop(s) else None
        nodes[0] += 1
        if node_limit is not None and nodes[0] > node_limit:
            raise _Stop
        lev = levels[j]
        if len(lev.orbit) == 1:
            return dfs(j + 1, s)
        orb = orbit_arrays[j]
        imgs = s.a[orb]
        if prune is not None:
            mask = prune(j, imgs)
            cand = orb[mask]
        else:
            cand = orb
        for d in cand:
            r = dfs(j + 1, lev.rep(int(d)) * s)
            if r is not None:
                return r
        return None

    complete = True
    try:
        for l in range(m - 1, -1, -1):
            lev = levels[l]
            if len(lev.orbit) == 1:
                continue
            beta = lev.point
            orb = orbit_arrays[l]
            if prune is not None:
                cand = orb[prune(l, orb)]
            else:
                cand = orb
            # one candidate per orbit of the subgroup found so far: a failed
            # image rules out its whole orbit, a found one joins beta's orbit
            failed: list[int] = []
            failed_roots: set[int] = set()
            for g in cand:
                g = int(g)
                r = find(g)
                if r == find(beta) or r in failed_roots:
                    continue
                el = dfs(l + 1, lev.rep(g))
                if el is not None:
                    found.append(el)
                    absorb(el)
                    if first_only:
                        return found, True
                    failed_roots = {find(x) for x in failed}
                else:
                    failed.append(g)
                    failed_roots.add(r)
    except _Stop:
        complete = False
    return found, complete
