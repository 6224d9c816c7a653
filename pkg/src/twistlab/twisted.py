"""Twisted wreath products T twr_phi P and their action on the base group B.

Points of P's coordinate domain are 0..k-1 (text point 1 is 0); P may
carry extra points k..n_P-1 so that groups acting unfaithfully on the
coordinates can be represented. Elements of B are length-k arrays of T
indices, f[i] standing for f(a_i).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from .chain import RandomElements, StabChain
from .group import ENUM_LIMIT, PermGroup, Unknown, core, orbit_partition
from .grouptable import GroupTable, find_isomorphism, generating_pair
from .perm import Perm

PhiSpec = Union[str, Sequence[tuple[Perm, np.ndarray]]]

# Exhaustive homomorphism check for |Q| up to this size.
PHI_EXHAUSTIVE = 10_000


class TwistError(ValueError):
    pass


@dataclass
class GElement:
    b: np.ndarray
    p: Perm


class TwistData:
    """The datum (T, P, Q, phi, transversal, U, V) with validity flags."""

    def __init__(self, T: GroupTable, P: PermGroup, k: int, q_gens: list[Perm], phi_gens: list[np.ndarray],
                 transversal: list[Perm], name: str = "", meta: Optional[dict] = None, seed: int = 0):
        self.T = T
        self.P = P
        self.k = k
        self.nP = P.degree
        self.name = name
        self.meta = dict(meta or {})
        self.seed = seed
        self.q_gens = q_gens
        self.phi_gens = [np.asarray(a, dtype=np.int64) for a in phi_gens]
        self.transversal = transversal
        self.transversal_inv = [~a for a in transversal]
        self.Q = PermGroup(q_gens, self.nP, order=P.order() // k)
        self._phi_cache: dict[bytes, np.ndarray] = {}
        self._gamma: Optional[StabChain] = None
        self._table = None
        self._lifted = None
        self.U: PermGroup
        self.V: PermGroup
        self.faithful_top = False
        self.qp_valid = False

    # -- sizes ------------------------------------------------------
    @property
    def n_T(self) -> int:
        return self.T.size

    def order(self) -> int:
        return self.T.size ** self.k * self.P.order()

    def B_size(self) -> int:
        return self.T.size ** self.k

    # -- phi ----------------------------------------------------------
    def gamma_gens(self) -> list[Perm]:
        nP = self.nP
        out = []
        for q, a in zip(self.q_gens, self.phi_gens):
            out.append(Perm(np.concatenate([q.a, a + nP]), check=False))
        return out

    def gamma(self) -> StabChain:
        """Chain of the graph group {(q, phi(q))} with base inside the Q-part."""
        if self._gamma is None:
            self._gamma = StabChain(self.nP + self.T.size, self.gamma_gens(), base=self.Q.chain.base,
                                    order=self.Q.order(), seed=self.seed)
        return self._gamma

    def phi(self, q: Perm) -> np.ndarray:
        """phi(q) as an index array on T (t -> t^phi(q))."""
        key = q.key()
        r = self._phi_cache.get(key)
        if r is not None:
            return r
        g = Perm(np.concatenate([q.a, np.arange(self.nP, self.nP + self.T.size, dtype=np.int32)]), check=False)
        h, j = self.gamma().strip(g)
        if j != len(self.gamma().levels) or not (h.a[:self.nP] == np.arange(self.nP)).all():
            raise TwistError("element is not in Q")
        res = h.a[self.nP:] - self.nP
        out = np.empty(self.T.size, dtype=np.int64)
        out[res] = np.arange(self.T.size)
        if len(self._phi_cache) < 200_000:
            self._phi_cache[key] = out
        return out

    def phi_table(self) -> np.ndarray:
        """phi of every element of Q, rows ordered as Q.elements()."""
        E = self.Q.elements()
        rows = self.gamma().elements_array()
        idx = E.index_rows(rows[:, :self.nP])
        out = np.empty((E.size, self.T.size), dtype=np.int64)
        out[idx] = rows[:, self.nP:] - self.nP
        return out

    # -- cocycle and actions ---------------------------------------
    def check_in_P(self, x: Perm) -> None:
        if x.degree != self.nP or not self.P.contains(x):
            raise TwistError("element is not in P")

    def cocycle(self, x: Perm, i: int) -> Perm:
        """q_{x,i} = a_i^-1 x a_{i^x}, an element of Q."""
        return self.transversal_inv[i] * x * self.transversal[x(i)]

    def x_data(self, x: Perm) -> tuple[np.ndarray, np.ndarray]:
        """(images of 0..k-1 under x, stacked phi(q_{x,i}))."""
        img = x.a[:self.k].astype(np.int64)
        auts = np.stack([self.phi(self.cocycle(x, i)) for i in range(self.k)])
        return img, auts

    def act_P(self, f: np.ndarray, x: Perm) -> np.ndarray:
        img, auts = self.x_data(x)
        return _apply(f, img, auts)

    def act_G(self, f: np.ndarray, g: GElement) -> np.ndarray:
        return self.act_P(self.T.mul[np.asarray(f), np.asarray(g.b)], g.p)

    def g_mul(self, g1: GElement, g2: GElement) -> GElement:
        shifted = self.act_P(np.asarray(g2.b), ~g1.p)
        return GElement(self.T.mul[np.asarray(g1.b), shifted], g1.p * g2.p)

    def g_inv(self, g: GElement) -> GElement:
        return GElement(self.act_P(self.T.inv[np.asarray(g.b)], g.p), ~g.p)

    def g_identity(self) -> GElement:
        return GElement(np.zeros(self.k, dtype=np.int64), Perm.identity(self.nP))

    def identity_vector(self) -> np.ndarray:
        return np.zeros(self.k, dtype=np.int64)

    # -- fixed points ------------------------------------------------
    def holonomies(self, x: Perm) -> list[tuple[list[int], np.ndarray]]:
        """For each <x>-cycle on 0..k-1: (cycle from its least point, holonomy)."""
        img, auts = self.x_data(x)
        seen = np.zeros(self.k, dtype=bool)
        out = []
        for i in range(self.k):
            if seen[i]:
                continue
            cyc = [i]
            seen[i] = True
            hol = auts[i].copy()
            j = int(img[i])
            while j != i:
                seen[j] = True
                cyc.append(j)
                hol = auts[j][hol]
                j = int(img[j])
            out.append((cyc, hol))
        return out

    def fix_count(self, x: Perm) -> int:
        total = 1
        for _, hol in self.holonomies(x):
            total *= int((hol == np.arange(self.T.size)).sum())
        return total

    def fix_elements(self, x: Perm) -> Iterator[np.ndarray]:
        img, auts = self.x_data(x)
        cycles = self.holonomies(x)
        choices = [np.nonzero(hol == np.arange(self.T.size))[0] for _, hol in cycles]
        for pick in product(*choices):
            f = np.zeros(self.k, dtype=np.int64)
            for (cyc, _), t in zip(cycles, pick):
                val = int(t)
                for j in cyc:
                    f[j] = val
                    val = int(auts[j][val])
            yield f

    # -- element tables ----------------------------------------------
    def action_table(self) -> "ActionTable":
        if self._table is None:
            self._table = ActionTable(self)
        return self._table

    def lifted(self) -> "LiftedAction":
        if self._lifted is None:
            self._lifted = LiftedAction(self)
        return self._lifted

    def summary(self) -> dict:
        return {
            "name": self.name,
            "T": self.T.name or f"order {self.T.size}",
            "T_order": self.T.size,
            "k": self.k,
            "P_order": self.P.order(),
            "Q_order": self.Q.order(),
            "U_order": self.U.order(),
            "V_order": self.V.order(),
            "G_order": self.order(),
            "faithful_top": self.faithful_top,
            "qp_valid": self.qp_valid,
        }

    def __repr__(self) -> str:
        return f"<TwistData {self.name} |T|={self.T.size} k={self.k} |P|={self.P.order()}>"


def _apply(f: np.ndarray, img: np.ndarray, auts: np.ndarray) -> np.ndarray:
    f = np.asarray(f)
    out = np.empty_like(f)
    out[..., img] = auts[np.arange(img.size), f]
    return out


# -- construction ------------------------------------------------------

def canonical_transversal(P: PermGroup, k: Optional[int] = None) -> list[Perm]:
    """a_i with i^{a_i} = 0, inverses of BFS Schreier-tree words from 0."""
    k = P.degree if k is None else k
    gens = [g.restrict(k) for g in P.gens] if k != P.degree else P.gens
    tree = orbit_partition(gens, k)[0]
    if len(tree.points) != k:
        raise TwistError("P is not transitive on its coordinate domain")
    out = [None] * k
    for i in tree.points:
        out[i] = ~tree.element(i, P.gens, P.degree)
    return out


def build(T: GroupTable, P: PermGroup, phi: PhiSpec, k: Optional[int] = None,
          transversal: Optional[Sequence[Perm]] = None, name: str = "", meta: Optional[dict] = None,
          q_gens: Optional[Sequence[Perm]] = None, seed: int = 0, check_core: bool = True) -> TwistData:
    """Validate and assemble a twisted wreath datum."""
    if T.is_abelian() or not T.is_simple():
        raise TwistError("T must be non-abelian simple")
    k = P.degree if k is None else k
    if k < 2:
        raise TwistError("need k >= 2")
    for g in P.gens:
        if g.a[:k].max(initial=0) >= k:
            raise TwistError("points 0..k-1 are not invariant under P")
    if transversal is None:
        transversal = canonical_transversal(P, k)
    else:
        transversal = list(transversal)
        for i, a in enumerate(transversal):
            if a(i) != 0 or not P.contains(a):
                raise TwistError(f"transversal element {i + 1} does not map {i + 1} to 1")
    Qstab = P.stabilizer(0)
    if isinstance(phi, str):
        if phi == "trivial":
            gens = list(q_gens) if q_gens is not None else Qstab.gens
            pairs = [(q, np.arange(T.size)) for q in gens]
        elif phi == "conjugation":
            pairs = conjugation_phi(T, Qstab)
        else:
            raise TwistError(f"unknown phi rule {phi!r}")
    else:
        pairs = [(q, np.asarray(a)) for q, a in phi]
    for q, a in pairs:
        if q.degree != P.degree or q(0) != 0 or not P.contains(q):
            raise TwistError(f"phi generator {q} is not in the point stabilizer")
        if not T.is_automorphism(a):
            raise TwistError(f"image of {q} is not an automorphism of T")
    if PermGroup([q for q, _ in pairs], P.degree).order() != Qstab.order():
        raise TwistError("phi generators do not generate the point stabilizer")
    D = TwistData(T, P, k, [q for q, _ in pairs], [a for _, a in pairs], list(transversal), name, meta, seed)
    _check_homomorphism(D)
    _compute_UV(D)
    kern = P.pointwise_stabilizer(list(range(k)))
    D.faithful_top = kern.is_trivial() or kern.order() == 1
    D.core_top = kern
    cV = PermGroup.trivial(P.degree) if D.faithful_top else core(P, D.V, contains_core=kern)
    D.qp_valid = cV.order() == 1
    if check_core and not D.qp_valid:
        raise TwistError(f"core of V in P is nontrivial (order {cV.order()}, generators {cV.gens})")
    return D


def perfect_core(G: PermGroup) -> PermGroup:
    cur = G
    while True:
        nxt = cur.derived_subgroup()
        if nxt.order() == cur.order():
            return cur
        cur = nxt


def conjugation_phi(T: GroupTable, Q: PermGroup) -> list[tuple[Perm, np.ndarray]]:
    """phi(q) = conjugation by q on a normal subgroup of Q isomorphic to T.

    The normal subgroup is taken to be the last term of the derived series
    of Q, identified with T by an isomorphism search.
    """
    A = perfect_core(Q)
    if A.order() != T.size:
        raise TwistError(f"Q has no perfect normal subgroup of order {T.size} (found {A.order()})")
    TA = GroupTable.from_perm_group(A)
    iso = find_isomorphism(TA, T)
    if iso is None:
        raise TwistError("the perfect core of Q is not isomorphic to T")
    pos = {r.tobytes(): j for j, r in enumerate(TA.perms.astype(np.int32))}
    pairs = []
    for q in Q.gens:
        qa = q.a
        qi = (~q).a
        conj = qa[TA.perms[:, qi]].astype(np.int32)  # row for q^-1 r q
        sigma = np.array([pos[r.tobytes()] for r in conj])
        aut = np.empty(T.size, dtype=np.int64)
        aut[iso] = iso[sigma]
        pairs.append((q, aut))
    return pairs


def _check_homomorphism(D: TwistData) -> None:
    nQ = D.Q.order()
    if nQ <= PHI_EXHAUSTIVE:
        G = PermGroup(D.gamma_gens(), D.nP + D.T.size)
        if G.order() != nQ:
            kern = G.pointwise_stabilizer(D.Q.chain.base)
            w = kern.gens[0] if kern.gens else None
            raise TwistError(f"phi is not a homomorphism: a relation of Q maps to the automorphism {w}")
        return
    # randomized check: random elements of the graph group must sift
    rng = np.random.default_rng(D.seed)
    rand = RandomElements(D.gamma_gens(), D.nP + D.T.size, rng)
    ch = D.gamma()
    for _ in range(200):
        g = rand.next()
        h, j = ch.strip(g)
        if j != len(ch.levels) or not h.is_identity():
            raise TwistError("phi is not a homomorphism (randomized graph-group check)")


def _compute_UV(D: TwistData) -> None:
    T = D.T
    nP, nT = D.nP, T.size
    pair = generating_pair(T)
    t, s = pair
    ch = StabChain(nP + nT, D.gamma().strong_gens(), base=[nP + t, nP + s], order=D.Q.order(), seed=D.seed)
    u_gens = [Perm(g.a[:nP].copy(), check=False) for g in ch.level_gens(2)]
    u_order = D.Q.order() // (len(ch.levels[0]) * len(ch.levels[1]))
    D.U = PermGroup(u_gens, nP, order=u_order)
    # phi(Q) as a permutation group on T, and its inner part
    img = PermGroup([Perm(a) for a in D.phi_gens], nT)
    inner_key = {}
    conj = T.inner_automorphisms()
    for x in range(nT):
        inner_key[(int(conj[x, t]), int(conj[x, s]))] = x
    inner_elems = []
    if img.order() <= ENUM_LIMIT:
        E = img.elements()
        for r in E.arr:
            if (int(r[t]), int(r[s])) in inner_key:
                inner_elems.append(r)
    else:
        raise Unknown("phi(Q) too large to enumerate")
    D.phiQ_order = img.order()
    D.inner_in_phiQ = len(inner_elems)
    lifts = []
    Hgrp = PermGroup([], nT, order=1)
    rng = np.random.default_rng(D.seed)
    for i in rng.permutation(len(inner_elems)):
        if Hgrp.order() == len(inner_elems):
            break
        a = Perm(inner_elems[i], check=False)
        if Hgrp.contains(a):
            continue
        Hgrp = PermGroup(Hgrp.gens + [a], nT)
        lifts.append(_lift(ch, nP, nT, a, t, s))
    D.V = PermGroup(u_gens + lifts, nP, order=u_order * len(inner_elems))


def _lift(ch: StabChain, nP: int, nT: int, a: Perm, t: int, s: int) -> Perm:
    """An element q of Q with phi(q) = a, from the chain based at (t, s)."""
    l0, l1 = ch.levels[0], ch.levels[1]
    h = l0.rep(nP + a(t))
    target = nP + a(s)
    hinv = ~h
    x = l1.rep(hinv(target))
    g = x * h
    return Perm(g.a[:nP].copy(), check=False)


# -- vectorised action over all of P -----------------------------------

class ActionTable:
    """perm_img[x, i] = i^x and aut index q_idx[x, i] for every x in P."""

    def __init__(self, D: TwistData):
        if D.P.order() > ENUM_LIMIT or D.P.order() * D.k > 50_000_000:
            raise Unknown("P too large for an action table")
        self.D = D
        E = D.P.elements()
        self.E = E
        k = D.k
        self.perm_img = E.arr[:, :k].astype(np.int64)
        QE = D.Q.elements()
        self.auts = D.phi_table()
        A = np.stack([a.a for a in D.transversal]).astype(np.int64)
        Ainv = np.stack([a.a for a in D.transversal_inv]).astype(np.int64)
        qbase = QE.base
        N = E.size
        q_idx = np.empty((N, k), dtype=np.int64)
        if len(qbase) == 0:
            q_idx[:] = QE.identity_index()
        step = max(1, 2_000_000 // max(k * max(len(qbase), 1), 1))
        for lo in range(0, N if len(qbase) else 0, step):
            X = E.arr[lo:lo + step].astype(np.int64)
            img = self.perm_img[lo:lo + step]
            cols = []
            for beta in qbase:
                c = Ainv[:, beta]  # (k,)
                xv = X[:, c]  # (n, k)
                cols.append(A[img, xv])
            imgs = np.stack(cols, axis=-1) if cols else np.zeros(img.shape + (0,), dtype=np.int64)
            q_idx[lo:lo + step] = QE.index_from_base_images(imgs.reshape(-1, len(qbase))).reshape(img.shape)
        self.q_idx = q_idx
        self.identity_index = E.identity_index()

    def fixed_mask(self, f: np.ndarray, rows: Optional[np.ndarray] = None) -> np.ndarray:
        """Which elements of P (optionally a subset of indices) fix the vector f."""
        f = np.asarray(f)
        pi = self.perm_img if rows is None else self.perm_img[rows]
        qi = self.q_idx if rows is None else self.q_idx[rows]
        return (self.auts[qi, f[None, :]] == f[pi]).all(axis=1)

    def stabilizer_mask(self, F: Sequence[np.ndarray]) -> np.ndarray:
        mask = np.ones(self.E.size, dtype=bool)
        for f in F:
            idx = np.nonzero(mask)[0]
            mask[idx] = self.fixed_mask(f, idx)
        return mask

    def nontrivial_fixer(self, F: np.ndarray, candidates: np.ndarray) -> np.ndarray:
        """For a batch of vectors F (M x k): is some candidate element fixing it?"""
        F = np.atleast_2d(F)
        M = F.shape[0]
        out = np.zeros(M, dtype=bool)
        k = self.D.k
        chunk = max(1, 4_000_000 // max(candidates.size, 1))
        for lo in range(0, M, chunk):
            Fb = F[lo:lo + chunk]
            m = Fb.shape[0]
            fi = np.repeat(np.arange(m), candidates.size)
            xi = np.tile(candidates, m)
            alive = np.ones(fi.size, dtype=bool)
            for i in range(k):
                if not alive.any():
                    break
                a = np.nonzero(alive)[0]
                fa, xa = fi[a], xi[a]
                ok = self.auts[self.q_idx[xa, i], Fb[fa, i]] == Fb[fa, self.perm_img[xa, i]]
                alive[a[~ok]] = False
            hit = np.zeros(m, dtype=bool)
            hit[fi[alive]] = True
            out[lo:lo + chunk] = hit
        return out


# -- lifted action on k x T ------------------------------------------

class LiftedAction:
    """P acting faithfully on k*|T| points by (i, t) -> (i^x, t^phi(q_{x,i})).

    A vector f corresponds to the set {(i, f[i])}; its stabilizer in P is the
    set-stabilizer of that set, found by backtrack search.
    """

    def __init__(self, D: TwistData):
        self.D = D
        nT = D.T.size
        self.n = D.k * nT
        gens = []
        for x in D.P.gens:
            img, auts = D.x_data(x)
            a = (img[:, None] * nT + auts).reshape(-1)
            gens.append(Perm(a, check=False))
        self.gens = gens
        self.group = PermGroup(gens, self.n, order=D.P.order())
        self._graph: Optional[StabChain] = None

    def lift(self, x: Perm) -> Perm:
        nT = self.D.T.size
        img, auts = self.D.x_data(x)
        return Perm((img[:, None] * nT + auts).reshape(-1), check=False)

    def to_P(self, L: Perm) -> Perm:
        nP = self.D.nP
        if self._graph is None:
            gg = [Perm(np.concatenate([x.a, l.a + nP]), check=False) for x, l in zip(self.D.P.gens, self.gens)]
            base = [nP + b for b in self.group.chain.base]
            self._graph = StabChain(nP + self.n, gg, base=base, order=self.D.P.order(), seed=self.D.seed)
        g = Perm(np.concatenate([np.arange(nP, dtype=np.int32), L.a + nP]), check=False)
        h, _ = self._graph.strip(g)
        if not (h.a[nP:] == np.arange(nP, nP + self.n)).all():
            raise TwistError("lifted permutation not in the lifted group")
        return ~Perm(h.a[:nP].copy(), check=False)

    def colors(self, F: Sequence[np.ndarray]) -> np.ndarray:
        nT = self.D.T.size
        col = np.zeros(self.n, dtype=np.int64)
        for j, f in enumerate(F):
            col[np.arange(self.D.k) * nT + np.asarray(f)] += 1 << j
        return col

    def stabilizer(self, F: Sequence[np.ndarray], first_only: bool = False) -> list[Perm]:
        """Generators (as lifted permutations) of the stabilizer of every f in F."""
        from .search import coloring_stabilizer

        return coloring_stabilizer(self.group, self.colors(F), first_only=first_only).gens


# -- explicit permutation action of G on B --------------------------

@dataclass
class ExplicitAction:
    group: PermGroup
    vectors: np.ndarray
    p_gens: list[Perm]
    b_gens: list[Perm]

    def encode(self, F: np.ndarray, nT: int) -> np.ndarray:
        F = np.atleast_2d(F)
        w = nT ** np.arange(F.shape[1], dtype=np.int64)
        return F @ w


def all_vectors(D: TwistData) -> np.ndarray:
    nT, k = D.T.size, D.k
    if nT ** k > ENUM_LIMIT:
        raise Unknown("B too large to enumerate")
    idx = np.arange(nT ** k, dtype=np.int64)
    out = np.empty((idx.size, k), dtype=np.int64)
    for i in range(k):
        out[:, i] = idx % nT
        idx = idx // nT
    return out


def explicit_action(D: TwistData) -> ExplicitAction:
    """G as a permutation group on B (|B| <= 10^6), vectors coded in radix |T|."""
    F = all_vectors(D)
    nT, k = D.T.size, D.k
    w = nT ** np.arange(k, dtype=np.int64)
    p_gens = []
    for x in D.P.gens:
        img, auts = D.x_data(x)
        out = np.empty_like(F)
        out[:, img] = auts[np.arange(k)[None, :], F]
        p_gens.append(Perm((out @ w).astype(np.int32), check=False))
    b_gens = []
    for t in D.T.generators():
        out = F.copy()
        out[:, 0] = D.T.mul[F[:, 0], t]
        b_gens.append(Perm((out @ w).astype(np.int32), check=False))
    G = PermGroup(p_gens + b_gens, F.shape[0], order=D.order())
    return ExplicitAction(G, F, p_gens, b_gens)
