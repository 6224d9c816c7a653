"""Example families of twisted wreath products."""

from __future__ import annotations

from typing import Iterator, Optional

import numpy as np

from .group import PermGroup
from .grouptable import GroupTable, automorphism_group, named_table
from .perm import Perm
from .twisted import TwistData, TwistError, build

DIAGONAL_LIMIT = 360


def family_trivial_phi(T: GroupTable, P: PermGroup, name: str = "", seed: int = 0) -> TwistData:
    """T twr P with trivial phi: the product-action wreath T wr P."""
    label = name or f"trivial-phi({T.name},{P.name or P.degree})"
    return build(T, P, "trivial", name=label, meta={"family": "trivial-phi"}, seed=seed)


def perm_conjugation_aut(T: GroupTable, g: Perm) -> np.ndarray:
    """t -> g^-1 t g on a table built from a permutation group normalised by g."""
    if T.perms is None:
        raise TwistError("table has no permutation representation")
    pos = {r.tobytes(): j for j, r in enumerate(T.perms.astype(np.int32))}
    rows = g.a[T.perms[:, (~g).a]].astype(np.int32)
    try:
        return np.array([pos[r.tobytes()] for r in rows], dtype=np.int64)
    except KeyError:
        raise TwistError("g does not normalise T") from None


def family_nonfaithful_top(n: int, R: PermGroup, seed: int = 0) -> TwistData:
    """A_n twr (<z> x R) with z an involution fixing the coordinates.

    z swaps two extra points appended after R's domain, phi(z) is conjugation
    by a transposition and phi is trivial on R_1.
    """
    if n < 5:
        raise TwistError("A_n is simple only for n >= 5")
    T = named_table(f"A{n}")
    k = R.degree
    z = Perm.from_cycles([[k, k + 1]], k + 2)
    P = PermGroup([g.extend(k + 2) for g in R.gens] + [z], k + 2, order=2 * R.order(),
                  name=f"2x{R.name or k}")
    tau = perm_conjugation_aut(T, Perm.from_cycles([[0, 1]], n))
    pairs = [(z, tau)] + [(g.extend(k + 2), np.arange(T.size)) for g in R.stabilizer(0).gens]
    return build(T, P, pairs, k=k, name=f"nonfaithful(A{n},{R.name or k})",
                 meta={"family": "nonfaithful"}, seed=seed)


def diagonal_group(T: GroupTable) -> PermGroup:
    """T^2.(Out(T) x 2) on the |T| elements of T: t -> a^-1 t b, inversion, automorphisms."""
    n = T.size
    idx = np.arange(n)
    gens = []
    for a in T.generators():
        gens.append(Perm(T.mul[T.inv[a], idx], check=False))
        gens.append(Perm(T.mul[idx, a], check=False))
    gens.append(Perm(T.inv, check=False))
    A = automorphism_group(T)
    inner = T.inner_automorphisms()
    inner_keys = {r.tobytes() for r in inner.astype(np.int64)}
    for g in A.gens:
        if np.asarray(g, dtype=np.int64).tobytes() not in inner_keys:
            gens.append(Perm(g, check=False))
    order = n * A.order * 2
    return PermGroup(gens, n, order=order, name=f"diag({T.name})")


def family_diagonal(T: GroupTable, seed: int = 0) -> TwistData:
    """Two-factor diagonal top group on k = |T| points, phi = conjugation on the diagonal."""
    if T.size > DIAGONAL_LIMIT:
        raise TwistError(f"|T| = {T.size} exceeds the diagonal family limit {DIAGONAL_LIMIT}")
    P = diagonal_group(T)
    return build(T, P, "conjugation", name=f"diagonal({T.name})", meta={"family": "diagonal"}, seed=seed)


def family_almost_simple_Sk(k: int, seed: int = 0) -> TwistData:
    """A_{k-1} twr S_k with phi conjugation by the point stabilizer S_{k-1}."""
    if k not in (6, 7):
        raise TwistError("almost-simple family is supported for k = 6, 7")
    T = named_table(f"A{k - 1}")
    P = PermGroup.symmetric(k)
    return build(T, P, "conjugation", name=f"almost-simple({k})", meta={"family": "almost-simple"}, seed=seed)


def wreath_imprimitive(H: PermGroup, K: PermGroup) -> PermGroup:
    """H wr K on m*r points; point (i, j) is j*m + i."""
    m, r = H.degree, K.degree
    gens = []
    for h in H.gens:
        a = np.arange(m * r)
        a[:m] = h.a
        gens.append(Perm(a, check=False))
    for kp in K.gens:
        a = (kp.a[:, None] * m + np.arange(m)[None, :]).reshape(-1)
        gens.append(Perm(a, check=False))
    return PermGroup(gens, m * r, order=H.order() ** r * K.order(),
                     name=f"{H.name or m}wr{K.name or r}")


def is_large_subgroup(G: PermGroup, H: PermGroup, r: int) -> bool:
    """G inside H wr S_r (imprimitive form): blocks permuted transitively, block 0 induces H."""
    m = H.degree
    if G.degree != m * r:
        raise ValueError("degree mismatch")
    blocks = [Perm((g.a[np.arange(r) * m] // m).astype(np.int64), check=False) for g in G.gens]
    if len(PermGroup(blocks, r).orbit(0)) != r:
        return False
    stab = _setwise_block_stabilizer(G, m)
    induced = PermGroup([g.restrict(m) for g in stab.gens], m)
    return induced.same_as(H)


def _setwise_block_stabilizer(G: PermGroup, m: int) -> PermGroup:
    """Stabilizer of block 0 = {0..m-1}: it is the stabilizer of the block index."""
    r = G.degree // m
    blocks = [Perm((g.a[np.arange(r) * m] // m).astype(np.int64), check=False) for g in G.gens]
    # elements of G whose block image fixes 0: use the graph group trick
    n = G.degree
    graph = [Perm(np.concatenate([b.a, g.a + r]), check=False) for b, g in zip(blocks, G.gens)]
    Gg = PermGroup(graph, r + n, order=G.order())
    S = Gg.stabilizer(0)
    return PermGroup([Perm(g.a[r:] - r, check=False) for g in S.gens], n, order=S.order())


def family_blowup(DH: TwistData, K: PermGroup, seed: int = 0) -> TwistData:
    """H wr K as a twisted wreath product with top group P_H wr K on k*r points.

    phi' sends an element of the stabilizer of (1, 1) to phi of its action on
    the first block.
    """
    if DH.nP != DH.k:
        raise TwistError("blow-up needs H with a faithful top group")
    if not K.is_transitive() or K.degree < 2:
        raise TwistError("K must be transitive of degree >= 2")
    m = DH.k
    P = wreath_imprimitive(DH.P, K)
    Q = P.stabilizer(0)
    pairs = [(q, DH.phi(q.restrict(m))) for q in Q.gens]
    D = build(DH.T, P, pairs, name=f"blowup({DH.name},{K.name or K.degree})", seed=seed,
              meta={"family": "blowup", "H": DH.name, "r": K.degree, "m": m})
    D.blowup_of = DH
    D.blowup_K = K
    return D


def partitions(m: int, largest: Optional[int] = None) -> Iterator[tuple[int, ...]]:
    largest = m if largest is None else largest
    if m == 0:
        yield ()
        return
    for p in range(min(m, largest), 0, -1):
        for rest in partitions(m - p, p):
            yield (p,) + rest


def even_cycle_type_count(m: int) -> int:
    """Number of cycle types of even permutations of m points."""
    if m < 1:
        raise ValueError("m >= 1")
    return sum(1 for lam in partitions(m) if (m - len(lam)) % 2 == 0)


def conjugation_orbit_count(m: int) -> int:
    """Orbits of S_m acting by conjugation on A_m, by direct enumeration."""
    from .structure import orbit_count

    if m < 3:
        return 1
    E = PermGroup.alternating(m).elements()
    gens = []
    for g in PermGroup.symmetric(m).gens:
        rows = g.a[E.arr[:, (~g).a]]
        gens.append(Perm(E.index_rows(rows), check=False))
    return orbit_count(gens, len(E))


FAMILIES = {
    "trivial-phi": family_trivial_phi,
    "nonfaithful": family_nonfaithful_top,
    "diagonal": family_diagonal,
    "almost-simple": family_almost_simple_Sk,
    "blowup": family_blowup,
}
