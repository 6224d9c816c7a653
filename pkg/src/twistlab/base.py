"""Base size of G on B: exact search, witnesses, constructive builders, bounds."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dist import Coloring, DistResult, DistUnknown, dist_exact, dist_wreath, induced
from .group import ENUM_LIMIT, PermGroup, Unknown, orbit_labels, subgroup_from_rows
from .grouptable import GroupTable, automorphism_group, generating_pair, named_table
from .intmath import ceil_log
from .perm import Perm
from .search import coloring_stabilizer
from .structure import classify_action, has_section, prime_order_class_reps
from .twisted import TwistData, TwistError, all_vectors

TABLE_LIMIT = 200_000
WITNESS_BATCH = 256


@dataclass
class BoundsReport:
    lower: int
    upper: Optional[int]
    exact: Optional[int] = None
    epsilon: Optional[int] = None
    delta: Optional[int] = None
    witness: Optional[list] = None
    provenance: list = field(default_factory=list)
    dist: Optional[int] = None
    checks: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "exact": self.exact,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "dist": self.dist,
            "witness": None if self.witness is None else [np.asarray(f).tolist() for f in self.witness],
            "provenance": [list(p) for p in self.provenance],
            "checks": dict(self.checks),
        }


# -- stabilizers of vectors -----------------------------------------------

def _use_table(D: TwistData) -> bool:
    return D.P.order() <= TABLE_LIMIT


def stabilizer_of_vectors(D: TwistData, F: Sequence[np.ndarray]) -> PermGroup:
    """{x in P : every f in F is fixed by x}."""
    F = [np.asarray(f, dtype=np.int64) for f in F]
    if not F:
        return D.P
    if _use_table(D):
        AT = D.action_table()
        mask = AT.stabilizer_mask(F)
        return subgroup_from_rows(AT.E.arr[mask], D.nP, seed=D.seed)
    L = D.lifted()
    gens = [L.to_P(g) for g in L.stabilizer(F)]
    return PermGroup(gens, D.nP)


def is_base(D: TwistData, F: Sequence[np.ndarray]) -> bool:
    """True iff F has trivial stabilizer in P, i.e. {e} + F is a base for G."""
    F = [np.asarray(f, dtype=np.int64) for f in F]
    if not F:
        return D.P.order() == 1
    if _use_table(D):
        return int(D.action_table().stabilizer_mask(F).sum()) == 1
    return not D.lifted().stabilizer(F, first_only=True)


def translate(D: TwistData, F: Sequence[np.ndarray], g: np.ndarray) -> list[np.ndarray]:
    """Right multiplication of every vector by g (an element of B acting regularly)."""
    return [D.T.mul[np.asarray(f), np.asarray(g)] for f in F]


def is_base_G(D: TwistData, F: Sequence[np.ndarray]) -> bool:
    """Base test for an arbitrary set of points of B (moved so that F[0] becomes e)."""
    if not F:
        return False
    moved = translate(D, F, D.T.inv[np.asarray(F[0])])
    return is_base(D, moved[1:])


# -- exhaustive search ------------------------------------------------------

def explicit_perms(D: TwistData, gens: Sequence[Perm], vecs: np.ndarray) -> list[Perm]:
    w = D.T.size ** np.arange(D.k, dtype=np.int64)
    out = []
    for x in gens:
        img, auts = D.x_data(x)
        res = np.empty_like(vecs)
        res[:, img] = auts[np.arange(D.k)[None, :], vecs]
        out.append(Perm((res @ w).astype(np.int64), check=False))
    return out


def exhaustive_base_size_P(D: TwistData, max_depth: int = 6) -> tuple[int, list[np.ndarray]]:
    """b_B(P) by iterative deepening over orbit representatives (|B| <= 10^6)."""
    if D.B_size() > ENUM_LIMIT or not _use_table(D):
        raise Unknown("instance too large for exhaustive base search")
    vecs = all_vectors(D)
    AT = D.action_table()
    full = np.ones(AT.E.size, dtype=bool)

    def search(mask: np.ndarray, depth: int) -> Optional[list[np.ndarray]]:
        size = int(mask.sum())
        if size == 1:
            return []
        if depth == 0:
            return None
        H = subgroup_from_rows(AT.E.arr[mask], D.nP, seed=D.seed)
        labels = orbit_labels(explicit_perms(D, H.gens, vecs), vecs.shape[0])
        counts = np.bincount(labels)
        first = np.full(counts.size, -1, dtype=np.int64)
        idx = np.arange(vecs.shape[0])[::-1]
        first[labels[idx]] = idx
        # larger orbits mean smaller stabilizers; a regular orbit finishes at once
        for c in np.argsort(-counts, kind="stable"):
            if counts[c] == 1:
                break
            f = vecs[first[c]]
            sub = mask.copy()
            rows = np.nonzero(mask)[0]
            sub[rows] = AT.fixed_mask(f, rows)
            found = search(sub, depth - 1)
            if found is not None:
                return [f] + found
            if counts[c] == size:
                continue
        return None

    for depth in range(1, max_depth + 1):
        res = search(full, depth)
        if res is not None:
            return depth, res
    raise Unknown("base of P on B longer than the search depth")


# -- randomized witnesses ---------------------------------------------------

def prime_order_indices(D: TwistData) -> np.ndarray:
    from .group import element_orders
    from .intmath import is_prime

    AT = D.action_table()
    orders = element_orders(AT.E.arr)
    return np.nonzero(np.array([is_prime(int(o)) for o in orders]))[0]


def witness_search(D: TwistData, size: int, budget: int = 100_000, seed: int = 0) -> Optional[list[np.ndarray]]:
    """Uniform random sets of `size` vectors with trivial stabilizer in P."""
    rng = np.random.default_rng(seed)
    nT, k = D.T.size, D.k
    if _use_table(D) and size == 1:
        AT = D.action_table()
        cand = prime_order_indices(D)
        done = 0
        while done < budget:
            m = min(WITNESS_BATCH, budget - done)
            F = rng.integers(0, nT, size=(m, k))
            hit = AT.nontrivial_fixer(F, cand)
            if not hit.all():
                return [F[int(np.argmin(hit))]]
            done += m
        return None
    for _ in range(budget):
        F = [rng.integers(0, nT, size=k) for _ in range(size)]
        if is_base(D, F):
            return F
    return None


def fix_count_certificate(D: TwistData) -> Optional[bool]:
    """Sum over prime-order x of |fix_B(x)| < |B| forces a regular P-orbit (b = 2)."""
    try:
        classes = prime_order_class_reps(D.P)
    except Unknown:
        return None
    total = sum(c.size * D.fix_count(c.rep) for c in classes)
    return total < D.B_size()


# -- constructive builders ----------------------------------------------

def digits(u: int, base: int, m: int) -> list[int]:
    out = []
    for _ in range(m):
        out.append(u % base)
        u //= base
    return out


def phiQ_orbit_reps(D: TwistData) -> list[int]:
    """Orbit representatives of phi(Q) on T (least index first, identity first)."""
    gens = [Perm(a, check=False) for a in D.phi_gens]
    labels = orbit_labels(gens, D.T.size) if gens else np.arange(D.T.size)
    reps, seen = [], set()
    for t in range(D.T.size):
        if int(labels[t]) not in seen:
            seen.add(int(labels[t]))
            reps.append(t)
    return reps


def check_distinguishing(D: TwistData, coloring: Coloring) -> None:
    G = induced(D.P, D.k)
    stab = coloring_stabilizer(G, coloring.labels, first_only=True)
    if stab.gens:
        raise TwistError(f"partition is not distinguishing; fixed by {stab.gens[0]}")


def default_coloring(D: TwistData, seed: int = 0) -> Coloring:
    res = dist_exact(D.P, D.k, seed=seed)
    if res.witness is None:
        raise Unknown("no distinguishing partition available")
    return res.witness


def _digit_vectors(coloring: Coloring, values: Sequence[int], k: int) -> list[np.ndarray]:
    n = len(values)
    d = coloring.d
    m = ceil_log(d, n)
    vals = np.asarray(values, dtype=np.int64)
    out = []
    for j in range(m):
        dig = np.array([digits(int(u), n, m)[j] for u in coloring.labels[:k]])
        out.append(vals[dig])
    return out


def build_base_hbound(D: TwistData, coloring: Optional[Coloring] = None, verify: bool = True) -> list[np.ndarray]:
    """Digit vectors over phi(Q)-orbit representatives; with e they form a base."""
    if not D.faithful_top:
        raise TwistError("hbound builder needs core_P(Q) = 1")
    coloring = default_coloring(D, D.seed) if coloring is None else coloring
    check_distinguishing(D, coloring)
    reps = phiQ_orbit_reps(D)
    if len(reps) < 2:
        raise TwistError("phi(Q) is transitive on T")
    F = _digit_vectors(coloring, reps, D.k)
    if verify and not is_base(D, F):
        raise AssertionError("hbound construction is not a base")
    return F


def build_base_Tbound(D: TwistData, coloring: Optional[Coloring] = None, verify: bool = True,
                      pair: Optional[tuple[int, int]] = None) -> list[np.ndarray]:
    """Digit vectors over all of T plus the constant vectors of a generating pair."""
    coloring = default_coloring(D, D.seed) if coloring is None else coloring
    check_distinguishing(D, coloring)
    pair = generating_pair(D.T, seed=D.seed) if pair is None else pair
    if pair is None:
        raise TwistError("no generating pair found")
    t, s = pair
    F = _digit_vectors(coloring, list(range(D.T.size)), D.k)
    F += [np.full(D.k, t, dtype=np.int64), np.full(D.k, s, dtype=np.int64)]
    if verify and not is_base(D, F):
        raise AssertionError("Tbound construction is not a base")
    return F


def build_base_product(n_delta: int, H_base: Sequence, K_coloring: Coloring, r: int) -> list[tuple]:
    """Points of Delta^r (Delta = 0..n-1): digit points alpha_j plus constant beta_l."""
    d = K_coloring.d
    m = ceil_log(d, n_delta)
    out = []
    for j in range(m):
        out.append(tuple(digits(int(u), n_delta, m)[j] for u in K_coloring.labels[:r]))
    for i in H_base:
        out.append(tuple([i] * r))
    return out


def product_action(H: PermGroup, K: PermGroup) -> PermGroup:
    """H wr K on Delta^r, point (x_0..x_{r-1}) coded as sum x_j n^j."""
    n, r = H.degree, K.degree
    N = n ** r
    if N > ENUM_LIMIT:
        raise Unknown("product domain too large")
    idx = np.arange(N, dtype=np.int64)
    coords = np.stack([(idx // n ** j) % n for j in range(r)], axis=1)
    w = n ** np.arange(r, dtype=np.int64)
    gens = []
    for h in H.gens:
        c = coords.copy()
        c[:, 0] = h.a[c[:, 0]]
        gens.append(Perm(c @ w, check=False))
    for kp in K.gens:
        c = np.empty_like(coords)
        c[:, kp.a] = coords
        gens.append(Perm(c @ w, check=False))
    return PermGroup(gens, N, order=H.order() ** r * K.order())


def verify_product_base(H: PermGroup, K: PermGroup, points: Sequence[tuple]) -> bool:
    n = H.degree
    G = product_action(H, K)
    codes = [sum(int(x) * n ** j for j, x in enumerate(p)) for p in points]
    return G.pointwise_stabilizer(codes).order() == 1


def build_base_product_twisted(D: TwistData, H_base: Sequence[np.ndarray], K_coloring: Coloring) -> list[np.ndarray]:
    """The product construction on a blow-up datum: Delta = B_H, coordinates in radix |T|."""
    m, r = D.meta["m"], D.meta["r"]
    nT = D.T.size
    n_delta = nT ** m
    H_codes = [int(sum(int(v) * nT ** i for i, v in enumerate(f))) for f in H_base]
    pts = build_base_product(n_delta, H_codes, K_coloring, r)
    out = []
    for p in pts:
        vec = np.concatenate([np.array(digits(c, nT, m), dtype=np.int64) for c in p])
        out.append(vec)
    return out


# -- reports ---------------------------------------------------------------

def lower_bound(D: TwistData) -> int:
    return ceil_log(D.order(), D.B_size())


def base_size(D: TwistData, budget: int = 100_000, seed: int = 0, dist: Optional[DistResult] = None,
              builders: bool = True) -> BoundsReport:
    lower = lower_bound(D)
    rep = BoundsReport(lower=lower, upper=None)
    rep.provenance.append((lower, "order bound |G| <= |B|^b"))
    e = D.identity_vector()
    if D.B_size() <= ENUM_LIMIT and _use_table(D):
        try:
            bP, F = exhaustive_base_size_P(D)
            rep.exact = bP + 1
            rep.upper = bP + 1
            rep.witness = [e] + F
            rep.provenance.append((bP + 1, "exhaustive search over orbit representatives"))
        except Unknown:
            pass
    if rep.exact is None and lower >= 2:
        F = witness_search(D, lower - 1, budget, seed)
        if F is not None:
            rep.exact = rep.upper = lower
            rep.witness = [e] + F
            rep.provenance.append((lower, "random witness meets the order bound"))
    if dist is None:
        try:
            dist = dist_exact(D.P, D.k, seed=seed)
        except Unknown:
            dist = None
    if (dist is None or not dist.proven) and getattr(D, "blowup_K", None) is not None:
        # top group is P_H wr K: the regular-orbit formula settles it
        try:
            dist = dist_wreath(D.blowup_of.P, D.blowup_K, seed)
        except (Unknown, DistUnknown):
            pass
    if dist is not None and dist.d is not None:
        rep.dist = dist.d
    if builders and dist is not None and dist.witness is not None:
        for name, fn, ok in (("hbound builder", build_base_hbound, D.faithful_top),
                             ("Tbound builder", build_base_Tbound, True)):
            if not ok:
                continue
            try:
                F = fn(D, dist.witness)
            except (TwistError, Unknown):
                continue
            size = len(F) + 1
            rep.provenance.append((size, name))
            if rep.upper is None or size < rep.upper:
                rep.upper = size
                if rep.exact is None:
                    rep.witness = [e] + F
    if rep.exact is None and rep.upper is not None and rep.upper == lower:
        rep.exact = lower
    if rep.exact is not None:
        rep.epsilon = rep.exact - lower
        if rep.dist is not None:
            rep.delta = rep.exact - ceil_log(rep.dist, D.T.size)
    return rep


def keybound_checks(D: TwistData, d: int) -> dict:
    """The two displayed inequalities, in integer form: d^k < |G| and |P| < d^k."""
    out = {"colorings_below_order": d ** D.k < D.order()}
    if D.faithful_top:
        out["top_below_colorings"] = D.P.order() < d ** D.k
    return out


def bounds_report(D: TwistData, report: Optional[BoundsReport] = None, primitive: Optional[bool] = None,
                  budget: int = 100_000, seed: int = 0) -> BoundsReport:
    rep = base_size(D, budget, seed) if report is None else report
    if rep.dist is not None:
        rep.checks.update(keybound_checks(D, rep.dist))
    if rep.epsilon is not None and rep.delta is not None:
        eps, dl = rep.epsilon, rep.delta
        rep.checks["eps_delta_range"] = 0 <= eps <= 3 and 0 <= dl <= 3 and eps <= dl
        if primitive:
            rep.checks["primitive_refinement"] = eps != 3 and dl <= eps + 1
    return rep


def exp_ranges(D: TwistData, rep: BoundsReport, d_K: int) -> dict:
    """Ranges for a blow-up H wr K with b(H) = 2.

    With [H : soc H] = |P_H| >= 48: epsilon in {0,1}, delta' in {1,2}, epsilon+1 <= delta'.
    Otherwise only epsilon, delta' in {0,1,2} with epsilon <= delta'.
    """
    m = D.meta["m"]
    dprime = rep.exact - ceil_log(d_K, D.T.size ** m)
    eps = rep.epsilon
    H = getattr(D, "blowup_of", None)
    strong = H is not None and H.P.order() >= 48
    if strong:
        ok = eps in (0, 1) and dprime in (1, 2) and eps + 1 <= dprime
    else:
        ok = eps in (0, 1, 2) and dprime in (0, 1, 2) and eps <= dprime
    return {"epsilon": eps, "delta": dprime, "strong": strong, "exp_range": ok}


# -- base size two conditions ---------------------------------------------

@dataclass
class B2Conditions:
    conditions: dict
    sum_test: Optional[bool]
    any_holds: bool
    witness: Optional[list] = None
    notes: list = field(default_factory=list)


def _alt_table(s: int) -> GroupTable:
    if s >= 5:
        return named_table(f"A{s}")
    return GroupTable.from_perm_group(PermGroup.alternating(s))


def _section_flag(R: PermGroup, s: int) -> object:
    ans = has_section(R, _alt_table(s)).answer
    return {"yes": True, "no": False}.get(ans, "unknown")


def sum_test(D: TwistData) -> Optional[bool]:
    """sum over prime-order classes of |x^P| |T|^omega(x) < |T|^k."""
    try:
        classes = prime_order_class_reps(D.P)
    except Unknown:
        return None
    nT = D.T.size
    total = sum(c.size * nT ** c.rep.restrict(D.k).cycle_count() for c in classes)
    return total < nT ** D.k


def theorem_b2_conditions(D: TwistData, budget: int = 100_000, seed: int = 0) -> B2Conditions:
    if not D.faithful_top:
        raise TwistError("conditions assume core_P(Q) = 1")
    R = induced(D.P, D.k)
    info = classify_action(R)
    omega_aut = automorphism_group(D.T).orbit_count()
    not_a5 = D.T.size != 60
    inner_ok = D.inner_in_phiQ == D.T.size
    natural = info.is_symmetric or info.is_alternating
    c: dict = {}
    sp = info.semiprimitive
    c["i"] = "unknown" if sp == "unknown" else bool(sp and (inner_ok or not natural))
    a4 = _section_flag(R, 4)
    c["ii"] = "unknown" if a4 == "unknown" else not a4
    c["iii"] = R.order() % 4 != 0
    a5 = _section_flag(R, 5)
    c["iv"] = "unknown" if a5 == "unknown" else (not a5 and not_a5)
    sol = info.soluble
    c["v"] = "unknown" if sol == "unknown" else bool(sol and not_a5)
    vi: object = False
    for s in range(3, omega_aut + 1):
        f = _section_flag(R, s)
        if f is False:
            vi = True
            break
        if f == "unknown":
            vi = "unknown"
    c["vi"] = vi
    st = sum_test(D) if natural else None
    holds = any(v is True for v in c.values()) or (natural and inner_ok and st is True)
    res = B2Conditions(c, st, holds)
    res.notes.append(f"omega_T(Aut T) = {omega_aut}")
    if holds:
        F = witness_search(D, 1, budget, seed)
        res.witness = None if F is None else [D.identity_vector()] + F
    return res
