"""The eleven acceptance criteria, each with its runtime limit.

Every test appends one PASS/FAIL line to the acceptance log, printed in the
terminal summary.
"""

import time
from fractions import Fraction
from itertools import combinations

import numpy as np

from twistlab.base import (base_size, bounds_report, build_base_hbound, build_base_product,
                           build_base_product_twisted, build_base_Tbound, default_coloring, exp_ranges,
                           exhaustive_base_size_P, is_base, is_base_G, phiQ_orbit_reps, stabilizer_of_vectors,
                           verify_product_base, witness_search)
from twistlab.constructions import (conjugation_orbit_count, even_cycle_type_count, family_blowup,
                                    family_trivial_phi, wreath_imprimitive)
from twistlab.dist import chan_wreath_dist, dist_bounds, dist_exact
from twistlab.group import PermGroup
from twistlab.grouptable import automorphism_group, named_table
from twistlab.harness import primitive_verdict
from twistlab.intmath import ceil_log
from twistlab.perm import parse_perm
from twistlab.primitive import balanced_subgroups, block_oracle, is_minimal_twisted, primitivity_check
from twistlab.prob import exact_q, qbound_form, qbound_sharp, verify_conjcent
from twistlab.specio import parse_text, resolve_instance, same_object, serialize
from twistlab.structure import is_block
from twistlab.twisted import GElement, all_vectors, build, explicit_action


def record(log, n, checks, t0, limit):
    elapsed = time.perf_counter() - t0
    checks = dict(checks)
    checks[f"runtime < {limit} s"] = elapsed < limit
    bad = [k for k, v in checks.items() if v is not True]
    status = "PASS" if not bad else "FAIL"
    line = f"criterion {n:2d}: {status}  ({len(checks) - len(bad)}/{len(checks)} checks, {elapsed:.1f} s)"
    if bad:
        line += "  failing: " + "; ".join(bad)
    log.append(line)
    print(line)
    assert not bad, line


def W(name):
    return resolve_instance(name)


# -- 1 ---------------------------------------------------------------------

def test_criterion_01_cycle_types_of_A7(acceptance_log):
    t0 = time.perf_counter()
    checks = {"even_cycle_type_count(7) = 8": even_cycle_type_count(7) == 8,
              "orbit enumeration = 8": conjugation_orbit_count(7) == 8}
    record(acceptance_log, 1, checks, t0, 5)


# -- 2 ---------------------------------------------------------------------

def test_criterion_02_aut_orbits(acceptance_log):
    t0 = time.perf_counter()
    omegas = {name: automorphism_group(named_table(name)).orbit_count() for name in ("A5", "A6", "PSL27")}
    checks = {"omega_A5(S5) = 4 by conjugation": conjugation_orbit_count(5) == 4,
              "omega_A5(Aut A5) = 4": omegas["A5"] == 4,
              "only A5 attains 4": [n for n, w in omegas.items() if w == 4] == ["A5"],
              f"all >= 4 {omegas}": all(w >= 4 for w in omegas.values())}
    record(acceptance_log, 2, checks, t0, 30)


# -- 3 ---------------------------------------------------------------------

def test_criterion_03_natural_dist_and_sandwich(acceptance_log, diag, blow_diag):
    t0 = time.perf_counter()
    checks = {}
    computed = []
    for n in range(3, 8):
        S, A = PermGroup.symmetric(n), PermGroup.alternating(n)
        dS, dA = dist_exact(S), dist_exact(A)
        checks[f"d(S{n}) = {n}"] = dS.proven and dS.d == n
        checks[f"d(A{n}) = {n - 1}"] = dA.proven and dA.d == n - 1
        computed += [(S, None, dS.d), (A, None, dA.d)]
    W22 = PermGroup([parse_perm("(1 2)", 4), parse_perm("(1 3)(2 4)", 4)], 4)
    others = [(PermGroup.cyclic(n), None) for n in (2, 3, 4, 5, 7)] + [
        (PermGroup.dihedral(5), None), (W22, None), (diag.P, diag.k), (blow_diag.P, blow_diag.k)]
    for G, m in others:
        res = dist_exact(G, m)
        assert res.proven
        computed.append((G, m, res.d))
    for G, m, d in computed:
        b = dist_bounds(G, m, d)
        checks[f"sandwich on degree {b.degree}, order {b.order}"] = b.sandwich is True
    record(acceptance_log, 3, checks, t0, 60)


# -- 4 ---------------------------------------------------------------------

def test_criterion_04_wreath_formula(acceptance_log):
    t0 = time.perf_counter()
    S2, S4 = PermGroup.symmetric(2), PermGroup.symmetric(4)
    checks = {"chan(S4, S4) = 5": chan_wreath_dist(S4, S4).d == 5,
              "chan(S2, S2) = 3": chan_wreath_dist(S2, S2).d == 3,
              "direct d(S2 wr S2) = 3": dist_exact(wreath_imprimitive(S2, S2)).d == 3}
    record(acceptance_log, 4, checks, t0, 60)


# -- 5 ---------------------------------------------------------------------

def full_pair_q(D):
    """Q(G,2) over all ordered pairs of B, through the explicit action.

    G_alpha is P conjugated by the translation t_alpha: beta -> beta alpha, so
    the pair (alpha, beta) fails iff some nontrivial element of G_alpha fixes beta.
    """
    EA = explicit_action(D)
    V = EA.vectors
    n = V.shape[0]
    w = D.T.size ** np.arange(D.k)
    Pel = D.P.elements()
    explicit_P = []
    for i in range(len(Pel)):
        x = Pel.perm(i)
        if x.is_identity():
            continue
        img, auts = D.x_data(x)
        out = np.empty_like(V)
        out[:, img] = auts[np.arange(D.k)[None, :], V]
        explicit_P.append(out @ w)
    fails = 0
    for a in range(n):
        fwd = D.T.mul[V, V[a]] @ w                 # beta -> beta alpha
        back = D.T.mul[V, D.T.inv[V[a]]] @ w       # beta -> beta alpha^-1
        fixed = np.zeros(n, dtype=bool)
        for s in explicit_P:
            fixed |= fwd[s[back]] == np.arange(n)
        fails += int(fixed.sum())
    return Fraction(fails, n * n)


def test_criterion_05_wreath_A5_S2(acceptance_log, wr_s2):
    t0 = time.perf_counter()
    x = parse_perm("(1 2)", 2)
    V = all_vectors(wr_s2)
    brute_fix = int((V[:, 0] == V[:, 1]).sum())
    cc = verify_conjcent(wr_s2, x)
    q_full = full_pair_q(wr_s2)
    sharp, form = qbound_sharp(wr_s2, 2), qbound_form(wr_s2, 2)
    checks = {"fix_count((1 2)) = 60": wr_s2.fix_count(x) == 60,
              "brute fixed vectors = 60": brute_fix == 60,
              "|C_G(x)| = 120 by brute force": cc.brute and cc.detail["C_G"] == 120 and cc.centralizer_order,
              "centralizer set as described": cc.centralizer_set is True,
              f"full-enumeration Q = {q_full} <= 1/60": q_full <= Fraction(1, 60),
              "agrees with reduced enumeration": q_full == exact_q(wr_s2, 2),
              "sharp = form = 1/60": sharp == form == Fraction(1, 60)}
    record(acceptance_log, 5, checks, t0, 120)


# -- 6 ---------------------------------------------------------------------

SMALL = ["trivial-phi(A5,S2)", "trivial-phi(A5,C3)", "trivial-phi(A5,S3)", "trivial-phi(PSL27,S2)",
         "trivial-phi(A6,S2)", "nonfaithful(5,S2)", "nonfaithful(6,S2)", "nonfaithful(5,C3)",
         "nonfaithful(5,S3)"]


def test_criterion_06_primitivity_oracle(acceptance_log, diag, as6):
    t0 = time.perf_counter()
    checks = {}
    for name in SMALL:
        D = W(name)
        assert D.B_size() <= 10 ** 6
        verdict, _ = primitive_verdict(D)
        oracle, block = block_oracle(D)
        checks[f"{name}: criterion = oracle"] = verdict is not None and verdict == oracle
        if name.startswith("trivial-phi"):
            EA = explicit_action(D)
            nT = D.T.size
            diagonal = [t * sum(nT ** i for i in range(D.k)) for t in range(nT)]
            checks[f"{name}: diagonal block"] = (is_block(EA.p_gens + EA.b_gens, diagonal)
                                                 and oracle is False)
    checks["diagonal(A5) primitive"] = primitivity_check(diag).primitive is True
    checks["almost-simple(6) primitive"] = primitivity_check(as6).primitive is True
    record(acceptance_log, 6, checks, t0, 600)


# -- 7 ---------------------------------------------------------------------

def test_criterion_07_base_two(acceptance_log, diag, as6, wr_s2, wr_c3):
    t0 = time.perf_counter()
    checks = {}
    for name, D in (("diagonal(A5)", diag), ("almost-simple(6)", as6), ("trivial-phi(A5,C3)", wr_c3)):
        F = witness_search(D, 1, budget=100_000, seed=1)
        ok = F is not None and is_base(D, F) and is_base_G(D, [D.identity_vector()] + F)
        checks[f"{name}: verified witness of size 2"] = ok and base_size(D, builders=False).lower == 2
    for name, D in (("trivial-phi(A5,S2)", wr_s2), ("trivial-phi(A5,C3)", wr_c3)):
        bP, _ = exhaustive_base_size_P(D)
        checks[f"{name}: exhaustive b = 2"] = bP + 1 == 2
    record(acceptance_log, 7, checks, t0, 600)


# -- 8 ---------------------------------------------------------------------

def min_base(G):
    for size in range(1, G.degree + 1):
        for pts in combinations(range(G.degree), size):
            if G.pointwise_stabilizer(list(pts)).order() == 1:
                return list(pts)
    return []


def test_criterion_08_builders(acceptance_log, wr_s2, wr_c3, nonfaithful, diag, as6, as7, blow_c3):
    t0 = time.perf_counter()
    checks = {}
    psl = family_trivial_phi(named_table("PSL27"), PermGroup.symmetric(2))
    h_inst = {"trivial-phi(A5,S2)": wr_s2, "trivial-phi(A5,C3)": wr_c3, "trivial-phi(PSL27,S2)": psl,
              "diagonal(A5)": diag, "almost-simple(6)": as6, "almost-simple(7)": as7,
              "blowup(trivial-phi(A5,C3),S2)": blow_c3}
    for name, D in h_inst.items():
        col = default_coloring(D)
        F = build_base_hbound(D, col)
        bound = ceil_log(col.d, len(phiQ_orbit_reps(D))) + 1
        checks[f"hbound {name}: size {len(F) + 1} <= {bound}"] = is_base(D, F) and len(F) + 1 <= bound
    t_inst = dict(h_inst, **{"nonfaithful(5,S2)": nonfaithful})
    for name, D in t_inst.items():
        col = default_coloring(D)
        F = build_base_Tbound(D, col)
        bound = ceil_log(col.d, D.T.size) + 3
        checks[f"Tbound {name}: size {len(F) + 1} <= {bound}"] = is_base(D, F) and len(F) + 1 <= bound
    pairs = [(PermGroup.symmetric(3), PermGroup.symmetric(2)), (PermGroup.symmetric(3), PermGroup.cyclic(3)),
             (PermGroup.symmetric(4), PermGroup.symmetric(2)), (PermGroup.dihedral(5), PermGroup.symmetric(2)),
             (PermGroup.symmetric(5), PermGroup.symmetric(3))]
    for H, K in pairs:
        Hb = min_base(H)
        col = dist_exact(K).witness
        pts = build_base_product(H.degree, Hb, col, K.degree)
        bound = ceil_log(col.d, H.degree) + len(Hb)
        checks[f"product {H.order()}wr{K.order()}: size {len(pts)} <= {bound}"] = (
            verify_product_base(H, K, pts) and len(pts) <= bound)
    for name, DH in (("almost-simple(6)", as6), ("diagonal(A5)", diag), ("trivial-phi(A5,C3)", wr_c3)):
        D = family_blowup(DH, PermGroup.symmetric(2))
        Hb = base_size(DH, builders=False).witness
        col = dist_exact(PermGroup.symmetric(2)).witness
        F = build_base_product_twisted(D, Hb, col)
        bound = ceil_log(col.d, DH.B_size()) + len(Hb)
        checks[f"product blowup({name},S2): size {len(F)} <= {bound}"] = is_base_G(D, F) and len(F) <= bound
    record(acceptance_log, 8, checks, t0, 300)


# -- 9 ---------------------------------------------------------------------

def test_criterion_09_epsilon_delta(acceptance_log, wr_s2, wr_c3, nonfaithful, diag, as6, as7, blow_c3, blow_diag):
    t0 = time.perf_counter()
    checks = {}
    insts = {"trivial-phi(A5,S2)": wr_s2, "trivial-phi(A5,C3)": wr_c3, "nonfaithful(5,S2)": nonfaithful,
             "trivial-phi(PSL27,S2)": W("trivial-phi(PSL27,S2)"), "trivial-phi(A6,S2)": W("trivial-phi(A6,S2)"),
             "diagonal(A5)": diag, "almost-simple(6)": as6, "almost-simple(7)": as7,
             "blowup(trivial-phi(A5,C3),S2)": blow_c3, "blowup(diagonal(A5),S2)": blow_diag,
             "blowup(almost-simple(6),S2)": family_blowup(as6, PermGroup.symmetric(2))}
    for name, D in insts.items():
        prim, _ = primitive_verdict(D)
        rep = bounds_report(D, primitive=prim)
        if rep.exact is None:
            checks[f"{name}: exact b"] = False
            continue
        c = rep.checks
        checks[f"{name}: d^k < |G|"] = c.get("colorings_below_order") is True
        if D.faithful_top:
            checks[f"{name}: |P| < d^k"] = c.get("top_below_colorings") is True
        checks[f"{name}: eps={rep.epsilon} delta={rep.delta} in range"] = c.get("eps_delta_range") is True
        if prim:
            checks[f"{name}: primitive refinement"] = c.get("primitive_refinement") is True
        if getattr(D, "blowup_K", None) is not None:
            r = exp_ranges(D, rep, dist_exact(D.blowup_K).d)
            checks[f"{name}: blow-up ranges ({'strong' if r['strong'] else 'general'})"] = r["exp_range"]
    record(acceptance_log, 9, checks, t0, 300)


# -- 10 --------------------------------------------------------------------

def test_criterion_10_balanced(acceptance_log, as6, as7, diag, blow_diag, wr_s2, wr_c3):
    t0 = time.perf_counter()
    checks = {"almost-simple(6) minimal-twisted": is_minimal_twisted(as6),
              "diagonal(A5) minimal-twisted": is_minimal_twisted(diag),
              "blowup(diagonal(A5),S2) not minimal-twisted": not is_minimal_twisted(blow_diag)}
    for name, D in (("trivial-phi(A5,S2)", wr_s2), ("trivial-phi(A5,C3)", wr_c3),
                    ("trivial-phi(A5,S3)", W("trivial-phi(A5,S3)")),
                    ("trivial-phi(PSL27,S2)", W("trivial-phi(PSL27,S2)"))):
        orders = [b.group.order() for b in balanced_subgroups(D)]
        checks[f"{name}: Q balanced"] = D.Q.order() in orders
    for name, D in (("almost-simple(6)", as6), ("almost-simple(7)", as7), ("diagonal(A5)", diag),
                    ("blowup(diagonal(A5),S2)", blow_diag)):
        bal = balanced_subgroups(D)
        checks[f"{name}: primitive and Q not balanced"] = (
            primitive_verdict(D)[0] is True and all(b.group.order() != D.Q.order() for b in bal))
    record(acceptance_log, 10, checks, t0, 300)


# -- 11 --------------------------------------------------------------------

LAW_INSTANCES = ["trivial-phi(A5,S2)", "trivial-phi(A5,C3)", "nonfaithful(5,S2)", "almost-simple(6)",
                 "almost-simple(7)", "diagonal(A5)", "blowup(trivial-phi(A5,C3),S2)",
                 "blowup(diagonal(A5),S2)"]


def law_failures(D, n, rng):
    bad = 0
    for _ in range(n):
        f = rng.integers(0, D.T.size, size=D.k)
        g1 = GElement(rng.integers(0, D.T.size, size=D.k), D.P.uniform_random(rng))
        g2 = GElement(rng.integers(0, D.T.size, size=D.k), D.P.uniform_random(rng))
        if not np.array_equal(D.act_G(D.act_G(f, g1), g2), D.act_G(f, D.g_mul(g1, g2))):
            bad += 1
    return bad


def min_base_order(G):
    return len(min_base(G)) if G.order() > 1 else 0


def test_criterion_11_property_suites(acceptance_log, wr_s2, wr_c3, nonfaithful, as6, as7, diag,
                                      blow_c3, blow_diag):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240601)
    checks = {}
    by_name = dict(zip(LAW_INSTANCES, (wr_s2, wr_c3, nonfaithful, as6, as7, diag, blow_c3, blow_diag)))
    for name, D in by_name.items():
        checks[f"action law, 10^4 triples: {name}"] = law_failures(D, 10_000, rng) == 0
        bad = 0
        for _ in range(1000):
            x, y = D.P.uniform_random(rng), D.P.uniform_random(rng)
            i = int(rng.integers(D.k))
            bad += D.cocycle(x * y, i) != D.cocycle(x, i) * D.cocycle(y, x(i))
        checks[f"cocycle identity: {name}"] = bad == 0
    # transversal invariance: rebuild with the generator order reversed
    for name, D, phi in (("trivial-phi(A5,S3)", W("trivial-phi(A5,S3)"), "trivial"),
                         ("almost-simple(6)", as6, "conjugation"), ("diagonal(A5)", diag, "conjugation")):
        D2 = build(D.T, PermGroup(list(reversed(D.P.gens)), D.nP, order=D.P.order()), phi, k=D.k)
        moved = any(a != b for a, b in zip(D.transversal, D2.transversal))
        xs = [D.P.uniform_random(rng) for _ in range(30)]
        same_fix = all(D.fix_count(x) == D2.fix_count(x) for x in xs)
        same_prim = primitive_verdict(D)[0] == primitive_verdict(D2)[0]
        same_base = base_size(D, builders=False).exact == base_size(D2, builders=False).exact
        same_bal = len(balanced_subgroups(D)) == len(balanced_subgroups(D2))
        checks[f"transversal invariance: {name}"] = moved and same_fix and same_prim and same_base and same_bal
    # monotone stabilizers
    for name, D in (("almost-simple(6)", as6), ("diagonal(A5)", diag), ("trivial-phi(A5,C3)", wr_c3)):
        ok = True
        for _ in range(20):
            F = [rng.integers(0, D.T.size, size=D.k) for _ in range(3)]
            orders = [stabilizer_of_vectors(D, F[:j]).order() for j in range(4)]
            ok = ok and all(a % b == 0 and a >= b for a, b in zip(orders, orders[1:]))
        checks[f"monotone stabilizers: {name}"] = ok
    # d <= b + 1 on small transitive groups
    small = [PermGroup.symmetric(n) for n in range(2, 7)] + [PermGroup.alternating(n) for n in range(3, 7)] + [
        PermGroup.cyclic(n) for n in range(2, 8)] + [PermGroup.dihedral(n) for n in range(3, 8)] + [
        wreath_imprimitive(PermGroup.symmetric(2), PermGroup.symmetric(2)),
        wreath_imprimitive(PermGroup.symmetric(3), PermGroup.symmetric(2))]
    checks["d <= b + 1 on 23 small groups"] = all(dist_exact(G).d <= min_base_order(G) + 1 for G in small)
    # d <= b + 1 for the top groups of the twisted instances, b from the G-level base size minus one
    for name, D in (("trivial-phi(A5,C3)", wr_c3), ("almost-simple(6)", as6)):
        checks[f"d <= b + 1 top group of {name}"] = dist_exact(D.P, D.k).d <= min_base_order(D.P.restrict(D.k)) + 1
    # round-trip parsing
    rt = True
    for name in LAW_INSTANCES[:6] + ["trivial-phi(PSL27,C3)", "nonfaithful(6,C3)"]:
        D = W(name)
        rt = rt and same_object(D, parse_text(serialize(D)))
    for G in small:
        rt = rt and same_object(G, parse_text(serialize(G)))
    checks["round-trip parsing"] = rt
    record(acceptance_log, 11, checks, t0, 600)
