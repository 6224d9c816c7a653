"""Stabilizers of vectors, exact base sizes, builders and bound reports."""

import numpy as np
import pytest

from twistlab.base import (base_size, bounds_report, build_base_hbound, build_base_product,
                           build_base_product_twisted, build_base_Tbound, default_coloring, exp_ranges,
                           exhaustive_base_size_P, is_base, is_base_G, lower_bound, phiQ_orbit_reps,
                           stabilizer_of_vectors, sum_test, theorem_b2_conditions, verify_product_base,
                           witness_search)
from twistlab.constructions import family_blowup, family_trivial_phi
from twistlab.dist import Coloring
from twistlab.group import PermGroup
from twistlab.intmath import ceil_log
from twistlab.twisted import TwistError, explicit_action


def test_stabilizer_examples(wr_s2):
    assert stabilizer_of_vectors(wr_s2, []).order() == 2
    assert stabilizer_of_vectors(wr_s2, [wr_s2.identity_vector()]).order() == 2
    assert is_base(wr_s2, [np.array([1, 2])])
    assert not is_base(wr_s2, [np.array([3, 3])])


def test_stabilizers_shrink(as6):
    rng = np.random.default_rng(5)
    F = []
    prev = as6.P.order()
    for _ in range(3):
        F.append(rng.integers(0, 60, size=6))
        cur = stabilizer_of_vectors(as6, F).order()
        assert cur <= prev and prev % cur == 0
        prev = cur


def test_exact_base_size_small(wr_s2, wr_c3):
    for D in (wr_s2, wr_c3):
        rep = base_size(D, builders=False)
        assert rep.exact == 2 and rep.lower == 2
        assert is_base_G(D, rep.witness)


def explicit_min_base_two(D):
    """True iff G on B (built explicitly) has a base {0, d} and no base of size one."""
    EA = explicit_action(D)
    G = PermGroup(EA.p_gens + EA.b_gens, EA.vectors.shape[0], order=D.order())
    G0 = G.stabilizer(0)
    if G0.order() == 1:
        return False
    return any(len(o) == G0.order() for o in G0.orbits())


def test_reduction_to_top_group(wr_s2, nonfaithful):
    for D in (wr_s2, nonfaithful):
        bP, _ = exhaustive_base_size_P(D)
        assert bP == 1 and explicit_min_base_two(D)


def test_base_sets_are_bases_of_G(nonfaithful):
    rep = base_size(nonfaithful, builders=False)
    EA = explicit_action(nonfaithful)
    G = PermGroup(EA.p_gens + EA.b_gens, EA.vectors.shape[0], order=nonfaithful.order())
    codes = EA.encode(np.array(rep.witness), 60).tolist()
    assert G.pointwise_stabilizer(codes).order() == 1


def test_witness_for_almost_simple(as6):
    F = witness_search(as6, 1, budget=100_000, seed=0)
    assert F is not None and is_base(as6, F)
    rep = base_size(as6)
    assert rep.exact == 2 and rep.lower == 2


def test_lower_bound_at_least_two(wr_s2, as6, diag, nonfaithful):
    for D in (wr_s2, as6, diag, nonfaithful):
        assert lower_bound(D) >= 2


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
def test_symmetric_top_lower_bound(A5, k):
    D = family_trivial_phi(A5, PermGroup.symmetric(k))
    assert 60 ** lower_bound(D) >= k


def test_symmetric_top_exact_three_points(A5):
    D = family_trivial_phi(A5, PermGroup.symmetric(3))
    assert base_size(D, builders=False).exact == 2


# -- builders ----------------------------------------------------------------

def test_hbound_examples(wr_s2, diag, as6):
    for D in (wr_s2, diag):
        F = build_base_hbound(D)
        assert len(F) == 1 and is_base(D, F)
    assert len(phiQ_orbit_reps(wr_s2)) == 60
    F = build_base_hbound(as6)
    assert len(F) == ceil_log(6, len(phiQ_orbit_reps(as6))) and is_base(as6, F)


def test_hbound_needs_faithful_top(nonfaithful):
    with pytest.raises(TwistError):
        build_base_hbound(nonfaithful)
    F = build_base_Tbound(nonfaithful)
    assert len(F) == 3 and is_base(nonfaithful, F)


def test_hbound_rejects_bad_partition(wr_c3):
    with pytest.raises(TwistError, match="not distinguishing"):
        build_base_hbound(wr_c3, Coloring(np.zeros(3, dtype=np.int64), 1))


def test_Tbound_size(as6, diag):
    for D in (as6, diag):
        col = default_coloring(D)
        F = build_base_Tbound(D, col)
        assert len(F) == ceil_log(col.d, D.T.size) + 2 and is_base(D, F)


def test_product_builder_small():
    S3, S2 = PermGroup.symmetric(3), PermGroup.symmetric(2)
    pts = build_base_product(3, [0, 1], Coloring(np.array([0, 1]), 2), 2)
    assert len(pts) == ceil_log(2, 3) + 2 == 3
    assert verify_product_base(S3, S2, pts)


def test_product_builder_blowup(as6):
    D = family_blowup(as6, PermGroup.symmetric(2))
    H = base_size(as6, builders=False)
    F = build_base_product_twisted(D, H.witness, Coloring(np.array([0, 1]), 2))
    assert len(F) == 3 and is_base_G(D, F)


# -- reports ---------------------------------------------------------------

def test_report_wreath(wr_s2):
    rep = bounds_report(wr_s2)
    assert (rep.lower, rep.exact, rep.epsilon, rep.dist, rep.delta) == (2, 2, 0, 2, 1)
    assert rep.checks == {"colorings_below_order": True, "top_below_colorings": True, "eps_delta_range": True}


def test_report_almost_simple(as6):
    rep = bounds_report(as6, primitive=True)
    assert (rep.exact, rep.lower, rep.epsilon, rep.dist, rep.delta) == (2, 2, 0, 6, 1)
    assert all(rep.checks.values()) and "primitive_refinement" in rep.checks


def test_report_nonfaithful_skips_top_check(nonfaithful):
    rep = bounds_report(nonfaithful)
    assert rep.checks["colorings_below_order"] and "top_below_colorings" not in rep.checks


def test_exp_ranges(blow_diag):
    rep = bounds_report(blow_diag, primitive=True)
    out = exp_ranges(blow_diag, rep, 2)
    assert out["exp_range"] and out["epsilon"] == 0 and out["delta"] == 1


# -- size two conditions ------------------------------------------------------

def test_b2_conditions_cyclic_top(wr_c3):
    res = theorem_b2_conditions(wr_c3)
    assert res.conditions["iii"] is True and res.any_holds
    assert res.witness is not None and is_base_G(wr_c3, res.witness)


def test_b2_conditions_almost_simple(as6):
    res = theorem_b2_conditions(as6)
    assert res.conditions["i"] is True and res.sum_test is True
    assert sum_test(as6)


def test_b2_conditions_need_faithful_top(nonfaithful):
    with pytest.raises(TwistError):
        theorem_b2_conditions(nonfaithful)
