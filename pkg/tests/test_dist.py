"""Distinguishing numbers, the order sandwich, block bound and the wreath formula."""

import numpy as np
import pytest

from twistlab.constructions import wreath_imprimitive
from twistlab.dist import (chan_wreath_dist, dist_block_bound, dist_bounds, dist_exact, dist_wreath,
                           free_colorings_direct, free_colorings_mobius, is_distinguishing, regular_coloring_orbit_count,
                           sandwich_holds)
from twistlab.group import PermGroup
from twistlab.perm import parse_perm


def W22():
    return PermGroup([parse_perm("(1 2)", 4), parse_perm("(1 3)(2 4)", 4)], 4)


@pytest.mark.parametrize("G,d", [(PermGroup.symmetric(4), 4), (PermGroup.alternating(4), 3),
                                 (PermGroup.cyclic(4), 2), (PermGroup.cyclic(7), 2), (W22(), 3)])
def test_dist_examples(G, d):
    res = dist_exact(G)
    assert res.d == d and res.proven
    assert is_distinguishing(G, res.witness.labels)
    assert res.witness.labels.max() < d


def test_no_coloring_below_minimum():
    G = PermGroup.symmetric(4)
    for labels in np.ndindex(*(3,) * 4):
        assert not is_distinguishing(G, np.array(labels))


def test_sandwich_examples():
    assert sandwich_holds(24, 4, 4)
    assert not sandwich_holds(24, 4, 2)


def test_summary_bounds():
    b = dist_bounds(PermGroup.cyclic(7), d_exact=2)
    assert b.summary["odd order"] == 2 and b.sandwich
    b = dist_bounds(PermGroup.symmetric(4), d_exact=4)
    assert b.sandwich and b.summary == {}
    b = dist_bounds(W22(), d_exact=3)
    assert b.summary["soluble"] == 5 and b.sandwich


def test_block_bound():
    assert dist_block_bound(W22(), [0, 1]) == 4
    assert dist_exact(W22()).d <= 4
    S4 = PermGroup.symmetric(4)
    assert dist_block_bound(S4, [0, 1, 2, 3]) == dist_exact(S4).d


def test_block_bound_rejects_non_block():
    with pytest.raises(ValueError):
        dist_block_bound(PermGroup.symmetric(4), [0, 1])


@pytest.mark.parametrize("H,d,count", [(PermGroup.symmetric(2), 2, 1), (PermGroup.symmetric(2), 3, 3),
                                       (PermGroup.symmetric(4), 4, 1)])
def test_regular_orbit_counts(H, d, count):
    assert regular_coloring_orbit_count(H, d) == count
    assert regular_coloring_orbit_count(H, d, method="direct") == count


@pytest.mark.parametrize("H", [PermGroup.cyclic(4), PermGroup.dihedral(5), PermGroup.alternating(4)])
def test_mobius_matches_direct(H):
    for d in (2, 3):
        assert free_colorings_mobius(H, d) == free_colorings_direct(H, d)[0]


def test_chan_small():
    S2 = PermGroup.symmetric(2)
    res = chan_wreath_dist(S2, S2)
    assert res.d == 3 == dist_exact(wreath_imprimitive(S2, S2)).d


def test_chan_sandwich():
    H, K = PermGroup.symmetric(3), PermGroup.cyclic(3)
    res = chan_wreath_dist(H, K)
    assert res.d_H <= res.d <= max(res.d_H + 1, res.d_K)
    assert res.d == dist_exact(wreath_imprimitive(H, K)).d


def test_dist_wreath_witness():
    S2, S3 = PermGroup.symmetric(2), PermGroup.symmetric(3)
    res = dist_wreath(S3, S2)
    W = wreath_imprimitive(S3, S2)
    assert res.proven and res.d == dist_exact(W).d == chan_wreath_dist(S3, S2).d
    assert is_distinguishing(W, res.witness.labels)
