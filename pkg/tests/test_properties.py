"""Property tests over random permutations, random small groups and random twisted data."""

from itertools import combinations

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from twistlab.base import stabilizer_of_vectors
from twistlab.constructions import family_trivial_phi
from twistlab.dist import dist_exact, free_colorings_direct, free_colorings_mobius, is_distinguishing
from twistlab.group import PermGroup, orbit_partition
from twistlab.grouptable import named_table
from twistlab.perm import Perm, format_cycles, format_images, parse_perm
from twistlab.prob import qbound_form, qbound_sharp
from twistlab.specio import parse_text, same_object, serialize
from twistlab.structure import (classify_action, conjugacy_classes, is_primitive, normal_lattice,
                                orbit_count, overgroups_of_point_stabilizer)

SLOW = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def perms(draw, n=None):
    n = draw(st.integers(1, 8)) if n is None else n
    return Perm(draw(st.permutations(range(n))))


@st.composite
def groups(draw, lo=2, hi=6):
    n = draw(st.integers(lo, hi))
    gens = draw(st.lists(perms(n), min_size=1, max_size=3))
    return PermGroup(gens, n)


def closure(G):
    idn = tuple(range(G.degree))
    seen = {idn}
    frontier = [idn]
    while frontier:
        nxt = []
        for a in frontier:
            for g in G.gens:
                b = tuple(int(g.a[i]) for i in a)
                if b not in seen:
                    seen.add(b)
                    nxt.append(b)
        frontier = nxt
    return seen


def min_base(G):
    if G.order() == 1:
        return 0
    for size in range(1, G.degree + 1):
        for pts in combinations(range(G.degree), size):
            if G.pointwise_stabilizer(list(pts)).order() == 1:
                return size
    raise AssertionError("no base")


# -- permutations ------------------------------------------------------------

@given(st.data())
def test_perm_group_laws(data):
    n = data.draw(st.integers(1, 8))
    a, b, c = (data.draw(perms(n)) for _ in range(3))
    assert sorted(a.a.tolist()) == list(range(n))
    assert (a * b) * c == a * (b * c)
    assert (a * ~a).is_identity() and (~a * a).is_identity()


@given(perms())
def test_perm_text_round_trip(p):
    assert parse_perm(format_cycles(p), p.degree) == p
    assert parse_perm(format_images(p)) == p


@given(perms())
def test_cycle_count_is_orbit_count(p):
    assert p.cycle_count() == orbit_count([p], p.degree) == len(orbit_partition([p], p.degree))


# -- groups ---------------------------------------------------------------

@SLOW
@given(groups())
def test_chain_order_matches_enumeration(G):
    elems = closure(G)
    assert G.order() == len(elems)
    rng = np.random.default_rng(0)
    for _ in range(10):
        p = Perm(rng.permutation(G.degree))
        assert G.contains(p) == (tuple(p.a.tolist()) in elems)


@SLOW
@given(groups())
def test_primitivity_agrees_with_overgroups(G):
    assume(G.is_transitive())
    prim = is_primitive(G)[0]
    over = overgroups_of_point_stabilizer(G)
    assert prim == (len(over) == 2)


@SLOW
@given(groups())
def test_quasiprimitive_implies_semiprimitive(G):
    assume(G.is_transitive())
    info = classify_action(G)
    if info.quasiprimitive is True:
        assert info.semiprimitive is True
    if info.primitive is True:
        assert info.quasiprimitive is True


@SLOW
@given(groups())
def test_class_equation(G):
    classes = conjugacy_classes(G)
    assert sum(c.size for c in classes) == G.order()
    assert all(c.size * c.centralizer_order == G.order() for c in classes)


@SLOW
@given(groups(hi=5))
def test_lattice_members_normal(G):
    for N in normal_lattice(G).all_normals:
        assert N.is_normal_in(G)


@SLOW
@given(groups(hi=6))
def test_dist_at_most_base_plus_one(G):
    assume(G.is_transitive())
    res = dist_exact(G)
    assert res.proven and is_distinguishing(G, res.witness.labels)
    assert res.d <= min_base(G) + 1


@SLOW
@given(groups(hi=5), st.integers(2, 3))
def test_mobius_equals_direct(G, d):
    assert free_colorings_mobius(G, d) == free_colorings_direct(G, d)[0]


# -- twisted data -------------------------------------------------------------

T_A5 = named_table("A5")
TOPS = [PermGroup.symmetric(2), PermGroup.cyclic(3), PermGroup.symmetric(3), PermGroup.cyclic(4)]
INSTANCES = [family_trivial_phi(T_A5, P) for P in TOPS]


@SLOW
@given(st.integers(0, len(INSTANCES) - 1), st.integers(0, 2 ** 32 - 1))
def test_cocycle_identity(which, seed):
    D = INSTANCES[which]
    rng = np.random.default_rng(seed)
    x, y = D.P.uniform_random(rng), D.P.uniform_random(rng)
    for i in range(D.k):
        assert D.cocycle(x * y, i) == D.cocycle(x, i) * D.cocycle(y, x(i))


@SLOW
@given(st.integers(0, len(INSTANCES) - 1), st.integers(0, 2 ** 32 - 1))
def test_stabilizers_monotone(which, seed):
    D = INSTANCES[which]
    rng = np.random.default_rng(seed)
    F = [rng.integers(0, 60, size=D.k) for _ in range(3)]
    orders = [stabilizer_of_vectors(D, F[:j]).order() for j in range(4)]
    assert all(a % b == 0 for a, b in zip(orders, orders[1:]))


@SLOW
@given(st.integers(0, len(INSTANCES) - 1), st.integers(0, 2 ** 32 - 1))
def test_fix_count_power_bound(which, seed):
    D = INSTANCES[which]
    x = D.P.uniform_random(np.random.default_rng(seed))
    assert D.fix_count(x) <= D.T.size ** x.cycle_count()


@SLOW
@given(st.integers(0, len(INSTANCES) - 1), st.integers(2, 4))
def test_sharp_below_form(which, b):
    D = INSTANCES[which]
    assert qbound_sharp(D, b) <= qbound_form(D, b)


@SLOW
@given(groups(lo=2, hi=5))
def test_spec_round_trip(G):
    assume(G.is_transitive())
    D = family_trivial_phi(T_A5, G)
    D2 = parse_text(serialize(D))
    assert same_object(D, D2)
    assert same_object(G, parse_text(serialize(G)))
