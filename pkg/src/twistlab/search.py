"""Backtrack searches for stabilizers of colorings."""

from __future__ import annotations

from collections import Counter
from typing import Optional

import numpy as np

from .group import PermGroup


def color_base(colors: np.ndarray) -> list[int]:
    """Points ordered by rarity of their color, nonzero colors first."""
    cnt = Counter(colors.tolist())
    pts = [int(p) for p in np.nonzero(colors)[0]]
    pts.sort(key=lambda p: (cnt[int(colors[p])], p))
    return pts


def coloring_stabilizer(G: PermGroup, colors: np.ndarray, first_only: bool = False,
                        node_limit: Optional[int] = None) -> PermGroup:
    """Elements g of G with colors[g(p)] = colors[p] for every point p."""
    colors = np.asarray(colors)
    if not any((colors[g.a] != colors).any() for g in G.gens):
        return G
    base = color_base(colors)
    ch = G.chain_with_base(base)
    pts = [l.point for l in ch.levels]
    want = colors[pts]

    def prune(level, imgs):
        return colors[imgs] == want[level]

    # points fixed by the stabilizer of the first j base points have known images
    fixed = []
    for j in range(len(ch.levels) + 1):
        moved = np.zeros(G.degree, dtype=bool)
        for g in ch.level_gens(j):
            moved |= g.a != np.arange(G.degree)
        pts_j = np.nonzero(~moved)[0]
        fixed.append(pts_j if j else pts_j[:0])

    def partial(level, s):
        f = fixed[level]
        return bool((colors[s.a[f]] == colors[f]).all())

    def prop(g):
        return bool((colors[g.a] == colors).all())

    return G.search(prop, prune, base=base, first_only=first_only, node_limit=node_limit, partial=partial)
