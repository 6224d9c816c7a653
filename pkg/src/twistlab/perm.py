"""Permutations on points 0..n-1 stored as image arrays.

Conventions: ``p(i)`` is the image of ``i``; the product ``p * q`` applies
``p`` first and then ``q`` (right actions, as in the group theory literature).
Text I/O uses 1-based points.
"""

from __future__ import annotations

import re
from typing import Iterable, Sequence

import numpy as np

_CYCLE_RE = re.compile(r"\(([^()]*)\)")


class Perm:
    __slots__ = ("a", "_key")

    def __init__(self, images: Sequence[int] | np.ndarray, check: bool = True):
        a = np.asarray(images, dtype=np.int32)
        if check:
            n = a.shape[0]
            if a.ndim != 1 or n == 0:
                raise ValueError("permutation needs a non-empty 1-d image list")
            seen = np.zeros(n, dtype=bool)
            if a.min() < 0 or a.max() >= n:
                raise ValueError("image out of range")
            seen[a] = True
            if not seen.all():
                raise ValueError("images do not form a bijection")
        a.setflags(write=False)
        self.a = a
        self._key = None

    @classmethod
    def identity(cls, n: int) -> "Perm":
        return cls(np.arange(n, dtype=np.int32), check=False)

    @classmethod
    def from_cycles(cls, cycles: Iterable[Sequence[int]], n: int) -> "Perm":
        """Build from 0-based cycles; points must not repeat."""
        a = np.arange(n, dtype=np.int32)
        seen = set()
        for cyc in cycles:
            cyc = list(cyc)
            for p in cyc:
                if p < 0 or p >= n:
                    raise ValueError(f"point {p + 1} outside degree {n}")
                if p in seen:
                    raise ValueError(f"point {p + 1} repeated in cycle notation")
                seen.add(p)
            for j, p in enumerate(cyc):
                a[p] = cyc[(j + 1) % len(cyc)]
        return cls(a, check=False)

    @property
    def degree(self) -> int:
        return int(self.a.shape[0])

    @property
    def images(self) -> np.ndarray:
        return self.a

    def key(self) -> bytes:
        if self._key is None:
            self._key = self.a.tobytes()
        return self._key

    def __call__(self, i: int) -> int:
        return int(self.a[i])

    def __mul__(self, other: "Perm") -> "Perm":
        return Perm(other.a[self.a], check=False)

    def __invert__(self) -> "Perm":
        inv = np.empty_like(self.a)
        inv[self.a] = np.arange(self.a.shape[0], dtype=np.int32)
        return Perm(inv, check=False)

    def inverse(self) -> "Perm":
        return ~self

    def __pow__(self, e: int) -> "Perm":
        if e < 0:
            return (~self) ** (-e)
        result = Perm.identity(self.degree)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def conj(self, g: "Perm") -> "Perm":
        """Return g^-1 * self * g."""
        return (~g) * self * g

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Perm) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def is_identity(self) -> bool:
        return bool((self.a == np.arange(self.a.shape[0])).all())

    def support(self) -> np.ndarray:
        return np.nonzero(self.a != np.arange(self.a.shape[0]))[0]

    def first_moved(self) -> int:
        s = self.support()
        return int(s[0]) if s.size else -1

    def cycles(self, include_fixed: bool = False) -> list[list[int]]:
        n = self.degree
        seen = np.zeros(n, dtype=bool)
        out = []
        a = self.a
        for i in range(n):
            if seen[i]:
                continue
            cyc = [i]
            seen[i] = True
            j = int(a[i])
            while j != i:
                cyc.append(j)
                seen[j] = True
                j = int(a[j])
            if len(cyc) > 1 or include_fixed:
                out.append(cyc)
        return out

    def cycle_type(self) -> tuple[int, ...]:
        return tuple(sorted((len(c) for c in self.cycles(include_fixed=True)), reverse=True))

    def cycle_count(self) -> int:
        return len(self.cycles(include_fixed=True))

    def order(self) -> int:
        from math import lcm

        o = 1
        for c in self.cycles():
            o = lcm(o, len(c))
        return o

    def restrict(self, m: int) -> "Perm":
        """Restriction to points 0..m-1, which must be an invariant set."""
        r = self.a[:m]
        if m and r.max() >= m:
            raise ValueError("points 0..m-1 are not invariant")
        return Perm(r.copy(), check=False)

    def extend(self, n: int) -> "Perm":
        if n < self.degree:
            raise ValueError("cannot shrink by extend")
        return Perm(np.concatenate([self.a, np.arange(self.degree, n, dtype=np.int32)]), check=False)

    def __repr__(self) -> str:
        return f"Perm({format_cycles(self)!r}, n={self.degree})"


def format_cycles(p: Perm) -> str:
    cyc = p.cycles()
    if not cyc:
        return "()"
    return "".join("(" + " ".join(str(i + 1) for i in c) + ")" for c in cyc)


def format_images(p: Perm) -> str:
    return "[" + ",".join(str(int(i) + 1) for i in p.a) + "]"


def parse_perm(text: str, n: int | None = None) -> Perm:
    """Parse 1-based cycle notation or an image list such as "[2,3,1]"."""
    s = text.strip()
    if s.startswith("["):
        if not s.endswith("]"):
            raise ValueError(f"unterminated image list: {text!r}")
        body = s[1:-1].strip()
        vals = [int(v) - 1 for v in re.split(r"[,\s]+", body) if v] if body else []
        if n is not None and len(vals) != n:
            raise ValueError(f"image list has length {len(vals)}, expected degree {n}")
        return Perm(vals)
    cycles = []
    rest = _CYCLE_RE.sub("", s).strip()
    if rest:
        raise ValueError(f"unexpected text {rest!r} in cycle notation {text!r}")
    for body in _CYCLE_RE.findall(s):
        pts = [int(v) - 1 for v in re.split(r"[,\s]+", body.strip()) if v]
        if pts:
            cycles.append(pts)
    if n is None:
        n = max((max(c) for c in cycles), default=0) + 1
    return Perm.from_cycles(cycles, n)
