"""Exact rank of sparse integer vectors by fraction-free elimination."""

from __future__ import annotations

from math import gcd
from typing import Hashable, Iterable, Mapping


def _content(v: Mapping) -> int:
    g = 0
    for c in v.values():
        g = gcd(g, c)
        if g == 1:
            break
    return g


def integer_rank(vectors: Iterable[Mapping[Hashable, int]]) -> int:
    """Rank over Q of sparse integer vectors given as {coordinate: value} maps.

    Rows are reduced into echelon form keyed by their smallest coordinate.
    Each elimination step scales by the pivot ratio only (a gcd-reduced
    cross multiplication) and then divides out the row content, so every
    intermediate row stays primitive and no fractions appear.
    """
    pivots: dict = {}
    rank = 0
    for vec in vectors:
        v = {key: c for key, c in vec.items() if c}
        while v:
            key = min(v)
            row = pivots.get(key)
            if row is None:
                g = _content(v)
                if v[key] < 0:
                    g = -g
                if g != 1:
                    v = {kk: c // g for kk, c in v.items()}
                pivots[key] = v
                rank += 1
                break
            a, b = v[key], row[key]
            g = gcd(a, b)
            fa, fb = b // g, a // g
            if fa != 1:
                for kk in v:
                    v[kk] *= fa
            for kk, c in row.items():
                nv = v.get(kk, 0) - fb * c
                if nv:
                    v[kk] = nv
                else:
                    v.pop(kk, None)
            if fa != 1 and v:
                g = _content(v)
                if g > 1:
                    v = {kk: c // g for kk, c in v.items()}
    return rank


def nullity(vectors: list[Mapping[Hashable, int]]) -> int:
    """Dimension of the kernel of the map sending basis vector i to ``vectors[i]``."""
    return len(vectors) - integer_rank(vectors)
