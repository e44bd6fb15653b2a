"""Sparse exterior algebra over (C^k)^{⊗d}: basis vectors ψ_P, the form ω, raising operators.

A basis index P is a set of cells of [k]^d; ψ_P is the wedge of the cells in
ascending lexicographic order.  Internally cells are stored as their 0-based
lexicographic ranks, so a basis index is a sorted tuple of ints.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .core import Cell, cell_rank, rank_cell, sign_of_sequence
from .errors import DomainError
from . import latin

Key = tuple[int, ...]


@dataclass(frozen=True)
class WedgeVector:
    d: int
    k: int
    grade: int
    terms: Mapping[Key, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {}
        size = self.k ** self.d
        for key, c in self.terms.items():
            key = tuple(key)
            if len(key) != self.grade:
                raise DomainError(f"basis index of size {len(key)} in a grade-{self.grade} vector")
            if any(key[i] >= key[i + 1] for i in range(len(key) - 1)) or (key and not 0 <= key[0] <= key[-1] < size):
                raise DomainError(f"basis index {key} is not strictly increasing inside the box")
            if c:
                clean[key] = int(c)
        object.__setattr__(self, "terms", clean)

    @classmethod
    def basis(cls, d: int, k: int, cells: Iterable[Sequence[int]], coeff: int = 1) -> "WedgeVector":
        """``coeff`` times e_{c1} ∧ e_{c2} ∧ ... for cells given in any order (sign applied)."""
        ranks = [cell_rank(c, k) for c in cells]
        if len(set(ranks)) < len(ranks):
            return cls(d, k, len(ranks), {})
        order = sorted(range(len(ranks)), key=ranks.__getitem__)
        s = sign_of_sequence([i + 1 for i in order])
        return cls(d, k, len(ranks), {tuple(sorted(ranks)): s * coeff})

    def is_zero(self) -> bool:
        return not self.terms

    def cells(self, key: Key) -> list[Cell]:
        return [rank_cell(r, self.d, self.k) for r in key]

    def coefficient(self, cells: Iterable[Sequence[int]]) -> int:
        return self.terms.get(tuple(sorted(cell_rank(c, self.k) for c in cells)), 0)

    def marginals(self, key: Key) -> tuple[tuple[int, ...], ...]:
        """Per direction, how many cells of the index lie in each slice."""
        out = [[0] * self.k for _ in range(self.d)]
        for r in key:
            for l, x in enumerate(rank_cell(r, self.d, self.k)):
                out[l][x - 1] += 1
        return tuple(tuple(m) for m in out)

    def is_weight_homogeneous(self) -> bool:
        return len({self.marginals(key) for key in self.terms}) <= 1

    def __add__(self, other: "WedgeVector") -> "WedgeVector":
        _same_space(self, other)
        if self.grade != other.grade and self.terms and other.terms:
            raise DomainError("cannot add vectors of different grades")
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, 0) + c
        return WedgeVector(self.d, self.k, self.grade if self.terms else other.grade, terms)

    def scale(self, c: int) -> "WedgeVector":
        return WedgeVector(self.d, self.k, self.grade, {key: c * v for key, v in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WedgeVector):
            return NotImplemented
        if (self.d, self.k) != (other.d, other.k):
            return False
        if not self.terms and not other.terms:
            return True
        return self.grade == other.grade and dict(self.terms) == dict(other.terms)

    def __hash__(self) -> int:
        return hash((self.d, self.k, self.grade, frozenset(self.terms.items())))

    def json_lines(self) -> Iterator[dict]:
        for key in sorted(self.terms):
            yield {"cells": [list(c) for c in self.cells(key)], "coeff": str(self.terms[key])}


def _same_space(v: WedgeVector, w: WedgeVector) -> None:
    if (v.d, v.k) != (w.d, w.k):
        raise DomainError(f"vectors live over different boxes: {(v.d, v.k)} vs {(w.d, w.k)}")


def _merge_sign(a: Key, b: Key) -> int:
    """(-1)^#{(x, y) in a x b : x > y}: the sign of sorting a+b."""
    inv = 0
    j = 0
    for x in a:
        while j < len(b) and b[j] < x:
            j += 1
        inv += j
    return -1 if inv & 1 else 1


def wedge(v: WedgeVector, w: WedgeVector, max_marginal: int | None = None) -> WedgeVector:
    """v ∧ w.  With ``max_marginal``, terms whose slice counts exceed it are dropped."""
    _same_space(v, w)
    out: dict[Key, int] = {}
    d, k = v.d, v.k
    for a, x in v.terms.items():
        sa = set(a)
        for b, y in w.terms.items():
            if not sa.isdisjoint(b):
                continue
            key = tuple(sorted(a + b))
            if max_marginal is not None and _exceeds(key, d, k, max_marginal):
                continue
            out[key] = out.get(key, 0) + _merge_sign(a, b) * x * y
    return WedgeVector(d, k, v.grade + w.grade, out)


def _exceeds(key: Key, d: int, k: int, cap: int) -> bool:
    counts = [0] * (d * k)
    for r in key:
        for l in range(d - 1, -1, -1):
            r, c = divmod(r, k)
            s = l * k + c
            counts[s] += 1
            if counts[s] > cap:
                return True
    return False


def omega(d: int, k: int) -> WedgeVector:
    """Σ over π_2..π_d in S_k of sgn(π_2⋯π_d) ψ of the diagonal {(i, π_2(i), ..., π_d(i))}."""
    if d < 2 or k < 1:
        raise DomainError("omega needs d >= 2 and k >= 1")
    perms = [(p, sign_of_sequence([x + 1 for x in p])) for p in itertools.permutations(range(k))]
    terms: dict[Key, int] = {}
    for combo in itertools.product(perms, repeat=d - 1):
        s = 1
        for _, ps in combo:
            s *= ps
        key = tuple(cell_rank([i + 1] + [p[i] + 1 for p, _ in combo], k) for i in range(k))
        terms[key] = terms.get(key, 0) + s
    return WedgeVector(d, k, k, terms)


def wedge_power(d: int, k: int, n: int) -> WedgeVector:
    """ω^n, built as ω^(n-1) ∧ ω while discarding terms that overfill a slice."""
    if not 1 <= n <= k ** (d - 1):
        raise DomainError(f"n must lie in [1, {k ** (d - 1)}]")
    w = omega(d, k)
    acc = w
    for _ in range(n - 1):
        acc = wedge(acc, w, max_marginal=n)
    return acc


def raising_operator(v: WedgeVector, direction: int, i: int) -> WedgeVector:
    """E^{(direction)}_{i,i+1}: each cell with that coordinate equal to i+1 is lowered to i."""
    d, k = v.d, v.k
    if not 1 <= direction <= d:
        raise DomainError(f"direction must lie in [1, {d}]")
    if not 1 <= i <= k - 1:
        raise DomainError(f"i must lie in [1, {k - 1}]")
    stride = k ** (d - direction)
    out: dict[Key, int] = {}
    for key, c in v.terms.items():
        present = set(key)
        for pos, x in enumerate(key):
            if (x // stride) % k != i:  # 0-based coordinate i is value i+1
                continue
            y = x - stride
            if y in present:
                continue
            between = 0
            for z in key:
                if y < z < x:
                    between += 1
            new = tuple(sorted(key[:pos] + key[pos + 1:] + (y,)))
            out[new] = out.get(new, 0) + (-c if between & 1 else c)
    return WedgeVector(d, k, v.grade, out)


def is_highest_weight(v: WedgeVector) -> bool:
    if v.is_zero():
        raise DomainError("the zero vector is rejected by is_highest_weight")
    for direction in range(1, v.d + 1):
        for i in range(1, v.k):
            if not raising_operator(v, direction, i).is_zero():
                return False
    return True


def weight_space_basis(d: int, k: int, n: int) -> list[tuple[Cell, ...]]:
    """Magic sets with marginal n, lexicographically ordered; they index a basis of B_{d,k}(n)."""
    return [T.cells for T in latin.enumerate_magic_sets(d, k, n)]


def raising_images(d: int, k: int, n: int) -> tuple[list[Key], list[dict[Key, int]]]:
    """Basis keys of B_{d,k}(n) and, for each, the stacked image under all raising operators.

    Image keys are tagged with the operator, ``(direction, i) + new_key``.
    """
    basis = [tuple(cell_rank(c, k) for c in cells) for cells in weight_space_basis(d, k, n)]
    images = []
    for key in basis:
        v = WedgeVector(d, k, len(key), {key: 1})
        img: dict[Key, int] = {}
        for direction in range(1, d + 1):
            for i in range(1, k):
                for new, c in raising_operator(v, direction, i).terms.items():
                    img[(direction, i) + new] = c
        images.append(img)
    return basis, images
