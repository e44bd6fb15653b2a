"""Partial Latin hypercubes over magic sets, their sign statistics and Alon-Tarsi sums.

A magic set of the box [k]^d meets every axis-parallel slice in the same
number ``n`` of cells.  A partial Latin hypercube of that type fills those
cells with symbols 1..n so that each slice, read in lexicographic cell order,
is a permutation of [n].

The enumerators visit cells in lexicographic order and try symbols in
ascending order, so output order is deterministic.  Slice constraints are
tracked with one integer bitmask per (direction, slice) pair; Python integers
are unbounded so no width limit applies.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from .core import Cell, box_cells, multi_sign, sign_of_sequence
from .errors import BudgetExceeded, DomainError

# Largest full-cube instance alon_tarsi runs without allow_large.
LARGE_CELL_LIMIT = 27


@dataclass(frozen=True)
class MagicSet:
    d: int
    k: int
    cells: tuple[Cell, ...]

    def __post_init__(self) -> None:
        cells = tuple(sorted(tuple(int(x) for x in c) for c in self.cells))
        object.__setattr__(self, "cells", cells)
        if self.d < 1 or self.k < 1:
            raise DomainError("d and k must be positive")
        if len(set(cells)) != len(cells):
            raise DomainError("magic set cells must be distinct")
        for c in cells:
            if len(c) != self.d or any(not 1 <= x <= self.k for x in c):
                raise DomainError(f"cell {c} is not in [{self.k}]^{self.d}")
        n = len(cells) // self.k
        if len(cells) != n * self.k or any(m != n for m in self._marginals()):
            raise DomainError("cells do not meet every slice equally often")

    def _marginals(self) -> list[int]:
        counts = [0] * (self.d * self.k)
        for c in self.cells:
            for l, x in enumerate(c):
                counts[l * self.k + x - 1] += 1
        return counts

    @property
    def n(self) -> int:
        return len(self.cells) // self.k

    @classmethod
    def full(cls, d: int, k: int) -> "MagicSet":
        return cls(d, k, tuple(box_cells(d, k)))

    def to_json(self) -> dict:
        return {"k": self.k, "d": self.d, "cells": [list(c) for c in self.cells]}

    @classmethod
    def from_json(cls, data: Mapping) -> "MagicSet":
        for key in ("k", "d", "cells"):
            if key not in data:
                raise DomainError(f"magic set JSON: missing field '{key}'")
        return cls(int(data["d"]), int(data["k"]), tuple(tuple(c) for c in data["cells"]))


@dataclass(frozen=True)
class PartialLatinHypercube:
    """Symbol assignment ``values[i]`` on ``type.cells[i]``."""

    type: MagicSet
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        values = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", values)
        T = self.type
        if len(values) != len(T.cells):
            raise DomainError("one value per cell is required")
        n = T.n
        seen: dict[tuple[int, int], set[int]] = {}
        for c, v in zip(T.cells, values):
            if not 1 <= v <= n:
                raise DomainError(f"value {v} outside [1, {n}]")
            for l, x in enumerate(c):
                s = seen.setdefault((l, x), set())
                if v in s:
                    raise DomainError(f"value {v} repeated in slice {l + 1}={x}")
                s.add(v)

    @property
    def d(self) -> int:
        return self.type.d

    @property
    def k(self) -> int:
        return self.type.k

    @property
    def n(self) -> int:
        return self.type.n

    def value_map(self) -> dict[Cell, int]:
        return dict(zip(self.type.cells, self.values))

    def c_permutation(self, direction: int, i: int) -> tuple[int, ...]:
        """Values of slice ``direction = i`` in lexicographic cell order."""
        p = direction - 1
        return tuple(v for c, v in zip(self.type.cells, self.values) if c[p] == i)

    def diagonal(self, symbol: int) -> list[Cell]:
        return [c for c, v in zip(self.type.cells, self.values) if v == symbol]

    def to_json(self) -> dict:
        out = self.type.to_json()
        out["values"] = list(self.values)
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "PartialLatinHypercube":
        if "values" not in data:
            raise DomainError("hypercube JSON: missing field 'values'")
        T = MagicSet.from_json(data)
        # values are parallel to the cells as given, which may be unsorted
        given = [tuple(c) for c in data["cells"]]
        vals = dict(zip(given, data["values"]))
        return cls(T, tuple(vals[c] for c in T.cells))

    @classmethod
    def from_map(cls, d: int, k: int, values: Mapping[Sequence[int], int]) -> "PartialLatinHypercube":
        T = MagicSet(d, k, tuple(tuple(c) for c in values))
        vm = {tuple(c): v for c, v in values.items()}
        return cls(T, tuple(vm[c] for c in T.cells))


# ---------------------------------------------------------------------------
# magic sets


def enumerate_magic_sets(d: int, k: int, n: int) -> Iterator[MagicSet]:
    """Every magic set of [k]^d with marginal ``n``, in lexicographic order."""
    if not 0 <= n <= k ** (d - 1):
        raise DomainError(f"marginal n must lie in [0, {k ** (d - 1)}]")
    cells = box_cells(d, k)
    slices = [tuple(l * k + x - 1 for l, x in enumerate(c)) for c in cells]
    cap = [n] * (d * k)
    remaining = [k ** (d - 1)] * (d * k)
    chosen: list[Cell] = []
    N = len(cells)

    def rec(pos: int, left: int) -> Iterator[MagicSet]:
        if left == 0:
            yield MagicSet(d, k, tuple(chosen))
            return
        if N - pos < left:
            return
        sl = slices[pos]
        for s in sl:
            remaining[s] -= 1
        if all(cap[s] > 0 for s in sl):
            for s in sl:
                cap[s] -= 1
            chosen.append(cells[pos])
            if all(cap[s] <= remaining[s] for s in sl):
                yield from rec(pos + 1, left - 1)
            chosen.pop()
            for s in sl:
                cap[s] += 1
        if all(cap[s] <= remaining[s] for s in sl):
            yield from rec(pos + 1, left)
        for s in sl:
            remaining[s] += 1

    yield from rec(0, n * k)


def count_magic_sets(d: int, k: int, n: int) -> int:
    return sum(1 for _ in enumerate_magic_sets(d, k, n))


# ---------------------------------------------------------------------------
# Latin fillings


class _Search:
    """Backtracking state shared by the streaming and summing enumerators."""

    def __init__(self, T: MagicSet, canonical: bool = False):
        self.T = T
        self.n = T.n
        self.k = T.k
        self.slices = [tuple(l * T.k + x - 1 for l, x in enumerate(c)) for c in T.cells]
        self.canonical = canonical
        self.used = [0] * (T.d * T.k)
        self.values = [0] * len(T.cells)

    def assign(self, pos: int, v: int) -> int | None:
        """Place ``v`` at ``pos``; return the parity of new inversions, or None if blocked."""
        bit = 1 << v
        used = self.used
        sl = self.slices[pos]
        for s in sl:
            if used[s] & bit:
                return None
        par = 0
        for s in sl:
            par += (used[s] >> (v + 1)).bit_count()
            used[s] |= bit
        self.values[pos] = v
        return par & 1

    def unassign(self, pos: int, v: int) -> None:
        mask = ~(1 << v)
        for s in self.slices[pos]:
            self.used[s] &= mask
        self.values[pos] = 0

    def candidates(self, top: int) -> range:
        hi = min(self.n, top + 1) if self.canonical else self.n
        return range(1, hi + 1)

    def signed_sum(self, pos: int, top: int, parity: int, node_budget: list[int] | None = None) -> tuple[int, int]:
        """(signed sum of full signs, count) over completions from ``pos``."""
        if pos == len(self.values):
            return (-1 if parity else 1), 1
        if node_budget is not None:
            node_budget[0] -= 1
            if node_budget[0] < 0:
                raise BudgetExceeded("enumeration node budget exhausted")
        total = 0
        count = 0
        for v in self.candidates(top):
            p = self.assign(pos, v)
            if p is None:
                continue
            s, c = self.signed_sum(pos + 1, max(top, v), parity ^ p, node_budget)
            total += s
            count += c
            self.unassign(pos, v)
        return total, count

    def walk(self, pos: int, top: int) -> Iterator[tuple[int, ...]]:
        if pos == len(self.values):
            yield tuple(self.values)
            return
        for v in self.candidates(top):
            if self.assign(pos, v) is None:
                continue
            yield from self.walk(pos + 1, max(top, v))
            self.unassign(pos, v)


def enumerate_latin(T: MagicSet, canonical: bool = False) -> Iterator[PartialLatinHypercube]:
    """All partial Latin hypercubes of type ``T``.

    With ``canonical=True`` only fillings whose symbols first appear in the
    order 1, 2, ..., n are produced: one per orbit of symbol relabelings.
    """
    if T.n == 0:
        yield PartialLatinHypercube(T, ())
        return
    search = _Search(T, canonical)
    for vals in search.walk(0, 0):
        yield PartialLatinHypercube(T, vals)


def count_latin(T: MagicSet) -> int:
    if T.n == 0:
        return 1
    return _Search(T).signed_sum(0, 0, 0)[1]


# ---------------------------------------------------------------------------
# signs


def directional_sign(C: PartialLatinHypercube, direction: int) -> int:
    if not 1 <= direction <= C.d:
        raise DomainError(f"direction must lie in [1, {C.d}]")
    out = 1
    for i in range(1, C.k + 1):
        out *= sign_of_sequence(C.c_permutation(direction, i))
    return out


def full_sign(C: PartialLatinHypercube) -> int:
    out = 1
    for l in range(1, C.d + 1):
        out *= directional_sign(C, l)
    return out


def symbol_sign(C: PartialLatinHypercube) -> int:
    out = 1
    for s in range(1, C.n + 1):
        diag = sorted(C.diagonal(s))
        for m in range(1, C.d):
            out *= sign_of_sequence([c[m] for c in diag])
    return out


def magic_set_sign(T: MagicSet) -> int:
    out = 1
    for l in range(T.d):
        out *= multi_sign([c[l] for c in T.cells])
    return out


def sign_product(C: PartialLatinHypercube) -> int:
    """sgn_1^(d-1) * sgn_2 * ... * sgn_d * ssgn; always equals magic_set_sign(C.type)."""
    out = directional_sign(C, 1) ** (C.d - 1)
    for l in range(2, C.d + 1):
        out *= directional_sign(C, l)
    return out * symbol_sign(C)


def full_cube_sign(d: int, k: int) -> int:
    """(-1)^(floor(d/2) floor(k/2) k), the sign of the full box [k]^d for d > 2."""
    return -1 if ((d // 2) * (k // 2) * k) & 1 else 1


def value_swap(C: PartialLatinHypercube, i: int, j: int) -> PartialLatinHypercube:
    if i == j:
        raise DomainError("value_swap needs two different symbols")
    n = C.n
    if not (1 <= i <= n and 1 <= j <= n):
        raise DomainError(f"symbols must lie in [1, {n}]")
    swap = {i: j, j: i}
    return PartialLatinHypercube(C.type, tuple(swap.get(v, v) for v in C.values))


# ---------------------------------------------------------------------------
# Alon-Tarsi sums


def _orbit_total(canonical_sum: int, T: MagicSet) -> int:
    # relabeling symbols by τ multiplies the full sign by sgn(τ)^(dk)
    n = T.n
    if n >= 2 and (T.d * T.k) & 1:
        return 0
    return math.factorial(n) * canonical_sum


def _prefix_tasks(T: MagicSet, depth: int, canonical: bool) -> list[tuple[tuple[int, ...], int]]:
    """Every consistent assignment of the first ``depth`` cells with its sign parity."""
    search = _Search(T, canonical)
    out: list[tuple[tuple[int, ...], int]] = []

    def rec(pos: int, top: int, parity: int) -> None:
        if pos == depth:
            out.append((tuple(search.values[:depth]), parity))
            return
        for v in search.candidates(top):
            p = search.assign(pos, v)
            if p is None:
                continue
            rec(pos + 1, max(top, v), parity ^ p)
            search.unassign(pos, v)

    rec(0, 0, 0)
    return out


def _run_prefix(args) -> tuple[tuple[int, ...], int, int]:
    T, canonical, prefix, parity = args
    search = _Search(T, canonical)
    for pos, v in enumerate(prefix):
        search.assign(pos, v)
    top = max(prefix, default=0)
    s, c = search.signed_sum(len(prefix), top, parity)
    return prefix, s, c


def _load_checkpoint(path: str) -> dict[tuple[int, ...], tuple[int, int]]:
    done: dict[tuple[int, ...], tuple[int, int]] = {}
    if not os.path.exists(path):
        return done
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                break  # torn final line from an interrupted run
            done[tuple(rec["prefix"])] = (int(rec["sum"]), int(rec["count"]))
    return done


def alon_tarsi(
    T: MagicSet,
    *,
    reduce_symbols: bool = True,
    workers: int = 1,
    prefix_depth: int | None = None,
    checkpoint: str | None = None,
    max_nodes: int | None = None,
    allow_large: bool = False,
) -> int:
    """AT_d(k, T): the sum of full signs over all partial Latin hypercubes of type T.

    ``reduce_symbols`` sums over one filling per symbol-relabeling orbit and
    scales by the orbit size, using that relabeling by τ multiplies the sign
    by sgn(τ)^(dk).  ``workers > 1`` splits the search at ``prefix_depth``
    cells (default: the first slice in direction 1) across processes;
    ``checkpoint`` names a JSON-lines file of finished prefixes so an
    interrupted run can resume.
    """
    if T.n == 0:
        return 1
    if len(T.cells) > LARGE_CELL_LIMIT and not allow_large:
        raise BudgetExceeded(
            f"{len(T.cells)} cells exceeds the default limit {LARGE_CELL_LIMIT}; pass allow_large to run it"
        )
    canonical = reduce_symbols
    if workers <= 1 and checkpoint is None:
        budget = None if max_nodes is None else [max_nodes]
        s, _ = _Search(T, canonical).signed_sum(0, 0, 0, budget)
        return _orbit_total(s, T) if canonical else s

    depth = T.n if prefix_depth is None else max(0, min(prefix_depth, len(T.cells)))
    tasks = _prefix_tasks(T, depth, canonical)
    done = _load_checkpoint(checkpoint) if checkpoint else {}
    todo = [(T, canonical, p, par) for p, par in tasks if p not in done]
    total = sum(s for s, _ in (done[p] for p, _ in tasks if p in done))
    fh = open(checkpoint, "a") if checkpoint else None
    try:
        if workers > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = pool.map(_run_prefix, todo, chunksize=max(1, len(todo) // (4 * workers)))
                for prefix, s, c in results:
                    total += s
                    if fh:
                        fh.write(json.dumps({"prefix": list(prefix), "sum": s, "count": c}) + "\n")
                        fh.flush()
        else:
            for task in todo:
                prefix, s, c = _run_prefix(task)
                total += s
                if fh:
                    fh.write(json.dumps({"prefix": list(prefix), "sum": s, "count": c}) + "\n")
                    fh.flush()
    finally:
        if fh:
            fh.flush()
            os.fsync(fh.fileno())
            fh.close()
    return _orbit_total(total, T) if canonical else total


def alon_tarsi_full(d: int, k: int, **kwargs) -> int:
    """AT_d(k) over the full box [k]^d."""
    return alon_tarsi(MagicSet.full(d, k), **kwargs)
