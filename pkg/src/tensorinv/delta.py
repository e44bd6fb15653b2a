"""Evaluation and algebra of the Δ invariants indexed by balanced tables.

For a balanced table T with rows S^1..S^d (set partitions of the columns)

    Δ_T(X) = Σ_{σ_1..σ_d} Π_i sgn_{S^i}(σ_i) Π_{j=1..M} X[σ_1(j), ..., σ_d(j)]

where σ_i only ranges over maps that are bijective on every block of S^i.
The evaluator enumerates rows 1..d-1 block by block and column by column,
pruning as soon as a partial index cannot be completed to a nonzero entry of
X.  The sum over the last row factors into one determinant per block.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import (
    BalancedTable,
    Hypermatrix,
    canonicalize_table,
    cell_rank,
    check_balanced,
    multi_sign,
    sign_of_sequence,
    table_to_set_partitions,
)
from .errors import BudgetExceeded, DomainError
from . import latin

# Default number of search nodes delta_eval may visit.
DEFAULT_MAX_NODES = 20_000_000


@dataclass(frozen=True)
class DeltaInvariant:
    table: BalancedTable

    def __post_init__(self) -> None:
        object.__setattr__(self, "table", canonicalize_table(self.table))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.table.shape

    @property
    def degree(self) -> int:
        return self.table.M

    def __call__(self, X: Hypermatrix) -> Fraction:
        return delta_eval(self.table, X)


def block_sign(S: Sequence[Sequence[int]], sigma: Sequence[int]) -> int:
    """Product over blocks of the sign of σ read on the block in ascending order.

    ``S`` lists blocks of 1-based column positions; ``sigma[j-1]`` is σ(j).
    """
    out = 1
    for block in S:
        out *= sign_of_sequence([sigma[j - 1] for j in sorted(block)])
        if out == 0:
            return 0
    return out


def _det(rows: list[list[int]]) -> int:
    """Exact integer determinant by Bareiss elimination."""
    a = [r[:] for r in rows]
    n = len(a)
    sign = 1
    prev = 1
    for c in range(n - 1):
        if a[c][c] == 0:
            for r in range(c + 1, n):
                if a[r][c]:
                    a[c], a[r] = a[r], a[c]
                    sign = -sign
                    break
            else:
                return 0
        for r in range(c + 1, n):
            for j in range(c + 1, n):
                a[r][j] = (a[r][j] * a[c][c] - a[r][c] * a[c][j]) // prev
        prev = a[c][c]
    return sign * a[n - 1][n - 1] if n else 1


class _Evaluator:
    """Picklable search state for one (table, integer tensor) pair."""

    def __init__(self, T: BalancedTable, entries: dict[tuple[int, ...], int]):
        self.d = T.d
        self.M = T.M
        self.shape = T.shape
        self.entries = entries
        parts = table_to_set_partitions(T)
        # 0-based column order for rows 0..d-2, grouped by block
        self.order: list[tuple[int, int, int]] = []
        for r in range(self.d - 1):
            for b, block in enumerate(parts[r]):
                for j in block:
                    self.order.append((r, b, j - 1))
        self.last_blocks = [[j - 1 for j in block] for block in parts[-1]]
        self.prefixes: list[set[tuple[int, ...]]] = [
            {idx[: r + 1] for idx in entries} for r in range(self.d - 1)
        ]
        self.nblocks = [len(p) for p in parts]

    def _leaf(self, sig: list[list[int]]) -> int:
        n = self.shape[-1]
        cols = [tuple(sig[r][j] for r in range(self.d - 1)) for j in range(self.M)]
        out = 1
        for block in self.last_blocks:
            mat = [[self.entries.get(cols[j] + (t,), 0) for t in range(1, n + 1)] for j in block]
            dv = _det(mat)
            if dv == 0:
                return 0
            out *= dv
        return out

    def search(self, start: int, sig: list[list[int]], used: list[list[int]], parity: int,
               budget: list[int]) -> int:
        order = self.order
        prefixes = self.prefixes

        def rec(t: int, parity: int) -> int:
            if t == len(order):
                v = self._leaf(sig)
                return -v if parity else v
            budget[0] -= 1
            if budget[0] < 0:
                raise BudgetExceeded("delta evaluation exceeded its work budget")
            r, b, j = order[t]
            n = self.shape[r]
            mask = used[r][b]
            total = 0
            for v in range(1, n + 1):
                bit = 1 << v
                if mask & bit:
                    continue
                sig[r][j] = v
                if tuple(sig[m][j] for m in range(r + 1)) not in prefixes[r]:
                    continue
                inv = (mask >> (v + 1)).bit_count()
                used[r][b] = mask | bit
                total += rec(t + 1, parity ^ (inv & 1))
                used[r][b] = mask
            sig[r][j] = 0
            return total

        return rec(start, parity)

    def fresh_state(self) -> tuple[list[list[int]], list[list[int]]]:
        sig = [[0] * self.M for _ in range(self.d)]
        used = [[0] * nb for nb in self.nblocks]
        return sig, used

    def split(self, depth: int) -> list[tuple[int, list[list[int]], list[list[int]], int]]:
        """Partial states after assigning the first ``depth`` search positions."""
        out = []
        sig, used = self.fresh_state()

        def rec(t: int, parity: int) -> None:
            if t == depth:
                out.append((t, [s[:] for s in sig], [u[:] for u in used], parity))
                return
            r, b, j = self.order[t]
            mask = used[r][b]
            for v in range(1, self.shape[r] + 1):
                bit = 1 << v
                if mask & bit:
                    continue
                sig[r][j] = v
                if tuple(sig[m][j] for m in range(r + 1)) not in self.prefixes[r]:
                    continue
                used[r][b] = mask | bit
                rec(t + 1, parity ^ ((mask >> (v + 1)).bit_count() & 1))
                used[r][b] = mask
            sig[r][j] = 0

        rec(0, 0)
        return out


def _run_task(args) -> int:
    ev, state, budget = args
    t, sig, used, parity = state
    return ev.search(t, sig, used, parity, [budget])


def _integer_entries(X: Hypermatrix) -> tuple[dict[tuple[int, ...], int], int]:
    L = 1
    for v in X.entries.values():
        L = L * v.denominator // math.gcd(L, v.denominator)
    return {idx: int(v * L) for idx, v in X.entries.items()}, L


def delta_eval(T: BalancedTable, X: Hypermatrix, *, max_nodes: int = DEFAULT_MAX_NODES,
               workers: int = 1) -> Fraction:
    """Exact value of Δ_T(X)."""
    check_balanced(T)
    if X.shape != T.shape:
        raise DomainError(f"tensor shape {X.shape} does not match table shape {T.shape}")
    if T.M == 0:
        return Fraction(1)
    entries, L = _integer_entries(X)
    if not entries:
        return Fraction(0)
    ev = _Evaluator(T, entries)
    row0 = sum(1 for r, _, _ in ev.order if r == 0)
    if workers > 1 and row0:
        states = ev.split(row0)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            total = sum(pool.map(_run_task, [(ev, s, max_nodes) for s in states]))
    else:
        sig, used = ev.fresh_state()
        total = ev.search(0, sig, used, 0, [max_nodes])
    return Fraction(total, L ** T.M)


def unit_order_sign(T: BalancedTable) -> int:
    """Sign relating Δ_T(I_n) to the Alon-Tarsi sum over the column set of T.

    For each row and each value, the columns carrying that value are read in
    table order; the sign is the product of the multi-signs of their
    lexicographic ranks.  It is +1 when the columns are sorted.
    """
    k = T.M // T.shape[0]
    ranks = [cell_rank(c, k) for c in T.columns()]
    out = 1
    for row in T.rows:
        for value in set(row):
            out *= multi_sign([ranks[j] for j, x in enumerate(row) if x == value])
    return out


def delta_eval_unit(T: BalancedTable, n: int, **kwargs) -> int:
    """Δ_T(I_n) through the Latin-hypercube sum over the columns of T."""
    check_balanced(T)
    if any(m != n for m in T.shape):
        raise DomainError(f"table shape {T.shape} is not cubic of side {n}")
    if T.M == 0:
        return 1
    cols = T.columns()
    if len(set(cols)) < len(cols):
        if T.d % 2:
            return 0
        return int(delta_eval(T, Hypermatrix.unit(n, T.d)))
    k = T.M // n
    magic = latin.MagicSet(T.d, k, tuple(cols))
    return unit_order_sign(T) * latin.alon_tarsi(magic, **kwargs)


def swap_columns(T: BalancedTable, i: int, j: int) -> BalancedTable:
    rows = []
    for r in T.rows:
        r = list(r)
        r[i - 1], r[j - 1] = r[j - 1], r[i - 1]
        rows.append(tuple(r))
    return BalancedTable(tuple(rows), T.shape)


def column_swap_sign(T: BalancedTable, i: int, j: int) -> int:
    """(-1)^ℓ with Δ_T = (-1)^ℓ Δ_{(i,j)T}; columns are 1-based."""
    if i == j:
        raise DomainError("column_swap_sign needs two different columns")
    if i > j:
        i, j = j, i
    if not 1 <= i < j <= T.M:
        raise DomainError(f"columns must lie in [1, {T.M}]")
    ell = 0
    for row in T.rows:
        x, y = row[i - 1], row[j - 1]
        seg = row[i - 1:j]
        ell += seg.count(x) + seg.count(y) - (x == y)
    return -1 if ell & 1 else 1


def hconcat(T1: BalancedTable, T2: BalancedTable) -> BalancedTable:
    """Side-by-side table whose Δ is the product Δ_{T1} Δ_{T2}."""
    if T1.shape != T2.shape:
        raise DomainError(f"shapes differ: {T1.shape} vs {T2.shape}")
    if T1.M == 0:
        return T2
    if T2.M == 0:
        return T1
    shifts = T1.blocks_per_row()
    rows = tuple(r1 + tuple(x + s for x in r2) for r1, r2, s in zip(T1.rows, T2.rows, shifts))
    return BalancedTable(rows, T1.shape)


def vconcat(T1: BalancedTable, T2: BalancedTable) -> BalancedTable:
    """Stacked table whose Δ at Y⊗Z is Δ_{T1}(Y) Δ_{T2}(Z)."""
    if T1.M != T2.M:
        raise DomainError(f"column counts differ: {T1.M} vs {T2.M}")
    return BalancedTable(T1.rows + T2.rows, T1.shape + T2.shape)


def empty_table(shape: Sequence[int]) -> BalancedTable:
    return BalancedTable(tuple(() for _ in shape), tuple(shape))


def fundamental_table(d: int, k: int) -> BalancedTable:
    """The d x k^d table whose columns are the cells of [k]^d in lexicographic order."""
    if d < 2 or k < 1:
        raise DomainError("fundamental_table needs d >= 2 and k >= 1")
    cols = list(itertools.product(range(1, k + 1), repeat=d))
    return BalancedTable.from_columns(cols, (k ** (d - 1),) * d)


def fundamental_table_reduced(d: int, k: int) -> BalancedTable:
    """fundamental_table(d, k) without its k constant columns."""
    if d < 2 or k < 2:
        raise DomainError("fundamental_table_reduced needs d >= 2 and k >= 2")
    cols = [c for c in itertools.product(range(1, k + 1), repeat=d) if len(set(c)) > 1]
    return BalancedTable.from_columns(cols, (k ** (d - 1) - 1,) * d)


def at_square_table(d: int, k: int) -> BalancedTable:
    """d x k^2 table: d-1 rows 1^k 2^k ... k^k and a last row (1 2 ... k) repeated k times."""
    if d < 2 or k < 1:
        raise DomainError("at_square_table needs d >= 2 and k >= 1")
    blocks = tuple(v for v in range(1, k + 1) for _ in range(k))
    cyclic = tuple(range(1, k + 1)) * k
    return BalancedTable.cubic((blocks,) * (d - 1) + (cyclic,), k)


def at_power_table(d: int, k: int, l: int) -> BalancedTable:
    """d x k^l table; row i < l is (1^{k^(l-i)} ... k^{k^(l-i)}) repeated k^(i-1) times,
    rows l..d are (1 2 ... k) repeated k^(l-1) times."""
    if not 1 <= l <= d or k < 1:
        raise DomainError("at_power_table needs 1 <= l <= d and k >= 1")
    rows = []
    for i in range(1, d + 1):
        if i < l:
            rep = k ** (l - i)
            rows.append(tuple(v for v in range(1, k + 1) for _ in range(rep)) * k ** (i - 1))
        else:
            rows.append(tuple(range(1, k + 1)) * k ** (l - 1))
    return BalancedTable.cubic(rows, k ** (l - 1))
