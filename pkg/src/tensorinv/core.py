"""Exact foundational types: signs, partitions, cells, balanced tables, hypermatrices.

Index convention: every public function takes and returns 1-based indices
(cells, table entries, column positions, tensor indices).  Internals convert to
0-based only where arrays are involved; nothing 0-based leaks out.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import BudgetExceeded, DomainError

# Largest number of per-row relabelings canonicalize_table will try.
CANONICAL_RELABEL_LIMIT = 2_000_000


# ---------------------------------------------------------------------------
# signs


def inversions(a: Sequence[int]) -> int:
    """Number of strict inversions ``i < j, a[i] > a[j]``."""
    inv = 0
    for i, x in enumerate(a):
        for y in a[i + 1:]:
            if x > y:
                inv += 1
    return inv


def multi_sign(a: Sequence[int]) -> int:
    """(-1) to the number of strict inversions; defined for any sequence."""
    return -1 if inversions(a) & 1 else 1


def sign_of_sequence(a: Sequence[int]) -> int:
    """Sign of ``a`` as a permutation of [n] (n = len(a)), or 0 if it is not one.

    Raises DomainError if an entry lies outside [n].
    """
    n = len(a)
    seen = [False] * (n + 1)
    repeated = False
    for x in a:
        if not 1 <= x <= n:
            raise DomainError(f"entry {x} outside [1, {n}]")
        if seen[x]:
            repeated = True
        seen[x] = True
    if repeated:
        return 0
    # cycle decomposition: sign = (-1)^(n - #cycles)
    visited = [False] * (n + 1)
    cycles = 0
    for start in range(1, n + 1):
        if not visited[start]:
            cycles += 1
            j = start
            while not visited[j]:
                visited[j] = True
                j = a[j - 1]
    return -1 if (n - cycles) & 1 else 1


# ---------------------------------------------------------------------------
# partitions


@dataclass(frozen=True, order=True)
class Partition:
    """Integer partition, parts weakly decreasing and strictly positive."""

    parts: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        parts = tuple(int(p) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        if any(p <= 0 for p in parts):
            raise DomainError(f"partition parts must be positive: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise DomainError(f"partition parts must be weakly decreasing: {parts}")

    @classmethod
    def rectangle(cls, rows: int, width: int) -> "Partition":
        """``rows x width``: ``rows`` parts all equal to ``width``."""
        if rows < 0 or width < 0:
            raise DomainError("rectangle dimensions must be nonnegative")
        if rows == 0 or width == 0:
            return cls(())
        return cls((width,) * rows)

    @property
    def size(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    @property
    def width(self) -> int:
        return self.parts[0] if self.parts else 0

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __getitem__(self, i: int) -> int:
        return self.parts[i]

    def conjugate(self) -> "Partition":
        if not self.parts:
            return self
        return Partition(tuple(sum(1 for p in self.parts if p > j) for j in range(self.parts[0])))

    def fits_in(self, rows: int, width: int) -> bool:
        return self.length <= rows and self.width <= width

    def contains(self, other: "Partition") -> bool:
        """Diagram containment ``other ⊆ self``."""
        if other.length > self.length:
            return False
        return all(o <= s for o, s in zip(other.parts, self.parts))

    def complement(self, rows: int, width: int) -> "Partition":
        """Complement inside the ``rows x width`` rectangle, ``(width - λ_rows, ..., width - λ_1)``."""
        if not self.fits_in(rows, width):
            raise DomainError(f"{self.parts} does not fit in {rows}x{width}")
        padded = self.parts + (0,) * (rows - self.length)
        return Partition(tuple(width - p for p in reversed(padded) if width - p > 0))

    def intersection_size(self, other: "Partition") -> int:
        return sum(min(a, b) for a, b in zip(self.parts, other.parts))

    def __add__(self, other: "Partition") -> "Partition":
        """Row-wise sum (the semigroup operation on partitions)."""
        n = max(self.length, other.length)
        a = self.parts + (0,) * (n - self.length)
        b = other.parts + (0,) * (n - other.length)
        return Partition(tuple(x + y for x, y in zip(a, b)))

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.parts)) + ")"


def partitions(n: int, max_part: int | None = None, max_length: int | None = None) -> Iterator[Partition]:
    """All partitions of ``n`` in reverse lexicographic order, optionally inside a box."""
    if n < 0:
        return
    mp = n if max_part is None else min(max_part, n)
    ml = n if max_length is None else max_length

    def rec(rest: int, cap: int, slots: int) -> Iterator[tuple[int, ...]]:
        if rest == 0:
            yield ()
            return
        if slots == 0:
            return
        for p in range(min(rest, cap), 0, -1):
            if p * slots < rest:
                break
            for tail in rec(rest - p, p, slots - 1):
                yield (p,) + tail

    for parts in rec(n, mp, ml):
        yield Partition(parts)


# ---------------------------------------------------------------------------
# cells of the box [k]^d


Cell = tuple[int, ...]


def box_cells(d: int, k: int) -> list[Cell]:
    """All cells of [k]^d in lexicographic order."""
    return list(itertools.product(range(1, k + 1), repeat=d))


def cell_rank(cell: Sequence[int], k: int) -> int:
    """0-based lexicographic rank of a 1-based cell in [k]^d."""
    r = 0
    for c in cell:
        r = r * k + (c - 1)
    return r


def rank_cell(rank: int, d: int, k: int) -> Cell:
    out = []
    for _ in range(d):
        rank, c = divmod(rank, k)
        out.append(c + 1)
    return tuple(reversed(out))


# ---------------------------------------------------------------------------
# balanced tables


@dataclass(frozen=True)
class BalancedTable:
    """A d x M table of positive integers indexing a Δ invariant of shape (n_1, ..., n_d).

    Construction does not check the balance condition; see ``check_balanced``.
    """

    rows: tuple[tuple[int, ...], ...]
    shape: tuple[int, ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        shape = tuple(int(n) for n in self.shape)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "shape", shape)
        if len(rows) != len(shape):
            raise DomainError(f"table has {len(rows)} rows but shape has {len(shape)} entries")
        if len({len(r) for r in rows}) > 1:
            raise DomainError("table rows have different lengths")
        if any(n <= 0 for n in shape):
            raise DomainError(f"shape entries must be positive: {shape}")

    @property
    def d(self) -> int:
        return len(self.rows)

    @property
    def M(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    @property
    def degree(self) -> int:
        return self.M

    def blocks_per_row(self) -> tuple[int, ...]:
        """k_i = M / n_i for each row."""
        return tuple(self.M // n for n in self.shape)

    def columns(self) -> list[tuple[int, ...]]:
        return [tuple(r[j] for r in self.rows) for j in range(self.M)]

    @classmethod
    def from_columns(cls, columns: Iterable[Sequence[int]], shape: Sequence[int]) -> "BalancedTable":
        cols = [tuple(c) for c in columns]
        d = len(shape)
        if any(len(c) != d for c in cols):
            raise DomainError("column length does not match shape")
        return cls(tuple(tuple(c[i] for c in cols) for i in range(d)), tuple(shape))

    @classmethod
    def cubic(cls, rows: Sequence[Sequence[int]], n: int) -> "BalancedTable":
        return cls(tuple(tuple(r) for r in rows), (n,) * len(rows))

    def to_json(self) -> dict:
        return {"shape": list(self.shape), "rows": [list(r) for r in self.rows]}

    @classmethod
    def from_json(cls, data: Mapping) -> "BalancedTable":
        for key in ("shape", "rows"):
            if key not in data:
                raise DomainError(f"balanced table JSON: missing field '{key}'")
        if not isinstance(data["shape"], list) or not all(isinstance(x, int) for x in data["shape"]):
            raise DomainError("balanced table JSON: field 'shape' must be a list of integers")
        rows = data["rows"]
        if not isinstance(rows, list) or not all(
            isinstance(r, list) and all(isinstance(x, int) for x in r) for r in rows
        ):
            raise DomainError("balanced table JSON: field 'rows' must be a list of integer lists")
        return cls(tuple(tuple(r) for r in rows), tuple(data["shape"]))

    def __str__(self) -> str:
        return "\n".join(" ".join(map(str, r)) for r in self.rows)


def check_balanced(T: BalancedTable) -> None:
    """Raise DomainError naming the first way ``T`` fails to be balanced."""
    M = T.M
    for i, (row, n) in enumerate(zip(T.rows, T.shape), start=1):
        if M % n:
            raise DomainError(f"not divisible: n_{i} = {n} does not divide M = {M}")
        k = M // n
        counts = [0] * (k + 1)
        for x in row:
            if not 1 <= x <= k:
                raise DomainError(f"multiplicity: row {i} has value {x} outside [1, {k}]")
            counts[x] += 1
        if any(c != n for c in counts[1:]):
            raise DomainError(f"multiplicity: row {i} does not contain each of [1, {k}] exactly {n} times")


def validate_balanced(T: BalancedTable) -> bool:
    try:
        check_balanced(T)
    except DomainError:
        return False
    return True


SetPartitionTuple = tuple[tuple[tuple[int, ...], ...], ...]


def table_to_set_partitions(T: BalancedTable) -> SetPartitionTuple:
    """Per row, the set partition of [M] into blocks ``{j : T[i][j] = ℓ}``.

    Blocks hold 1-based column positions in ascending order and are listed by
    their smallest element, so relabeling the values of a row leaves the result
    unchanged.
    """
    check_balanced(T)
    out = []
    for row in T.rows:
        blocks: dict[int, list[int]] = {}
        for j, x in enumerate(row, start=1):
            blocks.setdefault(x, []).append(j)
        out.append(tuple(sorted(tuple(b) for b in blocks.values())))
    return tuple(out)


def relabel_first_occurrence(row: Sequence[int]) -> tuple[int, ...]:
    labels: dict[int, int] = {}
    for x in row:
        if x not in labels:
            labels[x] = len(labels) + 1
    return tuple(labels[x] for x in row)


def canonicalize_table(T: BalancedTable) -> BalancedTable:
    """Canonical representative under per-row relabeling and column permutation.

    Returns the lexicographically least column-sorted table over all per-row
    relabelings of the values.  ``Δ`` is unchanged by relabeling and changes at
    most by a sign under column permutations.
    """
    check_balanced(T)
    ks = T.blocks_per_row()
    work = math.prod(math.factorial(k) for k in ks)
    if work > CANONICAL_RELABEL_LIMIT:
        raise BudgetExceeded(f"canonical form needs {work} relabelings (limit {CANONICAL_RELABEL_LIMIT})")
    cols = T.columns()
    best: list[tuple[int, ...]] | None = None
    for perms in itertools.product(*(itertools.permutations(range(1, k + 1)) for k in ks)):
        relabeled = sorted(tuple(p[x - 1] for p, x in zip(perms, c)) for c in cols)
        if best is None or relabeled < best:
            best = relabeled
    if best is None:  # M == 0
        return T
    return BalancedTable.from_columns(best, T.shape)


# ---------------------------------------------------------------------------
# hypermatrices


Index = tuple[int, ...]


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        raise DomainError("floating-point scalars are not accepted; use int or Fraction")
    return Fraction(x)


@dataclass(frozen=True)
class Hypermatrix:
    """Sparse exact tensor of shape (n_1, ..., n_d); absent entries are zero."""

    shape: tuple[int, ...]
    entries: Mapping[Index, Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        shape = tuple(int(n) for n in self.shape)
        if any(n <= 0 for n in shape):
            raise DomainError(f"shape entries must be positive: {shape}")
        clean: dict[Index, Fraction] = {}
        for idx, v in self.entries.items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != len(shape) or any(not 1 <= i <= n for i, n in zip(idx, shape)):
                raise DomainError(f"index {idx} outside shape {shape}")
            v = _as_fraction(v)
            if v:
                clean[idx] = v
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "entries", clean)

    @property
    def d(self) -> int:
        return len(self.shape)

    def __getitem__(self, idx: Sequence[int]) -> Fraction:
        idx = tuple(idx)
        if len(idx) != self.d or any(not 1 <= i <= n for i, n in zip(idx, self.shape)):
            raise DomainError(f"index {idx} outside shape {self.shape}")
        return self.entries.get(idx, Fraction(0))

    def nnz(self) -> int:
        return len(self.entries)

    @classmethod
    def zero(cls, shape: Sequence[int]) -> "Hypermatrix":
        return cls(tuple(shape), {})

    @classmethod
    def unit(cls, n: int, d: int) -> "Hypermatrix":
        """The unit tensor I_n: ones at (i, ..., i)."""
        return cls((n,) * d, {(i,) * d: Fraction(1) for i in range(1, n + 1)})

    @classmethod
    def from_dense(cls, array) -> "Hypermatrix":
        """From a nested list (or anything with ``tolist``) of ints / Fractions."""
        if hasattr(array, "tolist"):
            array = array.tolist()
        shape = []
        probe = array
        while isinstance(probe, (list, tuple)):
            shape.append(len(probe))
            probe = probe[0]
        entries: dict[Index, Fraction] = {}

        def walk(sub, prefix):
            if len(prefix) == len(shape):
                entries[prefix] = _as_fraction(sub)
                return
            for i, s in enumerate(sub, start=1):
                walk(s, prefix + (i,))

        walk(array, ())
        return cls(tuple(shape), entries)

    def to_dense(self) -> list:
        def build(prefix):
            if len(prefix) == self.d:
                return self.entries.get(prefix, Fraction(0))
            return [build(prefix + (i,)) for i in range(1, self.shape[len(prefix)] + 1)]

        return build(())

    def outer(self, other: "Hypermatrix") -> "Hypermatrix":
        """Outer tensor product ``self ⊗ other``."""
        return Hypermatrix(
            self.shape + other.shape,
            {a + b: x * y for a, x in self.entries.items() for b, y in other.entries.items()},
        )

    def act(self, A: Sequence[Sequence], leg: int) -> "Hypermatrix":
        """Apply the matrix ``A`` on leg ``leg`` (1-based): Y[..i..] = Σ_l A[i][l] X[..l..]."""
        n = self.shape[leg - 1]
        if len(A) != n or any(len(r) != n for r in A):
            raise DomainError(f"matrix must be {n}x{n} to act on leg {leg}")
        out: dict[Index, Fraction] = {}
        p = leg - 1
        for idx, v in self.entries.items():
            l = idx[p]
            for i in range(1, n + 1):
                a = A[i - 1][l - 1]
                if a:
                    key = idx[:p] + (i,) + idx[p + 1:]
                    out[key] = out.get(key, Fraction(0)) + _as_fraction(a) * v
        return Hypermatrix(self.shape, out)

    def swap_slices(self, leg: int, a: int, b: int) -> "Hypermatrix":
        p = leg - 1

        def sw(i):
            return b if i == a else a if i == b else i

        return Hypermatrix(
            self.shape, {idx[:p] + (sw(idx[p]),) + idx[p + 1:]: v for idx, v in self.entries.items()}
        )

    def scale(self, c) -> "Hypermatrix":
        c = _as_fraction(c)
        return Hypermatrix(self.shape, {idx: c * v for idx, v in self.entries.items()})

    def to_json(self) -> dict:
        return {
            "shape": list(self.shape),
            "entries": [
                {"idx": list(idx), "num": str(v.numerator), "den": str(v.denominator)}
                for idx, v in sorted(self.entries.items())
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Hypermatrix":
        if "shape" not in data:
            raise DomainError("hypermatrix JSON: missing field 'shape'")
        if "entries" not in data:
            raise DomainError("hypermatrix JSON: missing field 'entries'")
        entries: dict[Index, Fraction] = {}
        for pos, e in enumerate(data["entries"]):
            for key in ("idx", "num"):
                if key not in e:
                    raise DomainError(f"hypermatrix JSON: entries[{pos}] missing field '{key}'")
            try:
                num = int(e["num"])
                den = int(e.get("den", "1"))
            except (TypeError, ValueError):
                raise DomainError(f"hypermatrix JSON: entries[{pos}] field 'num'/'den' is not a decimal integer")
            if den == 0:
                raise DomainError(f"hypermatrix JSON: entries[{pos}] field 'den' is zero")
            entries[tuple(e["idx"])] = Fraction(num, den)
        return cls(tuple(data["shape"]), entries)


def dumps(obj) -> str:
    """Deterministic compact JSON for library objects."""
    return json.dumps(obj.to_json() if hasattr(obj, "to_json") else obj, sort_keys=True)
