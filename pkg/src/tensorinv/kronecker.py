"""Kronecker coefficients of the symmetric group and the sequences g_d(n, k), δ_d(n).

Three independent routes to g_d(n, k):

* ``g_rect``: the character inner product over conjugacy classes, with
  irreducible characters from the Murnaghan-Nakayama rule;
* ``g_rect_kernel``: the dimension of the common kernel of the raising
  operators on the weight space spanned by magic sets;
* ``g_recursive``: a chain of three-way coefficients through partitions
  confined to rectangles ``k^i x k^(d-i)``.

Notation: ``rect(a, b)`` is a x b, the partition with ``a`` parts equal to ``b``.
"""

from __future__ import annotations

import json
import math
import os
import threading
from collections import Counter
from functools import lru_cache
from typing import Iterable, Sequence

from .core import Partition, partitions
from .errors import BudgetExceeded, DomainError, Inconclusive, InvariantViolation

DEFAULT_MAX_PARTITION_SIZE = 32
DEFAULT_MAX_BASIS = 200_000

PartsKey = tuple[tuple[int, ...], ...]


def rect(a: int, b: int) -> Partition:
    return Partition.rectangle(a, b)


def _parts(p) -> tuple[int, ...]:
    if isinstance(p, Partition):
        return p.parts
    return Partition(tuple(p)).parts


# ---------------------------------------------------------------------------
# characters


def class_size(mu: Partition | Sequence[int]) -> int:
    """Size of the conjugacy class of cycle type μ in S_|μ|."""
    parts = _parts(mu)
    z = 1
    for j, m in Counter(parts).items():
        z *= j ** m * math.factorial(m)
    return math.factorial(sum(parts)) // z


@lru_cache(maxsize=None)
def _chi(lam: tuple[int, ...], mu: tuple[int, ...]) -> int:
    # strip a border strip of length mu[0] using the beta-set of lam
    if not mu:
        return 1
    r, rest = mu[0], mu[1:]
    L = len(lam)
    beta = [lam[i] + (L - 1 - i) for i in range(L)]
    present = set(beta)
    total = 0
    for x in beta:
        y = x - r
        if y < 0 or y in present:
            continue
        height = sum(1 for b in beta if y < b < x)
        nb = sorted((b for b in beta if b != x), reverse=True)
        nb.append(y)
        nb.sort(reverse=True)
        new = tuple(v for v in (nb[i] - (L - 1 - i) for i in range(L)) if v > 0)
        c = _chi(new, rest)
        if c:
            total += -c if height & 1 else c
    return total


def character(lam: Partition | Sequence[int], mu: Partition | Sequence[int]) -> int:
    """χ_λ evaluated on the class of cycle type μ."""
    lp, mp = _parts(lam), _parts(mu)
    if sum(lp) != sum(mp):
        raise DomainError(f"sizes differ: |λ| = {sum(lp)}, |μ| = {sum(mp)}")
    return _chi(lp, mp)


# ---------------------------------------------------------------------------
# persistent cache


class CoefficientCache:
    """Append-only JSON-lines store of Kronecker coefficients.

    Each line is ``{"key": [[parts], ...], "value": "<decimal>"}`` with the
    partitions of the key sorted, so argument order does not matter.
    Writes go through one lock; the file is fsynced on close.
    """

    def __init__(self, path: str | os.PathLike | None):
        self.path = os.fspath(path) if path is not None else None
        self._data: dict[PartsKey, int] = {}
        self._lock = threading.Lock()
        self._fh = None
        if self.path and os.path.exists(self.path):
            with open(self.path) as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        rec = json.loads(line)
                    except json.JSONDecodeError:
                        continue  # torn trailing line
                    self._data[self.canonical_key(rec["key"])] = int(rec["value"])

    @staticmethod
    def canonical_key(parts: Iterable) -> PartsKey:
        return tuple(sorted(_parts(p) for p in parts))

    def get(self, parts: Iterable) -> int | None:
        return self._data.get(self.canonical_key(parts))

    def put(self, parts: Iterable, value: int) -> None:
        key = self.canonical_key(parts)
        with self._lock:
            old = self._data.get(key)
            if old is not None:
                if old != value:
                    raise InvariantViolation(f"cache conflict for {key}: {old} != {value}")
                return
            self._data[key] = value
            if self.path:
                if self._fh is None:
                    self._fh = open(self.path, "a")
                self._fh.write(json.dumps({"key": [list(p) for p in key], "value": str(value)}) + "\n")
                self._fh.flush()

    def __len__(self) -> int:
        return len(self._data)

    def items(self):
        return self._data.items()

    def close(self) -> None:
        with self._lock:
            if self._fh is not None:
                self._fh.flush()
                os.fsync(self._fh.fileno())
                self._fh.close()
                self._fh = None

    def __enter__(self) -> "CoefficientCache":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


# ---------------------------------------------------------------------------
# Kronecker coefficients


def kronecker_char(
    lams: Sequence[Partition | Sequence[int]],
    *,
    max_size: int = DEFAULT_MAX_PARTITION_SIZE,
    cache: CoefficientCache | None = None,
) -> int:
    """Multiplicity of the trivial representation in ⊗ [λ_i]; for three arguments
    this is the Kronecker coefficient g(λ_1, λ_2, λ_3)."""
    parts = [_parts(p) for p in lams]
    if len(parts) < 2:
        raise DomainError("at least two partitions are required")
    m = sum(parts[0])
    if any(sum(p) != m for p in parts):
        raise DomainError(f"partitions have different sizes: {[sum(p) for p in parts]}")
    if m > max_size:
        raise BudgetExceeded(f"partition size {m} exceeds the budget {max_size}")
    if cache is not None:
        hit = cache.get(parts)
        if hit is not None:
            return hit
    total = 0
    for mu in partitions(m):
        prod = 1
        for p in parts:
            c = _chi(p, mu.parts)
            if c == 0:
                prod = 0
                break
            prod *= c
        if prod:
            total += class_size(mu) * prod
    value, rem = divmod(total, math.factorial(m))
    if rem or value < 0:
        raise InvariantViolation(f"character sum {total} is not a nonnegative multiple of {m}!")
    if cache is not None:
        cache.put(parts, value)
    return value


def g_rect(d: int, n: int, k: int, *, max_size: int = DEFAULT_MAX_PARTITION_SIZE,
           cache: CoefficientCache | None = None) -> int:
    """g_d(n, k): the coefficient at d copies of n x k, by characters."""
    if d < 2:
        raise DomainError("d must be at least 2")
    if n < 0 or k < 0:
        raise DomainError("n and k must be nonnegative")
    if n == 0 or k == 0:
        return 1
    return kronecker_char([rect(n, k)] * d, max_size=max_size, cache=cache)


def invariant_dimension(dims: Sequence[int], m: int, **kwargs) -> int:
    """Dimension of the degree-m invariants of n_1 x ... x n_d tensors:
    the coefficient at the partitions n_i x (m / n_i), zero if some n_i does not divide m."""
    if m == 0:
        return 1
    if any(m % n for n in dims):
        return 0
    return kronecker_char([rect(n, m // n) for n in dims], **kwargs)


def g_rect_kernel(d: int, n: int, k: int, *, max_basis: int = DEFAULT_MAX_BASIS) -> int:
    """g_d(n, k) as the nullity of the stacked raising operators on B_{d,k}(n)."""
    from . import exterior, latin, linalg

    if d < 2 or k < 1:
        raise DomainError("g_rect_kernel needs d >= 2 and k >= 1")
    if not 0 <= n <= k ** (d - 1):
        return 0  # no magic set has this marginal, so the weight space is zero
    count = 0
    for _ in latin.enumerate_magic_sets(d, k, n):
        count += 1
        if count > max_basis:
            raise BudgetExceeded(f"weight space has more than {max_basis} basis vectors")
    _, images = exterior.raising_images(d, k, n)
    return linalg.nullity(images)


def g_recursive(d: int, n: int, k: int, *, max_size: int = DEFAULT_MAX_PARTITION_SIZE,
                cache: CoefficientCache | None = None) -> int:
    """g_d(n, k) for odd d >= 5 as a sum over chains k x n = μ1, μ2, ..., μ(d-1) = n x k
    of Π g(μi, k x n, μ(i+1)), with μi inside the k^i x k^(d-i) rectangle."""
    if d < 3 or d % 2 == 0:
        raise DomainError("g_recursive needs odd d >= 3")
    if d == 3 or n == 0 or k == 0:
        return g_rect(d, n, k, max_size=max_size, cache=cache)
    m = n * k
    if m > max_size:
        raise BudgetExceeded(f"partition size {m} exceeds the budget {max_size}")
    kn = rect(k, n)

    def g3(a: Partition, b: Partition) -> int:
        return kronecker_char([a, kn, b], max_size=max_size, cache=cache)

    layer: dict[Partition, int] = {kn: 1}
    for i in range(2, d - 1):
        rows, width = k ** i, k ** (d - i)
        nxt: dict[Partition, int] = {}
        candidates = list(partitions(m, max_part=width, max_length=rows))
        for mu, weight in layer.items():
            for nu in candidates:
                c = g3(mu, nu)
                if c:
                    nxt[nu] = nxt.get(nu, 0) + weight * c
        layer = nxt
    last = rect(n, k)
    return sum(weight * g3(mu, last) for mu, weight in layer.items())


# ---------------------------------------------------------------------------
# degrees


def _ceil_root(x: int, r: int) -> int:
    """Smallest integer y >= 0 with y**r >= x."""
    if x <= 0:
        return 0
    lo, hi = 0, 1
    while hi ** r < x:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** r >= x:
            hi = mid
        else:
            lo = mid + 1
    return lo


def delta_lower_bound(dims: Sequence[int]) -> int:
    """Least multiple of lcm(n_i) that is at least (n_1 ⋯ n_d)^(1/(d-1))."""
    d = len(dims)
    if d < 3 or d % 2 == 0:
        raise DomainError("the degree lower bound is stated for odd d >= 3")
    if any(n <= 0 for n in dims):
        raise DomainError("dimensions must be positive")
    L = math.lcm(*dims)
    r = _ceil_root(math.prod(dims), d - 1)
    return L * max(1, -(-r // L))


def delta_degree(d: int, n: int, *, max_size: int = DEFAULT_MAX_PARTITION_SIZE,
                 cache: CoefficientCache | None = None) -> int:
    """δ_d(n): the least degree nk with g_d(n, k) > 0.

    Raises Inconclusive when the budget runs out before a positive value is found.
    """
    if d < 3 or d % 2 == 0:
        raise DomainError("delta_degree needs odd d >= 3")
    if n < 1:
        raise DomainError("n must be positive")
    k = delta_lower_bound([n] * d) // n
    while True:
        if n * k > max_size:
            raise Inconclusive(
                f"no positive coefficient found up to degree {n * (k - 1)}; degree {n * k} exceeds the budget {max_size}"
            )
        if g_rect(d, n, k, max_size=max_size, cache=cache) > 0:
            return n * k
        k += 1
