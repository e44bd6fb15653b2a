import itertools
import json
import math
import random

import pytest

from tensorinv.core import BalancedTable, Hypermatrix, Partition, partitions
from tensorinv.delta import delta_eval
from tensorinv.errors import BudgetExceeded, DomainError, Inconclusive, InvariantViolation
from tensorinv.kronecker import (
    CoefficientCache,
    character,
    class_size,
    delta_degree,
    delta_lower_bound,
    g_rect,
    g_rect_kernel,
    g_recursive,
    invariant_dimension,
    kronecker_char,
    rect,
)
from tensorinv.linalg import integer_rank, nullity

from oracles import balanced_rows, hook_dimension


def P(*parts):
    return Partition(tuple(parts))


def g(*lams):
    return kronecker_char(lams)


def all_partitions(m):
    return list(partitions(m))


# --- characters -------------------------------------------------------------------


def test_class_sizes_sum_to_factorial():
    for m in range(9):
        assert sum(class_size(mu) for mu in partitions(m)) == math.factorial(m)
    assert class_size(P(2, 1)) == 3


@pytest.mark.parametrize("m", range(1, 9))
def test_character_on_identity_is_dimension(m):
    ident = (1,) * m
    for lam in partitions(m):
        assert character(lam, ident) == hook_dimension(lam.parts)


@pytest.mark.parametrize("m", range(1, 8))
def test_trivial_and_sign_characters(m):
    for mu in partitions(m):
        assert character((m,), mu) == 1
        sign = (-1) ** (m - mu.length)
        assert character((1,) * m, mu) == sign


@pytest.mark.parametrize("m", range(1, 8))
def test_character_orthogonality(m):
    parts = all_partitions(m)
    for lam, nu in itertools.product(parts, repeat=2):
        s = sum(class_size(mu) * character(lam, mu) * character(nu, mu) for mu in parts)
        assert s == (math.factorial(m) if lam == nu else 0)


def test_character_examples_and_errors():
    assert character((2, 1), (1, 1, 1)) == 2
    assert character((2, 1), (3,)) == -1
    assert character((2, 1), (2, 1)) == 0
    with pytest.raises(DomainError):
        character((2, 1), (2,))


# --- three-way coefficients ----------------------------------------------------------


def test_coefficient_examples():
    assert g(P(2, 2), P(2, 2), P(2, 2)) == 1
    assert g(rect(4, 4), rect(4, 4), rect(4, 4)) == 5
    assert g(P(2, 1), P(2, 1), P(2, 1)) == 1
    assert g(P(2, 1), P(2, 1), P(3)) == 1


def test_coefficient_errors():
    with pytest.raises(DomainError):
        g(P(2, 1), P(2))
    with pytest.raises(DomainError):
        kronecker_char([P(2)])
    with pytest.raises(BudgetExceeded):
        kronecker_char([rect(5, 5)] * 3, max_size=24)


def test_two_argument_is_orthogonality():
    for lam, mu in itertools.product(all_partitions(5), repeat=2):
        assert kronecker_char([lam, mu]) == (1 if lam == mu else 0)


def _random_triple(rng, m):
    parts = all_partitions(m)
    return rng.choice(parts), rng.choice(parts), rng.choice(parts)


def test_s3_symmetry():
    rng = random.Random(1)
    for _ in range(100):
        trip = _random_triple(rng, rng.randint(1, 8))
        ref = g(*trip)
        for perm in itertools.permutations(trip):
            assert g(*perm) == ref


def test_conjugating_two_arguments():
    rng = random.Random(2)
    for _ in range(100):
        a, b, c = _random_triple(rng, rng.randint(1, 8))
        ref = g(a, b, c)
        assert g(a, b.conjugate(), c.conjugate()) == ref
        assert g(a.conjugate(), b.conjugate(), c) == ref


@pytest.mark.parametrize("m", range(1, 7))
def test_trivial_and_sign_rows(m):
    parts = all_partitions(m)
    for lam, mu in itertools.product(parts, repeat=2):
        assert g(rect(1, m), lam, mu) == (1 if lam == mu else 0)
        assert g(rect(m, 1), lam, mu) == (1 if lam == mu.conjugate() else 0)


@pytest.mark.parametrize("k", range(1, 6))
def test_square_positivity(k):
    assert g(rect(k, k), rect(k, k), rect(k, k)) > 0


def _small(m, max_length=None, max_part=None):
    return list(partitions(m, max_part=max_part, max_length=max_length))


def test_rectangle_row_addition():
    count = 0
    for a, b, c in itertools.product((1, 2), repeat=3):
        for m in range(0, 7):
            lams = _small(m, max_length=a)
            mus = _small(m, max_length=b)
            nus = _small(m, max_length=a * b)
            for lam, mu, nu in itertools.product(lams, mus, nus):
                if m + a * b * c > 14:
                    continue
                lhs = g(lam, mu, nu) if m else 1
                rhs = g(lam + rect(a, b * c), mu + rect(b, a * c), nu + rect(a * b, c))
                assert lhs == rhs
                count += 1
    assert count > 100


def test_rectangle_complement():
    count = 0
    for a, b, c in itertools.product((1, 2), repeat=3):
        total = a * b * c
        for m in range(0, total + 1):
            if m > 6:
                continue
            lams = _small(m, max_length=b * c, max_part=a)
            mus = _small(m, max_length=a * c, max_part=b)
            nus = _small(m, max_length=a * b, max_part=c)
            for lam, mu, nu in itertools.product(lams, mus, nus):
                lhs = g(lam, mu, nu) if m else 1
                comp = [lam.complement(b * c, a), mu.complement(a * c, b), nu.complement(a * b, c)]
                rhs = g(*comp) if total - m else 1
                assert lhs == rhs
                count += 1
    assert count > 20


@pytest.mark.parametrize("m", range(1, 7))
def test_first_row_bound(m):
    parts = all_partitions(m)
    for mu, nu in itertools.product(parts, repeat=2):
        inter = sum(min(x, y) for x, y in zip(mu.parts, nu.parts))
        top = max(lam.parts[0] for lam in parts if g(lam, mu, nu) > 0)
        assert top == inter == mu.intersection_size(nu)


def test_length_bound():
    for m in range(1, 7):
        for lam, mu, nu in itertools.product(all_partitions(m), repeat=3):
            if g(lam, mu, nu):
                assert lam.length <= mu.length * nu.length


def test_semigroup():
    rng = random.Random(3)
    positive = {m: [t for t in itertools.product(all_partitions(m), repeat=3) if g(*t)] for m in range(1, 6)}
    for _ in range(200):
        m1, m2 = rng.randint(1, 5), rng.randint(1, 5)
        (a, b, c), (x, y, z) = rng.choice(positive[m1]), rng.choice(positive[m2])
        assert g(a + x, b + y, c + z) > 0


# --- rectangular sequences --------------------------------------------------------------


def test_g_rect_examples():
    assert g_rect(5, 2, 2) == 5
    assert g_rect(3, 5, 4) == 6
    for d, k in [(3, 2), (3, 5), (5, 3)]:
        assert g_rect(d, 0, k) == 1
    with pytest.raises(DomainError):
        g_rect(1, 2, 2)


@pytest.mark.parametrize("d,k", [(3, 2), (3, 3), (5, 2)])
def test_mirror_symmetry(d, k):
    top = k ** (d - 1)
    vals = [g_rect(d, n, k) for n in range(top + 1)]
    assert vals == vals[::-1]
    assert vals[0] == vals[-1] == 1


@pytest.mark.parametrize("n", [6, 7])
def test_mirror_symmetry_k4(n):
    assert g_rect(3, n, 4) == g_rect(3, 16 - n, 4, max_size=64)


@pytest.mark.parametrize("d,k", [(3, 2), (3, 3), (5, 2)])
def test_binomial_bound_and_vanishing(d, k):
    top = k ** (d - 1)
    for n in range(top + 1):
        assert g_rect(d, n, k) <= math.comb(k ** d, n * k)
    for n in (top + 1, top + 2):
        if n * k <= 32:
            assert g_rect(d, n, k) == 0
        assert g_rect_kernel(d, n, k) == 0


def test_odd_side_two_rows_vanish():
    assert g_rect(3, 2, 3) == 0 == g_rect(3, 7, 3)


@pytest.mark.parametrize("d,k,n", [(3, 2, n) for n in range(5)] + [(3, 3, n) for n in (0, 1, 2, 3, 6, 7, 8, 9)]
                         + [(5, 2, n) for n in range(4)])
def test_kernel_matches_characters(d, k, n):
    assert g_rect_kernel(d, n, k) == g_rect(d, n, k)


def test_kernel_budget():
    with pytest.raises(BudgetExceeded):
        g_rect_kernel(3, 4, 3, max_basis=100)


@pytest.mark.parametrize("n", range(7))
def test_recursive_matches_characters_d5_k2(n):
    assert g_recursive(5, n, 2) == g_rect(5, n, 2)


@pytest.mark.parametrize("n", range(3))
def test_recursive_matches_characters_d5_k3(n):
    assert g_recursive(5, n, 3) == g_rect(5, n, 3)


def test_recursive_examples_and_domain():
    assert g_recursive(5, 1, 2) == 1
    assert g_recursive(5, 3, 2) == 11
    assert g_recursive(5, 2, 3) == 1
    assert g_recursive(3, 4, 4) == 5
    with pytest.raises(DomainError):
        g_recursive(4, 1, 2)


# --- invariant dimensions ------------------------------------------------------------


def _tables(shape, M):
    rows = [balanced_rows(M, n) for n in shape]
    # permuting columns changes Δ only by a sign, so the first row can be fixed
    rows[0] = [tuple(v for v in range(1, M // shape[0] + 1) for _ in range(shape[0]))]
    for combo in itertools.product(*rows):
        yield BalancedTable(tuple(combo), tuple(shape))


def _span_dimension(shape, M, samples, seed=0):
    rng = random.Random(seed)
    points = []
    for _ in range(samples):
        entries = {idx: rng.randint(-3, 3) for idx in itertools.product(*(range(1, n + 1) for n in shape))}
        points.append(Hypermatrix(tuple(shape), entries))
    vectors = []
    for T in _tables(shape, M):
        vectors.append({j: int(delta_eval(T, X)) for j, X in enumerate(points)})
    return integer_rank(vectors)


@pytest.mark.parametrize("shape,M", [((2, 2, 2), 2), ((2, 2, 2), 4), ((2, 2, 4), 4), ((3, 3, 3), 3),
                                     ((3, 3, 3), 6), ((2, 2, 2, 2), 2), ((2, 2, 2, 2), 4)])
def test_invariant_dimension_matches_span_of_deltas(shape, M):
    dim = invariant_dimension(shape, M)
    assert _span_dimension(shape, M, samples=dim + 4) == dim


def test_invariant_dimension_edge_cases():
    assert invariant_dimension((2, 2, 2), 0) == 1
    assert invariant_dimension((2, 2, 3), 4) == 0
    assert invariant_dimension((2, 2, 2, 2), 2) == 1


# --- degrees ---------------------------------------------------------------------


def test_lower_bound_examples():
    assert delta_lower_bound([7, 7, 7]) == 21
    assert delta_lower_bound([4, 4, 4]) == 8
    assert delta_lower_bound([16] * 5) == 32
    assert delta_lower_bound([2, 2, 4]) == 4
    with pytest.raises(DomainError):
        delta_lower_bound([2, 2])
    with pytest.raises(DomainError):
        delta_lower_bound([2, 2, 2, 2])


def test_lower_bound_is_cubic_formula():
    for d in (3, 5):
        for n in range(1, 40):
            root = next(r for r in range(1, n + 2) if r ** (d - 1) >= n)
            assert delta_lower_bound([n] * d) == n * root


@pytest.mark.parametrize("n,expected", [(1, 1), (2, 4), (3, 6), (4, 8), (5, 15), (6, 18)])
def test_delta_degree_small(n, expected):
    assert delta_degree(3, n) == expected


def test_delta_degree_seven():
    assert delta_degree(3, 7) == 28


def test_delta_degree_inconclusive():
    with pytest.raises(Inconclusive):
        delta_degree(3, 7, max_size=24)
    with pytest.raises(DomainError):
        delta_degree(4, 3)


def test_delta_degree_within_square_bound():
    for n in range(1, 7):
        assert delta_lower_bound([n] * 3) <= delta_degree(3, n) <= n * n or n == 1


# --- cache ---------------------------------------------------------------------------


def test_cache_roundtrip(tmp_path):
    path = tmp_path / "kron.jsonl"
    with CoefficientCache(path) as cache:
        v = g_rect(3, 4, 4, cache=cache)
        g_recursive(5, 2, 2, cache=cache)
        snapshot = dict(cache.items())
    first = path.read_bytes()
    for line in first.decode().splitlines():
        rec = json.loads(line)
        assert set(rec) == {"key", "value"}
        assert rec["key"] == sorted(rec["key"])
    with CoefficientCache(path) as again:
        assert dict(again.items()) == snapshot
        assert g_rect(3, 4, 4, cache=again) == v == 5
        assert again.get([rect(4, 4)] * 3) == 5
    assert path.read_bytes() == first  # hits append nothing


def test_cache_canonical_keys_and_conflicts(tmp_path):
    cache = CoefficientCache(tmp_path / "c.jsonl")
    cache.put([P(2, 1), P(3), P(1, 1, 1)], 0)
    assert cache.get([P(1, 1, 1), P(2, 1), P(3)]) == 0
    cache.put([P(3), P(2, 1), P(1, 1, 1)], 0)
    assert len(cache) == 1
    with pytest.raises(InvariantViolation):
        cache.put([P(3), P(2, 1), P(1, 1, 1)], 1)
    cache.close()


def test_cache_tolerates_torn_line(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text('{"key": [[2, 2], [2, 2], [2, 2]], "value": "1"}\n{"key": [[3')
    cache = CoefficientCache(path)
    assert cache.get([P(2, 2)] * 3) == 1
    assert len(cache) == 1


def test_in_memory_cache():
    cache = CoefficientCache(None)
    assert g_rect(3, 3, 3, cache=cache) == 1
    assert len(cache) == 1


# --- linear algebra helper --------------------------------------------------------------


def test_integer_rank_small():
    assert integer_rank([{0: 2, 1: 4}, {0: 1, 1: 2}]) == 1
    assert integer_rank([{0: 1}, {1: 1}, {0: 1, 1: 1}]) == 2
    assert integer_rank([{}]) == 0
    assert nullity([{0: 1}, {0: -3}, {1: 5}]) == 1


def test_integer_rank_matches_fraction_elimination():
    from fractions import Fraction

    def rank_q(rows, ncols):
        m = [[Fraction(r.get(j, 0)) for j in range(ncols)] for r in rows]
        rank = 0
        for col in range(ncols):
            piv = next((i for i in range(rank, len(m)) if m[i][col]), None)
            if piv is None:
                continue
            m[rank], m[piv] = m[piv], m[rank]
            for i in range(len(m)):
                if i != rank and m[i][col]:
                    f = m[i][col] / m[rank][col]
                    m[i] = [x - f * y for x, y in zip(m[i], m[rank])]
            rank += 1
        return rank

    rng = random.Random(9)
    for _ in range(200):
        rows = [{j: rng.randint(-4, 4) for j in range(6) if rng.random() < 0.5} for _ in range(rng.randint(1, 7))]
        assert integer_rank(rows) == rank_q(rows, 6)
