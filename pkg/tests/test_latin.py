import itertools
import json

import pytest

from tensorinv.errors import BudgetExceeded, DomainError
from tensorinv.latin import (
    MagicSet,
    PartialLatinHypercube,
    alon_tarsi,
    alon_tarsi_full,
    count_latin,
    count_magic_sets,
    directional_sign,
    enumerate_latin,
    enumerate_magic_sets,
    full_cube_sign,
    full_sign,
    magic_set_sign,
    sign_product,
    symbol_sign,
    value_swap,
)

from oracles import full_sign_bruteforce, latin_bruteforce, magic_sets_bruteforce

PARTIAL_CUBE = PartialLatinHypercube.from_map(3, 3, {
    (1, 3, 3): 1, (2, 1, 2): 1, (3, 2, 1): 1,
    (1, 1, 3): 2, (2, 2, 2): 2, (3, 3, 1): 2,
    (1, 1, 1): 3, (2, 2, 3): 3, (3, 3, 2): 3,
})

_SLICES = [
    [[3, 4, 2], [5, 6, 7], [9, 8, 1]],
    [[6, 1, 9], [8, 2, 3], [4, 7, 5]],
    [[7, 5, 8], [1, 9, 4], [2, 3, 6]],
]
FULL_CUBE = PartialLatinHypercube.from_map(
    3, 3, {(a + 1, b + 1, c + 1): _SLICES[a][b][c] for a in range(3) for b in range(3) for c in range(3)}
)

NO_FILLING = MagicSet(3, 3, (
    (1, 1, 2), (1, 1, 3), (1, 2, 3), (2, 1, 2), (2, 2, 3), (2, 3, 1), (3, 2, 1), (3, 3, 1), (3, 3, 2),
))


# --- magic sets ---------------------------------------------------------------


def test_magic_set_validation():
    with pytest.raises(DomainError):
        MagicSet(3, 2, ((1, 1, 1),))
    with pytest.raises(DomainError):
        MagicSet(2, 2, ((1, 1), (1, 1)))
    with pytest.raises(DomainError):
        MagicSet(2, 2, ((1, 3), (2, 1)))
    assert MagicSet(2, 2, ((2, 1), (1, 2))).cells == ((1, 2), (2, 1))


@pytest.mark.parametrize("d,k,n,expected", [(3, 2, 0, 1), (3, 2, 1, 4), (3, 2, 2, 8), (3, 2, 3, 4),
                                            (3, 2, 4, 1), (2, 3, 1, 6), (2, 3, 2, 6)])
def test_magic_set_counts(d, k, n, expected):
    assert count_magic_sets(d, k, n) == expected


@pytest.mark.parametrize("d,k,n", [(3, 2, 1), (3, 2, 2), (3, 2, 3), (2, 3, 2), (2, 4, 2), (3, 3, 1), (3, 3, 2)])
def test_magic_sets_match_bruteforce_in_order(d, k, n):
    got = [T.cells for T in enumerate_magic_sets(d, k, n)]
    assert got == magic_sets_bruteforce(d, k, n)


def test_antipodal_pairs():
    for T in enumerate_magic_sets(3, 2, 1):
        a, b = T.cells
        assert all(x + y == 3 for x, y in zip(a, b))


def test_full_magic_set_is_last_of_its_size():
    assert list(enumerate_magic_sets(3, 2, 4)) == [MagicSet.full(3, 2)]


def test_magic_set_json_roundtrip():
    data = json.loads(json.dumps(NO_FILLING.to_json()))
    assert MagicSet.from_json(data) == NO_FILLING
    with pytest.raises(DomainError, match="'cells'"):
        MagicSet.from_json({"d": 3, "k": 3})


# --- enumeration --------------------------------------------------------------


def test_magic_set_without_filling():
    assert NO_FILLING.n == 3
    assert list(enumerate_latin(NO_FILLING)) == []
    assert latin_bruteforce(NO_FILLING.cells, 3) == []
    assert alon_tarsi(NO_FILLING) == 0


def test_single_diagonal_has_one_filling():
    T = MagicSet(3, 3, ((1, 2, 3), (2, 3, 1), (3, 1, 2)))
    fills = list(enumerate_latin(T))
    assert len(fills) == 1 and fills[0].values == (1, 1, 1)
    assert all(directional_sign(fills[0], l) == 1 for l in (1, 2, 3))


@pytest.mark.parametrize("d,k,n", [(3, 2, 2), (3, 2, 3), (2, 3, 2), (2, 3, 3), (3, 3, 2)])
def test_enumerate_latin_matches_bruteforce(d, k, n):
    for T in enumerate_magic_sets(d, k, n):
        got = [C.value_map() for C in enumerate_latin(T)]
        want = latin_bruteforce(T.cells, n)
        assert sorted(map(lambda m: tuple(sorted(m.items())), got)) == sorted(
            tuple(sorted(m.items())) for m in want)
        for C in enumerate_latin(T):
            assert full_sign(C) == full_sign_bruteforce(C.value_map())


def test_full_cube_order_two_count():
    # the Latin cubes of order 2 are the two parity colourings of [2]^3 relabelled
    assert count_latin(MagicSet.full(3, 2)) == len(latin_bruteforce(MagicSet.full(3, 2).cells, 4))


def test_enumeration_is_deterministic():
    T = MagicSet.full(2, 3)
    assert [C.values for C in enumerate_latin(T)] == [C.values for C in enumerate_latin(T)]
    assert count_latin(T) == 12


def test_canonical_enumeration_is_orbit_representatives():
    T = MagicSet.full(2, 3)
    reps = list(enumerate_latin(T, canonical=True))
    assert len(reps) * 6 == count_latin(T)
    for C in reps:
        seen = []
        for v in C.values:
            if v not in seen:
                seen.append(v)
        assert seen == sorted(seen)


def test_hypercube_validation_and_json():
    with pytest.raises(DomainError, match="repeated"):
        PartialLatinHypercube(MagicSet.full(2, 2), (1, 1, 2, 2))
    data = json.loads(json.dumps(FULL_CUBE.to_json()))
    assert PartialLatinHypercube.from_json(data) == FULL_CUBE
    shuffled = dict(data)
    shuffled["cells"] = data["cells"][::-1]
    shuffled["values"] = data["values"][::-1]
    assert PartialLatinHypercube.from_json(shuffled) == FULL_CUBE
    with pytest.raises(DomainError, match="'values'"):
        PartialLatinHypercube.from_json(FULL_CUBE.type.to_json())


# --- signs of the worked cubes ------------------------------------------------


def test_partial_cube_c_permutations():
    C = PARTIAL_CUBE
    assert [C.c_permutation(1, i) for i in (1, 2, 3)] == [(3, 2, 1), (1, 2, 3), (1, 2, 3)]
    assert [C.c_permutation(2, i) for i in (1, 2, 3)] == [(3, 2, 1), (2, 3, 1), (1, 2, 3)]
    assert [C.c_permutation(3, i) for i in (1, 2, 3)] == [(3, 1, 2), (1, 2, 3), (2, 1, 3)]


def test_partial_cube_signs():
    C = PARTIAL_CUBE
    # the third direction multiplies sgn(3,1,2) sgn(1,2,3) sgn(2,1,3) = -1
    assert [directional_sign(C, l) for l in (1, 2, 3)] == [-1, -1, -1]
    assert full_sign(C) == -1
    assert symbol_sign(C) == -1
    assert magic_set_sign(C.type) == -1
    assert sign_product(C) == magic_set_sign(C.type)


def test_full_cube_signs():
    C = FULL_CUBE
    assert C.c_permutation(2, 1) == (3, 4, 2, 6, 1, 9, 7, 5, 8)
    assert C.c_permutation(3, 3) == (2, 7, 1, 9, 3, 5, 8, 4, 6)
    assert [directional_sign(C, l) for l in (1, 2, 3)] == [-1, -1, 1]
    assert full_sign(C) == 1
    assert symbol_sign(C) == 1
    assert sign_product(C) == -1 == full_cube_sign(3, 3) == magic_set_sign(C.type)


def test_direction_out_of_range():
    with pytest.raises(DomainError):
        directional_sign(FULL_CUBE, 4)


def test_magic_set_sign_examples():
    assert magic_set_sign(MagicSet.full(3, 3)) == -1
    assert magic_set_sign(MagicSet.full(3, 2)) == 1
    assert magic_set_sign(MagicSet(3, 3, ((1, 1, 1), (2, 2, 2), (3, 3, 3)))) == 1


@pytest.mark.parametrize("d,k", [(3, 2), (3, 3), (3, 4), (4, 2), (4, 3), (5, 2), (5, 3), (6, 2)])
def test_full_cube_sign_formula(d, k):
    assert magic_set_sign(MagicSet.full(d, k)) == full_cube_sign(d, k)


def test_square_sign_differs_from_cube_formula():
    # for d = 2 the column sequence (1,2,...,1,2,...) carries its own sign
    assert [magic_set_sign(MagicSet.full(2, k)) for k in (2, 3, 4, 5)] == [-1, -1, 1, 1]
    for C in enumerate_latin(MagicSet.full(2, 3)):
        assert sign_product(C) == -1


# --- sign products ---------------------------------------------------------------


@pytest.mark.parametrize("d,k,n", [(3, 2, n) for n in range(5)] + [(3, 3, n) for n in range(4)]
                         + [(2, 3, 2), (2, 3, 3), (4, 2, 2), (4, 2, 3)])
def test_sign_product_equals_magic_set_sign(d, k, n):
    for T in enumerate_magic_sets(d, k, n):
        s = magic_set_sign(T)
        for C in enumerate_latin(T):
            assert sign_product(C) == s


def test_full_cube_product_by_orbits():
    # relabeling symbols leaves the product unchanged, so canonical cubes suffice
    T = MagicSet.full(3, 3)
    reps = list(enumerate_latin(T, canonical=True))
    assert len(reps) == 40
    assert {sign_product(C) for C in reps} == {full_cube_sign(3, 3)}
    assert all(sign_product(C) == full_cube_sign(3, 2) == 1 for C in enumerate_latin(MagicSet.full(3, 2)))


# --- value swap -------------------------------------------------------------------


def test_value_swap_sign_change():
    for C in itertools.chain(enumerate_latin(MagicSet.full(2, 3)), enumerate_latin(MagicSet.full(3, 2))):
        for i, j in itertools.combinations(range(1, C.n + 1), 2):
            D = value_swap(C, i, j)
            assert full_sign(D) == (-1) ** (C.d * C.k) * full_sign(C)
            assert value_swap(D, i, j) == C


def test_value_swap_odd_box_flips():
    D = value_swap(PARTIAL_CUBE, 1, 2)
    assert full_sign(D) == -full_sign(PARTIAL_CUBE) == 1


def test_value_swap_rejects_equal_symbols():
    with pytest.raises(DomainError):
        value_swap(PARTIAL_CUBE, 2, 2)
    with pytest.raises(DomainError):
        value_swap(PARTIAL_CUBE, 1, 4)


# --- Alon-Tarsi sums ----------------------------------------------------------------


@pytest.mark.parametrize("d,k,expected", [(2, 2, 2), (2, 3, 0), (2, 4, 576), (3, 2, 24), (4, 2, 40320), (3, 3, 0)])
def test_alon_tarsi_full_values(d, k, expected):
    assert alon_tarsi_full(d, k) == expected


@pytest.mark.parametrize("d,k", [(2, 2), (2, 3), (3, 2), (2, 4)])
def test_orbit_reduction_matches_direct_sum(d, k):
    T = MagicSet.full(d, k)
    direct = sum(full_sign(C) for C in enumerate_latin(T))
    assert alon_tarsi(T, reduce_symbols=False) == direct == alon_tarsi(T)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_order_two_cubes_have_positive_sign(d):
    fills = list(enumerate_latin(MagicSet.full(d, 2)))
    assert fills and all(full_sign(C) == 1 for C in fills)


def test_odd_box_sums_vanish():
    for T in enumerate_magic_sets(3, 3, 2):
        fills = list(enumerate_latin(T))
        assert alon_tarsi(T) == 0 == alon_tarsi(T, reduce_symbols=False)
        signs = {C: full_sign(C) for C in fills}
        for C in fills:
            assert signs[value_swap(C, 1, 2)] == -signs[C]


def test_partial_sums_match_direct():
    for n in (1, 2, 3):
        for T in enumerate_magic_sets(3, 2, n):
            assert alon_tarsi(T) == sum(full_sign(C) for C in enumerate_latin(T))


def test_parallel_and_checkpoint_agree(tmp_path):
    T = MagicSet.full(2, 4)
    ref = alon_tarsi(T)
    assert alon_tarsi(T, workers=2) == ref
    ck = tmp_path / "at.jsonl"
    assert alon_tarsi(T, checkpoint=str(ck), prefix_depth=6) == ref
    lines = ck.read_text().splitlines()
    assert len(lines) > 1
    # drop half of the finished prefixes plus a torn line, then resume
    ck.write_text("\n".join(lines[: len(lines) // 2]) + "\n{\"prefix\": [1,")
    assert alon_tarsi(T, checkpoint=str(ck), prefix_depth=6) == ref


def test_large_instances_need_opt_in():
    with pytest.raises(BudgetExceeded):
        alon_tarsi_full(3, 4)


def test_node_budget():
    with pytest.raises(BudgetExceeded):
        alon_tarsi(MagicSet.full(3, 3), max_nodes=10)
