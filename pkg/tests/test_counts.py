import math

import numpy as np
import pytest

from rootflat.counts import (
    NUM_COLORS,
    T,
    CountMatrix,
    build_schedule,
    check_count_criterion,
    check_word_criterion,
    count_matrix_for,
    cycle_type,
    cyclic_schedule,
    is_single_cycle,
    matching_decomposition,
    skew_product_cycle_check,
    skew_product_perm,
    word_return_map,
)
from rootflat.errors import BoundaryObstruction
from rootflat.prefix import Symbol

ODD_M = list(range(7, 100, 2))


def brute_single_cycle(perm):
    # plain-python orbit walk, no shared helpers
    perm = list(perm)
    x, steps = perm[0], 1
    while x != 0:
        x = perm[x]
        steps += 1
        if steps > len(perm):
            return False
    return steps == len(perm)


def random_cycle(rng, size):
    order = rng.permutation(size)
    perm = np.empty(size, dtype=np.int64)
    perm[order] = np.roll(order, -1)
    return perm


def test_matrix_examples():
    assert count_matrix_for(7).row(0) == (1, 2, 0, 0, 0, 0, 4)
    assert count_matrix_for(13).row(6) == (5, 0, 2, 2, 2, 1, 1)
    assert count_matrix_for(9).row(0) == (1, 3, 1, 1, 1, 1, 1)


def test_matrix_m7_verbatim():
    expected = [
        [1, 2, 0, 0, 0, 0, 4],
        [1, 2, 0, 0, 0, 3, 1],
        [1, 1, 0, 0, 3, 2, 0],
        [1, 1, 0, 3, 2, 0, 0],
        [1, 1, 3, 2, 0, 0, 0],
        [1, 0, 2, 1, 1, 1, 1],
        [1, 0, 2, 1, 1, 1, 1],
    ]
    assert count_matrix_for(7).entries.tolist() == expected


def test_matrix_errors():
    with pytest.raises(ValueError):
        count_matrix_for(8)
    for m in (3, 5):
        with pytest.raises(BoundaryObstruction):
            count_matrix_for(m)


@pytest.mark.parametrize("m", ODD_M)
def test_families_sums_and_criterion(m):
    a = count_matrix_for(m).entries
    assert (a.sum(axis=0) == m).all() and (a.sum(axis=1) == m).all()
    assert (a >= 0).all()
    for row in a.tolist():
        assert check_count_criterion(row, m)
        # independent restatement of the unit conditions
        assert math.gcd(row[0], m) == 1
        for k in range(2, 7):
            assert math.gcd((row[k] - row[1]) % m, m) == 1
    if m > 7:
        assert set(a[:, 0].tolist()) == {1, 2, m - 8}
        assert math.gcd(m - 8, m) == math.gcd(8, m) == 1
        diffs = {row[k] - row[1] for row in a.tolist() for k in range(2, 7)}
        assert diffs <= {-2, -1, 1, 2}


def test_criterion_examples():
    assert check_count_criterion((1, 2, 0, 0, 0, 0, 4), 7)
    assert not check_count_criterion((3, 1, 1, 1, 1, 1, 1), 9)
    assert not check_count_criterion((0, 1, 1, 1, 1, 1, 0), 5)


def test_count_matrix_rejects_bad_sums():
    with pytest.raises(ValueError):
        CountMatrix(np.ones((7, 7), dtype=int), 6)
    with pytest.raises(ValueError):
        CountMatrix(-np.ones((7, 7), dtype=int), -7)


def test_skew_examples():
    assert not skew_product_cycle_check([1, 2, 0], [0, 0, 0], 5)
    swap = [1, 0]
    assert skew_product_cycle_check(swap, [1, 0], 3)
    perm = skew_product_perm(swap, [1, 0], 3)
    assert brute_single_cycle(perm) and len(perm) == 6
    with pytest.raises(ValueError):
        skew_product_cycle_check([0, 1], [1, 1], 3)


def test_skew_predicate_matches_traversal(rng):
    for _ in range(200):
        size = int(rng.integers(1, 13))
        m = int(rng.integers(2, 10))
        base = random_cycle(rng, size)
        drift = rng.integers(0, m, size=size)
        assert skew_product_cycle_check(base, drift, m) == brute_single_cycle(skew_product_perm(base, drift, m))


def test_is_single_cycle():
    assert not is_single_cycle(np.arange(4))
    assert is_single_cycle(np.roll(np.arange(9), 1))
    with pytest.raises(ValueError):
        is_single_cycle([0, 0, 1])
    assert cycle_type([1, 0, 2]) == [1, 2]


def test_word_identity_and_translation():
    m = 5
    assert (word_return_map([(Symbol.ZERO, 0)] * m, 3, m) == np.arange(m**3)).all()
    for k in range(m + 1):
        word = [(Symbol.DELTA, t) for t in range(k)] + [(Symbol.ZERO, 0)] * (m - k)
        assert (word_return_map(word, 1, m) == (np.arange(m) - k) % m).all()


def test_word_small_case():
    word = [(Symbol.DELTA, 0), (Symbol.num(2), 0), (Symbol.DELTA, 0)]
    perm = word_return_map(word, 2, 3)
    assert brute_single_cycle(perm) == check_word_criterion(word, 2, 3)


def test_word_rejects_symbol_above_dimension():
    with pytest.raises(ValueError):
        word_return_map([(Symbol.num(4), 0)] * 3, 3, 3)


def random_word(rng, r, m):
    alphabet = [0, 1, *range(2, r + 1), T]
    return [(int(rng.choice(alphabet)), int(rng.integers(m))) for _ in range(m)]


@pytest.mark.parametrize("m,r", [(3, 2), (3, 4), (5, 3), (7, 2)])
def test_criterion_is_sufficient(rng, m, r):
    hits = 0
    for _ in range(400):
        word = random_word(rng, r, m)
        if check_word_criterion(word, r, m):
            assert brute_single_cycle(word_return_map(word, r, m))
            hits += 1
    assert hits > 0


def test_matching_all_ones():
    layers = matching_decomposition(CountMatrix(np.ones((7, 7), dtype=int), 7))
    assert len(layers) == 7
    # seven disjoint perfect matchings of K_{7,7}: every color meets every symbol once
    for k in range(7):
        assert sorted(layer[k] for layer in layers) == list(range(7))


@pytest.mark.parametrize("m", [7, 9, 11, 13, 15, 17, 99])
def test_matching_recombination(m):
    matrix = count_matrix_for(m)
    layers = matching_decomposition(matrix)
    assert len(layers) == m
    total = np.zeros((7, 7), dtype=int)
    for layer in layers:
        assert sorted(layer) == list(range(7))
        total[np.arange(7), list(layer)] += 1
    assert (total == matrix.entries).all()
    assert layers == matching_decomposition(matrix)


def test_build_schedule():
    s7 = build_schedule(7)
    assert s7.color_counts(0) == (1, 2, 0, 0, 0, 0, 4)
    assert s7.thresholds == (0,) * 7
    s9 = build_schedule(9, list(range(9)))
    assert s9.thresholds == tuple(range(9))
    for k in range(NUM_COLORS):
        assert check_count_criterion(s9.color_counts(k), 9)
    with pytest.raises(BoundaryObstruction):
        build_schedule(5)


def test_cyclic_schedule_boundary_zero_counts():
    s = cyclic_schedule(3)
    assert [s.color_counts(k)[0] for k in range(7)] == [1, 0, 0, 0, 0, 1, 1]
