import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rootflat.prefix import (
    Symbol,
    apply_symbol,
    dictionary_step_check,
    invert_symbol,
    labels_array,
    layer_label_census,
    phi,
    phi_inv,
    prefix_coords,
    prefix_vector,
    rho,
    rho_array,
    subtract_prefix,
)
from rootflat.torus import ModVec, RootFlatPoint, iter_rootflat, rootflat_coords


def suffix_sums(w, m):
    # independent oracle: z_j is the sum of the last j coordinates
    return tuple(sum(w[7 - j :]) % m for j in range(1, 7))


def test_phi_examples():
    assert phi(RootFlatPoint((0,) * 7, 7)) == (0,) * 6
    assert phi(RootFlatPoint((6, 0, 0, 0, 0, 0, 1), 7)) == (1,) * 6


def test_phi_rejects_wrong_dimension():
    with pytest.raises(ValueError):
        phi(RootFlatPoint((1, 2, 0), 3))


def test_phi_bijective_exhaustive_m3():
    images = set()
    for w in iter_rootflat(7, 3):
        z = phi(w)
        assert z == suffix_sums(w.entries, 3)
        assert phi_inv(z, 3).entries == w.entries
        images.add(z)
    assert len(images) == 3**6


def test_phi_roundtrip_random_m9(rng):
    for idx in rng.integers(0, 9**6, size=1000):
        w = RootFlatPoint.from_index(int(idx), 7, 9)
        assert phi_inv(phi(w), 9).entries == w.entries


def test_prefix_coords_matches_scalar():
    coords = rootflat_coords(7, 5)
    z = prefix_coords(coords, 5)
    for idx in (0, 17, 4000, 15624):
        assert tuple(z[idx].tolist()) == suffix_sums(tuple(coords[idx].tolist()), 5)


def test_dictionary_examples():
    w = RootFlatPoint.from_index(1234, 7, 7)
    z = phi(w)
    assert dictionary_step_check(w, 6) == z
    assert dictionary_step_check(w, 0) == tuple((v - 1) % 7 for v in z)
    assert dictionary_step_check(w, 5) == ((z[0] - 1) % 7,) + z[1:]


def test_dictionary_exhaustive_m3():
    for w in iter_rootflat(7, 3):
        for i in range(7):
            dictionary_step_check(w, i)


def test_rho_examples():
    assert rho(0, (0, 3, 1, 2, 2, 2)) == 1
    assert rho(0, (1,) * 6) == 6
    assert rho(2, (1, 2, 2, 0, 0, 0)) == 2
    assert rho(5, (1, 2, 5, 5), r=2) == 2


def test_apply_symbol_examples():
    z = (4, 0, 2, 1, 3, 3)
    assert apply_symbol(Symbol.ZERO, 0, z, 7) == (z, 0)
    assert apply_symbol(Symbol.DELTA, 0, (1,) * 6, 7) == ((0,) * 6, 6)
    image, label = apply_symbol(Symbol.num(4), 0, (0, 1, 1, 1, 1, 1), 7)
    assert label == 4 and image == (6, 0, 0, 0, 1, 1)
    # rho = 5 >= 4 selects the shorter prefix
    image, label = apply_symbol(Symbol.num(4), 0, (1, 1, 1, 1, 0, 1), 7)
    assert label == 3 and image == (0, 0, 0, 1, 0, 1)


def test_invert_symbol_examples():
    assert invert_symbol(Symbol.ZERO, 1, (2, 0, 1, 0, 0, 0), 3) == (2, 0, 1, 0, 0, 0)
    assert invert_symbol(Symbol.DELTA, 1, (0,) * 6, 3) == (1, 0, 0, 0, 0, 0)


@pytest.mark.parametrize("m", [3])
def test_inverse_roundtrip_exhaustive(m):
    space = list(itertools.product(range(m), repeat=6))
    for tau in range(m):
        for s in Symbol:
            image = set()
            for z in space:
                y, _ = apply_symbol(s, tau, z, m)
                assert invert_symbol(s, tau, y, m) == z
                assert apply_symbol(s, tau, invert_symbol(s, tau, z, m), m)[0] == z
                image.add(y)
            assert len(image) == m**6


def test_census_examples():
    assert layer_label_census(0, (1,) * 6, 7) == Counter(range(7))
    # rho = r case: labels {0, r} + {a-1 : a <= r} + {a : a > r}
    for r in range(1, 7):
        z = tuple(0 if i == r - 1 else 1 for i in range(6))
        labels = {apply_symbol(s, 0, z, 7)[1] for s in Symbol}
        expected = {0, r} | {a - 1 for a in range(2, r + 1)} | {a for a in range(r + 1, 7)}
        assert labels == expected == set(range(7))


def test_census_exhaustive_m3():
    for z in itertools.product(range(3), repeat=6):
        for tau in range(3):
            layer_label_census(tau, z, 3)


@given(st.integers(3, 15), st.data())
def test_vector_forms_agree_with_scalar(m, data):
    z = tuple(data.draw(st.integers(0, m - 1)) for _ in range(6))
    tau = data.draw(st.integers(0, m - 1))
    arr = np.array([z])
    r = rho_array(tau, arr)
    assert int(r[0]) == rho(tau, z)
    for s in Symbol:
        label = labels_array(s, r, 6)
        image = subtract_prefix(arr, label, m)
        assert (tuple(image[0].tolist()), int(label[0])) == apply_symbol(s, tau, z, m)


@pytest.mark.parametrize("m", [3, 5, 7])
def test_no_tau_count(m):
    for r in range(1, 6 if m < 7 else 5):
        space = np.array(list(itertools.product(range(m), repeat=r)))
        for tau in range(m):
            assert int((space != tau).all(axis=1).sum()) == (m - 1) ** r


def test_prefix_vector():
    assert prefix_vector(0) == (0,) * 6
    assert prefix_vector(3) == (1, 1, 1, 0, 0, 0)
    assert ModVec.basis(0, 7, 7).n == 7


@given(st.integers(3, 11), st.data())
def test_invert_array_matches_scalar(m, data):
    from rootflat.prefix import invert_array

    ys = [tuple(data.draw(st.integers(0, m - 1)) for _ in range(6)) for _ in range(5)]
    tau = data.draw(st.integers(0, m - 1))
    arr = np.array(ys)
    for s in Symbol:
        out = invert_array(s, tau, arr, m)
        assert [tuple(r) for r in out.tolist()] == [invert_symbol(s, tau, y, m) for y in ys]
