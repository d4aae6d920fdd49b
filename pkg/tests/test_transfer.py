import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncmarkov.errors import GuardError, ShapeError
from ncmarkov.linalg import singular_values, unitarity_defect
from ncmarkov.markov import phi_power
from ncmarkov.model import colligation_of, extract_colligation, generate
from ncmarkov.transfer import (
    SignalSequence,
    coefficient,
    coefficient_rows,
    inner_defect,
    io_map,
    partial_gram,
    probability_rows,
    record_probability,
    series,
    toeplitz,
)
from ncmarkov.words import WordIndex

from conftest import unit


def random_col(seed, dims=(2, 2, 2)):
    return extract_colligation(generate("random", dims, seed=seed))


def test_empty_word_is_d():
    col = random_col(3)
    assert np.array_equal(coefficient(col, ()), col.dmat)
    assert np.array_equal(series(col, 3)[()], col.dmat)


def test_swap_coefficients(swap):
    ser = series(extract_colligation(swap), 3)
    assert np.allclose(ser[(1,)], [[1, 0]])
    assert np.allclose(ser[(2,)], [[0, 1]])
    for w, c in ser.items():
        if len(w) != 1:
            assert np.all(c == 0)


def test_identity_coefficients_vanish(identity):
    ser = series(extract_colligation(identity), 4)
    assert np.all(ser.coeffs[1:] == 0)


def test_one_dimensional_h_has_unitary_d():
    ser = series(extract_colligation(generate("random", (1, 3, 3), seed=9)), 3)
    assert np.allclose(ser.coeffs[1:], 0)
    assert unitarity_defect(ser[()]) < 1e-12
    assert inner_defect(ser, 0) < 1e-12


def test_series_matches_direct_products():
    col = random_col(5, (2, 3, 3))
    ser = series(col, 3)
    for w, c in ser.items():
        assert np.allclose(c, coefficient(col, w), atol=1e-14)


def test_coefficient_order_is_time_order():
    col = random_col(6)
    expected = col.c @ col.a[1] @ col.a[0] @ col.b[1]
    assert np.allclose(coefficient(col, (2, 1, 2)), expected)


def test_io_map_zero_input():
    col = random_col(1)
    x, y = io_map(col, SignalSequence.zeros(2, 3, col.dim_u))
    assert np.all(y.values == 0) and np.all(x.values == 0)


def test_io_map_impulse_gives_coefficients():
    col = random_col(2)
    v = unit(np.random.default_rng(0), col.dim_u)
    _, y = io_map(col, SignalSequence.impulse(2, 4, v))
    ser = series(col, 4)
    assert np.max(np.abs(y.values - ser.coeffs @ v)) <= 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4))
def test_io_map_equals_word_convolution(seed, n):
    col = random_col(seed)
    rng = np.random.default_rng(seed)
    idx = WordIndex(2, n)
    u = SignalSequence(idx, rng.standard_normal((idx.total, col.dim_u)) + 0j)
    _, y = io_map(col, u)
    ser = series(col, n)
    words = idx.words()
    for c in words:
        ref = sum(ser[c[k:]] @ u[c[:k]] for k in range(len(c) + 1))
        assert np.linalg.norm(y[c] - ref) <= 1e-10


def test_io_map_rejects_bad_input():
    col = random_col(2)
    with pytest.raises(ShapeError):
        io_map(col, SignalSequence.zeros(2, 2, col.dim_u + 1))
    with pytest.raises(ShapeError):
        io_map(col, SignalSequence.zeros(2, 2, col.dim_u), x0=[1.0])


def test_nonzero_initial_state_gives_observation():
    col = random_col(4)
    x0 = unit(np.random.default_rng(1), col.dim_h)
    x, y = io_map(col, SignalSequence.zeros(2, 2, col.dim_u), x0=x0)
    assert np.allclose(y[(1, 2)], col.c @ col.a[1] @ col.a[0] @ x0)


def test_toeplitz_zero_is_d_and_blocks_depend_on_suffix_only():
    col = random_col(8)
    ser = series(col, 3)
    assert np.array_equal(toeplitz(ser, 0), col.dmat)
    m = toeplitz(ser, 3)
    idx = WordIndex(2, 3)
    y, u = col.dim_y, col.dim_u
    for b in idx.words():
        for a in idx.words():
            c = b + a
            if len(c) <= 3:
                ci, bi = idx.word_to_index(c), idx.word_to_index(b)
                assert np.array_equal(m[ci * y:(ci + 1) * y, bi * u:(bi + 1) * u], ser[a])


def test_toeplitz_on_impulse_matches_io_map(swap):
    col = extract_colligation(swap)
    ser = series(col, 2)
    v = np.array([0.6, 0.8j])
    u = SignalSequence.impulse(2, 2, v)
    _, y = io_map(col, u)
    assert np.array_equal(toeplitz(ser, 2) @ u.values.reshape(-1), y.values.reshape(-1))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_toeplitz_is_a_contraction(seed):
    ser = series(random_col(seed), 5)
    assert singular_values(toeplitz(ser, 5))[0] <= 1 + 1e-9


def test_toeplitz_guard():
    ser = series(random_col(0, (3, 3, 3)), 8)
    with pytest.raises(GuardError):
        toeplitz(ser, 8)
    with pytest.raises(ValueError):
        toeplitz(ser, 9)


def test_inner_defect_fixtures(swap, identity):
    ser = series(extract_colligation(swap), 3)
    assert inner_defect(ser, 0) == pytest.approx(1.0)
    for n in (1, 2, 3):
        assert inner_defect(ser, n) <= 1e-10
    ser = series(extract_colligation(identity), 4)
    for n in range(5):
        assert inner_defect(ser, n) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_partial_sums_monotone_bounded_and_tail_bound(seed):
    col, red = colligation_of(generate("random", (2, 2, 2), seed=seed))
    ser = series(col, 6)
    prev = np.zeros((col.dim_u, col.dim_u))
    defects = []
    for n in range(7):
        g = partial_gram(ser, n)
        assert np.linalg.eigvalsh(g - prev).min() >= -1e-12
        assert np.linalg.eigvalsh(g).max() <= 1 + 1e-8
        prev = g
        defects.append(inner_defect(ser, n))
        tail = np.linalg.norm(phi_power(red, n), 2)
        assert defects[-1] <= tail + 1e-9
    assert all(b <= a + 1e-12 for a, b in zip(defects, defects[1:]))


def test_record_probability_examples(swap, identity):
    ser = series(extract_colligation(swap), 3)
    eta = np.array([1, 1]) / np.sqrt(2)
    probs = dict(probability_rows(ser, eta))
    assert probs["1"] == pytest.approx(0.5) and probs["2"] == pytest.approx(0.5)
    assert sum(probs.values()) == pytest.approx(1.0)
    assert record_probability(ser, eta, (1, 1)) == 0.0
    ser = series(extract_colligation(identity), 3)
    assert all(p == 0 for w, p in probability_rows(ser, eta) if w != "-")
    with pytest.raises(ShapeError):
        record_probability(ser, [1.0], ())


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_record_probabilities_sum_below_one(seed):
    col = random_col(seed, (2, 3, 3))
    ser = series(col, 4)
    eta = unit(np.random.default_rng(seed), col.dim_u)
    assert sum(p for _, p in probability_rows(ser, eta)) <= 1 + 1e-9


def test_coefficient_rows_layout(swap):
    ser = series(extract_colligation(swap), 1)
    rows = list(coefficient_rows(ser))
    assert rows[0] == ("-", 0, 0, 0.0, 0.0, 1.0)
    assert ("1", 0, 0, 1.0, 0.0, 0.0) in rows
    assert len(rows) == 3 * 2
