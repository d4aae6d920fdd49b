import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncmarkov.config import DEFAULT
from ncmarkov.errors import ShapeError
from ncmarkov.markov import (
    diagnose,
    fixed_space_dim,
    observability_gramian,
    phi_power,
    stability_radius,
    superoperator_matrix,
    transition_apply,
    transition_superoperator,
    x_fixed_point,
)
from ncmarkov.model import InteractionModel, colligation_of, generate


def hermitian(rng, n):
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return m + m.conj().T


def vec(x):
    return x.reshape(-1, order="F")


def test_superoperator_matrix_matches_direct_application():
    col, _ = colligation_of(generate("random", (3, 2, 2), seed=1))
    x = hermitian(np.random.default_rng(0), 3)
    z = transition_superoperator(col).zhat
    assert np.allclose(z @ vec(x), vec(transition_apply(col, x)), atol=1e-13)
    assert np.allclose(superoperator_matrix(col.a), z)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_unital_with_invariant_vacuum_state(seed):
    m = generate("random", (3, 2, 2), seed=seed)
    col, _ = colligation_of(m)
    assert np.linalg.norm(transition_apply(col, np.eye(3)) - np.eye(3)) <= 1e-10
    z = transition_superoperator(col).zhat
    assert np.linalg.norm(z @ vec(np.eye(3)) - vec(np.eye(3))) <= 1e-10
    rng = np.random.default_rng(seed)
    om = m.omega_h
    for _ in range(20):
        x = hermitian(rng, 3)
        assert abs(np.vdot(om, transition_apply(col, x) @ om) - np.vdot(om, x @ om)) <= 1e-10


def test_transition_apply_fixtures(swap, identity):
    x = hermitian(np.random.default_rng(3), 2)
    col, _ = colligation_of(swap)
    assert np.allclose(transition_apply(col, x), x[0, 0] * np.eye(2))
    col, _ = colligation_of(identity)
    assert np.allclose(transition_apply(col, x), x)
    with pytest.raises(ShapeError):
        transition_apply(col, np.eye(3))


def test_fixed_space_dims(swap, identity):
    assert fixed_space_dim(transition_superoperator(colligation_of(swap)[0])) == 1
    assert fixed_space_dim(transition_superoperator(colligation_of(identity)[0])) == 4
    one = generate("random", (1, 2, 2), seed=0)
    assert fixed_space_dim(transition_superoperator(colligation_of(one)[0])) == 1


def test_gramian_and_x_fixtures(swap, identity):
    col, red = colligation_of(swap)
    g, ok = observability_gramian(red)
    assert ok and np.allclose(g, [[1]])
    x, ok = x_fixed_point(col)
    assert ok and np.allclose(x, np.eye(2))
    col, red = colligation_of(identity)
    g, ok = observability_gramian(red)
    assert ok and np.allclose(g, 0)
    x, ok = x_fixed_point(col)
    assert ok and np.allclose(x, [[1, 0], [0, 0]])


def test_partial_swap_gramian_is_identity_and_ergodic():
    col, red = colligation_of(generate("partial_swap", (2, 2, 2), theta=np.pi / 4))
    g, ok = observability_gramian(red)
    assert ok and np.linalg.norm(g - np.eye(1)) <= 1e-6
    assert fixed_space_dim(transition_superoperator(col)) == 1


def test_stability_radius_fixtures(swap, identity):
    assert stability_radius(colligation_of(swap)[1]) == 0.0
    assert stability_radius(colligation_of(identity)[1]) == pytest.approx(1.0, abs=1e-12)
    r = stability_radius(colligation_of(generate("partial_swap", (2, 2, 2), theta=np.pi / 4))[1])
    assert 0 < r < 1
    # the single reduced block of a partial swap is cos(theta)^2 in modulus
    assert r == pytest.approx(np.cos(np.pi / 4) ** 2, abs=1e-12)
    with pytest.raises(ValueError):
        stability_radius(colligation_of(swap)[1], n_max=2)


def test_phi_power_binary_powering():
    _, red = colligation_of(generate("random", (3, 3, 3), seed=2))
    phi = superoperator_matrix(red.a)
    ref = vec(np.eye(2))
    for _ in range(5):
        ref = phi @ ref
    assert np.allclose(vec(phi_power(red, 5)), ref, atol=1e-14)
    assert np.allclose(phi_power(red, 0), np.eye(2))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_iterations_monotone_bounded_and_compatible(seed):
    col, red = colligation_of(generate("random", (3, 2, 2), seed=seed))
    phi = superoperator_matrix(red.a)
    cc = vec(red.c.conj().T @ red.c)
    g = np.zeros(4, dtype=complex)
    for _ in range(30):
        nxt = cc + phi @ g
        diff = (nxt - g).reshape(2, 2, order="F")
        assert np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)).min() >= -1e-10
        g = nxt
    gram, ok = observability_gramian(red)
    x, ok2 = x_fixed_point(col)
    assert ok and ok2
    for m in (gram, x):
        w = np.linalg.eigvalsh(m)
        assert w.min() >= -1e-8 and w.max() <= 1 + 1e-8
    e = red.embedding
    assert np.linalg.norm(e.conj().T @ x @ e - gram) <= 1e-6
    # the vacuum line is invariant and decoupled from its complement
    assert np.linalg.norm(e.conj().T @ x @ col.omega_h) <= 1e-6


def test_diagnose_swap(swap):
    r = diagnose(swap)
    assert r.ergodic and r.observable and r.stable and r.consistent
    assert not r.indeterminate
    assert all(v <= 1e-10 for _, v in r.inner_defects)


def test_diagnose_identity(identity):
    r = diagnose(identity)
    assert not (r.ergodic or r.observable or r.stable)
    assert r.consistent and not r.indeterminate
    assert r.fixed_space_dim == 4
    assert all(v == pytest.approx(1.0, abs=1e-10) for _, v in r.inner_defects)


def test_diagnose_one_dimensional_h():
    r = diagnose(generate("random", (1, 3, 3), seed=3))
    assert r.ergodic and r.observable and r.stable and r.consistent
    assert r.stability_radius_estimate == 0.0 and r.gramian_defect == 0.0


def test_diagnose_random_batch_is_consistent():
    for seed in range(15):
        r = diagnose(generate("random", (2, 2, 2), seed=seed))
        assert r.consistent and not r.indeterminate


def test_near_boundary_model_is_indeterminate():
    # partial swap at tiny angle: radius cos(t)^2 sits inside the gray band
    m = generate("partial_swap", (2, 2, 2), theta=1e-4)
    r = diagnose(m)
    assert r.indeterminate


def test_block_diagonal_model_is_not_ergodic():
    # H = C^3 with a decoupled third level: a swap on levels {1, 2} and the
    # identity on level 3 leaves two invariant blocks
    u = np.eye(6, dtype=complex)
    # swap e_2 (x) f_1 <-> e_1 (x) f_2, i.e. indices 2 and 1
    u[[1, 2]] = u[[2, 1]]
    e1 = np.array([1.0, 0.0])
    m = InteractionModel(3, 2, 2, u, [1.0, 0.0, 0.0], e1, e1)
    r = diagnose(m)
    assert not r.ergodic and not r.observable and not r.stable
    assert r.consistent and not r.indeterminate


def test_report_serializations(swap):
    r = diagnose(swap)
    d = r.to_dict()
    json.dumps(d)
    assert d["ergodic"] is True and d["gramian"] == [[[1.0, 0.0]]]
    assert "consistent" in r.to_table()


def test_tolerance_overrides_are_respected(swap):
    strict = DEFAULT.with_overrides(verdict=1e-7, observable_gray=None)
    assert strict.verdict == 1e-7 and strict.observable_gray == DEFAULT.observable_gray
    assert diagnose(swap, strict).consistent
