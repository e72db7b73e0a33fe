import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_hermitian
from propertime.clifford import make_dirac_set
from propertime.numlin import (
    NotHermitianError,
    anticommutator,
    as_hermitian,
    commutator,
    herm_eig,
    unitary_exp,
)

DS = make_dirac_set()
H345 = 3 * DS.alpha[0] + 4 * DS.beta

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 16)


def test_identity_spectrum():
    w, v = herm_eig(np.eye(4))
    np.testing.assert_allclose(w, np.ones(4), atol=1e-15)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(4), atol=1e-14)


def test_beta_spectrum():
    np.testing.assert_allclose(herm_eig(DS.beta).eigenvalues, [-1, -1, 1, 1], atol=1e-14)


def test_sector_hamiltonian_spectrum():
    np.testing.assert_allclose(herm_eig(H345).eigenvalues, [-5, -5, 5, 5], atol=1e-13)


def test_rejects_non_hermitian_with_asymmetry():
    a = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(NotHermitianError) as info:
        herm_eig(a)
    assert info.value.asymmetry == pytest.approx(2.0)


def test_rejects_non_square():
    with pytest.raises(ValueError):
        as_hermitian(np.zeros((2, 3)))


@given(seeds, dims)
def test_reconstruction_and_orthonormality(seed, n):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, n)
    es = herm_eig(h)
    scale = max(1.0, np.max(np.abs(h)))
    assert np.max(np.abs(es.reconstruct() - h)) < 1e-12 * scale * n
    assert np.max(np.abs(es.basis.conj().T @ es.basis - np.eye(n))) < 1e-12
    assert np.all(np.diff(es.eigenvalues) >= 0)


def test_exp_at_zero_is_identity(rng):
    h = random_hermitian(rng, 5)
    np.testing.assert_allclose(unitary_exp(h, 0.0), np.eye(5), atol=1e-15)


def test_exp_beta_at_pi():
    np.testing.assert_allclose(unitary_exp(DS.beta, np.pi), -np.eye(4), atol=1e-14)


def test_exp_sector_eigenphases():
    t = 0.37
    u = unitary_exp(H345, t)
    phases = np.sort(np.angle(np.linalg.eigvals(u)))
    expected = np.sort(np.angle(np.exp(-1j * np.array([-5, -5, 5, 5]) * t)))
    np.testing.assert_allclose(phases, expected, atol=1e-12)


def test_exp_matches_scipy_expm(rng):
    from scipy.linalg import expm

    h = random_hermitian(rng, 7)
    np.testing.assert_allclose(unitary_exp(h, 0.8), expm(-0.8j * h), atol=1e-12)


@given(seeds, dims, st.floats(-5, 5))
def test_exp_inverse_and_unitarity(seed, n, t):
    h = random_hermitian(np.random.default_rng(seed), n)
    u = unitary_exp(h, t)
    assert np.max(np.abs(u @ unitary_exp(h, -t) - np.eye(n))) < 1e-12
    assert np.max(np.abs(u.conj().T @ u - np.eye(n))) < 1e-12


@given(seeds, dims, st.floats(-3, 3), st.floats(-3, 3))
def test_exp_group_law(seed, n, t1, t2):
    h = random_hermitian(np.random.default_rng(seed), n)
    assert np.max(np.abs(unitary_exp(h, t1 + t2) - unitary_exp(h, t1) @ unitary_exp(h, t2))) < 1e-11


@given(seeds, st.integers(1, 8))
def test_commutator_antisymmetry(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    b = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    assert np.max(np.abs(commutator(a, b) + commutator(b, a))) <= 1e-15 * max(1.0, np.max(np.abs(a @ b)))


def test_self_commutator_vanishes(rng):
    a = rng.normal(size=(4, 4))
    assert np.all(commutator(a, a) == 0)


def test_dirac_anticommutators():
    a1, a2 = DS.alpha[0], DS.alpha[1]
    np.testing.assert_allclose(anticommutator(a1, a2), 0, atol=1e-15)
    np.testing.assert_allclose(anticommutator(a1, a1), 2 * np.eye(4), atol=1e-15)
    np.testing.assert_allclose(anticommutator(a1, DS.beta), 0, atol=1e-15)


def test_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        commutator(np.eye(2), np.eye(3))
    with pytest.raises(ValueError):
        anticommutator(np.eye(2), np.eye(3))
