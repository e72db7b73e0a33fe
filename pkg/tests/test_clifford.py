import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from propertime.clifford import (
    ETA,
    PAULI,
    StepTooLargeError,
    VierbeinField,
    WeakFieldDomainError,
    _w_raw,
    make_dirac_set,
    sigma_pair,
    spin_connection,
    spin_connection_exact,
    w_term,
)
from propertime.verify import curved_vierbein

DS = make_dirac_set()
coord = st.floats(-3, 3)


def test_alpha1_has_pauli_blocks():
    a1 = DS.alpha[0]
    np.testing.assert_array_equal(a1[:2, 2:], PAULI[0])
    np.testing.assert_array_equal(a1[2:, :2], PAULI[0])
    np.testing.assert_array_equal(a1[:2, :2], 0)


def test_traceless():
    assert np.trace(DS.beta) == 0
    for a in DS.alpha:
        assert np.trace(a) == 0


def test_alpha_squares_sum_to_three():
    np.testing.assert_allclose(sum(a @ a for a in DS.alpha), 3 * np.eye(4), atol=1e-15)


def test_clifford_relations_exhaustive():
    mats = list(DS.alpha) + [DS.beta]
    for i, a in enumerate(mats):
        for j, b in enumerate(mats):
            expect = 2 * np.eye(4) * (i == j)
            assert np.max(np.abs(a @ b + b @ a - expect)) < 1e-14


def test_gamma_anticommutator_sign_convention():
    g = DS.gamma
    for a in range(4):
        for b in range(4):
            assert np.max(np.abs(g[a] @ g[b] + g[b] @ g[a] + 2 * ETA[a, b] * np.eye(4))) < 1e-14
    # gamma^0 squares to +1 and gamma^j to -1 with eta = diag(-1, 1, 1, 1)
    np.testing.assert_allclose(g[0] @ g[0], np.eye(4))
    np.testing.assert_allclose(g[1] @ g[1], -np.eye(4))


def test_sigma_pair_values():
    np.testing.assert_array_equal(sigma_pair(DS, 0, 0), 0)
    s3 = PAULI[2]
    expected = -0.5j * np.block([[s3, np.zeros((2, 2))], [np.zeros((2, 2)), s3]])
    np.testing.assert_allclose(sigma_pair(DS, 1, 2), expected, atol=1e-15)


def test_sigma_pair_antisymmetric():
    for a in range(4):
        for b in range(4):
            np.testing.assert_allclose(sigma_pair(DS, a, b), -sigma_pair(DS, b, a), atol=1e-15)


def test_sigma_boost_and_rotation_identities():
    for k in range(3):
        np.testing.assert_allclose(sigma_pair(DS, k + 1, 0), -0.5 * DS.alpha[k], atol=1e-15)


@pytest.mark.parametrize("bad", [(-1, 0), (0, 4)])
def test_sigma_pair_index_error(bad):
    with pytest.raises(IndexError):
        sigma_pair(DS, *bad)


def test_flat_space_connection_vanishes():
    gam = spin_connection(VierbeinField(0.0), (0.0, 0.4, -1.0, 2.0), 1e-3)
    assert np.max(np.abs(gam)) < 1e-10


def test_metric_is_weak_field_form():
    v = VierbeinField(1e-2)
    x = np.array([0.1, 0.2, 0.7])
    np.testing.assert_allclose(np.diag(v.metric(x)), [-(1 + 2 * 7e-3), 1 - 2 * 7e-3, 1 - 2 * 7e-3, 1 - 2 * 7e-3])


def test_connection_matches_first_order_value_at_origin():
    # to first order in phi: Gamma_0 = -(g/2) alpha_3, Gamma_{1,2} = (g/2) alpha_{1,2} alpha_3
    g = 1e-3
    gam = spin_connection(VierbeinField(g), np.zeros(3), 1e-3)
    a = DS.alpha
    assert np.max(np.abs(gam[0] + 0.5 * g * a[2])) < 1e-9
    assert np.max(np.abs(gam[1] - 0.5 * g * a[0] @ a[2])) < 1e-9
    assert np.max(np.abs(gam[3])) < 1e-12


@given(coord, coord, coord)
def test_connection_matches_closed_form(x1, x2, x3):
    v = VierbeinField(5e-3)
    x = np.array([x1, x2, x3])
    assert np.max(np.abs(spin_connection(v, x, 1e-3) - spin_connection_exact(v, x))) < 1e-10


def test_time_coordinate_is_ignored():
    v = curved_vierbein()
    a = spin_connection(v, (0.0, 0.3, -0.2, 0.7), 1e-2)
    b = spin_connection(v, (5.0, 0.3, -0.2, 0.7), 1e-2)
    np.testing.assert_array_equal(a, b)


def test_second_order_convergence():
    v = curved_vierbein()
    x = np.array([0.3, -0.2, 0.7])
    exact = spin_connection_exact(v, x)
    errs = [np.max(np.abs(spin_connection(v, x, h) - exact)) for h in (0.08, 0.04, 0.02)]
    for e1, e2 in zip(errs, errs[1:]):
        assert e1 / e2 == pytest.approx(4.0, rel=0.05)


def test_step_too_large():
    v = VierbeinField(
        0.0,
        potential=lambda x: 0.02 * np.sin(40 * x[0]),
        gradient=lambda x: np.array([0.8 * np.cos(40 * x[0]), 0.0, 0.0]),
    )
    with pytest.raises(StepTooLargeError):
        spin_connection(v, np.array([0.01, 0.0, 0.0]), 0.1)


def test_domain_guard():
    v = VierbeinField(1e-2)
    with pytest.raises(WeakFieldDomainError):
        v.components((0.0, 0.0, 6.0))
    with pytest.raises(WeakFieldDomainError):
        spin_connection(v, (0.0, 0.0, 4.9995), 1e-3)


def test_point_shape_checked():
    with pytest.raises(ValueError):
        VierbeinField(1e-3).phi(np.zeros(2))


def test_w_term_flat_is_zero():
    assert np.max(np.abs(w_term(VierbeinField(0.0), DS, np.zeros(3)))) < 1e-15


@given(st.floats(-1e-2, 1e-2), coord)
def test_w_term_hermitian_part_vanishes(g, x3):
    w = w_term(VierbeinField(g), DS, (0.0, 0.0, x3))
    assert np.max(np.abs(w - w.conj().T)) < 1e-12
    assert np.max(np.abs(w)) < 1e-12


def test_raw_w_is_order_g_and_anti_hermitian():
    x = np.array([0.0, 0.0, 0.5])
    w1 = _w_raw(VierbeinField(1e-3), DS, x, 1e-3)
    w2 = _w_raw(VierbeinField(2e-3), DS, x, 1e-3)
    assert np.max(np.abs(w1 + w1.conj().T)) < 1e-15
    assert np.max(np.abs(w2)) / np.max(np.abs(w1)) == pytest.approx(2.0, rel=0.01)
    assert np.max(np.abs(w1)) < 1e-2
