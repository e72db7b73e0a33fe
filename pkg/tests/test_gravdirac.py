from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import constants

from propertime import gravdirac as gd
from propertime.clifford import PAULI
from propertime.phasegrid import GridError

SMALL = gd.WeakFieldConfig(
    g=1e-3,
    m_prime=10.0,
    p_prime=(1.0, 0.0, 0.0),
    spin=(0.0, 1.0, 0.0),
    sigma_m=0.8,
    sigma_p=(0.2, 0.8),
    centers=(0.0, 0.0),
    n_tau=64,
    n_x=(32, 16),
    spatial=("x1", "x3"),
)


@pytest.fixture(scope="module")
def small_state():
    return gd.build_positive_spinor(SMALL)


@given(st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_spin_state_is_eigenvector(direction):
    chi = gd.spin_state(direction)
    n = np.asarray(direction) / np.linalg.norm(direction)
    sn = np.einsum("j,jab->ab", n, PAULI)
    np.testing.assert_allclose(sn @ chi, chi, atol=1e-12)
    assert np.linalg.norm(chi) == pytest.approx(1.0)


def test_config_validation():
    with pytest.raises(ValueError, match="6 sigma_m"):
        gd.WeakFieldConfig(g=1e-3, m_prime=1.0, sigma_m=0.2)
    with pytest.raises(ValueError):
        gd.WeakFieldConfig(g=1e-3, m_prime=1.0, sigma_m=0.1, spin=(0, 0, 0))
    with pytest.raises(ValueError, match="one entry"):
        gd.WeakFieldConfig(g=1e-3, m_prime=10.0, sigma_p=(0.5,), n_x=(16,), spatial=("x3",), centers=(0.0, 0.0))


def test_weak_field_guard():
    with pytest.raises(GridError, match="weak-field guard"):
        gd.WeakFieldConfig(g=0.5, m_prime=10.0, sigma_m=0.8, n_tau=64, n_x=(16,), sigma_p=(0.5,), centers=(0.0,), spatial=("x3",)).axes
    with pytest.raises(GridError, match="weak-field guard"):
        gd.WeakFieldConfig(
            g=0.01, m_prime=10.0, sigma_m=0.8, n_tau=64, n_x=(16,), sigma_p=(0.5,), centers=(0.0,), spatial=("x3",),
            extents=(20.0, 40.0),
        ).axes


def test_rest_spin_up_has_no_lower_components():
    rest = gd.build_positive_spinor(replace(SMALL, p_prime=(0.0, 0.0, 0.0), spin=(0.0, 0.0, 1.0)))
    dual = rest.state.to_dual()
    # at the carrier mode (p = 0) only the spin-up upper component is populated
    peak = np.unravel_index(np.argmax(np.abs(dual[..., 0])), dual.shape[:-1])
    assert np.max(np.abs(dual[peak][1:])) < 1e-10 * np.abs(dual[peak][0])
    # lower components are sigma.p/(E+m) chi, of order sigma_p/(2 m')
    lower = np.sqrt(np.sum(np.abs(rest.state.amplitudes[..., 2:]) ** 2) * rest.state.cell_volume)
    assert lower < max(SMALL.sigma_p) / SMALL.m_prime


def test_built_state_invariants(small_state):
    s = small_state
    assert s.discarded < 1e-6
    assert abs(s.state.norm2() - 1) < 1e-12
    assert abs(s.eq27_norm() - 1) < 1e-12
    assert s.lower_residual() < 1e-12
    assert s.sigma_E / s.energy_mean < 0.1
    assert abs(s.energy_mean - SMALL.E) < 3 * s.sigma_E


def test_energy_near_carrier_energy(small_state):
    mean, resid = gd.energy_residual(small_state, gd.build_htilde_apply(SMALL))
    assert abs(mean - SMALL.E) / SMALL.E < small_state.sigma_E / SMALL.E + 10 * SMALL.g
    assert resid < 2 * small_state.sigma_E / SMALL.E + 0.05


def test_flat_beta_mean_matches_ratio():
    cfg = replace(SMALL, g=0.0)
    s = gd.build_positive_spinor(cfg)
    assert abs(gd.taudot0_direct(s) - cfg.m_prime / cfg.E) < s.sigma_E / s.energy_mean + (0.8 / 10) ** 2


def test_negative_mass_weight_rejected(monkeypatch):
    # at m' just above 6 sigma_m the negative-mass tail is ~1e-9, below the limit
    cfg = gd.WeakFieldConfig(
        g=1e-3, m_prime=1.0, sigma_m=0.16, sigma_p=(0.5,), centers=(0.0,), n_tau=64, n_x=(16,), spatial=("x3",)
    )
    s = gd.build_positive_spinor(cfg)
    assert 0 < s.discarded < gd.NEGATIVE_MASS_LIMIT
    monkeypatch.setattr(gd, "NEGATIVE_MASS_LIMIT", s.discarded / 2)
    with pytest.raises(gd.NegativeMassWeightError):
        gd.build_positive_spinor(cfg)


def test_spread_too_large_rejected():
    cfg = replace(SMALL, sigma_p=(0.5, 0.8))
    s = gd.build_positive_spinor(cfg)
    with pytest.raises(gd.SpreadTooLargeError):
        gd.taudot0_formula(s)
    assert np.isfinite(gd.taudot0_direct(s))


def test_w_is_anti_hermitian_and_does_not_enter(small_state):
    w = gd.w_field(SMALL)
    assert np.max(np.abs(w + np.conj(np.swapaxes(w, -1, -2)))) < 1e-12
    h_on = gd.build_htilde_apply(SMALL, include_w=True)(small_state.state).amplitudes
    h_off = gd.build_htilde_apply(SMALL, include_w=False)(small_state.state).amplitudes
    assert np.max(np.abs(h_on - h_off)) < 1e-15 + np.max(np.abs(w)) * np.max(np.abs(small_state.state.amplitudes))
    assert gd.taudot0_direct(small_state, SMALL) == gd.taudot0_direct(small_state, replace(SMALL, w_step=2e-3))


def test_htilde_rejects_foreign_states(small_state):
    other = gd.build_positive_spinor(replace(SMALL, n_tau=128))
    with pytest.raises(GridError):
        gd.build_htilde_apply(SMALL)(other.state)


def test_discarded_piece_is_imaginary(small_state):
    d = gd.discarded_piece(small_state)
    assert abs(d.real) < 1e-10
    assert abs(d.imag) < SMALL.g


def test_spin_term_operator_vs_sharp(small_state):
    sharp = gd.sharp_spin_term(small_state)
    full = gd.spin_orbit_term(small_state)
    assert sharp != 0
    assert abs(full - sharp) / abs(sharp) < 0.1


def test_spin_term_sign_flips_with_spin(small_state):
    flipped = gd.build_positive_spinor(replace(SMALL, spin=(0.0, -1.0, 0.0)))
    assert gd.sharp_spin_term(flipped) == pytest.approx(-gd.sharp_spin_term(small_state), rel=1e-10)


def test_paired_formula_tracks_direct(small_state):
    flipped = gd.build_positive_spinor(replace(SMALL, spin=(0.0, -1.0, 0.0)))
    d = gd.taudot0_direct(small_state) - gd.taudot0_direct(flipped)
    f = gd.taudot0_formula(small_state) - gd.taudot0_formula(flipped)
    assert abs(d - f) < 0.1 * abs(f)


def test_spin_parallel_to_carrier_gives_zero():
    s = gd.build_positive_spinor(replace(SMALL, spin=SMALL.p_prime))
    assert abs(gd.ratio_estimate(s)) < 1e-12


@settings(max_examples=5)
@given(st.integers(0, 2**16))
def test_sweep_ratio_bound(seed):
    for c in gd.sweep_configs(2, seed=seed):
        r = gd.ratio_estimate(gd.build_positive_spinor(c))
        assert abs(r) <= c.g / c.m_prime


def test_sweep_configs_reproducible():
    a, b = gd.sweep_configs(3), gd.sweep_configs(3)
    assert a == b
    for c in a:
        assert 1e-3 <= c.g <= 4e-3
        assert 2 <= c.m_prime <= 10
        assert 0.2 <= np.linalg.norm(c.p_prime) <= 1.0


def test_si_smallness():
    assert gd.si_smallness(constants.m_e) == pytest.approx(4.2e-29, rel=0.01)
    assert gd.si_smallness(constants.physical_constants["muon mass"][0]) == pytest.approx(2.0e-31, rel=0.03)
    with pytest.raises(ValueError):
        gd.si_smallness(0.0)
