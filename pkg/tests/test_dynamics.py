import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from npc_metrology.dynamics import (
    affine_factorize,
    bloch_affine_exact,
    bloch_affine_short,
    bloch_generator,
    bloch_vector,
    channel_weights,
    check_density_matrix,
    pc_factorized,
    propagate_exact,
    propagate_rk,
    rho_from_bloch,
    series_correction,
    series_terms,
    short_time_state,
    trajectory,
)
from npc_metrology.errors import NoiseClassError
from npc_metrology.liouville import vec
from npc_metrology.models import SpinModel, initial_product_state
from oracles import expm_taylor, first_order_correction, printed_entries, second_order_correction


def dephasing_state(beta, B, gamma, t):
    """Spin dephasing along its own field, written out by hand."""
    c = 0.5 * math.sin(beta) * math.exp(-2 * gamma * t) * np.exp(-2j * B * t)
    return np.array([[math.cos(beta / 2) ** 2, c], [c.conjugate(), math.sin(beta / 2) ** 2]])


@pytest.mark.parametrize("t", [0.0, 0.3, 5.0, 40.0])
def test_exact_propagation_closed_form(t):
    m = SpinModel(1, 0.1, math.pi / 2, math.pi / 2, 0.05)
    rho = propagate_exact(m.liouvillian(), initial_product_state(1, 1.1), t)
    assert np.allclose(rho, dephasing_state(1.1, 0.1, 0.05, t), atol=1e-12)


def test_trajectory_uniform_and_irregular_grids_agree():
    m = SpinModel(2, 0.2, 0.4, 1.0, 0.1)
    rho0 = initial_product_state(2, 0.8)
    uniform = np.linspace(0, 10, 21)
    irregular = np.array([0.0, 0.7, 3.1, 10.0])
    a = trajectory(m.liouvillian(), rho0, uniform)
    b = trajectory(m.liouvillian(), rho0, irregular)
    for t, rho in zip(irregular, b):
        assert np.allclose(rho, propagate_exact(m.liouvillian(), rho0, t), atol=1e-12)
    assert np.allclose(a[-1], b[-1], atol=1e-11)
    with pytest.raises(ValueError):
        trajectory(m.liouvillian(), rho0, [-1.0])


def test_rk_matches_exact():
    m = SpinModel(2, 0.3, 0.3, 1.2, 0.15)
    rho0 = initial_product_state(2, 0.9)
    for t in (0.0, 1.0, 12.0):
        assert np.allclose(propagate_rk(m.liouvillian(), rho0, t, 1e-10), propagate_exact(m.liouvillian(), rho0, t), atol=1e-8)


def test_rk_tolerance_bounds():
    m = SpinModel()
    with pytest.raises(ValueError):
        propagate_rk(m.liouvillian(), initial_product_state(1, 0.1), 1.0, tol=1e-2)


@settings(max_examples=25, deadline=None)
@given(
    st.floats(0.01, 1), st.floats(0, math.pi), st.floats(0, math.pi), st.floats(0, 0.5),
    st.floats(0, math.pi), st.floats(0, 20),
)
def test_evolution_keeps_a_valid_state(b, vt, a, g, beta, t):
    rho = propagate_exact(SpinModel(1, b, vt, a, g).liouvillian(), initial_product_state(1, beta), t)
    check_density_matrix(rho, tol=1e-9)


def _npc():
    m = SpinModel(1, 0.4, 0.3, 1.1, 0.3)
    return m, initial_product_state(1, 0.7)


def test_series_zeroth_term_is_coherent_evolution():
    m, rho0 = _npc()
    terms = series_terms(m.coherent(), m.dissipative(), rho0, 1.3, 0)
    assert np.allclose(terms[0], propagate_exact(m.coherent(), rho0, 1.3), atol=1e-12)


def test_series_terms_match_nested_quadrature():
    m, rho0 = _npc()
    t = 1.3
    h, l = m.coherent().matrix, m.dissipative().matrix
    terms = series_terms(m.coherent(), m.dissipative(), rho0, t, 2)
    assert np.allclose(vec(terms[1]), first_order_correction(h, l, vec(rho0), t), atol=1e-11)
    assert np.allclose(vec(terms[2]), second_order_correction(h, l, vec(rho0), t), atol=1e-11)


def test_series_converges_to_exact():
    m, rho0 = _npc()
    exact = propagate_exact(m.liouvillian(), rho0, 2.0)
    assert np.allclose(series_correction(m.coherent(), m.dissipative(), rho0, 2.0, 12), exact, atol=1e-12)


def _slope(err_fn, t0, points=4):
    ts = t0 / 2 ** np.arange(points)
    errs = np.array([err_fn(t) for t in ts])
    return np.polyfit(np.log(ts), np.log(errs), 1)[0]


@pytest.mark.parametrize("order", [1, 2, 3])
def test_series_error_order(order):
    m, rho0 = _npc()
    err = lambda t: np.max(np.abs(series_correction(m.coherent(), m.dissipative(), rho0, t, order)
                                  - propagate_exact(m.liouvillian(), rho0, t)))
    assert abs(_slope(err, 0.4) - (order + 1)) < 0.3


def test_short_time_state_is_second_order():
    m, rho0 = _npc()
    err = lambda t: np.max(np.abs(short_time_state(m.coherent(), m.dissipative(), rho0, t)
                                  - propagate_exact(m.liouvillian(), rho0, t)))
    assert abs(_slope(err, 0.4) - 2) < 0.3


def test_pc_factorization_is_exact_and_guarded():
    pc = SpinModel(1, 0.3, 0.8, 0.8, 0.2)
    rho0 = initial_product_state(1, 1.2, 0.3)
    for t in (0.5, 7.0):
        assert np.allclose(pc_factorized(pc.coherent(), pc.dissipative(), rho0, t),
                           propagate_exact(pc.liouvillian(), rho0, t), atol=1e-12)
    m, rho0 = _npc()
    with pytest.raises(NoiseClassError):
        pc_factorized(m.coherent(), m.dissipative(), rho0, 1.0)


def test_bloch_roundtrip():
    r = np.array([0.1, -0.3, 0.5])
    assert np.allclose(bloch_vector(rho_from_bloch(r)), r)


@pytest.mark.parametrize("alpha", [0.3, math.pi / 4, 1.2, 2.5])
def test_bloch_generator_reproduces_master_equation(alpha):
    B, gamma, t = 0.3, 0.2, 2.5
    m = SpinModel(1, B, math.pi / 2, alpha, gamma)
    rho0 = initial_product_state(1, 0.9, 0.4)
    r = bloch_affine_exact(B, alpha, gamma, t)(bloch_vector(rho0))
    assert np.allclose(r, bloch_vector(propagate_exact(m.liouvillian(), rho0, t)), atol=1e-12)
    assert np.allclose(bloch_affine_exact(B, alpha, gamma, t).matrix,
                       expm_taylor(bloch_generator(B, alpha, gamma) * t).real, atol=1e-12)


def test_channel_weights():
    s1, s2, s3 = channel_weights(math.pi / 4, 0.2)
    assert (s1, s2, s3) == pytest.approx((0.1, 0.1, 0.1))
    assert channel_weights(math.pi / 2, 0.2)[2] == pytest.approx(0, abs=1e-15)


@pytest.mark.parametrize("B,alpha,gamma,t", [(0.37, 0.6, 0.23, 0.9), (0.1, math.pi / 4, 0.05, 3.0), (1.0, 2.0, 0.5, 0.2)])
def test_short_bloch_map_matches_reference_polynomials(B, alpha, gamma, t):
    m = bloch_affine_short(B, alpha, gamma, t).matrix
    ref = printed_entries(B, *channel_weights(alpha, gamma), t)
    for (i, j), v in ref.items():
        assert m[i - 1, j - 1] == pytest.approx(v, abs=1e-13)


def test_short_bloch_map_is_fourth_order():
    B, alpha, gamma = 0.5, 0.7, 0.3
    err = lambda t: np.max(np.abs(bloch_affine_short(B, alpha, gamma, t).matrix - bloch_affine_exact(B, alpha, gamma, t).matrix))
    assert abs(_slope(err, 0.4) - 4) < 0.3


def test_ground_state_gains_coherence_only_with_cross_term():
    t = 0.5
    r_npc = bloch_affine_short(0.3, math.pi / 4, 0.2, t)([0, 0, -1])
    r_x = bloch_affine_short(0.3, 0.0, 0.2, t)([0, 0, -1])
    assert abs(r_npc[0]) > 1e-3 and abs(r_npc[1]) > 1e-4
    assert r_x[0] == pytest.approx(0, abs=1e-15) and r_x[1] == pytest.approx(0, abs=1e-15)


def test_affine_factorization():
    mp = bloch_affine_exact(0.3, 0.6, 0.2, 2.0)
    f = mp.factorize()
    assert np.allclose(f.matrix(), mp.matrix, atol=1e-13)
    for rot in (f.rot1, f.rot2, f.rotation):
        assert np.allclose(rot @ rot.T, np.eye(3), atol=1e-12)
        assert np.linalg.det(rot) == pytest.approx(1)
    assert np.allclose(f.rotation @ f.stretch, mp.matrix, atol=1e-12)
    assert f.commutator_norm > 1e-4
    # aligned noise: rotation about z commutes with the contraction
    pc = affine_factorize(bloch_affine_exact(0.3, math.pi / 2, 0.2, 2.0).matrix)
    assert pc.commutator_norm < 1e-10
