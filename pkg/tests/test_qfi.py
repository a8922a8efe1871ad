import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from npc_metrology.dynamics import bloch_vector, rho_from_bloch
from npc_metrology.errors import InconsistentPureStateError, UnstableDerivativeError
from npc_metrology.models import noiseless_field_vector
from npc_metrology.operators import SX, SY, SZ
from npc_metrology.qfi import (
    QfiRecord,
    channel_qfi_upper_bound,
    dstate_fd,
    maximize_over_beta,
    qfi,
    qfi_bloch,
    qfi_max_channel,
    qfi_qubit_closed,
    qfi_sld,
)


def mixed_qubit(rng):
    r = rng.normal(size=3)
    r *= rng.uniform(0.05, 0.95) / np.linalg.norm(r)
    dr = rng.normal(size=3)
    return rho_from_bloch(r), 0.5 * sum(d * p for d, p in zip(dr, (SX, SY, SZ)))


def test_routes_agree_on_mixed_qubits():
    rng = np.random.default_rng(7)
    for _ in range(50):
        rho, d = mixed_qubit(rng)
        a = qfi_sld(rho, d)
        assert qfi_qubit_closed(rho, d) == pytest.approx(a, rel=1e-9)
        assert qfi_bloch(bloch_vector(rho), bloch_vector(d)) == pytest.approx(a, rel=1e-9)


def test_sld_reproduces_definition():
    # solve d rho = (rho L + L rho)/2 directly and compare Tr[rho L^2]
    rng = np.random.default_rng(8)
    rho, d = mixed_qubit(rng)
    lhs = 0.5 * (np.kron(np.eye(2), rho) + np.kron(rho.T, np.eye(2)))
    l = np.linalg.solve(lhs, d.reshape(-1, order="F")).reshape(2, 2, order="F")
    assert qfi_sld(rho, d) == pytest.approx(np.trace(rho @ l @ l).real, rel=1e-10)


def test_pure_state_branches():
    psi = np.array([math.cos(0.4), math.sin(0.4)])
    dpsi = np.array([-math.sin(0.4), math.cos(0.4)])
    rho = np.outer(psi, psi)
    d = np.outer(dpsi, psi) + np.outer(psi, dpsi)
    expected = 4 * (dpsi @ dpsi - (psi @ dpsi) ** 2)
    assert qfi_sld(rho, d) == pytest.approx(expected)
    assert qfi_qubit_closed(rho, d) == pytest.approx(expected)
    assert qfi_bloch(bloch_vector(rho), bloch_vector(d)) == pytest.approx(expected)


def test_bloch_rejects_radial_derivative_on_pure_state():
    with pytest.raises(InconsistentPureStateError):
        qfi_bloch([0, 0, 1], [0, 0, 0.5])


def test_multi_qubit_sld_is_additive():
    rng = np.random.default_rng(9)
    r1, d1 = mixed_qubit(rng)
    r2, d2 = mixed_qubit(rng)
    rho = np.kron(r1, r2)
    d = np.kron(d1, r2) + np.kron(r1, d2)
    assert qfi_sld(rho, d) == pytest.approx(qfi_sld(r1, d1) + qfi_sld(r2, d2), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6), st.floats(0.01, 0.98))
def test_qfi_is_nonnegative_and_routes_agree(x, radius):
    r = np.array(x[:3])
    if np.linalg.norm(r) < 1e-3:
        r = np.array([0.0, 0.0, 1.0])
    r = radius * r / np.linalg.norm(r)
    rho = rho_from_bloch(r)
    d = 0.5 * sum(v * p for v, p in zip(x[3:], (SX, SY, SZ)))
    f = qfi_sld(rho, d)
    assert f >= 0
    assert qfi(rho, d, "bloch") == pytest.approx(f, rel=1e-8, abs=1e-12)
    assert qfi(rho, d, "qubit_closed") == pytest.approx(f, rel=1e-8, abs=1e-12)


def test_fd_derivative_of_analytic_family():
    fam = lambda th, t: rho_from_bloch([0.5 * math.sin(th * t), 0.0, 0.5 * math.cos(th * t)])
    est = dstate_fd(fam, 0.7, 2.0)
    exact = 0.5 * (2.0 * 0.5 * math.cos(1.4) * SX - 2.0 * 0.5 * math.sin(1.4) * SZ)
    assert np.allclose(est.d_rho, exact, atol=1e-10)
    assert est.richardson_error < 1e-8


def test_fd_handles_stacks_and_raises_on_noise():
    fam = lambda th, t: np.stack([rho_from_bloch([0.3 * math.sin(th * s), 0, 0.3 * math.cos(th * s)]) for s in np.atleast_1d(t)])
    est = dstate_fd(fam, 1.0, np.array([0.0, 1.0, 2.0]))
    assert est.d_rho.shape == (3, 2, 2)
    assert np.allclose(est.d_rho[0], 0)
    rng = np.random.default_rng(0)
    noisy = lambda th, t: rho_from_bloch([0.3, 0, 0.2 + 1e-6 * rng.normal()])
    with pytest.raises(UnstableDerivativeError):
        dstate_fd(noisy, 1.0, 0.0)


def test_qfi_record_validation():
    assert QfiRecord("B", 1.0, -1e-12, "sld").value == 0.0
    with pytest.raises(ValueError):
        QfiRecord("B", 1.0, -1e-6, "sld")


def test_channel_qfi_for_field_direction():
    # rotating field of fixed length: F = 4 sin^2(B t) with |R| = 2B
    B = 0.1
    fam = lambda th: noiseless_field_vector(B, th)
    t = np.array([0.0, 5.0, math.pi / (2 * B)])
    assert np.allclose(qfi_max_channel(fam, 0.4, t), 4 * np.sin(B * t) ** 2, atol=1e-9)
    assert qfi_max_channel(lambda b: noiseless_field_vector(b, 0.4), B, 3.0) == pytest.approx(4 * 9.0, rel=1e-9)
    with pytest.raises(ValueError):
        qfi_max_channel(lambda th: np.zeros(3), 0.0, 1.0)


def test_channel_bound_quadrature():
    assert channel_qfi_upper_bound(lambda s: 0.7 * SZ, 3.0) == pytest.approx((1.4 * 3.0) ** 2)
    bound = channel_qfi_upper_bound(lambda s: s * SZ, 2.0)
    assert bound == pytest.approx((2.0**2) ** 2, rel=1e-12)
    with pytest.raises(ValueError):
        channel_qfi_upper_bound(lambda s: SZ, 1.0, nodes=11)


def test_maximize_over_beta_refines_grid():
    beta, value = maximize_over_beta(lambda b: -(b - 1.2345) ** 2)
    assert beta == pytest.approx(1.2345, abs=1e-5) and value == pytest.approx(0, abs=1e-9)
    beta, _ = maximize_over_beta(lambda b: b)
    assert beta == pytest.approx(math.pi)
