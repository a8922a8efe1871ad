"""State propagation: exact, Runge-Kutta, series corrections and factorized forms.

Also the Bloch-sphere description of the single-spin model with the field
along Z, where the state obeys ``r(t) = exp(D t) r(0)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoiseClassError, NumericalError, StepUnderflowError
from .liouville import Superoperator, classify_noise, unvec, vec
from .operators import PAULI, hermitize, matexp

TRACE_TOL = 1e-8
POSITIVITY_TOL = -1e-9


def _finish(rho, check=True):
    rho = hermitize(rho)
    if check:
        tr = np.trace(rho, axis1=-2, axis2=-1).real
        drift = float(np.max(np.abs(tr - 1.0)))
        if drift > TRACE_TOL:
            raise NumericalError(f"trace drifted by {drift:.3e}")
    return rho


def check_density_matrix(rho, tol: float = 1e-9) -> None:
    """Raise ValueError unless ``rho`` is Hermitian, unit trace and positive."""
    rho = np.asarray(rho)
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > 1e-10:
        raise ValueError(f"density matrix has trace {np.trace(rho)}")
    lo = np.linalg.eigvalsh(hermitize(rho))[0]
    if lo < -tol:
        raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")


def propagate_exact(total: Superoperator, rho0, t: float) -> np.ndarray:
    """``unvec(exp(L t) vec(rho0))``."""
    if t < 0:
        raise ValueError("time must be non-negative")
    return _finish(unvec(matexp(total.matrix * t) @ vec(rho0), total.dim))


def trajectory(total: Superoperator, rho0, times) -> np.ndarray:
    """States at each entry of ``times`` (stacked along axis 0).

    Uniformly spaced grids are stepped with one propagator; anything else
    falls back to one exponential per time.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    v0 = vec(rho0)
    out = np.empty((len(times), v0.size), dtype=complex)
    steps = np.diff(times)
    uniform = len(times) > 2 and np.allclose(steps, steps[0], rtol=1e-12, atol=1e-14) and steps[0] > 0
    if uniform:
        step = matexp(total.matrix * steps[0])
        v = matexp(total.matrix * times[0]) @ v0
        for k in range(len(times)):
            out[k] = v
            v = step @ v
    else:
        for k, t in enumerate(times):
            out[k] = matexp(total.matrix * t) @ v0
    return _finish(unvec(out, total.dim))


# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def propagate_rk(total: Superoperator, rho0, t: float, tol: float = 1e-8) -> np.ndarray:
    """Adaptive Dormand-Prince integration of ``d vec(rho)/dt = L vec(rho)``.

    ``tol`` bounds the local error per step relative to ``max(|y|, 1)``.
    """
    if not 1e-12 <= tol <= 1e-4:
        raise ValueError("tol must lie in [1e-12, 1e-4]")
    if t < 0:
        raise ValueError("time must be non-negative")
    lmat = total.matrix
    y = vec(rho0).astype(complex)
    s = 0.0
    norm = max(float(np.max(np.abs(lmat))), 1e-300)
    h = min(t, 0.1 / norm) if t > 0 else 0.0
    k = np.empty((7, y.size), dtype=complex)
    k[0] = lmat @ y
    while t - s > 1e-15 * max(t, 1.0):
        h = min(h, t - s)
        if h < 1e-14 * max(t, 1.0):
            raise StepUnderflowError(f"step size underflow at t={s:.6g}")
        for i in range(1, 7):
            k[i] = lmat @ (y + h * (np.array(_A[i]) @ k[:i]))
        y5 = y + h * (_B5 @ k)
        err = h * np.max(np.abs((_B5 - _B4) @ k)) / max(np.max(np.abs(y5)), 1.0)
        if err <= tol:
            s += h
            y = y5
            k[0] = k[6]
        h *= min(5.0, max(0.2, 0.9 * (tol / max(err, 1e-300)) ** 0.2))
    return _finish(unvec(y, total.dim))


def _block_array(h_super: Superoperator, diss: Superoperator, order: int) -> np.ndarray:
    n = h_super.matrix.shape[0]
    blocks = order + 1
    arr = np.zeros((blocks * n, blocks * n), dtype=complex)
    for b in range(blocks):
        arr[b * n:(b + 1) * n, b * n:(b + 1) * n] = h_super.matrix
        if b + 1 < blocks:
            arr[b * n:(b + 1) * n, (b + 1) * n:(b + 2) * n] = diss.matrix
    return arr


def series_terms(h_super: Superoperator, diss: Superoperator, rho0, t: float, order: int) -> list:
    """Individual noise corrections ``m = 0..order`` as matrices.

    The ``m``-th correction is the ``(1, m+1)`` block of the exponential of
    the upper-bidiagonal array with the coherent generator on the diagonal
    and the dissipator on the superdiagonal. It equals the ``m``-fold
    time-ordered integral of the interaction-picture dissipator.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    n = h_super.matrix.shape[0]
    top = matexp(_block_array(h_super, diss, order) * t)[:n]
    v0 = vec(rho0)
    return [unvec(top[:, m * n:(m + 1) * n] @ v0, h_super.dim) for m in range(order + 1)]


def series_correction(h_super: Superoperator, diss: Superoperator, rho0, t: float, order: int) -> np.ndarray:
    """State truncated after the ``order``-th noise correction."""
    return hermitize(sum(series_terms(h_super, diss, rho0, t, order)))


def pc_factorized(h_super: Superoperator, diss: Superoperator, rho0, t: float) -> np.ndarray:
    """``exp(L t) exp(H t) rho0``; only valid for phase-covariant noise."""
    nc = classify_noise(h_super, diss)
    if not nc.phase_covariant:
        raise NoiseClassError(
            f"noise is not phase-covariant (commutator norm {nc.commutator_norm:.3e})"
        )
    v = matexp(diss.matrix * t) @ (matexp(h_super.matrix * t) @ vec(rho0))
    return _finish(unvec(v, h_super.dim))


def short_time_state(h_super: Superoperator, diss: Superoperator, rho0, t: float) -> np.ndarray:
    """``exp(H t) exp(L t) rho0``: dissipation first, then coherent evolution."""
    v = matexp(h_super.matrix * t) @ (matexp(diss.matrix * t) @ vec(rho0))
    return _finish(unvec(v, h_super.dim))


# Bloch-sphere picture ----------------------------------------------------


def bloch_vector(rho) -> np.ndarray:
    """``r_i = Tr[rho sigma_i]`` for a qubit state (or a stack of them)."""
    rho = np.asarray(rho)
    return np.real(np.stack([np.einsum("...ij,ji->...", rho, p) for p in PAULI], axis=-1))


def rho_from_bloch(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return 0.5 * (np.eye(2) + sum(ri * p for ri, p in zip(r, PAULI)))


def channel_weights(alpha: float, gamma: float) -> tuple[float, float, float]:
    """Dephasing, flip and cross-correlation rates ``(S1, S2, S3)`` of the tilted jump."""
    return (
        gamma * np.sin(alpha) ** 2,
        gamma * np.cos(alpha) ** 2,
        0.5 * gamma * np.sin(2 * alpha),
    )


def bloch_generator(B: float, alpha: float, gamma: float) -> np.ndarray:
    """Generator ``D`` of the Bloch vector for ``H = B sigma_z``."""
    s1, s2, s3 = channel_weights(alpha, gamma)
    return np.array(
        [
            [-2 * s1, -2 * B, 2 * s3],
            [2 * B, -2 * (s1 + s2), 0.0],
            [2 * s3, 0.0, -2 * s2],
        ]
    )


@dataclass(frozen=True)
class AffineFactorization:
    """``matrix = rot1 @ diag(contraction) @ rot2`` with proper rotations."""

    rot1: np.ndarray
    contraction: np.ndarray
    rot2: np.ndarray

    @property
    def rotation(self) -> np.ndarray:
        return self.rot1 @ self.rot2

    @property
    def stretch(self) -> np.ndarray:
        """Symmetric contraction ``P`` with ``matrix = rotation @ P``."""
        return self.rot2.T @ np.diag(self.contraction) @ self.rot2

    @property
    def commutator_norm(self) -> float:
        r, p = self.rotation, self.stretch
        return float(np.max(np.abs(r @ p - p @ r)))

    def matrix(self) -> np.ndarray:
        return self.rot1 @ np.diag(self.contraction) @ self.rot2


def affine_factorize(matrix) -> AffineFactorization:
    """Real SVD with both outer factors forced into SO(3).

    Reflections are moved into the contraction by flipping the sign of the
    last singular value.
    """
    m = np.asarray(matrix, dtype=float)
    u, s, vt = np.linalg.svd(m)
    s = s.copy()
    if np.linalg.det(u) < 0:
        u[:, -1] *= -1
        s[-1] *= -1
    if np.linalg.det(vt) < 0:
        vt[-1] *= -1
        s[-1] *= -1
    return AffineFactorization(u, s, vt)


@dataclass(frozen=True)
class BlochAffineMap:
    matrix: np.ndarray
    generator: np.ndarray

    def factorize(self) -> AffineFactorization:
        return affine_factorize(self.matrix)

    def __call__(self, r) -> np.ndarray:
        return self.matrix @ np.asarray(r, dtype=float)


def bloch_affine_exact(B: float, alpha: float, gamma: float, t: float) -> BlochAffineMap:
    d = bloch_generator(B, alpha, gamma)
    return BlochAffineMap(np.real(matexp(d * t)), d)


def bloch_affine_short(B: float, alpha: float, gamma: float, t: float) -> BlochAffineMap:
    """Third-order Taylor polynomial of ``exp(D t)``."""
    d = bloch_generator(B, alpha, gamma)
    dt = d * t
    dt2 = dt @ dt
    return BlochAffineMap(np.eye(3) + dt + dt2 / 2 + dt2 @ dt / 6, d)
