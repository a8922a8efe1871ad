"""Dense complex matrix kernel.

Everything here is a pure function of numpy arrays. Basis convention for a
single spin: ``|e> = (1, 0)`` and ``|g> = (0, 1)``, so ``sigma_z |e> = |e>``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg

from .errors import DefectiveSpectrumError, NotHermitianError

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
CLUSTER_RTOL = 1e-8
DEFECT_TOL = 1e-8

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
# sigma_+ = |e><g|, sigma_- = |g><e|
SP = np.array([[0, 1], [0, 0]], dtype=complex)
SM = np.array([[0, 0], [1, 0]], dtype=complex)
PAULI = (SX, SY, SZ)


def kron(*ops) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, (np.asarray(op) for op in ops))


def embed(op, site: int, n_sites: int) -> np.ndarray:
    """Place a single-spin operator on ``site`` of an ``n_sites`` register."""
    if not 0 <= site < n_sites:
        raise ValueError(f"site {site} outside register of {n_sites}")
    factors = [I2] * n_sites
    factors[site] = np.asarray(op, dtype=complex)
    return kron(*factors)


def dagger(a) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    return a @ b + b @ a


def hermiticity_defect(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a - dagger(a)))) if a.size else 0.0


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and hermiticity_defect(a) <= tol


def hermitize(a) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def _require_square(a, name="matrix"):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def _require_hermitian(a, tol=HERMITIAN_TOL):
    a = _require_square(a)
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max |A - A^+| = {defect:.3e})")
    if defect > 0:
        log.debug("symmetrized Hermitian input, correction %.3e", defect)
    return hermitize(a)


def matexp(a) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a degree-13 Pade core."""
    a = _require_square(a)
    return scipy.linalg.expm(a)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues with right (and, for general matrices, left) eigenvectors.

    Vectors are stored as columns. For the general case the left vectors are
    scaled so that ``left.conj().T @ right`` is the identity.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray | None = None

    def __len__(self):
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        if self.left is None:
            return (self.right * self.eigenvalues) @ dagger(self.right)
        return (self.right * self.eigenvalues) @ dagger(self.left)


def eig_hermitian(a, tol: float = HERMITIAN_TOL) -> EigenSystem:
    """Ascending real spectrum and orthonormal eigenvectors of a Hermitian matrix."""
    a = _require_hermitian(a, tol)
    w, v = np.linalg.eigh(a)
    return EigenSystem(w, v)


def _clusters(values, rtol):
    scale = max(float(np.max(np.abs(values))), 1.0) if len(values) else 1.0
    groups: list[list[int]] = []
    for i, lam in enumerate(values):
        for g in groups:
            if abs(values[g[0]] - lam) <= rtol * scale:
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def eig_general(a, rtol: float = CLUSTER_RTOL) -> EigenSystem:
    """Biorthogonal eigensystem of a diagonalizable matrix.

    Eigenvalues are sorted by descending real part (ties by ascending
    imaginary part). Near-degenerate eigenvalues (relative gap ``rtol``) are
    treated as one cluster and biorthogonalized blockwise.

    Raises
    ------
    DefectiveSpectrumError
        If a cluster's left/right Gram block is rank deficient, i.e. the
        matrix is not diagonalizable there.
    """
    a = _require_square(a)
    w, vl, vr = scipy.linalg.eig(a, left=True, right=True)
    order = np.lexsort((np.round(w.imag, 12), -np.round(w.real, 12)))
    w, vl, vr = w[order], vl[:, order], vr[:, order]
    vr = vr / np.linalg.norm(vr, axis=0)
    vl = vl.astype(complex, copy=True)
    for group in _clusters(w, rtol):
        idx = np.array(group)
        gram = dagger(vl[:, idx]) @ vr[:, idx]
        s = np.linalg.svd(gram, compute_uv=False)
        if s[-1] <= DEFECT_TOL * max(s[0], 1.0):
            raise DefectiveSpectrumError(
                w[idx], f"eigenvalue cluster {np.round(w[idx], 10)} is defective"
            )
        vl[:, idx] = vl[:, idx] @ dagger(np.linalg.inv(gram))
    return EigenSystem(w, vr, vl)


def seminorm(a, tol: float = HERMITIAN_TOL) -> float:
    """Spread between the largest and smallest eigenvalue of a Hermitian matrix."""
    w = np.linalg.eigvalsh(_require_hermitian(a, tol))
    return float(w[-1] - w[0])
