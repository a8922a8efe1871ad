"""Superoperators on column-stacked density matrices.

With ``vec`` stacking columns, ``vec(A X B) = (B^T kron A) vec(X)``. The
coherent part of a master equation is ``-i[H, .]`` and the dissipative part is
``sum_k g_k (G_k . G_k^+ - 1/2 {G_k^+ G_k, .})``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import NotHermitianError
from .operators import (
    EigenSystem,
    dagger,
    eig_general,
    hermitize,
    is_hermitian,
)

log = logging.getLogger(__name__)

PC_TOL = 1e-10
ZERO_TOL = 1e-9


def vec(x) -> np.ndarray:
    """Column-stack a matrix (or a stack of matrices along axis 0)."""
    x = np.asarray(x)
    if x.ndim == 2:
        return x.reshape(-1, order="F")
    return np.swapaxes(x, -1, -2).reshape(x.shape[0], -1)


def unvec(v, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.shape[-1])))
    if v.ndim == 1:
        return v.reshape(dim, dim, order="F")
    return np.swapaxes(v.reshape(v.shape[0], dim, dim), -1, -2)


class Kind(str, enum.Enum):
    COHERENT = "coherent"
    DISSIPATIVE = "dissipative"
    TOTAL = "total"


@dataclass(frozen=True)
class Superoperator:
    matrix: np.ndarray
    dim: int
    kind: Kind = Kind.TOTAL

    def __post_init__(self):
        if self.matrix.shape != (self.dim**2, self.dim**2):
            raise ValueError(
                f"superoperator of shape {self.matrix.shape} does not act on dimension {self.dim}"
            )

    def apply(self, x) -> np.ndarray:
        return unvec(self.matrix @ vec(x), self.dim)

    def __add__(self, other: "Superoperator") -> "Superoperator":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        return Superoperator(self.matrix + other.matrix, self.dim, Kind.TOTAL)


def total(h_super: Superoperator, diss: Superoperator) -> Superoperator:
    return h_super + diss


def coherent_superoperator(h) -> Superoperator:
    """Matrix of ``X -> -i[H, X]``."""
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise NotHermitianError("Hamiltonian must be Hermitian")
    h = hermitize(h)
    eye = np.eye(h.shape[0])
    return Superoperator(-1j * (np.kron(eye, h) - np.kron(h.T, eye)), h.shape[0], Kind.COHERENT)


def dissipator(jumps, rates) -> Superoperator:
    """Lindblad dissipator for jump operators ``jumps`` at decay ``rates``."""
    jumps = [np.asarray(j, dtype=complex) for j in jumps]
    rates = [float(r) for r in rates]
    if len(jumps) != len(rates):
        raise ValueError(f"{len(jumps)} jump operators but {len(rates)} rates")
    if not jumps:
        raise ValueError("at least one jump operator is required")
    if any(r < 0 for r in rates):
        raise ValueError(f"decay rates must be non-negative, got {rates}")
    d = jumps[0].shape[0]
    if any(j.shape != (d, d) for j in jumps):
        raise ValueError("jump operators must share one square shape")
    eye = np.eye(d)
    out = np.zeros((d * d, d * d), dtype=complex)
    for g, rate in zip(jumps, rates):
        gdg = dagger(g) @ g
        out += rate * (np.kron(g.conj(), g) - 0.5 * np.kron(eye, gdg) - 0.5 * np.kron(gdg.T, eye))
    return Superoperator(out, d, Kind.DISSIPATIVE)


class NoiseType(str, enum.Enum):
    PHASE_COVARIANT = "PhaseCovariant"
    NON_PHASE_COVARIANT = "NonPhaseCovariant"


@dataclass(frozen=True)
class NoiseClass:
    tag: NoiseType
    commutator_norm: float

    @property
    def phase_covariant(self) -> bool:
        return self.tag is NoiseType.PHASE_COVARIANT


def classify_noise(h, diss: Superoperator, tol: float = PC_TOL) -> NoiseClass:
    """Phase-covariant iff the coherent and dissipative superoperators commute."""
    hs = h if isinstance(h, Superoperator) else coherent_superoperator(h)
    if hs.dim != diss.dim:
        raise ValueError("dimension mismatch between Hamiltonian and dissipator")
    comm = hs.matrix @ diss.matrix - diss.matrix @ hs.matrix
    norm = float(np.max(np.abs(comm)))
    tag = NoiseType.PHASE_COVARIANT if norm <= tol else NoiseType.NON_PHASE_COVARIANT
    return NoiseClass(tag, norm)


def spectrum(sup: Superoperator) -> EigenSystem:
    """Eigensystem sorted by descending real part; the leading mode is stationary."""
    es = eig_general(sup.matrix)
    scale = max(float(np.max(np.abs(sup.matrix))), 1.0)
    if sup.kind is not Kind.COHERENT and abs(es.eigenvalues[0].real) > ZERO_TOL * scale:
        log.warning("leading eigenvalue %s has non-zero real part", es.eigenvalues[0])
    return es


def zero_modes(es: EigenSystem, scale: float) -> np.ndarray:
    lam = es.eigenvalues / scale
    return np.flatnonzero((np.abs(lam.real) <= ZERO_TOL) & (np.abs(lam.imag) <= ZERO_TOL))


@dataclass(frozen=True)
class SteadyStateReport:
    zero_eigenvalue_count: int
    steady_states: list
    relaxation_rate: float
    t_sts: float
    eigenvalues: np.ndarray = field(repr=False)
    raw_kernel: bool = False


def _hermitian_kernel_basis(kernel_vecs, d):
    """Real-orthonormal Hermitian basis spanning the devectorized kernel."""
    cands = []
    for v in kernel_vecs.T:
        k = unvec(v, d)
        cands.append(hermitize(k))
        cands.append(hermitize(-1j * k))
    real_rep = np.array([np.concatenate([c.real.ravel(), c.imag.ravel()]) for c in cands])
    u, s, vt = np.linalg.svd(real_rep, full_matrices=False)
    rank = int(np.sum(s > 1e-8 * s[0]))
    basis = []
    for row in vt[:rank]:
        half = len(row) // 2
        basis.append((row[:half] + 1j * row[half:]).reshape(d, d))
    return basis


def _extreme_states(basis, d):
    """Positive trace-one representatives of a commuting kernel, or None."""
    for a in basis:
        for b in basis:
            if np.max(np.abs(a @ b - b @ a)) > 1e-8:
                return None
    weights = np.linspace(1.0, 2.0, len(basis)) / np.sqrt(np.arange(1, len(basis) + 1) + 0.5)
    _, vecs = np.linalg.eigh(sum(w * b for w, b in zip(weights, basis)))
    diag = np.array([np.real(np.einsum("ij,ik,kj->j", vecs.conj(), b, vecs)) for b in basis]).T
    groups: list[list[int]] = []
    for i, sig in enumerate(diag):
        for g in groups:
            if np.allclose(diag[g[0]], sig, atol=1e-8):
                g.append(i)
                break
        else:
            groups.append([i])
    if len(groups) != len(basis):
        return None
    states = []
    for g in groups:
        proj = vecs[:, g] @ dagger(vecs[:, g])
        states.append(hermitize(proj / len(g)))
    return states


def steady_report(sup: Superoperator) -> SteadyStateReport:
    """Kernel, steady states and relaxation timescale of a Liouvillian.

    A one-dimensional kernel gives the unique steady state. A larger kernel
    built from mutually commuting Hermitian elements is reported through its
    extreme points (normalized joint-eigenspace projectors). Otherwise the raw
    Hermitian kernel basis is returned with ``raw_kernel=True``.
    """
    es = spectrum(sup)
    d = sup.dim
    scale = max(float(np.max(np.abs(sup.matrix))), 1.0)
    zero = zero_modes(es, scale)
    nonzero = np.setdiff1d(np.arange(len(es)), zero)
    rate = float(np.min(np.abs(es.eigenvalues[nonzero].real))) if len(nonzero) else 0.0
    t_sts = 1.0 / rate if rate > 0 else float("inf")

    basis = _hermitian_kernel_basis(es.right[:, zero], d)
    raw = False
    if len(basis) == 1:
        tr = np.trace(basis[0]).real
        if abs(tr) <= 1e-12:
            states, raw = basis, True
        else:
            states = [hermitize(basis[0] / tr)]
    else:
        states = _extreme_states(basis, d)
        if states is None:
            states, raw = basis, True
    if raw:
        log.warning("kernel has no positive trace-one basis; reporting raw kernel")
    return SteadyStateReport(len(zero), states, rate, t_sts, es.eigenvalues, raw)


def asymptotic_state(sup: Superoperator, rho0) -> np.ndarray:
    """Infinite-time limit of ``rho0`` by biorthogonal projection onto the zero modes."""
    es = spectrum(sup)
    scale = max(float(np.max(np.abs(sup.matrix))), 1.0)
    zero = zero_modes(es, scale)
    r, l = es.right[:, zero], es.left[:, zero]
    return hermitize(unvec(r @ (dagger(l) @ vec(rho0)), sup.dim))


def steady_weights(report: SteadyStateReport, sup: Superoperator, rho0) -> np.ndarray:
    """Weights of the reported steady states reached from ``rho0``.

    This projects ``rho0`` onto the zero modes and expands the result in the
    reported basis by least squares; it is an interpretation, the weights are
    not given in closed form anywhere.
    """
    target = vec(asymptotic_state(sup, rho0))
    a = np.array([vec(s) for s in report.steady_states]).T
    w, *_ = np.linalg.lstsq(a, target, rcond=None)
    return w.real
