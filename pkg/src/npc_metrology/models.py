"""Spin models: N uncoupled spins in a tilted field with tilted local dissipation.

``H = sum_i B [cos(vartheta) sx_i + sin(vartheta) sz_i]`` and each spin has
the jump operator ``cos(alpha) sx_i + sin(alpha) sz_i`` at rate ``gamma``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import trapezoid

from .liouville import Superoperator, coherent_superoperator, dissipator
from .operators import SX, SZ, embed, kron

MAX_SPINS = 4
RCPT_VALIDITY = 0.3


class RcptValidityWarning(UserWarning):
    """The polaron picture is used outside ``g_r / Omega_r << 1``."""


def field_operator(angle: float) -> np.ndarray:
    """``cos(angle) sx + sin(angle) sz``."""
    return math.cos(angle) * SX + math.sin(angle) * SZ


@dataclass(frozen=True)
class SpinModel:
    N: int = 1
    B: float = 0.1
    vartheta: float = math.pi / 2
    alpha: float = math.pi / 2
    gamma: float = 0.0

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or not 1 <= self.N <= MAX_SPINS:
            raise ValueError(f"particle count N must be an integer in [1, {MAX_SPINS}], got {self.N}")
        if not self.B > 0:
            raise ValueError(f"field amplitude B must be positive, got {self.B}")
        if self.gamma < 0:
            raise ValueError(f"decay rate gamma must be non-negative, got {self.gamma}")

    @property
    def dim(self) -> int:
        return 2**self.N

    def with_(self, **changes) -> "SpinModel":
        return replace(self, **changes)

    def hamiltonian(self) -> np.ndarray:
        single = self.B * field_operator(self.vartheta)
        return sum(embed(single, i, self.N) for i in range(self.N))

    def jump_operators(self) -> list:
        single = field_operator(self.alpha)
        return [embed(single, i, self.N) for i in range(self.N)]

    def rates(self) -> list:
        return [self.gamma] * self.N

    def coherent(self) -> Superoperator:
        return coherent_superoperator(self.hamiltonian())

    def dissipative(self) -> Superoperator:
        return dissipator(self.jump_operators(), self.rates())

    def liouvillian(self) -> Superoperator:
        return self.coherent() + self.dissipative()


def build_model(N: int, B: float, vartheta: float, alpha: float, gamma: float):
    """Hamiltonian, jump operators and rates of the ``N``-spin model."""
    m = SpinModel(N, B, vartheta, alpha, gamma)
    return m.hamiltonian(), m.jump_operators(), m.rates()


def spin_state(beta: float, phi: float = 0.0) -> np.ndarray:
    """``cos(beta/2)|e> + e^{i phi} sin(beta/2)|g>``."""
    return np.array([math.cos(beta / 2), np.exp(1j * phi) * math.sin(beta / 2)], dtype=complex)


def initial_product_state(N: int, beta: float, phi: float = 0.0) -> np.ndarray:
    psi = kron(*([spin_state(beta, phi)] * N))
    return np.outer(psi, psi.conj())


def initial_ghz_state(N: int) -> np.ndarray:
    """``(|e...e> + |g...g>)/sqrt(2)`` as a density matrix."""
    if N < 2:
        raise ValueError("a GHZ state needs at least two spins")
    psi = np.zeros(2**N, dtype=complex)
    psi[0] = psi[-1] = 1 / math.sqrt(2)
    return np.outer(psi, psi.conj())


def bloch_sphere_states(n_polar: int = 11, n_azimuth: int = 8) -> list:
    """Pure qubit states on a latitude-longitude grid (poles counted once).

    The default 11 x 8 grid has 74 states and contains the equator.
    """
    states = []
    for k, theta in enumerate(np.linspace(0, math.pi, n_polar)):
        phis = [0.0] if k in (0, n_polar - 1) else np.linspace(0, 2 * math.pi, n_azimuth, endpoint=False)
        for phi in phis:
            psi = spin_state(theta, phi)
            states.append(np.outer(psi, psi.conj()))
    return states


# Reaction-coordinate polaron picture -------------------------------------


@dataclass(frozen=True)
class RcptParams:
    g_r: float
    omega_r: float

    def __post_init__(self):
        if self.omega_r <= 0:
            raise ValueError("reaction-coordinate frequency must be positive")
        if self.g_r < 0:
            raise ValueError("reaction-coordinate coupling must be non-negative")
        if self.g_r / self.omega_r > RCPT_VALIDITY:
            warnings.warn(
                f"g_r/Omega_r = {self.g_r / self.omega_r:.3f} exceeds {RCPT_VALIDITY}",
                RcptValidityWarning,
                stacklevel=3,
            )

    @property
    def valid(self) -> bool:
        return self.g_r / self.omega_r <= RCPT_VALIDITY

    @property
    def zeta_plus(self) -> float:
        return 0.5 * (1 + math.exp(-2 * self.g_r**2 / self.omega_r**2))

    @property
    def zeta_minus(self) -> float:
        return 0.5 * (1 - math.exp(-2 * self.g_r**2 / self.omega_r**2))


def reaction_coordinate_params(omega, spectral_density) -> RcptParams:
    """Reaction-coordinate coupling and frequency from a sampled ``J(omega)``.

    ``Omega_r^2 = int w^3 J / int w J`` and ``g_r^2 = int w J / Omega_r``,
    both by the trapezoidal rule on the given samples.
    """
    w = np.asarray(omega, dtype=float)
    j = np.asarray(spectral_density, dtype=float)
    if w.shape != j.shape or w.ndim != 1:
        raise ValueError("omega and J must be 1-D arrays of equal length")
    if np.any(w < 0) or np.any(np.diff(w) <= 0):
        raise ValueError("omega must be non-negative and strictly ascending")
    if np.any(j < 0):
        raise ValueError("spectral density must be non-negative")
    if not np.any(j > 0):
        raise ValueError("spectral density is identically zero")
    m1 = trapezoid(w * j, w)
    m3 = trapezoid(w**3 * j, w)
    omega_r = math.sqrt(m3 / m1)
    return RcptParams(math.sqrt(m1 / omega_r), omega_r)


def rcpt_field_vector(B: float, vartheta: float, alpha: float, params: RcptParams) -> np.ndarray:
    """``R'`` with ``H_eff = R' . sigma / 2``."""
    zp, zm = params.zeta_plus, params.zeta_minus
    return 2 * B * np.array(
        [
            zp * math.cos(vartheta) + zm * math.cos(2 * alpha - vartheta),
            0.0,
            zp * math.sin(vartheta) + zm * math.sin(2 * alpha - vartheta),
        ]
    )


def rcpt_effective_hamiltonian(B: float, vartheta: float, alpha: float, params: RcptParams) -> np.ndarray:
    """Single-spin effective Hamiltonian ``zeta_+ H + zeta_- G H G``, closed form."""
    r = rcpt_field_vector(B, vartheta, alpha, params)
    return 0.5 * (r[0] * SX + r[2] * SZ)


def noiseless_field_vector(B: float, vartheta: float) -> np.ndarray:
    """``R`` with ``H = R . sigma / 2`` for the bare tilted field."""
    return 2 * B * np.array([math.cos(vartheta), 0.0, math.sin(vartheta)])
