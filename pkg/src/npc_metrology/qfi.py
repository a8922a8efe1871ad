"""Quantum Fisher information: state derivatives and three evaluation routes.

* ``qfi_sld`` -- spectral form of ``Tr[rho L^2]`` for any dimension;
* ``qfi_qubit_closed`` -- basis-free qubit formula;
* ``qfi_bloch`` -- Bloch-vector formula.

Plus the optimal-state (channel) QFI of a rotating-spin Hamiltonian and the
seminorm upper bound on channel QFI.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import minimize_scalar

from .errors import InconsistentPureStateError, UnstableDerivativeError
from .operators import hermitize, seminorm

log = logging.getLogger(__name__)

SLD_EPS = 1e-12
PURE_DET = 1e-14
FD_RTOL = 1e-5
FD_ATOL = 1e-10
FD_RETRIES = 3


class Method(str, enum.Enum):
    SLD = "sld"
    QUBIT_CLOSED = "qubit_closed"
    BLOCH = "bloch"
    ANALYTIC = "analytic"


@dataclass(frozen=True)
class QfiRecord:
    parameter: str
    time: float
    value: float
    method: str

    def __post_init__(self):
        if self.value < -1e-9:
            raise ValueError(f"negative QFI {self.value}")
        if self.value < 0:
            object.__setattr__(self, "value", 0.0)


@dataclass(frozen=True)
class DerivativeEstimate:
    d_rho: np.ndarray
    step: float
    richardson_error: float


def default_step(theta: float) -> float:
    return 1e-4 * max(abs(theta), 1.0)


def _central(family, theta, t, h):
    return (np.asarray(family(theta + h, t)) - np.asarray(family(theta - h, t))) / (2 * h)


def _max_entry(a):
    a = np.asarray(a)
    if a.ndim == 2:
        return np.array(np.max(np.abs(a)))
    return np.max(np.abs(a), axis=(-2, -1))


def dstate_fd(family: Callable, theta: float, t, h: float | None = None) -> DerivativeEstimate:
    """Derivative of ``family(theta, t)`` with respect to ``theta``.

    Central differences at steps ``h`` and ``h/2`` are combined by one
    Richardson level. The reported error is ``|D(h/2) - D(h)| / 3``, the
    standard estimate for the error of ``D(h/2)``; the extrapolated value is
    more accurate still. ``family`` may return one matrix or a stack over a
    time grid, in which case every slice is checked on its own.

    The step is quartered up to three times before giving up.
    """
    h0 = default_step(theta) if h is None else float(h)
    if h0 <= 0:
        raise ValueError("finite-difference step must be positive")
    h = h0
    for attempt in range(FD_RETRIES + 1):
        d1 = _central(family, theta, t, h)
        d2 = _central(family, theta, t, h / 2)
        rich = (4 * d2 - d1) / 3
        err = _max_entry(d2 - d1) / 3
        ok = err <= FD_RTOL * _max_entry(rich) + FD_ATOL
        if np.all(ok):
            break
        if attempt == FD_RETRIES:
            raise UnstableDerivativeError(
                f"finite-difference derivative unstable (error {float(np.max(err)):.3e} at step {h:.3e})"
            )
        log.debug("derivative error %.3e too large at step %.3e, refining", float(np.max(err)), h)
        h /= 4
    d = hermitize(rich)
    dim = d.shape[-1]
    tr = np.trace(d, axis1=-2, axis2=-1)
    d = d - tr[..., None, None] * np.eye(dim) / dim
    return DerivativeEstimate(d, h, float(np.max(err)))


def qfi_sld(rho, drho, eps: float = SLD_EPS) -> float:
    """``sum_ij 2 |<i|drho|j>|^2 / (p_i + p_j)`` over the eigenbasis of ``rho``."""
    rho = hermitize(np.asarray(rho))
    drho = np.asarray(drho)
    p, v = np.linalg.eigh(rho)
    m = v.conj().T @ drho @ v
    denom = p[:, None] + p[None, :]
    mask = denom > eps
    return float(np.sum(2 * np.abs(m[mask]) ** 2 / denom[mask]))


def qfi_qubit_closed(rho, drho) -> float:
    """``Tr[drho^2] + Tr[(rho drho)^2] / det(rho)``; pure qubits use ``2 Tr[drho^2]``."""
    rho = np.asarray(rho)
    drho = np.asarray(drho)
    if rho.shape != (2, 2):
        raise ValueError("closed-form QFI needs a 2x2 state")
    det = np.linalg.det(rho).real
    d2 = np.trace(drho @ drho).real
    if det <= PURE_DET:
        log.debug("qubit closed form: det %.3e, using pure-state limit", det)
        return float(2 * d2)
    rd = rho @ drho
    return float(d2 + np.trace(rd @ rd).real / det)


def qfi_bloch(r, dr) -> float:
    """``|dr|^2 + (r . dr)^2 / (1 - |r|^2)`` for a qubit Bloch vector."""
    r = np.asarray(r, dtype=float)
    dr = np.asarray(dr, dtype=float)
    r2 = float(r @ r)
    dot = float(r @ dr)
    if r2 >= (1 - 1e-12) ** 2:
        if abs(dot) > 1e-8 * max(float(np.linalg.norm(dr)), 1.0):
            raise InconsistentPureStateError(
                f"pure Bloch vector with radial derivative r.dr = {dot:.3e}"
            )
        return float(dr @ dr)
    return float(dr @ dr + dot**2 / (1 - r2))


def qfi(rho, drho, method: str | Method = Method.SLD) -> float:
    method = Method(method)
    if method is Method.SLD:
        return qfi_sld(rho, drho)
    if method is Method.QUBIT_CLOSED:
        return qfi_qubit_closed(rho, drho)
    if method is Method.BLOCH:
        from .dynamics import bloch_vector

        return qfi_bloch(bloch_vector(rho), bloch_vector(drho))
    raise ValueError(f"method {method.value} needs a closed form, not a state")


def qfi_series(family: Callable, theta: float, times, method: str | Method = Method.SLD) -> np.ndarray:
    """QFI of ``family(theta, times)`` at every time of a grid."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    rho = np.asarray(family(theta, times))
    drho = dstate_fd(family, theta, times).d_rho
    return np.array([max(qfi(r, d, method), 0.0) for r, d in zip(rho, drho)])


def _vector_derivative(fn, theta, h=None):
    h = default_step(theta) if h is None else h
    d1 = (np.asarray(fn(theta + h)) - np.asarray(fn(theta - h))) / (2 * h)
    d2 = (np.asarray(fn(theta + h / 2)) - np.asarray(fn(theta - h / 2))) / h
    return (4 * d2 - d1) / 3


def qfi_max_channel(vector_family: Callable, theta: float, t) -> np.ndarray | float:
    """Optimal-state QFI for ``H = R(theta) . sigma / 2``.

    ``(d|R|/dtheta)^2 t^2 + 4 |d e_R / dtheta|^2 sin^2(|R| t / 2)``
    """
    r0 = np.asarray(vector_family(theta), dtype=float)
    mag = float(np.linalg.norm(r0))
    if mag == 0:
        raise ValueError("field vector vanishes; its direction is undefined")

    def unit(x):
        v = np.asarray(vector_family(x), dtype=float)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("field vector vanishes; its direction is undefined")
        return v / n

    dmag = float(_vector_derivative(lambda x: np.linalg.norm(vector_family(x)), theta))
    de = _vector_derivative(unit, theta)
    t = np.asarray(t, dtype=float)
    out = dmag**2 * t**2 + 4 * float(de @ de) * np.sin(mag * t / 2) ** 2
    return float(out) if out.ndim == 0 else out


def channel_qfi_upper_bound(dh_family: Callable, t: float, nodes: int = 101) -> float:
    """``[int_0^t ||dH/dlambda(s)|| ds]^2`` with the eigenvalue-spread seminorm."""
    if nodes < 101:
        raise ValueError("at least 101 quadrature nodes are required")
    if t == 0:
        return 0.0
    s = np.linspace(0.0, t, nodes)
    spread = np.array([seminorm(dh_family(x)) for x in s])
    return float(simpson(spread, x=s) ** 2)


def qfi_dephasing_analytic(beta: float, gamma: float, t: float) -> tuple[float, float]:
    """Closed-form ``(F_beta, F_B)`` for a spin dephasing along its own field."""
    return 1.0, 4 * math.sin(beta) ** 2 * math.exp(-4 * gamma * t) * t**2


def maximize_over_beta(objective: Callable[[float], float], nodes: int = 181,
                       lo: float = 0.0, hi: float = math.pi) -> tuple[float, float]:
    """Grid search over ``[lo, hi]`` followed by a golden-section refinement.

    Returns ``(beta_best, value_best)``.
    """
    grid = np.linspace(lo, hi, nodes)
    vals = np.array([objective(b) for b in grid])
    i = int(np.argmax(vals))
    best_b, best_v = float(grid[i]), float(vals[i])
    if 0 < i < nodes - 1 and vals[i] > max(vals[i - 1], vals[i + 1]):
        res = minimize_scalar(
            lambda b: -objective(b),
            bracket=(grid[i - 1], grid[i], grid[i + 1]),
            method="golden",
            options={"xtol": 1e-6},
        )
        if lo <= res.x <= hi and -res.fun > best_v:
            best_b, best_v = float(res.x), float(-res.fun)
    return best_b, best_v
