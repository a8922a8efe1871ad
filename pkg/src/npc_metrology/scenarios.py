"""Computations behind the command-line runners.

Each runner returns plain tables (lists of row tuples plus a header) so the
CLI only has to parse configuration and write files.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import trajectory
from .liouville import classify_noise, steady_report
from .models import (
    SpinModel,
    bloch_sphere_states,
    field_operator,
    initial_ghz_state,
    initial_product_state,
)
from .qfi import Method, channel_qfi_upper_bound, qfi_dephasing_analytic, qfi_series

PARAMETERS = ("B", "beta", "vartheta")
AXES = ("alpha", "beta", "gamma", "t", "vartheta", "N")
MAX_GRID = 1_000_000


@dataclass(frozen=True)
class Setup:
    """A spin model together with its initial state."""

    model: SpinModel = field(default_factory=SpinModel)
    beta: float = math.pi / 2
    state: str = "product"

    def __post_init__(self):
        if self.state not in ("product", "ghz"):
            raise ValueError(f"unknown initial state kind {self.state!r}")

    def rho0(self, beta: float | None = None) -> np.ndarray:
        if self.state == "ghz":
            return initial_ghz_state(self.model.N)
        return initial_product_state(self.model.N, self.beta if beta is None else beta)

    def family(self, parameter: str):
        """``theta, times -> states`` with ``theta`` substituted for ``parameter``."""
        if parameter not in PARAMETERS:
            raise ValueError(f"unknown parameter {parameter!r}; expected one of {PARAMETERS}")
        if parameter == "beta":
            if self.state != "product":
                raise ValueError("beta only parametrizes product initial states")
            liou = self.model.liouvillian()
            return lambda b, t: trajectory(liou, self.rho0(b), t)
        rho0 = self.rho0()
        return lambda x, t: trajectory(self.model.with_(**{parameter: x}).liouvillian(), rho0, t)

    def value(self, parameter: str) -> float:
        return self.beta if parameter == "beta" else getattr(self.model, parameter)

    def qfi(self, parameter: str, times, method: str = "sld") -> np.ndarray:
        return qfi_series(self.family(parameter), self.value(parameter), times, method)


def default_times(B: float, points: int = 400) -> np.ndarray:
    return np.linspace(0.0, 10.0 / B, points)


def _pool_map(fn, items, threads: int):
    items = list(items)
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# Scenario 1: dephasing along the field --------------------------------------


def scenario_1(B=0.1, beta=math.pi / 3, gamma=0.05, times=None, method="qubit_closed", threads=1):
    times = default_times(B) if times is None else np.asarray(times, dtype=float)
    setup = Setup(SpinModel(1, B, math.pi / 2, math.pi / 2, gamma), beta)
    f_beta = setup.qfi("beta", times, method)
    f_b = setup.qfi("B", times, method)
    rows = []
    for t, fb_num, fB_num in zip(times, f_beta, f_b):
        fb_an, fB_an = qfi_dephasing_analytic(beta, gamma, t)
        rows.append((t, fb_num, fb_an, fB_num, fB_an))
    return {"scenario1": (("time", "F_beta", "F_beta_analytic", "F_B", "F_B_analytic"), rows)}


# Scenario 2: non-phase-covariant noise with the field along Z ---------------


def scenario_2(B=0.1, alpha=math.pi / 4, gammas=(0.02, 0.05, 0.1, 0.2), times=None,
               grid_gamma=0.05, alphas=None, gamma_ts=None, method="sld", threads=1):
    times = default_times(B) if times is None else np.asarray(times, dtype=float)
    curves = [("ground", g, Setup(SpinModel(1, B, math.pi / 2, alpha, g), math.pi)) for g in gammas]
    curves.append(("plus_noiseless", 0.0, Setup(SpinModel(1, B, math.pi / 2, alpha, 0.0), math.pi / 2)))
    series = _pool_map(lambda c: c[2].qfi("B", times, method), curves, threads)
    curve_rows = [
        (name, g, t, f)
        for (name, g, _), fs in zip(curves, series)
        for t, f in zip(times, fs)
    ]

    alphas = np.linspace(0.0, math.pi, 61) if alphas is None else np.asarray(alphas, dtype=float)
    gamma_ts = np.linspace(0.0, 6.0, 121) if gamma_ts is None else np.asarray(gamma_ts, dtype=float)
    grid_times = gamma_ts / grid_gamma

    def column(a):
        return Setup(SpinModel(1, B, math.pi / 2, a, grid_gamma), math.pi).qfi("B", grid_times, method)

    surface = _pool_map(column, alphas, threads)
    grid_rows = [
        (a, gt, f) for a, fs in zip(alphas, surface) for gt, f in zip(gamma_ts, fs)
    ]
    return {
        "scenario2_curves": (("curve", "gamma", "time", "qfi"), curve_rows),
        "scenario2_density": (("alpha", "gamma_t", "qfi"), grid_rows),
    }


# Scenario 3: field direction ------------------------------------------------


def scenario_3(B=0.1, vartheta=math.pi / 3, alpha=math.pi / 4, beta=math.pi / 3, gamma=0.03,
               times=None, surface_vartheta=math.pi / 4, alphas=None, betas=None,
               method="sld", threads=1):
    times = default_times(B) if times is None else np.asarray(times, dtype=float)
    setup = Setup(SpinModel(1, B, vartheta, alpha, gamma), beta)
    f = setup.qfi("vartheta", times, method)
    noiseless_max = 4.0
    curve_rows = [(t, v, noiseless_max) for t, v in zip(times, f)]

    alphas = np.linspace(0.0, math.pi / 2, 19) if alphas is None else np.asarray(alphas, dtype=float)
    betas = np.linspace(0.0, math.pi, 19) if betas is None else np.asarray(betas, dtype=float)

    def peak(point):
        a, b = point
        s = Setup(SpinModel(1, B, surface_vartheta, a, gamma), b)
        return float(np.max(s.qfi("vartheta", times, method)))

    points = list(itertools.product(alphas, betas))
    peaks = _pool_map(peak, points, threads)
    surface_rows = [(a, b, p) for (a, b), p in zip(points, peaks)]
    return {
        "scenario3_curve": (("time", "F_vartheta", "noiseless_max"), curve_rows),
        "scenario3_surface": (("alpha", "beta", "max_F_vartheta"), surface_rows),
    }


# Generic sweep --------------------------------------------------------------


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if self.name not in AXES:
            raise ValueError(f"unknown sweep axis {self.name!r}; expected one of {AXES}")
        if self.points < 1:
            raise ValueError(f"axis {self.name} needs at least one point")

    def values(self) -> np.ndarray:
        v = np.linspace(self.start, self.stop, self.points)
        if self.name == "N":
            return np.round(v).astype(int)
        return v


@dataclass(frozen=True)
class SweepSpec:
    model: SpinModel = field(default_factory=SpinModel)
    beta: float = math.pi / 2
    state: str = "product"
    t: float = 10.0
    vary: tuple = ()
    parameter: str = "B"
    qfi_method: str = "sld"
    output: str = "sweep.csv"

    def __post_init__(self):
        names = [a.name for a in self.vary]
        if len(set(names)) != len(names):
            raise ValueError("each axis may appear only once")
        if self.parameter not in PARAMETERS:
            raise ValueError(f"unknown parameter {self.parameter!r}")
        Method(self.qfi_method)
        if self.qfi_method == "analytic":
            raise ValueError("analytic is not a sweep method")
        if math.prod(a.points for a in self.vary) > MAX_GRID:
            raise ValueError(f"sweep grid exceeds {MAX_GRID} points")


def sweep(spec: SweepSpec, threads: int = 1):
    """One QFI row per grid point, lexicographic in the axis indices."""
    axes = list(spec.vary)
    values = [a.values() for a in axes]
    names = [a.name for a in axes]
    has_t = "t" in names
    outer = [i for i, n in enumerate(names) if n != "t"]
    t_values = values[names.index("t")] if has_t else np.array([spec.t])

    def run(outer_idx):
        model_kw, beta = {}, spec.beta
        for i, k in zip(outer, outer_idx):
            v = values[i][k]
            if names[i] == "beta":
                beta = float(v)
            elif names[i] == "N":
                model_kw["N"] = int(v)
            else:
                model_kw[names[i]] = float(v)
        setup = Setup(replace(spec.model, **model_kw), beta, spec.state)
        return setup.qfi(spec.parameter, t_values, spec.qfi_method)

    outer_grid = list(itertools.product(*[range(len(values[i])) for i in outer]))
    results = dict(zip(outer_grid, _pool_map(run, outer_grid, threads)))

    rows = []
    for idx in itertools.product(*[range(len(v)) for v in values]):
        key = tuple(idx[i] for i in outer)
        k_t = idx[names.index("t")] if has_t else 0
        axis_vals = [values[i][k] for i, k in enumerate(idx)]
        rows.append((*axis_vals, spec.parameter, float(t_values[k_t]),
                     float(results[key][k_t]), spec.qfi_method))
    header = (*names, "parameter", "time", "qfi", "method")
    return header, rows


# Spectrum -------------------------------------------------------------------


def spectrum_summary(model: SpinModel):
    liou = model.liouvillian()
    rep = steady_report(liou)
    nc = classify_noise(model.coherent(), model.dissipative())
    eig_rows = [
        (i, float(lam.real), float(lam.imag))
        for i, lam in enumerate(rep.eigenvalues)
    ]
    state_rows = [
        (s, i, j, float(m[i, j].real), float(m[i, j].imag))
        for s, m in enumerate(rep.steady_states)
        for i in range(m.shape[0])
        for j in range(m.shape[1])
    ]
    summary = {
        "noise_class": nc.tag.value,
        "commutator_norm": nc.commutator_norm,
        "zero_eigenvalue_count": rep.zero_eigenvalue_count,
        "relaxation_rate": rep.relaxation_rate,
        "t_sts": rep.t_sts if math.isfinite(rep.t_sts) else None,
        "raw_kernel": rep.raw_kernel,
    }
    return {
        "spectrum": (("index", "re", "im"), eig_rows),
        "steady_states": (("state", "row", "col", "re", "im"), state_rows),
    }, summary


# Channel bound --------------------------------------------------------------


def generator_derivative(model: SpinModel, parameter: str) -> np.ndarray:
    if parameter == "B":
        return field_operator(model.vartheta)
    if parameter == "vartheta":
        return model.B * field_operator(model.vartheta + math.pi / 2)
    raise ValueError("the channel bound is defined for B or vartheta")


def bound_table(model: SpinModel, parameter: str, times, method="sld", threads=1, slack=1e-6):
    """Seminorm bound against sampled noiseless and noisy QFI (single spin)."""
    if model.N != 1:
        raise ValueError("the bound runner samples single-spin states; set N=1")
    times = np.asarray(times, dtype=float)
    dh = generator_derivative(model, parameter)
    bounds = np.array([channel_qfi_upper_bound(lambda s: dh, t) for t in times])
    states = bloch_sphere_states()
    clean = model.with_(gamma=0.0)

    def sample(args):
        m, rho0 = args
        fam = lambda x, t: trajectory(m.with_(**{parameter: x}).liouvillian(), rho0, t)
        return qfi_series(fam, getattr(m, parameter), times, method)

    jobs = [(clean, s) for s in states] + [(model, s) for s in states]
    res = np.array(_pool_map(sample, jobs, threads))
    noiseless = res[: len(states)].max(axis=0)
    noisy = res[len(states):].max(axis=0)
    ceiling = float(noiseless.max())
    rows = [
        (t, b, fn, fy, bool(fy > ceiling), bool(max(fn, fy) > b + slack))
        for t, b, fn, fy in zip(times, bounds, noiseless, noisy)
    ]
    header = ("time", "bound", "best_noiseless", "best_noisy", "exceeds_noiseless_max", "violates_bound")
    return header, rows, ceiling
