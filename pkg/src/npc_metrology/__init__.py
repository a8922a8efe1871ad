"""Open-system quantum metrology: Lindblad dynamics, noise classification and QFI."""

__version__ = "0.1.0"

from .errors import (
    DefectiveSpectrumError,
    InconsistentPureStateError,
    NoiseClassError,
    NotHermitianError,
    NumericalError,
    StepUnderflowError,
    UnstableDerivativeError,
)
from .liouville import (
    NoiseClass,
    NoiseType,
    SteadyStateReport,
    Superoperator,
    classify_noise,
    coherent_superoperator,
    dissipator,
    spectrum,
    steady_report,
    unvec,
    vec,
)
from .models import (
    RcptParams,
    SpinModel,
    build_model,
    initial_ghz_state,
    initial_product_state,
    rcpt_effective_hamiltonian,
    reaction_coordinate_params,
)
from .qfi import (
    QfiRecord,
    channel_qfi_upper_bound,
    dstate_fd,
    qfi_bloch,
    qfi_dephasing_analytic,
    qfi_max_channel,
    qfi_qubit_closed,
    qfi_sld,
)
from .dynamics import (
    affine_factorize,
    bloch_affine_short,
    bloch_generator,
    pc_factorized,
    propagate_exact,
    propagate_rk,
    series_correction,
    short_time_state,
    trajectory,
)

__all__ = [
    "DefectiveSpectrumError",
    "InconsistentPureStateError",
    "NoiseClass",
    "NoiseClassError",
    "NoiseType",
    "NotHermitianError",
    "NumericalError",
    "QfiRecord",
    "RcptParams",
    "SpinModel",
    "SteadyStateReport",
    "StepUnderflowError",
    "Superoperator",
    "UnstableDerivativeError",
    "affine_factorize",
    "bloch_affine_short",
    "bloch_generator",
    "build_model",
    "channel_qfi_upper_bound",
    "classify_noise",
    "coherent_superoperator",
    "dissipator",
    "dstate_fd",
    "initial_ghz_state",
    "initial_product_state",
    "pc_factorized",
    "propagate_exact",
    "propagate_rk",
    "qfi_bloch",
    "qfi_dephasing_analytic",
    "qfi_max_channel",
    "qfi_qubit_closed",
    "qfi_sld",
    "rcpt_effective_hamiltonian",
    "reaction_coordinate_params",
    "series_correction",
    "short_time_state",
    "spectrum",
    "steady_report",
    "trajectory",
    "unvec",
    "vec",
]
