"""Squeezed-magnon cavity magnetometry: analytic noise spectra, noise
budgets, sensitivity curves, and a stochastic Langevin oracle to verify them.
"""

from .model import (
    HBAR,
    K_B,
    DerivedParameters,
    DriveSettings,
    ParameterError,
    PreconditionError,
    RotatingWaveWarning,
    SystemParameters,
    baseline_parameters,
    derive_squeeze_amplitude,
    derived_parameters,
    load_parameters,
    parse_parameters,
    thermal_occupation,
)
from .transfer import (
    DriftSystem,
    PoleError,
    SingularResponseError,
    TransferResponse,
    closed_form_response,
    drift_system,
    frequency_response,
    response_grid,
)
from .spectra import (
    NoiseBudget,
    QuadratureVariances,
    SqueezedReservoir,
    approx_suppressed_sensitivity,
    input_quadrature_variances,
    noise_budget,
    noise_budget_grid,
    output_spectrum,
    reservoir_occupations,
)
from .simulation import (
    ConfigurationError,
    SimulationConfig,
    SimulationTrace,
    ToneSignal,
    estimate_psd,
    export_trace,
    lyapunov_covariance,
    measure_gain,
    simulate,
)
from .verification import run_verification, verification_parameters

__version__ = "0.1.0"
