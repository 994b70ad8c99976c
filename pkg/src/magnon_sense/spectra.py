"""Input variances, output noise spectra, noise budget and sensitivity.

The homodyne output spectrum of the phase quadrature is assembled from the
transfer coefficients and the symmetrized variance densities of the four
white inputs.  The magnon input is squeezed: without reservoir engineering
its amplitude/phase quadrature densities are exp(-2 r_m) (nbar_m + 1/2) and
exp(+2 r_m) (nbar_m + 1/2).  Immersing the magnon in a squeezed vacuum
reservoir (squeeze amplitude r_n, phase phi_n) replaces the thermal bath;
the transformed-mode occupation N_e and pair correlator M_e then follow from
composing the two Bogoliubov transformations, and vanish together at
r_n = r_m, phi_n = pi, leaving a pure vacuum input.

At the backaction-evading point (both detunings zero) the spectrum separates
into response * (thermal noise + additional noise + signal), which is the
decomposition reported by :func:`noise_budget` together with the
field-referred total noise and the sensitivity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import DerivedParameters, ParameterError, PreconditionError, thermal_occupation
from .transfer import response_grid

__all__ = [
    "QuadratureVariances",
    "SqueezedReservoir",
    "NoiseBudget",
    "reservoir_occupations",
    "input_quadrature_variances",
    "output_spectrum",
    "noise_budget",
    "noise_budget_grid",
    "approx_suppressed_sensitivity",
]

#: below this value of |k1|^2 the magnon channel transduces nothing and the
#: field-referred noise is reported as infinity rather than an error
_K1_SQ_FLOOR = 1e-30

#: detunings are considered zero when below this fraction of the linewidths
_EVASION_RTOL = 1e-9


@dataclass(frozen=True)
class QuadratureVariances:
    """Symmetrized white-noise variance densities of the magnon input.

    ``v_x`` and ``v_p`` are the amplitude and phase quadrature densities and
    ``c_xp`` the symmetrized cross density.  Physical inputs satisfy
    ``v_x * v_p - c_xp**2 >= 1/4`` with equality for pure states.
    """

    v_x: float
    v_p: float
    c_xp: float

    @property
    def uncertainty_product(self) -> float:
        return self.v_x * self.v_p - self.c_xp**2


@dataclass(frozen=True)
class SqueezedReservoir:
    """Squeezed vacuum reservoir for the magnon mode.

    ``phi_n`` is stored reduced to [0, 2*pi).  The reservoir cancels the
    transformed-mode occupation completely at ``r_n = r_m``, ``phi_n = pi``.
    """

    r_n: float
    phi_n: float

    def __post_init__(self):
        if self.r_n < 0 or not math.isfinite(self.r_n):
            raise ParameterError("reservoir squeeze amplitude r_n must be >= 0")
        if not math.isfinite(self.phi_n):
            raise ParameterError("reservoir phase phi_n must be finite")
        phi = math.fmod(self.phi_n, 2.0 * math.pi)
        if phi < 0.0:
            phi += 2.0 * math.pi
        object.__setattr__(self, "phi_n", phi)


@dataclass(frozen=True)
class NoiseBudget:
    """Per-frequency decomposition of the output noise.

    ``response`` is the gain from the field-referred signal density to the
    output spectrum; ``additional_noise`` the cavity (shot/backaction)
    contribution and ``thermal_noise`` the magnon thermal contribution, both
    referred to the same input; ``s_out`` the output spectrum value;
    ``s_bnoise`` the total noise density referred to magnetic field (T^2/Hz)
    and ``sensitivity`` its square root (T/sqrt(Hz)).
    """

    omega: float
    response: float
    additional_noise: float
    thermal_noise: float
    s_out: float
    s_bnoise: float
    sensitivity: float

    def snr(self, b_ex: float) -> float:
        """Amplitude signal-to-noise ratio for a field of spectral amplitude
        ``b_ex`` (T/sqrt(Hz)); unity defines the minimum detectable signal."""
        return b_ex / self.sensitivity


def reservoir_occupations(r_n: float, phi_n: float, r_m: float) -> tuple[float, complex]:
    """Effective occupation N_e and pair correlator M_e of the transformed mode.

        N_e = sinh^2(r_n) cosh^2(r_m) + sinh^2(r_m) cosh^2(r_n)
              + (1/2) cos(phi_n) sinh(2 r_n) sinh(2 r_m)
        M_e = [cosh(r_n) sinh(r_m) + e^{+i phi_n} sinh(r_n) cosh(r_m)]
            * [cosh(r_n) cosh(r_m) + e^{-i phi_n} sinh(r_n) sinh(r_m)]

    Composition of two Bogoliubov transformations is again Bogoliubov, so
    |M_e|^2 = N_e (N_e + 1) identically; N_e >= 0 up to rounding.
    """
    if r_n < 0:
        raise ParameterError("reservoir squeeze amplitude r_n must be >= 0")
    shn, chn = math.sinh(r_n), math.cosh(r_n)
    shm, chm = math.sinh(r_m), math.cosh(r_m)
    n_e = (shn**2 * chm**2 + shm**2 * chn**2
           + 0.5 * math.cos(phi_n) * math.sinh(2.0 * r_n) * math.sinh(2.0 * r_m))
    phase = cmath.exp(1j * phi_n)
    m_e = ((chn * shm + phase * shn * chm)
           * (chn * chm + phase.conjugate() * shn * shm))
    return n_e, m_e


def input_quadrature_variances(
    r_m: float,
    nbar_m: float,
    reservoir: SqueezedReservoir | None = None,
) -> QuadratureVariances:
    """Variance densities of the magnon quadrature inputs.

    Without a reservoir the thermal bath seen through the squeezing
    transformation gives ``v_x = exp(-2 r_m) (nbar_m + 1/2)``,
    ``v_p = exp(+2 r_m) (nbar_m + 1/2)`` and no cross correlation.  With a
    reservoir the bath is an engineered squeezed vacuum and

        v_x = N_e + 1/2 + Re M_e,   v_p = N_e + 1/2 - Re M_e,
        c_xp = Im M_e.

    The sign of the Re M_e term is fixed by requiring that the same
    expressions, evaluated on the thermal-squeezed correlators
    (N = cosh(2 r_m) nbar_m + sinh^2 r_m, M = -sinh(2 r_m)(nbar_m + 1/2)),
    reproduce the reservoir-free formulas exactly.
    """
    if nbar_m < 0:
        raise ParameterError("nbar_m must be >= 0")
    if reservoir is None:
        base = nbar_m + 0.5
        return QuadratureVariances(
            v_x=math.exp(-2.0 * r_m) * base,
            v_p=math.exp(2.0 * r_m) * base,
            c_xp=0.0,
        )
    n_e, m_e = reservoir_occupations(reservoir.r_n, reservoir.phi_n, r_m)
    return QuadratureVariances(
        v_x=n_e + 0.5 + m_e.real,
        v_p=n_e + 0.5 - m_e.real,
        c_xp=m_e.imag,
    )


def output_spectrum(
    dp: DerivedParameters,
    temperature: float,
    grid,
    reservoir: SqueezedReservoir | None = None,
    signal_psd: tuple | None = None,
) -> np.ndarray:
    """Homodyne output spectrum of the phase quadrature on a frequency grid.

        s_out = (nbar_a + 1/2) (|k3|^2 + |k4|^2)
               + |k1|^2 (v_x + S1) + |k2|^2 (v_p + S2)
               + 2 Re(k1 conj(k2)) c_xp

    ``signal_psd``, when given, is a pair (S1, S2) of caller-supplied signal
    spectral densities per grid point, already containing the xi
    amplification of the field.  The cross term vanishes whenever c_xp = 0
    (no reservoir, or reservoir phase 0/pi) or k2 = 0 (zero magnon detuning),
    which covers every reported operating point; it is kept for arbitrary
    reservoir phases.
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ParameterError("frequency grid must be nonempty")
    if not np.all(np.isfinite(grid)):
        raise ParameterError("frequency grid must be finite")
    nbar_a = thermal_occupation(dp.omega_a, temperature)
    nbar_m = thermal_occupation(dp.omega_0, temperature)
    var = input_quadrature_variances(dp.r_m, nbar_m, reservoir)

    if signal_psd is None:
        s1 = s2 = np.zeros_like(grid)
    else:
        s1 = np.broadcast_to(np.asarray(signal_psd[0], dtype=float), grid.shape)
        s2 = np.broadcast_to(np.asarray(signal_psd[1], dtype=float), grid.shape)

    k1, k2, k3, k4 = response_grid(dp, grid)
    s_out = ((nbar_a + 0.5) * (np.abs(k3)**2 + np.abs(k4)**2)
             + np.abs(k1)**2 * (var.v_x + s1)
             + np.abs(k2)**2 * (var.v_p + s2)
             + 2.0 * np.real(k1 * np.conj(k2)) * var.c_xp)
    return s_out


def _require_evading_point(dp: DerivedParameters) -> None:
    tol = _EVASION_RTOL * min(dp.kappa_a, dp.kappa_m)
    if abs(dp.delta_a) > tol:
        raise PreconditionError(
            f"noise budget is defined only at the backaction-evading point; "
            f"delta_a = {dp.delta_a!r} rad/s is nonzero")
    if abs(dp.delta_0p) > tol:
        raise PreconditionError(
            f"noise budget is defined only at the backaction-evading point; "
            f"delta_0p = {dp.delta_0p!r} rad/s is nonzero")


def noise_budget(
    dp: DerivedParameters,
    temperature: float,
    omega: float,
    reservoir: SqueezedReservoir | None = None,
) -> NoiseBudget:
    """Response, additional noise, thermal noise, total noise and sensitivity.

    Only defined at the backaction-evading point delta_a = delta_0p = 0:

        response          A_m  = xi |k1|^2
        additional noise  N_qn = (nbar_a + 1/2)/xi * |k4|^2 / |k1|^2
        thermal noise     N_mth = v_x / xi
                          (= (nbar_m + 1/2)/xi^2 without reservoir)
        s_bnoise = (2 kappa_m / lambda^2) (N_mth + N_qn)     [T^2/Hz]
        sensitivity = sqrt(s_bnoise)                         [T/sqrt(Hz)]

    with lambda the bare field coupling.  Thermal noise is a normalized
    background: independent of omega, kappa_a and the coupling.  At zero
    coupling |k1|^2 vanishes and the field-referred quantities are reported
    as infinity (no transduction), not as an error.
    """
    return noise_budget_grid(dp, temperature, [omega], reservoir)[0]


def noise_budget_grid(
    dp: DerivedParameters,
    temperature: float,
    omegas,
    reservoir: SqueezedReservoir | None = None,
) -> list[NoiseBudget]:
    """Vectorized :func:`noise_budget` over a frequency grid."""
    _require_evading_point(dp)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if not np.all(np.isfinite(omegas)):
        raise ParameterError("frequency grid must be finite")
    nbar_a = thermal_occupation(dp.omega_a, temperature)
    nbar_m = thermal_occupation(dp.omega_0, temperature)
    var = input_quadrature_variances(dp.r_m, nbar_m, reservoir)
    thermal = var.v_x / dp.xi
    lam_sq = dp.lambda_bare**2

    k1, k2, k3, k4 = response_grid(dp, omegas)
    k1_sq = np.abs(k1)**2
    k4_sq = np.abs(k4)**2
    s_out = ((nbar_a + 0.5) * (np.abs(k3)**2 + k4_sq)
             + k1_sq * var.v_x + np.abs(k2)**2 * var.v_p
             + 2.0 * np.real(k1 * np.conj(k2)) * var.c_xp)

    rows = []
    for i, omega in enumerate(omegas):
        response = dp.xi * k1_sq[i]
        if k1_sq[i] < _K1_SQ_FLOOR:
            additional = math.inf
        else:
            additional = (nbar_a + 0.5) / dp.xi * k4_sq[i] / k1_sq[i]
        s_bnoise = 2.0 * dp.kappa_m / lam_sq * (thermal + additional)
        rows.append(NoiseBudget(
            omega=float(omega),
            response=float(response),
            additional_noise=float(additional),
            thermal_noise=float(thermal),
            s_out=float(s_out[i]),
            s_bnoise=float(s_bnoise),
            sensitivity=math.sqrt(s_bnoise),
        ))
    return rows


def approx_suppressed_sensitivity(
    dp: DerivedParameters,
    temperature: float,
    omega: float,
) -> float:
    """Sensitivity with the magnon thermal channel dropped entirely.

    Returns sqrt(2 kappa_m N_qn(omega)) / lambda, the approximation valid
    when a nulling reservoir (r_n = r_m, phi_n = pi) removes the effective
    magnon occupation.  Note the exact budget retains the residual vacuum
    half-quantum v_x/xi = 1/(2 xi), which this expression discards; compare
    against :func:`noise_budget` with the reservoir supplied to see the
    difference.  Independent of the magnon occupation by construction.
    """
    _require_evading_point(dp)
    nbar_a = thermal_occupation(dp.omega_a, temperature)
    k1, _, _, k4 = response_grid(dp, [omega])
    k1_sq = float(np.abs(k1[0])**2)
    if k1_sq < _K1_SQ_FLOOR:
        return math.inf
    n_qn = (nbar_a + 0.5) / dp.xi * float(np.abs(k4[0])**2) / k1_sq
    return math.sqrt(2.0 * dp.kappa_m * n_qn) / dp.lambda_bare
