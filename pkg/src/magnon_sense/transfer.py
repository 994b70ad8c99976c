"""Frequency-domain transfer coefficients of the output phase quadrature.

The linear quadrature dynamics over the state order (X_M, P_M, X_a, P_a) is

    du/dt = A u + B u_in,      B = diag(sqrt(kappa_m), sqrt(kappa_m),
                                        sqrt(kappa_a), sqrt(kappa_a)),

and with the Fourier convention O(omega) = \\int dt O(t) e^{i omega t}
(so d/dt -> -i omega) the susceptibility is chi(omega) = (-i omega I - A)^-1 B.
The detected quantity is the output phase quadrature
P_a_out = sqrt(kappa_a) P_a - P_a_in, whose four coefficients k1..k4 multiply
the magnon amplitude / magnon phase / cavity amplitude / cavity phase inputs.

Two routes are provided.  :func:`frequency_response` solves the linear system
directly and is authoritative for all spectra.  :func:`closed_form_response`
evaluates a set of printed rational expressions kept as a comparison surface;
its k4 (and the phase of k1) disagree with the direct solution, which is why
it is never used downstream.  In the decoupled resonant limit the direct
route gives |k4(0)| = 1 (a passive cavity reflects unit noise) while the
closed form gives 3; the `verify` command reports both numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DerivedParameters

__all__ = [
    "STATE_LABELS",
    "PoleError",
    "SingularResponseError",
    "DriftSystem",
    "TransferResponse",
    "drift_system",
    "frequency_response",
    "response_grid",
    "closed_form_response",
    "closed_form_grid",
]

STATE_LABELS = ("X_M", "P_M", "X_a", "P_a")


class PoleError(ArithmeticError):
    """Closed-form denominator vanished at the requested frequency."""

    def __init__(self, omega: float):
        self.omega = omega
        super().__init__(
            f"transfer denominator vanishes at omega = {omega!r} rad/s")


class SingularResponseError(ArithmeticError):
    """The response matrix -i*omega*I - A is numerically singular."""


@dataclass(frozen=True)
class DriftSystem:
    """Drift matrix A and input gain B of the 4-quadrature system."""

    drift: np.ndarray       # (4, 4), rad/s
    input_gain: np.ndarray  # (4, 4) diagonal, (rad/s)^(1/2)


@dataclass(frozen=True)
class TransferResponse:
    """The four complex output coefficients at one analysis frequency."""

    k1: complex  # multiplies the magnon amplitude-quadrature input
    k2: complex  # multiplies the magnon phase-quadrature input
    k3: complex  # multiplies the cavity amplitude-quadrature input
    k4: complex  # multiplies the cavity phase-quadrature input
    omega: float


def drift_system(dp: DerivedParameters) -> DriftSystem:
    """Build the drift and input-gain matrices for the quadrature dynamics.

    At delta_a = delta_0p = 0 the drift matrix is lower triangular in the
    reordering (X_M, X_a, P_M, P_a); its eigenvalues are then exactly
    {-kappa_m/2, -kappa_a/2} twice, independent of the coupling, so the
    backaction-evading point is unconditionally stable.
    """
    km, ka = dp.kappa_m, dp.kappa_a
    d0, da, g2 = dp.delta_0p, dp.delta_a, 2.0 * dp.g_prime
    drift = np.array([
        [-km / 2.0,  d0,        0.0,       0.0],
        [-d0,       -km / 2.0, -g2,        0.0],
        [0.0,        0.0,      -ka / 2.0,  da],
        [-g2,        0.0,      -da,       -ka / 2.0],
    ])
    gain = np.diag([np.sqrt(km), np.sqrt(km), np.sqrt(ka), np.sqrt(ka)])
    return DriftSystem(drift=drift, input_gain=gain)


def response_grid(dp: DerivedParameters, omegas) -> tuple[np.ndarray, ...]:
    """Transfer coefficients k1..k4 on a frequency grid, by linear solve.

    Returns four complex arrays aligned with ``omegas`` (rad/s).  This is the
    authoritative route: chi = (-i omega I - A)^-1 B is solved per frequency
    and the P_a output row is read off, with the direct reflection -1
    subtracted on the cavity phase input channel.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if not np.all(np.isfinite(omegas)):
        raise ValueError("analysis frequencies must be finite")
    system = drift_system(dp)
    eye = np.eye(4)
    m = -1j * omegas[:, None, None] * eye - system.drift
    try:
        chi = np.linalg.solve(m, np.broadcast_to(system.input_gain, m.shape))
    except np.linalg.LinAlgError as exc:
        raise SingularResponseError(
            "response matrix is singular; this requires a zero dissipation rate"
        ) from exc
    out_row = np.sqrt(dp.kappa_a) * chi[:, 3, :]
    k1 = out_row[:, 0].copy()
    k2 = out_row[:, 1].copy()
    k3 = out_row[:, 2].copy()
    k4 = out_row[:, 3] - 1.0
    return k1, k2, k3, k4


def frequency_response(dp: DerivedParameters, omega: float) -> TransferResponse:
    """Transfer coefficients at a single frequency (rad/s, may be 0 or < 0)."""
    k1, k2, k3, k4 = response_grid(dp, [omega])
    return TransferResponse(k1=complex(k1[0]), k2=complex(k2[0]),
                            k3=complex(k3[0]), k4=complex(k4[0]),
                            omega=float(omega))


def closed_form_grid(dp: DerivedParameters, omegas) -> tuple[np.ndarray, ...]:
    """Printed rational expressions for k1..k4, evaluated verbatim.

    Kept as a documented comparison surface; see the module docstring for the
    known k4 discrepancy against the direct solve.  Raises :class:`PoleError`
    if the common denominator falls below 1e-12 of its largest contribution.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if not np.all(np.isfinite(omegas)):
        raise ValueError("analysis frequencies must be finite")
    km, ka = dp.kappa_m, dp.kappa_a
    d0, da, gp = dp.delta_0p, dp.delta_a, dp.g_prime

    cm = km - 2j * omegas
    ca = ka - 2j * omegas
    magnon_term = cm**2 + 4.0 * d0**2
    term_a = 64.0 * d0 * da * gp**2
    term_b = magnon_term * (4.0 * omegas**2 + ka**2 - 4.0 * da**2)
    denom = term_a + term_b

    scale = np.maximum(np.abs(term_a), np.abs(term_b))
    bad = np.abs(denom) < 1e-12 * np.maximum(scale, 1e-300)
    if np.any(bad):
        raise PoleError(float(omegas[np.argmax(bad)]))

    root = np.sqrt(ka * km)
    k1 = 8.0 * gp * root * ca * cm / denom
    k2 = 16.0 * gp * d0 * root * ca / denom
    k3 = 4.0 * ka * (-16.0 * gp**2 * d0 + da * magnon_term) / denom
    k4 = -1.0 - 2.0 * ka * ca * magnon_term / denom
    return k1, k2, k3, np.asarray(k4)


def closed_form_response(dp: DerivedParameters, omega: float) -> TransferResponse:
    """Single-frequency evaluation of the printed closed forms."""
    k1, k2, k3, k4 = closed_form_grid(dp, [omega])
    return TransferResponse(k1=complex(k1[0]), k2=complex(k2[0]),
                            k3=complex(k3[0]), k4=complex(k4[0]),
                            omega=float(omega))
