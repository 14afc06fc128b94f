"""Closed-form exact solutions and error-coefficient formulas used as ground truth.

A single spatiotemporal frequency u_0(x) = A |n|^{-s} exp(inx) solves both
models exactly:

    torus:    u(t, x)  = A |n|^{-s} exp(-it (|n|^alpha + mu |A|^2 |n|^{-2s})) exp(inx)
    lattice:  u_h(t,x) = A |n|^{-s} D(n) exp(-it theta_h) exp(inx),

where D(n) = (exp(ihn) - 1)/(ihn) is the cell-average factor (the lattice
datum is the cell average of u_0) and

    theta_h = sigma_h(n) + mu |A|^2 |n|^{-2s} |D(n)|^2.

The leading error coefficients follow by Taylor expansion in h:

    || p_h u_h(t) - u(t) ||_{L2(T)}  = sqrt(pi/2) |A| |n|^{1-s} h + O(h^2),
    || u_h(t) - d_h u(t) ||_{L2_h}   = (sqrt(2 pi)/24) |A| |t| |n|^{2-3s}
                                       * | alpha |n|^{alpha+2s} + 2 mu |A|^2 | h^2 + O(h^3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    TWO_PI,
    Field,
    Lattice,
    ModelParams,
    fractional_symbol,
    single_mode_field,
)
from .transfer import ContinuumField, cell_average_multiplier, continuum_single_mode


@dataclass(frozen=True)
class PlaneWaveSpec:
    """Initial datum A |n|^{-s} exp(inx); n nonzero integer, |A| > 0."""

    A: complex
    n: int
    s: float = 0.0

    def __post_init__(self):
        if self.n == 0:
            raise ValueError("plane-wave mode n must be nonzero")
        if abs(self.A) == 0:
            raise ValueError("plane-wave amplitude must be nonzero")

    @property
    def amplitude(self) -> complex:
        return self.A * abs(self.n) ** (-self.s)


def plane_wave_phase_continuum(spec: PlaneWaveSpec, params: ModelParams) -> float:
    """Frequency of the exact torus solution: |n|^alpha + mu |A|^2 |n|^{-2s}."""
    n = abs(spec.n)
    return n ** params.alpha + params.mu * abs(spec.A) ** 2 * n ** (-2.0 * spec.s)


def plane_wave_phase_discrete(spec: PlaneWaveSpec, params: ModelParams,
                              lattice: Lattice) -> float:
    """Lattice frequency: sigma_h(n) + mu |A|^2 |n|^{-2s} |D(n)|^2."""
    n = abs(spec.n)
    d = cell_average_multiplier(lattice.h, np.asarray([spec.n]))[0]
    return float(
        fractional_symbol(lattice.h, params.alpha, spec.n)
        + params.mu * abs(spec.A) ** 2 * n ** (-2.0 * spec.s) * abs(d) ** 2
    )


def plane_wave_continuum(spec: PlaneWaveSpec, params: ModelParams, t: float,
                         fine: Lattice) -> ContinuumField:
    """Exact torus solution sampled as a single-mode ContinuumField."""
    theta = plane_wave_phase_continuum(spec, params)
    amp = spec.amplitude * np.exp(-1j * t * theta)
    return continuum_single_mode(fine, spec.n, amp)


def plane_wave_discrete(spec: PlaneWaveSpec, params: ModelParams,
                        lattice: Lattice, t: float) -> Field:
    """Exact lattice solution started from the cell-averaged datum d_h u_0."""
    if abs(spec.n) >= lattice.M:
        raise ValueError(
            f"mode n = {spec.n} aliases on a lattice with M = {lattice.M}"
        )
    d = cell_average_multiplier(lattice.h, np.asarray([spec.n]))[0]
    theta_h = plane_wave_phase_discrete(spec, params, lattice)
    amp = spec.amplitude * d * np.exp(-1j * t * theta_h)
    return single_mode_field(lattice, spec.n, amp)


def discretized_plane_wave_continuum(spec: PlaneWaveSpec, params: ModelParams,
                                     lattice: Lattice, t: float) -> Field:
    """d_h applied to the exact torus solution at time t (single lattice mode)."""
    theta = plane_wave_phase_continuum(spec, params)
    d = cell_average_multiplier(lattice.h, np.asarray([spec.n]))[0]
    amp = spec.amplitude * d * np.exp(-1j * t * theta)
    return single_mode_field(lattice, spec.n, amp)


def predicted_error_coefficients(spec: PlaneWaveSpec, params: ModelParams,
                                 t: float) -> tuple[float, float]:
    """Leading coefficients of the h- and h^2-rate laws for the plane wave.

    Returns (c_continuum, c_discrete): the L2(torus) error divided by h tends
    to c_continuum (t-independent), and the L2_h error divided by h^2 tends
    to c_discrete.
    """
    A = abs(spec.A)
    n = abs(spec.n)
    c_cont = math.sqrt(math.pi / 2.0) * A * n ** (1.0 - spec.s)
    bracket = abs(params.alpha * n ** (params.alpha + 2.0 * spec.s)
                  + 2.0 * params.mu * A ** 2)
    c_disc = (math.sqrt(TWO_PI) / 24.0) * A * abs(t) * n ** (2.0 - 3.0 * spec.s) * bracket
    return c_cont, c_disc


# ---------------------------------------------------------------------------
# sharpness construction


def sharpness_mode(lattice: Lattice, params: ModelParams, T: float) -> int:
    """Target frequency k0 = T^{-1/(2+alpha)} h^{-2/(2+alpha)}, rounded (ties up)."""
    expo = 1.0 / (2.0 + params.alpha)
    k0 = T ** (-expo) * lattice.h ** (-2.0 * expo)
    return int(math.floor(k0 + 0.5))


def sharpness_initial_datum(lattice: Lattice, params: ModelParams, T: float,
                            eps: float, fine: Lattice) -> ContinuumField:
    """Single-mode datum eps * k0^{-alpha/2} exp(i k0 x) with O(1) energy norm.

    The amplitude normalization makes || u_0 ||_{H^{alpha/2}} ~ eps sqrt(2 pi)
    uniformly in h.  Rejects eps >= 1/sqrt(2) (the lower-bound constant of the
    construction changes sign there) and frequencies the fine grid cannot hold.
    """
    if not (0.0 < eps < 1.0 / math.sqrt(2.0)):
        raise ValueError(
            f"eps must lie in (0, 1/sqrt(2)) for the sharpness datum, got {eps}"
        )
    if not (0.0 < T <= 1.0):
        raise ValueError(f"T must lie in (0, 1], got {T}")
    k0 = sharpness_mode(lattice, params, T)
    k_ref = fine.M // 2 - 1
    if k0 >= k_ref:
        raise ValueError(
            f"rounded datum frequency {k0} not resolvable at bandlimit {k_ref}"
        )
    if k0 >= lattice.M:
        raise ValueError(
            f"rounded datum frequency {k0} aliases on the coarse lattice (M = {lattice.M})"
        )
    amp = eps * k0 ** (-0.5 * params.alpha)
    return continuum_single_mode(fine, k0, amp)
