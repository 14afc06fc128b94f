"""Modulational instability of continuous-wave states: theory and measurement.

Linearizing around u = (A + eps v) exp(-i mu |A|^2 t) gives sideband
frequencies Omega with

    Omega^2(k) = sigma_h(k) (sigma_h(k) + 2 mu A^2).

For mu = +1 the spectrum is stable (Omega^2 >= 0).  For mu = -1 the unstable
set is 0 < sigma_h(k) < 2 A^2 with gain G(k) = sqrt(-Omega^2(k)).  When
A^2 >= (2/h)^alpha the whole bandwidth is unstable and the maximum gain sits
at the lattice boundary |k| = M; otherwise the real maximizer is
xi_m = (2/h) arcsin(h A^{2/alpha} / 2), where sqrt(-Omega^2(xi_m)) = A^2
independently of h and alpha.
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
    forward_dft,
    fractional_symbol,
)
from .dynamics import EvolutionResult, SolverConfig, evolve_nonlinear

REGIME_INTERIOR = "interior"
REGIME_SATURATED = "lattice-saturated"


@dataclass(frozen=True)
class CWSpec:
    """Continuous wave A plus seeded sidebands eps * phase * exp(ikx)."""

    A: float
    eps: float
    modes: tuple[tuple[int, complex], ...] = ()

    def __post_init__(self):
        if self.A <= 0:
            raise ValueError("CW amplitude must be positive")
        if not (0.0 <= self.eps <= 1e-2):
            raise ValueError("perturbation size must satisfy 0 <= eps <= 1e-2")
        for _, phase in self.modes:
            if abs(abs(phase) - 1.0) > 1e-12:
                raise ValueError("perturbation phases must be unimodular")


def cw_field(lattice: Lattice, spec: CWSpec) -> Field:
    x = lattice.sites()
    v = np.full(lattice.n_sites, spec.A, dtype=np.complex128)
    for k, phase in spec.modes:
        lattice.index_of_mode(int(k))
        v += spec.eps * phase * np.exp(1j * int(k) * x)
    return Field(lattice, v)


def cw_exact(lattice: Lattice, A: float, mu: int, t: float) -> Field:
    """The exact CW solution A exp(-i mu A^2 t)."""
    phase = A * np.exp(-1j * mu * A * A * t)
    return Field(lattice, np.full(lattice.n_sites, phase, dtype=np.complex128))


@dataclass
class MIReport:
    omega_sq: np.ndarray          # Omega^2 over the dual range
    unstable_set: frozenset[int]  # dual modes with Omega^2 < 0
    gain: np.ndarray              # sqrt(-Omega^2) on the unstable set, 0 elsewhere
    omega_max: float              # max gain over dual modes
    k_max: int                    # magnitude of the fastest-growing dual mode
    xi_m: float                   # real maximizer of -Omega^2
    omega_max_real: float         # sqrt(-Omega^2(xi_m)); equals A^2 in the interior regime
    regime: str


def mi_dispersion(lattice: Lattice, params: ModelParams, A: float) -> MIReport:
    """Full linear-stability report for the CW of amplitude A."""
    if A <= 0:
        raise ValueError("CW amplitude must be positive")
    h = lattice.h
    alpha = params.alpha
    k = lattice.dual()
    sigma = fractional_symbol(h, alpha, k)
    omega_sq = sigma * (sigma + 2.0 * params.mu * A * A)
    unstable = omega_sq < 0.0
    gain = np.sqrt(np.where(unstable, -omega_sq, 0.0))

    saturation = (2.0 / h) ** alpha
    saturated = saturation <= A * A
    regime = REGIME_SATURATED if saturated else REGIME_INTERIOR

    if params.mu == 1:
        xi_m = float(lattice.M) if saturated else _interior_xi(h, alpha, A)
        return MIReport(omega_sq, frozenset(), gain, 0.0, 0, xi_m, 0.0, regime)

    if saturated:
        k_best = lattice.M
        omega_max = math.sqrt((2.0 * A * A - saturation) * saturation)
        xi_m = float(lattice.M)  # pi/h in frequency units
        omega_real = omega_max
    else:
        xi_m = _interior_xi(h, alpha, A)
        omega_real = A * A
        candidates = sorted({math.floor(xi_m), math.ceil(xi_m)})
        candidates = [c for c in candidates if 1 <= c <= lattice.M]
        if not candidates:
            candidates = [1]
        best = max(
            candidates,
            key=lambda c: (-_omega_sq_real(h, alpha, params.mu, A, c), -c),
        )
        k_best = int(best)
        val = -_omega_sq_real(h, alpha, params.mu, A, k_best)
        omega_max = math.sqrt(val) if val > 0 else 0.0
        if omega_max == 0.0:
            k_best = 0

    unstable_set = frozenset(int(kk) for kk in k[unstable])
    return MIReport(omega_sq, unstable_set, gain, omega_max, k_best, xi_m,
                    omega_real, regime)


def _interior_xi(h: float, alpha: float, A: float) -> float:
    return (2.0 / h) * math.asin(min(1.0, 0.5 * h * A ** (2.0 / alpha)))


def _omega_sq_real(h, alpha, mu, A, xi) -> float:
    s = fractional_symbol(h, alpha, xi)
    return float(s * (s + 2.0 * mu * A * A))


def instability_region_mask(h: float, alpha: float, A, xi) -> np.ndarray:
    """Pointwise evaluation of the instability condition 0 < sigma_h(xi) < 2 A^2."""
    sigma = fractional_symbol(h, alpha, np.asarray(xi, dtype=float))
    a2 = np.asarray(A, dtype=float) ** 2
    return (sigma > 0.0) & (sigma < 2.0 * a2)


def gain_spectrum_real(h: float, alpha: float, A: float, xi) -> np.ndarray:
    """G(xi) = sqrt(sigma (2A^2 - sigma)) on the unstable region, 0 elsewhere."""
    sigma = fractional_symbol(h, alpha, np.asarray(xi, dtype=float))
    val = sigma * (2.0 * A * A - sigma)
    return np.sqrt(np.clip(val, 0.0, None))


def max_gain_theory(h: float, alpha: float, A: float) -> float:
    """Branch formula for the maximum gain over real frequencies."""
    c = (2.0 / h) ** alpha
    if c <= A * A:
        return math.sqrt((2.0 * A * A - c) * c)
    return A * A


# ---------------------------------------------------------------------------
# measurement


STATUS_GREW = "grew"
STATUS_STABLE = "stable"
STATUS_UNDER_RESOLVED = "under-resolved"


@dataclass
class GrowthMeasurement:
    k: int
    status: str
    slope: float          # NaN unless status == "grew"
    window: tuple[float, float] | None
    n_points: int
    gain_theory: float


def mode_amplitudes(result: EvolutionResult, k: int) -> np.ndarray:
    """|F_h u(t, k)| / (2 pi) at the recorded times (amplitude of mode k)."""
    idx = result.states[0].lattice.index_of_mode(k)
    return np.asarray(
        [abs(forward_dft(st.to_physical()).values[idx]) / TWO_PI for st in result.states]
    )


def measure_sideband_growth(lattice: Lattice, cw: CWSpec, params: ModelParams,
                            cfg: SolverConfig, k_track) -> dict[int, GrowthMeasurement]:
    """Evolve the full nonlinear lattice flow and fit per-mode growth slopes.

    The fit window keeps amplitudes inside [10 eps, 0.01 A]: above the
    projection transient, below nonlinear saturation.  Modes that never leave
    the floor are tagged stable; modes crossing the window with fewer than
    three recorded samples are tagged under-resolved.
    """
    result = evolve_nonlinear(cw_field(lattice, cw), params, cfg)
    report = mi_dispersion(lattice, params, cw.A)
    out: dict[int, GrowthMeasurement] = {}
    for k in k_track:
        k = int(k)
        amps = mode_amplitudes(result, k)
        gain_k = float(report.gain[lattice.index_of_mode(k)])
        lo, hi = 10.0 * cw.eps, 0.01 * cw.A
        in_window = (amps >= lo) & (amps <= hi)
        if not np.any(amps >= lo):
            out[k] = GrowthMeasurement(k, STATUS_STABLE, math.nan, None, 0, gain_k)
            continue
        first = int(np.argmax(in_window)) if np.any(in_window) else None
        if first is None:
            out[k] = GrowthMeasurement(k, STATUS_UNDER_RESOLVED, math.nan, None, 0, gain_k)
            continue
        run_len = 0
        while first + run_len < len(amps) and in_window[first + run_len]:
            run_len += 1
        if run_len < 3:
            out[k] = GrowthMeasurement(k, STATUS_UNDER_RESOLVED, math.nan, None,
                                       run_len, gain_k)
            continue
        t_win = result.times[first:first + run_len]
        slope = float(np.polyfit(t_win, np.log(amps[first:first + run_len]), 1)[0])
        out[k] = GrowthMeasurement(
            k, STATUS_GREW, slope, (float(t_win[0]), float(t_win[-1])),
            run_len, gain_k,
        )
    return out


@dataclass
class RecurrenceReport:
    first_localization_time: float     # NaN when never localized
    recurrence_times: np.ndarray
    irregularity_index: float          # coefficient of variation of inter-peak gaps

    @property
    def localized(self) -> bool:
        return math.isfinite(self.first_localization_time)


def recurrence_diagnostic(result: EvolutionResult, A: float,
                          threshold_factor: float = 2.0) -> RecurrenceReport:
    """Track localization bursts: times where ||u||_inf exceeds 2A, and their cadence."""
    peaks = np.asarray([float(np.max(np.abs(st.to_physical().values)))
                        for st in result.states])
    threshold = threshold_factor * A
    above = peaks > threshold
    if not np.any(above):
        return RecurrenceReport(math.nan, np.asarray([]), math.nan)
    first_idx = int(np.argmax(above))
    first_time = float(result.times[first_idx])
    # one recurrence event per contiguous above-threshold excursion
    maxima_times = []
    i = 0
    n = len(peaks)
    while i < n:
        if above[i]:
            j = i
            while j + 1 < n and above[j + 1]:
                j += 1
            seg_best = i + int(np.argmax(peaks[i:j + 1]))
            maxima_times.append(float(result.times[seg_best]))
            i = j + 1
        else:
            i += 1
    recurrence = np.asarray(maxima_times)
    if len(recurrence) >= 3:
        gaps = np.diff(recurrence)
        irregularity = float(np.std(gaps) / np.mean(gaps))
    else:
        irregularity = math.nan
    return RecurrenceReport(first_time, recurrence, irregularity)


@dataclass
class GainSweepRow:
    A: float
    regime: str
    k_m: int
    xi_m: float
    gain_km: float          # gain at the integer fastest mode
    omega_m_theory: float   # branch formula over real frequencies
    slope_measured: float   # NaN when not measured / stable
    status: str


def sweep_max_gain(lattice: Lattice, params: ModelParams, A_list, *,
                   eps: float = 1e-5, measure: bool = True,
                   dt: float = 1e-3, decades_margin: float = 3.0) -> list[GainSweepRow]:
    """Theory-vs-measurement table for the maximum gain across CW amplitudes."""
    rows = []
    for A in A_list:
        A = float(A)
        report = mi_dispersion(lattice, params, A)
        theory = max_gain_theory(lattice.h, params.alpha, A)
        slope = math.nan
        status = "theory-only"
        if measure and params.mu == -1 and report.k_max > 0 and report.omega_max > 0:
            k_seed = report.k_max if report.k_max < lattice.M else -lattice.M
            cw = CWSpec(A=A, eps=eps, modes=((k_seed, 1.0 + 0.0j),))
            # long enough to cross the fit window at the predicted rate
            t_end = (math.log(0.01 * A / (10.0 * eps)) + decades_margin) / report.omega_max
            t_end = max(t_end, 50 * dt)
            stride = max(1, round(t_end / dt) // 400)
            cfg = SolverConfig(dt=dt, t_end=t_end, record_stride=stride)
            meas = measure_sideband_growth(lattice, cw, params, cfg, [k_seed])[k_seed]
            slope = meas.slope
            status = meas.status
        rows.append(GainSweepRow(
            A=A, regime=report.regime, k_m=report.k_max, xi_m=report.xi_m,
            gain_km=report.omega_max, omega_m_theory=theory,
            slope_measured=slope, status=status,
        ))
    return rows
