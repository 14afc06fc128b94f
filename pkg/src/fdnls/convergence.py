"""Continuum-limit experiments: h-sweeps, rate fits, sharpness and compact-support runs.

Every experiment measures lattice-vs-torus errors across a mesh sweep and
fits a power law by least squares on (log h, log error).  The torus
reference solution is computed numerically and validated by rerunning at
dt/2 and at twice the grid resolution; the run aborts unless the reference's
self-difference sits below 1% of the smallest measured error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as _field

import numpy as np

from .core import Field, Lattice, ModelParams, require_dispersive_alpha, forward_dft
from .dynamics import SolverConfig, evolve_nonlinear
from .oracles import (
    PlaneWaveSpec,
    discretized_plane_wave_continuum,
    plane_wave_discrete,
    sharpness_initial_datum,
    sharpness_mode,
)
from .transfer import (
    ContinuumField,
    discretize_dh,
    embed_continuum,
    interpolate_ph,
    l2_distance,
    l2_torus_error,
)

ZERO_ERROR_FLOOR = 1e-10
DEGENERATE_NOTE = "degenerate: zero error"


class ReferenceValidationError(RuntimeError):
    """The torus reference solver failed its self-convergence check."""


@dataclass
class ConvergenceRecord:
    m_values: list[int]
    h_values: np.ndarray
    errors: np.ndarray
    fitted_rate: float | None
    fitted_coefficient: float | None
    r_squared: float | None
    expected_rate: float | None = None
    note: str = ""
    aux: dict = _field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return self.note == DEGENERATE_NOTE

    def summary(self) -> dict:
        out = {
            "fitted_rate": self.fitted_rate,
            "fitted_coefficient": self.fitted_coefficient,
            "r_squared": self.r_squared,
            "expected_rate": self.expected_rate,
        }
        if self.note:
            out["note"] = self.note
        for key, val in self.aux.items():
            if isinstance(val, (int, float, str)) or val is None:
                out[key] = val
        return out


def fit_rate(h_values, errors) -> tuple[float, float, float]:
    """Least-squares power-law fit error ~ C h^r; returns (r, C, r_squared)."""
    h_values = np.asarray(h_values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(h_values) < 3:
        raise ValueError("rate fit needs at least 3 points")
    if np.any(errors <= 0):
        raise ValueError("rate fit needs strictly positive errors")
    x = np.log(h_values)
    y = np.log(errors)
    rate, intercept = np.polyfit(x, y, 1)
    resid = y - (rate * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(rate), float(math.exp(intercept)), r2


def _make_record(m_values, h_values, errors, expected_rate, aux=None) -> ConvergenceRecord:
    errors = np.asarray(errors, dtype=float)
    h_values = np.asarray(h_values, dtype=float)
    aux = aux or {}
    if np.all(errors <= ZERO_ERROR_FLOOR):
        return ConvergenceRecord(
            list(m_values), h_values, errors, None, None, None,
            expected_rate, DEGENERATE_NOTE, aux,
        )
    rate, coeff, r2 = fit_rate(h_values, errors)
    note = "" if r2 >= 0.98 else "preasymptotic: r_squared < 0.98"
    if not _monotone_nonincreasing(errors):
        note = (note + "; " if note else "") + "errors not monotone within 10%"
    return ConvergenceRecord(
        list(m_values), h_values, errors, rate, coeff, r2, expected_rate, note, aux
    )


def _monotone_nonincreasing(errors, tol: float = 0.10) -> bool:
    errors = np.asarray(errors, dtype=float)
    return bool(np.all(errors[1:] <= errors[:-1] * (1.0 + tol)))


# ---------------------------------------------------------------------------
# datum builders


def random_sobolev_coeffs(fine: Lattice, s: float, seed: int,
                          extra_decay: float = 0.05,
                          k_max: int | None = None) -> ContinuumField:
    """Reproducible rough datum with |u_hat(k)| = <k>^{-s - 1/2 - extra_decay}.

    Phases are drawn from a counter-based Philox stream so the datum is a pure
    function of the seed, independent of evaluation order.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    k = fine.dual()
    k_ref = fine.M // 2 - 1
    cutoff = k_ref if k_max is None else min(k_max, k_ref)
    theta = rng.uniform(0.0, 2.0 * math.pi, size=k.shape)
    mag = (1.0 + k.astype(float) ** 2) ** (-0.5 * (s + 0.5 + extra_decay))
    coeffs = mag * np.exp(1j * theta)
    coeffs[k == 0] = 0.0
    coeffs[np.abs(k) > cutoff] = 0.0
    return ContinuumField(fine, coeffs, k_ref)


def multi_mode_datum(fine: Lattice, modes: list[tuple[int, complex]]) -> ContinuumField:
    """Finite-Fourier-support datum sum_j a_j exp(i k_j x)."""
    coeffs = np.zeros(fine.n_sites, dtype=np.complex128)
    for k, amp in modes:
        coeffs[fine.index_of_mode(int(k))] += 2.0 * math.pi * amp
    return ContinuumField(fine, coeffs)


# ---------------------------------------------------------------------------
# reference handling


def _reference_states(u0_builder, fine: Lattice, params, cfg: SolverConfig):
    u0 = u0_builder(fine)
    return evolve_nonlinear(u0, params, cfg)


def _validate_reference(u0_builder, fine: Lattice, params, cfg: SolverConfig,
                        final: ContinuumField, min_error: float) -> float:
    """Rerun at dt/2 and at 2x resolution; the self-difference must be tiny."""
    half = SolverConfig(cfg.dt / 2.0, cfg.t_end, cfg.record_stride * 2, cfg.scheme)
    res_half = _reference_states(u0_builder, fine, params, half)
    fine2 = Lattice(2 * fine.M)
    res_fine2 = _reference_states(u0_builder, fine2, params, cfg)
    self_diff = max(
        l2_distance(final, res_half.states[-1]),
        l2_distance(final, res_fine2.states[-1]),
    )
    if min_error > ZERO_ERROR_FLOOR and self_diff > 0.01 * min_error:
        raise ReferenceValidationError(
            f"reference self-difference {self_diff:.3e} exceeds 1% of the "
            f"smallest measured error {min_error:.3e}; refine dt or M_ref"
        )
    return self_diff


# ---------------------------------------------------------------------------
# experiments


def run_continuum_limit(datum_builder, params: ModelParams, t_eval: float,
                        M_list, *, dt: float = 1e-3, m_ref_factor: int = 8,
                        expected_rate: float | None = None) -> ConvergenceRecord:
    """Measure || p_h S_h(t) d_h u_0 - S(t) u_0 ||_{L2(T)} across an h-sweep.

    ``datum_builder(fine)`` must return the same function (identical Fourier
    content) on any sufficiently fine grid, so the Richardson check can vary
    the reference resolution.
    """
    require_dispersive_alpha(params, "continuum-limit experiments")
    M_list = [int(m) for m in M_list]
    if any(b <= a for a, b in zip(M_list, M_list[1:])) or len(M_list) < 3:
        raise ValueError("M_list must be strictly increasing with >= 3 entries")
    m_ref = m_ref_factor * max(M_list)
    if any(m_ref % m != 0 for m in M_list):
        raise ValueError(
            f"M_ref = {m_ref} must be divisible by every lattice size in {M_list}"
        )
    if m_ref < 8 * max(M_list):
        raise ValueError("m_ref_factor must be at least 8")

    fine = Lattice(m_ref)
    cfg = SolverConfig(dt=dt, t_end=t_eval, record_stride=10**9)
    ref = _reference_states(datum_builder, fine, params, cfg)
    u_final = ref.states[-1]
    u0 = datum_builder(fine)

    errors = []
    for m in M_list:
        coarse = Lattice(m)
        g0 = discretize_dh(u0, coarse)
        lattice_run = evolve_nonlinear(g0, params, cfg)
        errors.append(l2_torus_error(lattice_run.states[-1], u_final))

    self_diff = _validate_reference(datum_builder, fine, params, cfg,
                                    u_final, float(min(errors)))
    record = _make_record(M_list, [math.pi / m for m in M_list], errors,
                          expected_rate, {"reference_self_difference": self_diff})
    return record


def run_plane_wave_discrete_error(spec: PlaneWaveSpec, params: ModelParams,
                                  t: float, M_list, *, dt: float = 1e-2,
                                  expected_rate: float | None = 2.0) -> ConvergenceRecord:
    """Measure || u_h(t) - d_h u(t) ||_{L2_h} for the plane-wave family.

    The lattice side is integrated from d_h u_0; the torus side is the exact
    solution, cell-averaged.  Expected quadratic rate with coefficient
    c_discrete, except at degenerate parameters where the error vanishes.
    """
    M_list = [int(m) for m in M_list]
    errors = []
    for m in M_list:
        lat = Lattice(m)
        g0 = plane_wave_discrete(spec, params, lat, 0.0)
        cfg = SolverConfig(dt=dt, t_end=t, record_stride=10**9)
        run = evolve_nonlinear(g0, params, cfg)
        target = discretized_plane_wave_continuum(spec, params, lat, t)
        diff = run.states[-1].values - target.values
        errors.append(float(math.sqrt(lat.h * np.sum(np.abs(diff) ** 2))))
    return _make_record(M_list, [math.pi / m for m in M_list], errors, expected_rate)


def resonant_m_list(alpha: float, T: float, m_min: int = 32, m_max: int = 512,
                    max_points: int = 10) -> list[int]:
    """Lattice sizes at which the sharpness datum's target frequency is near-integral.

    The construction labels a frequency k0(h) that must be rounded to a dual
    mode; choosing M = round(pi sqrt(T) k^{(2+alpha)/2}) keeps the rounding
    displacement at the 1e-3 level so the measured sweep stays on the
    theoretical scaling curve instead of inheriting O(1/k0) rounding wobble.
    """
    out: list[int] = []
    k = 2
    while True:
        m = round(math.pi * math.sqrt(T) * k ** (0.5 * (2.0 + alpha)))
        if m > m_max:
            break
        if m >= m_min and (not out or m > out[-1]):
            out.append(m)
        k += 1
    if len(out) < 3:
        raise ValueError(
            f"no resonant sweep with >= 3 sizes inside [{m_min}, {m_max}]"
        )
    if len(out) > max_points:
        idx = np.unique(np.round(np.linspace(0, len(out) - 1, max_points)).astype(int))
        out = [out[i] for i in idx]
    return out


def run_sharpness_experiment(params: ModelParams, T: float, eps: float,
                             M_list=None, *, dt: float | None = None,
                             m_ref_factor: int = 8, n_records: int = 64,
                             m_min: int = 32, m_max: int = 512) -> ConvergenceRecord:
    """Worst-case-datum experiment: the h-dependent single-mode datum whose
    propagator mismatch realizes the sharp energy-space rate alpha/(2+alpha).

    For each M the datum u_0^h is built, the lattice flow is started from
    d_h u_0^h, and the torus flow is started from the matched state
    p_h d_h u_0^h; the recorded quantity is the sup over [0, T] of the
    L2(torus) distance between the two evolutions.  Starting both flows from
    the identical interpolated state isolates the propagator phase gap that
    drives the sharp rate; the plain error against S(t) u_0^h (which carries
    an O(h^{2 alpha/(2+alpha)}) time-zero interpolation offset with a large
    constant) is measured alongside and reported in ``aux``.
    """
    require_dispersive_alpha(params, "the sharpness experiment")
    if M_list is None:
        M_list = resonant_m_list(params.alpha, T, m_min, m_max)
    M_list = [int(m) for m in M_list]
    if dt is None:
        dt = T / 256.0
    stride = max(1, round(T / dt) // n_records)
    cfg = SolverConfig(dt=dt, t_end=T, record_stride=stride)

    errors_matched, errors_full, modes, norms = [], [], [], []
    worst_self = 0.0
    for m in M_list:
        coarse = Lattice(m)
        fine = Lattice(m_ref_factor * m)
        k_band = fine.M // 2 - 1

        def build(lat, _coarse=coarse):
            return sharpness_initial_datum(_coarse, params, T, eps, lat)

        u0 = build(fine)
        modes.append(sharpness_mode(coarse, params, T))
        norms.append(u0.sobolev_norm(0.5 * params.alpha))
        g0 = discretize_dh(u0, coarse)
        v0 = interpolate_ph(g0, fine)

        lattice_run = evolve_nonlinear(g0, params, cfg)
        matched_run = evolve_nonlinear(v0, params, cfg)
        full_run = evolve_nonlinear(u0, params, cfg)

        e_matched = max(
            l2_torus_error(gs, vs)
            for gs, vs in zip(lattice_run.states, matched_run.states)
        )
        e_full = max(
            l2_torus_error(gs, us)
            for gs, us in zip(lattice_run.states, full_run.states)
        )
        errors_matched.append(e_matched)
        errors_full.append(e_full)

        def build_matched(lat, _v0=v0):
            # the reference problem is fixed by the bandlimited matched datum;
            # validation reruns solve it at higher resolution, same band
            return embed_continuum(_v0, lat)

        worst_self = max(
            worst_self,
            _validate_reference(build_matched, fine, params, cfg,
                                matched_run.states[-1], e_matched),
        )

    expected = params.alpha / (2.0 + params.alpha)
    competing = 2.0 / (2.0 + params.alpha)
    h_values = [math.pi / m for m in M_list]
    full_rate, full_coeff, full_r2 = fit_rate(h_values, errors_full)
    record = _make_record(
        M_list, h_values, errors_matched, expected,
        aux={
            "competing_exponent": competing,
            "full_error_rate": full_rate,
            "full_errors": list(map(float, errors_full)),
            "datum_modes": modes,
            "datum_energy_norms": list(map(float, norms)),
            "reference_self_difference": worst_self,
        },
    )
    if record.fitted_rate is not None:
        record.aux["distance_to_expected"] = abs(record.fitted_rate - expected)
        record.aux["distance_to_competing"] = abs(record.fitted_rate - competing)
    return record


def run_compact_support_experiment(modes: list[tuple[int, complex]],
                                   params: ModelParams, T: float, M_list, *,
                                   dt: float = 5e-4, m_ref_factor: int = 8,
                                   support_tolerance: float = 1e-8) -> ConvergenceRecord:
    """Rate experiment for data of finite Fourier support (expected linear rate).

    The spectral support of the lattice cubic term is monitored against the
    window [-3 k_max, 3 k_max]; mass escaping beyond ``support_tolerance``
    raises a warning note (the compact-support hypothesis is an assumption).
    """
    require_dispersive_alpha(params, "compact-support experiments")
    k_max = max(abs(int(k)) for k, _ in modes)
    M_list = [int(m) for m in M_list]
    if any(3 * k_max >= m for m in M_list):
        raise ValueError(f"every M must exceed 3 k_max = {3 * k_max}")

    def builder(fine):
        return multi_mode_datum(fine, modes)

    fine = Lattice(m_ref_factor * max(M_list))
    if any(fine.M % m != 0 for m in M_list):
        raise ValueError("M_ref must be divisible by every lattice size")
    cfg = SolverConfig(dt=dt, t_end=T, record_stride=max(1, round(T / dt) // 16))
    ref = _reference_states(builder, fine, params, cfg)
    u_final = ref.states[-1]
    u0 = builder(fine)

    errors = []
    escaped = 0.0
    for m in M_list:
        coarse = Lattice(m)
        g0 = discretize_dh(u0, coarse)
        run = evolve_nonlinear(g0, params, cfg)
        for state in run.states:
            v = state.values
            cubic = Field(coarse, np.abs(v) ** 2 * v)
            spec_mass = np.abs(forward_dft(cubic).values) ** 2
            outside = spec_mass[np.abs(coarse.dual()) > 3 * k_max].sum()
            total = spec_mass.sum()
            if total > 0:
                escaped = max(escaped, float(outside / total))
        errors.append(l2_torus_error(run.states[-1], u_final))

    self_diff = _validate_reference(builder, fine, params, cfg, u_final,
                                    float(min(errors)))
    aux = {"max_support_escape": escaped,
           "reference_self_difference": self_diff}
    record = _make_record(M_list, [math.pi / m for m in M_list], errors, 1.0, aux)
    if escaped > support_tolerance:
        record.note = (record.note + "; " if record.note else "") + (
            f"warning: cubic spectral support escaped window (fraction {escaped:.2e})"
        )
    return record


def run_kmax_coefficient_sweep(params: ModelParams, k_list, M: int, t: float, *,
                               dt: float = 1e-2, m_ref_factor: int = 16) -> dict:
    """Growth of the linear-rate coefficient in the maximal frequency.

    Uses energy-normalized single modes (|| u_0 ||_{H^{alpha/2}} = 1), for
    which the error-per-h coefficient scales like k_max^{1 - alpha/2}.
    """
    require_dispersive_alpha(params, "compact-support experiments")
    coarse = Lattice(M)
    fine = Lattice(m_ref_factor * M)
    cfg = SolverConfig(dt=dt, t_end=t, record_stride=10**9)
    coeffs = []
    for k in k_list:
        amp = (1.0 + k * k) ** (-0.25 * params.alpha) / math.sqrt(2.0 * math.pi)
        spec = [(int(k), amp)]
        u0 = multi_mode_datum(fine, spec)
        g0 = discretize_dh(u0, coarse)
        run = evolve_nonlinear(g0, params, cfg)
        ref = evolve_nonlinear(u0, params, cfg)
        coeffs.append(l2_torus_error(run.states[-1], ref.states[-1]) / coarse.h)
    k_arr = np.asarray(k_list, dtype=float)
    slope, logc = np.polyfit(np.log(k_arr), np.log(coeffs), 1)
    return {
        "k_list": [int(k) for k in k_list],
        "coefficients": list(map(float, coeffs)),
        "fitted_exponent": float(slope),
        "expected_exponent": 1.0 - 0.5 * params.alpha,
    }
