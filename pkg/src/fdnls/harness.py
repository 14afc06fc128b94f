"""Experiment orchestration: configuration, deterministic seeding, persistence.

Configs are JSON documents (CLI flags override file values).  Every run
writes a manifest.json (even on failure, with the failing stage recorded)
plus CSV tables / NDJSON trajectories.  Randomized data derive from a named
counter-based generator (numpy Philox keyed by the 64-bit seed), so an
identical config byte-reproduces every CSV on the same platform.

Environment: FDNLS_THREADS caps the sweep worker pool (default 1).
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as _field
from pathlib import Path

import numpy as np

from . import __version__
from .core import Field, Lattice, ModelParams, forward_dft
from .convergence import (
    ConvergenceRecord,
    run_compact_support_experiment,
    run_continuum_limit,
    run_kmax_coefficient_sweep,
    run_plane_wave_discrete_error,
    run_sharpness_experiment,
    random_sobolev_coeffs,
    resonant_m_list,
)
from .dispersive import (
    blowup_wavepacket_demo,
    bound_check_suprema,
    dispersive_bound_check,
)
from .dynamics import SolverConfig, evolve_nonlinear
from .mi import (
    CWSpec,
    cw_field,
    instability_region_mask,
    measure_sideband_growth,
    mi_dispersion,
    recurrence_diagnostic,
    sweep_max_gain,
)
from .oracles import PlaneWaveSpec, predicted_error_coefficients
from .transfer import ContinuumField, discretize_dh

EXPERIMENTS = (
    "simulate",
    "converge",
    "sharpness",
    "compact-support",
    "mi-region",
    "mi-gain",
    "mi-track",
    "kernel-probe",
    "oracle-check",
)

_ALPHA_RESTRICTED = {"converge", "sharpness", "compact-support", "kernel-probe"}

_COMMON_KEYS = {
    "experiment", "alpha", "mu", "M", "M_ref", "M_list", "dt", "t_end",
    "record_stride", "seed", "out",
}

_EXPERIMENT_KEYS: dict[str, set[str]] = {
    "simulate": {"datum"},
    "converge": {"datum", "t_eval", "m_ref_factor"},
    "sharpness": {"T", "eps", "M_min", "M_max"},
    "compact-support": {"modes", "T", "k_sweep", "m_ref_factor"},
    "mi-region": {"grid", "xi_points", "A_range", "alpha_range", "A"},
    "mi-gain": {"A_list", "eps", "measure"},
    "mi-track": {"datum", "k_track"},
    "kernel-probe": {"probe", "alpha_list", "N_list", "t_fractions", "T", "p", "q"},
    "oracle-check": {"datum", "t_eval"},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    experiment: str
    params: ModelParams
    seed: int = 0
    out: str = "fdnls-out"
    options: dict = _field(default_factory=dict)
    raw: dict = _field(default_factory=dict)


def _load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    return doc


def parse_config(source, overrides: dict | None = None) -> RunConfig:
    """Build a validated RunConfig from a JSON file/dict plus override values."""
    if isinstance(source, (str, Path)):
        doc = _load_json(source)
    elif isinstance(source, dict):
        doc = dict(source)
    else:
        raise ConfigError(f"unsupported config source {type(source).__name__}")
    for key, val in (overrides or {}).items():
        if val is not None:
            doc[key] = val

    experiment = doc.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; choose one of {', '.join(EXPERIMENTS)}"
        )
    allowed = _COMMON_KEYS | _EXPERIMENT_KEYS[experiment]
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    alpha = float(doc.get("alpha", 2.0))
    mu = int(doc.get("mu", -1))
    try:
        params = ModelParams(alpha=alpha, mu=mu)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if experiment in _ALPHA_RESTRICTED and not (1.0 < alpha <= 2.0):
        raise ConfigError(
            f"alpha must lie in (1, 2] for the {experiment} experiment "
            f"(continuum-limit and dispersive theory require alpha > 1); got {alpha}"
        )
    if experiment == "sharpness":
        eps = float(doc.get("eps", 0.3))
        if not (0.0 < eps < 1.0 / math.sqrt(2.0)):
            raise ConfigError(
                f"eps must lie in (0, 1/sqrt(2)) for the sharpness datum, got {eps}"
            )
    seed = int(doc.get("seed", 0))
    if not (0 <= seed < 2**64):
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if "M" in doc and int(doc["M"]) < 1:
        raise ConfigError(f"M must be a positive integer, got {doc['M']}")

    options = {k: v for k, v in doc.items()
               if k not in ("experiment", "alpha", "mu", "seed", "out")}
    return RunConfig(
        experiment=experiment,
        params=params,
        seed=seed,
        out=str(doc.get("out", "fdnls-out")),
        options=options,
        raw=doc,
    )


# ---------------------------------------------------------------------------
# deterministic persistence


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_ndjson(path: Path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return value


def write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("FDNLS_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items) -> list:
    """Map over independent sweep cells; results gathered in input order."""
    items = list(items)
    workers = worker_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# experiment runners


def _trajectory_records(result):
    for t, state in zip(result.times, result.states):
        if isinstance(state, ContinuumField):
            vals = state.values()
        else:
            vals = state.to_physical().values
        yield {
            "t": float(t),
            "values": [[float(v.real), float(v.imag)] for v in vals],
        }


def _conservation_rows(result):
    log = result.conservation
    return zip(log.times, log.mass, log.energy)


def _build_lattice_datum(cfg: RunConfig, lattice: Lattice) -> Field:
    datum = cfg.options.get("datum", {"type": "cw", "A": 1.0, "eps": 0.0})
    if not isinstance(datum, dict) or "type" not in datum:
        raise ConfigError("datum must be an object with a 'type' key")
    kind = datum["type"]
    if kind == "cw":
        modes = tuple(
            (int(k), complex(re, im)) for k, re, im in datum.get("modes", [])
        )
        spec = CWSpec(A=float(datum.get("A", 1.0)),
                      eps=float(datum.get("eps", 0.0)), modes=modes)
        return cw_field(lattice, spec)
    if kind == "plane-wave":
        spec = PlaneWaveSpec(A=complex(datum.get("A", 1.0)),
                             n=int(datum.get("n", 1)), s=float(datum.get("s", 0.0)))
        from .oracles import plane_wave_discrete
        return plane_wave_discrete(spec, cfg.params, lattice, 0.0)
    if kind == "random-sobolev":
        fine = Lattice(8 * lattice.M)
        u0 = random_sobolev_coeffs(fine, float(datum.get("s", 1.0)), cfg.seed,
                                   k_max=datum.get("k_max"))
        return discretize_dh(u0, lattice)
    raise ConfigError(f"unknown datum type {kind!r}")


def _run_simulate(cfg: RunConfig, out: Path) -> dict:
    m = int(cfg.options.get("M", 50))
    lattice = Lattice(m)
    solver = SolverConfig(
        dt=float(cfg.options.get("dt", 1e-3)),
        t_end=float(cfg.options.get("t_end", 1.0)),
        record_stride=int(cfg.options.get("record_stride", 100)),
    )
    u0 = _build_lattice_datum(cfg, lattice)
    result = evolve_nonlinear(u0, cfg.params, solver)
    write_ndjson(out / "trajectory.ndjson", _trajectory_records(result))
    write_csv(out / "conservation.csv", ["t", "mass", "energy"],
              _conservation_rows(result))
    log = result.conservation
    drift = float(np.max(np.abs(log.mass - log.mass[0])) / abs(log.mass[0]))
    return {
        "outputs": ["trajectory.ndjson", "conservation.csv"],
        "summary": {"records": len(result.times), "relative_mass_drift": drift},
    }


def _record_outputs(record: ConvergenceRecord, out: Path, checks: dict) -> dict:
    write_csv(out / "results.csv", ["M", "h", "error"],
              zip(record.m_values, record.h_values, record.errors))
    summary = record.summary()
    summary["checks"] = checks
    write_json(out / "summary.json", summary)
    return {"outputs": ["results.csv", "summary.json"], "summary": summary}


def _run_converge(cfg: RunConfig, out: Path) -> dict:
    datum = cfg.options.get("datum", {"type": "plane-wave", "A": 1.0, "n": 1, "s": 0.0})
    m_list = [int(m) for m in cfg.options.get("M_list", [16, 32, 64, 128])]
    t_eval = float(cfg.options.get("t_eval", 0.5))
    dt = float(cfg.options.get("dt", 1e-3))
    factor = int(cfg.options.get("m_ref_factor", 8))
    kind = datum.get("type")
    if kind == "plane-wave":
        spec = PlaneWaveSpec(A=complex(datum.get("A", 1.0)),
                             n=int(datum.get("n", 1)), s=float(datum.get("s", 0.0)))
        from .oracles import plane_wave_continuum

        def builder(fine):
            return plane_wave_continuum(spec, cfg.params, 0.0, fine)

        expected = 1.0
    elif kind == "random-sobolev":
        s = float(datum.get("s", 0.5 * cfg.params.alpha))
        k_max_opt = datum.get("k_max")
        base_band = factor * max(m_list) // 2 - 1
        k_cap = base_band if k_max_opt is None else min(int(k_max_opt), base_band)

        def builder(fine):
            return random_sobolev_coeffs(fine, s, cfg.seed, k_max=k_cap)

        expected = 2.0 * s / (2.0 + cfg.params.alpha)
    else:
        raise ConfigError(f"converge does not support datum type {kind!r}")

    record = run_continuum_limit(builder, cfg.params, t_eval, m_list,
                                 dt=dt, m_ref_factor=factor, expected_rate=expected)
    checks = {}
    if record.fitted_rate is not None and record.expected_rate is not None:
        checks["rate_within_0.1_of_expected"] = bool(
            abs(record.fitted_rate - record.expected_rate) <= 0.1
            or record.fitted_rate >= record.expected_rate
        )
    return _record_outputs(record, out, checks)


def _run_sharpness(cfg: RunConfig, out: Path) -> dict:
    T = float(cfg.options.get("T", 0.5))
    eps = float(cfg.options.get("eps", 0.3))
    m_min = int(cfg.options.get("M_min", 32))
    m_max = int(cfg.options.get("M_max", 512))
    m_list = cfg.options.get("M_list")
    record = run_sharpness_experiment(cfg.params, T, eps, m_list,
                                      m_min=m_min, m_max=m_max)
    write_csv(
        out / "results.csv",
        ["M", "h", "k0", "error", "full_error"],
        zip(record.m_values, record.h_values, record.aux["datum_modes"],
            record.errors, record.aux["full_errors"]),
    )
    expected = record.expected_rate
    competing = record.aux["competing_exponent"]
    summary = record.summary()
    checks = {}
    if record.fitted_rate is not None:
        checks["rate_within_0.07_of_expected"] = bool(
            abs(record.fitted_rate - expected) <= 0.07
        )
    summary["checks"] = checks
    write_json(out / "summary.json", summary)
    return {"outputs": ["results.csv", "summary.json"], "summary": summary}


def _run_compact_support(cfg: RunConfig, out: Path) -> dict:
    modes = [(int(k), complex(re, im))
             for k, re, im in cfg.options.get("modes", [[1, 1.0, 0.0], [2, 1.0, 0.0]])]
    T = float(cfg.options.get("T", 0.3))
    m_list = [int(m) for m in cfg.options.get("M_list", [16, 32, 64])]
    dt = float(cfg.options.get("dt", 5e-4))
    record = run_compact_support_experiment(modes, cfg.params, T, m_list, dt=dt)
    checks = {}
    if record.fitted_rate is not None:
        checks["rate_near_linear"] = bool(0.9 <= record.fitted_rate <= 1.15)
    result = _record_outputs(record, out, checks)
    k_sweep = cfg.options.get("k_sweep")
    if k_sweep:
        sweep = run_kmax_coefficient_sweep(cfg.params, [int(k) for k in k_sweep],
                                           M=max(m_list), t=T)
        write_csv(out / "kmax_sweep.csv", ["k_max", "coefficient"],
                  zip(sweep["k_list"], sweep["coefficients"]))
        result["outputs"].append("kmax_sweep.csv")
        result["summary"]["kmax_exponent"] = sweep["fitted_exponent"]
        result["summary"]["kmax_expected_exponent"] = sweep["expected_exponent"]
    return result


def _run_mi_region(cfg: RunConfig, out: Path) -> dict:
    m = int(cfg.options.get("M", 5))
    lattice = Lattice(m)
    n_xi = int(cfg.options.get("xi_points", 200))
    xi = np.linspace(0.0, lattice.M, n_xi)  # frequencies up to pi/h = M
    grid = cfg.options.get("grid", "amplitude")
    rows = []
    if grid == "amplitude":
        lo, hi, n = cfg.options.get("A_range", [0.05, 2.0, 200])
        for a in np.linspace(float(lo), float(hi), int(n)):
            mask = instability_region_mask(lattice.h, cfg.params.alpha, a, xi)
            rows.extend((x, a, int(b)) for x, b in zip(xi, mask))
        header = ["xi", "A", "unstable"]
    elif grid == "alpha":
        a_fixed = float(cfg.options.get("A", 1.0))
        lo, hi, n = cfg.options.get("alpha_range", [0.1, 2.0, 200])
        for alpha in np.linspace(float(lo), float(hi), int(n)):
            mask = instability_region_mask(lattice.h, alpha, a_fixed, xi)
            rows.extend((x, alpha, int(b)) for x, b in zip(xi, mask))
        header = ["xi", "alpha", "unstable"]
    else:
        raise ConfigError(f"mi-region grid must be 'amplitude' or 'alpha', got {grid!r}")
    write_csv(out / "region.csv", header, rows)
    return {"outputs": ["region.csv"],
            "summary": {"points": len(rows), "grid": grid}}


def _run_mi_gain(cfg: RunConfig, out: Path) -> dict:
    m = int(cfg.options.get("M", 50))
    lattice = Lattice(m)
    a_list = [float(a) for a in cfg.options.get("A_list", [0.25, 0.5, 1.0, 2.0, 4.0])]
    eps = float(cfg.options.get("eps", 1e-5))
    measure = bool(cfg.options.get("measure", True))
    dt = float(cfg.options.get("dt", 1e-3))
    rows = sweep_max_gain(lattice, cfg.params, a_list, eps=eps, measure=measure, dt=dt)
    write_csv(
        out / "gain.csv",
        ["A", "regime", "k_m", "xi_m", "gain_km", "omega_m_theory",
         "slope_measured", "status"],
        ((r.A, r.regime, r.k_m, r.xi_m, r.gain_km, r.omega_m_theory,
          r.slope_measured, r.status) for r in rows),
    )
    return {"outputs": ["gain.csv"], "summary": {"amplitudes": len(rows)}}


def _run_mi_track(cfg: RunConfig, out: Path) -> dict:
    m = int(cfg.options.get("M", 50))
    lattice = Lattice(m)
    solver = SolverConfig(
        dt=float(cfg.options.get("dt", 1e-3)),
        t_end=float(cfg.options.get("t_end", 15.0)),
        record_stride=int(cfg.options.get("record_stride", 50)),
    )
    u0 = _build_lattice_datum(cfg, lattice)
    result = evolve_nonlinear(u0, cfg.params, solver)
    k_track = [int(k) for k in cfg.options.get("k_track", [1])]
    from .mi import mode_amplitudes
    series = {k: mode_amplitudes(result, k) for k in k_track}
    header = ["t"] + [f"amp_k{k}" for k in k_track]
    rows = (
        [t] + [series[k][i] for k in k_track]
        for i, t in enumerate(result.times)
    )
    write_csv(out / "modes.csv", header, rows)
    return {"outputs": ["modes.csv"], "summary": {"modes": k_track}}


def _run_kernel_probe(cfg: RunConfig, out: Path) -> dict:
    probe = cfg.options.get("probe", "bound")
    if probe == "bound":
        m_list = [int(m) for m in cfg.options.get("M_list", [16, 32, 64, 128, 256])]
        n_list = [float(n) for n in cfg.options.get("N_list", [1.0, 0.5, 0.25])]
        fractions = [float(f) for f in
                     cfg.options.get("t_fractions", [0.125, 0.25, 0.5, 0.75, 1.0])]
        rows = dispersive_bound_check(cfg.params, m_list, n_list, fractions)
        write_csv(
            out / "ratios.csv",
            ["M", "N", "t", "kernel_inf", "bound", "ratio", "admitted"],
            ((r.M, r.N, r.t, r.kernel_inf, r.bound, r.ratio, r.admitted)
             for r in rows),
        )
        sups = bound_check_suprema(rows)
        values = [sups[m] for m in sorted(sups)]
        variation = max(
            abs(b / a - 1.0) for a, b in zip(values, values[1:])
        ) if len(values) > 1 else 0.0
        summary = {"suprema": {str(m): sups[m] for m in sorted(sups)},
                   "max_doubling_variation": variation,
                   "checks": {"stable_under_doubling": bool(variation < 0.5)}}
        write_json(out / "summary.json", summary)
        return {"outputs": ["ratios.csv", "summary.json"], "summary": summary}
    if probe == "blowup":
        m_list = [int(m) for m in cfg.options.get("M_list", [64, 128, 256, 512])]
        T = float(cfg.options.get("T", 1.0))
        demo = blowup_wavepacket_demo(cfg.params, T, m_list)
        write_csv(
            out / "blowup.csv",
            ["M", "h", "tau", "ratio", "admitted"],
            ((r.M, r.h, r.tau, r.ratio, r.admitted) for r in demo["rows"]),
        )
        summary = {
            "fitted_slope": demo["fitted_slope"],
            "expected_slope": demo["expected_slope"],
            "checks": {
                "slope_within_0.15": bool(
                    math.isfinite(demo["fitted_slope"])
                    and abs(demo["fitted_slope"] - demo["expected_slope"]) <= 0.15
                )
            },
        }
        write_json(out / "summary.json", summary)
        return {"outputs": ["blowup.csv", "summary.json"], "summary": summary}
    raise ConfigError(f"kernel-probe mode must be 'bound' or 'blowup', got {probe!r}")


def _run_oracle_check(cfg: RunConfig, out: Path) -> dict:
    datum = cfg.options.get("datum", {"type": "plane-wave", "A": 1.0, "n": 1, "s": 0.0})
    if datum.get("type") != "plane-wave":
        raise ConfigError("oracle-check expects a plane-wave datum")
    spec = PlaneWaveSpec(A=complex(datum.get("A", 1.0)), n=int(datum.get("n", 1)),
                         s=float(datum.get("s", 0.0)))
    t = float(cfg.options.get("t_eval", 1.0))
    m_list = [int(m) for m in cfg.options.get("M_list", [16, 32, 64, 128])]
    c_cont, c_disc = predicted_error_coefficients(spec, cfg.params, t)
    record = run_plane_wave_discrete_error(spec, cfg.params, t, m_list)
    rows = [
        (m, h, e, e / h**2 if e > 0 else 0.0)
        for m, h, e in zip(record.m_values, record.h_values, record.errors)
    ]
    write_csv(out / "discrete_error.csv", ["M", "h", "error", "error_over_h2"], rows)
    summary = {
        "predicted_c_continuum": c_cont,
        "predicted_c_discrete": c_disc,
        "discrete_rate": record.fitted_rate,
        "discrete_coefficient": record.fitted_coefficient,
        "note": record.note,
    }
    if record.errors.max() > 0 and c_disc > 0:
        measured = record.errors[-1] / record.h_values[-1] ** 2
        summary["checks"] = {
            "coefficient_within_2pct": bool(abs(measured / c_disc - 1.0) <= 0.02)
        }
    write_json(out / "summary.json", summary)
    return {"outputs": ["discrete_error.csv", "summary.json"], "summary": summary}


_RUNNERS = {
    "simulate": _run_simulate,
    "converge": _run_converge,
    "sharpness": _run_sharpness,
    "compact-support": _run_compact_support,
    "mi-region": _run_mi_region,
    "mi-gain": _run_mi_gain,
    "mi-track": _run_mi_track,
    "kernel-probe": _run_kernel_probe,
    "oracle-check": _run_oracle_check,
}


def run_experiment(cfg: RunConfig) -> int:
    """Execute the configured experiment; returns a process exit status."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "experiment": cfg.experiment,
        "config": cfg.raw,
        "seed": cfg.seed,
        "versions": {"fdnls": __version__, "numpy": np.__version__},
        "status": "failed",
        "stage": "setup",
        "outputs": [],
    }
    started = time.perf_counter()
    try:
        manifest["stage"] = "run"
        result = _RUNNERS[cfg.experiment](cfg, out)
        manifest.update(result)
        manifest["status"] = "ok"
        manifest["stage"] = "done"
        status = 0
    except Exception as exc:  # noqa: BLE001 - every failure lands in the manifest
        manifest["error"] = {"type": type(exc).__name__, "message": str(exc)}
        status = 1
    manifest["wall_time_s"] = time.perf_counter() - started
    write_json(out / "manifest.json", manifest)
    return status
