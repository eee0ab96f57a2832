"""One scenario end to end: basis, winding, faults, profiles, circuit, angle, metrics."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assembly import (
    assemble_mutual,
    assemble_self_excitation,
    evaluate_fourier_many,
    fit_fourier,
    interpolate_periodic,
    mutual_columns,
    self_columns,
)
from .basis import BasisSet, generate_synthetic_basis, load_basis, uniform_angle_grid
from .circuit import ExcitationSource, WaveRecord, check_sampling, read_wave_csv, simulate_wave, write_wave_csv
from .config import ScenarioConfig
from .demod import (
    AngleEstimate,
    Calibration,
    PositionMetrics,
    calibrate,
    estimate_from_wave,
    position_metrics,
)
from .errors import ConfigError, FourierError, ResolverSimError, ScenarioError
from .faults import NONE, apply_faults
from .geometry import Geometry

WAVE_FILE = "wave.csv"
METRICS_FILE = "metrics.txt"
PROFILES_FILE = "profiles.csv"
CONFIG_FILE = "config.txt"
PROFILE_COLUMNS = ("theta_rad", "L_ee_H", "L_se_H", "L_ce_H")


@functools.lru_cache(maxsize=8)
def _synthetic_basis(geometry: Geometry, samples_per_rev: int) -> BasisSet:
    return generate_synthetic_basis(geometry, samples_per_rev)


@dataclass(frozen=True, eq=False)
class Profiles:
    """Inductances on the simulation grids plus one revolution for export.

    ``L_ee`` lives on the integrator's fine grid, ``L_se`` and ``L_ce`` on
    the output grid.
    """

    L_ee: np.ndarray
    L_se: np.ndarray
    L_ce: np.ndarray
    grid_theta: np.ndarray
    grid_ee: np.ndarray
    grid_se: np.ndarray
    grid_ce: np.ndarray


@dataclass(frozen=True, eq=False)
class ScenarioResult:
    scenario_id: str
    wave: WaveRecord
    estimate: AngleEstimate
    metrics: PositionMetrics
    calibration: Calibration
    fault_labels: tuple
    fault_descriptions: tuple
    paths: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class _Plan:
    config: ScenarioConfig
    basis: BasisSet | None
    winding: object
    faults: tuple
    source: object
    timebase: object
    pole_pairs: int


def _evaluate(samples_list, theta, n_max, interp):
    """Evaluate grid profiles at arbitrary angles by Fourier series or linear interpolation."""
    if interp == "linear":
        return np.array([interpolate_periodic(s, theta) for s in samples_list])
    series = [fit_fourier(s, n_max) for s in samples_list]
    return evaluate_fourier_many(series, theta)


def plan_scenario(config: ScenarioConfig) -> _Plan:
    """Validate every block and load inputs; nothing is written."""
    v = config.values
    source = config.source()
    timebase = config.timebase()
    check_sampling(timebase, source)
    if v["model.substeps"] < 1:
        raise ConfigError(f"model.substeps must be >= 1, got {v['model.substeps']}")
    if v["model.settle_periods"] < 0:
        raise ConfigError(f"model.settle_periods must be >= 0, got {v['model.settle_periods']}")
    faults = tuple(f for f in config.fault_specs() if f.kind != NONE)
    mode = v["basis.source"]
    if mode == "ideal":
        if faults:
            raise ConfigError("ideal basis mode has no geometry to inject faults into")
        if not v["ideal.L0_H"] > 0 or not v["ideal.L_ee_H"] > 0:
            raise ConfigError("ideal.L0_H and ideal.L_ee_H must be positive")
        if not v["winding.R_e_ohm"] > 0:
            raise ConfigError("winding.R_e_ohm must be positive")
        geometry = config.geometry()
        return _Plan(config, None, None, (), source, timebase, geometry.pole_pairs)
    if mode == "file":
        basis = load_basis(v["basis.path"])
    else:
        basis = _synthetic_basis(config.geometry(), v["basis.samples_per_rev"])
    if v["model.interp"] == "fourier" and 2 * v["model.n_max"] > basis.samples_per_rev:
        raise FourierError(
            f"model.n_max = {v['model.n_max']} needs at least {2 * v['model.n_max']} samples per revolution, "
            f"basis has {basis.samples_per_rev}"
        )
    winding = config.winding(basis.geometry.slot_count)
    # surface fault errors now rather than mid-run
    apply_faults(basis, winding, faults, timebase.omega)
    return _Plan(config, basis, winding, faults, source, timebase, basis.geometry.pole_pairs)


def healthy_calibration(basis: BasisSet, winding, pole_pairs: int) -> Calibration:
    se = assemble_mutual(basis.sig_basis, winding.sine, winding.excitation).samples
    ce = assemble_mutual(basis.sig_basis, winding.cosine, winding.excitation, kind="ce").samples
    return calibrate(se, ce, basis.angle_grid, pole_pairs)


def build_profiles(plan: _Plan) -> tuple[Profiles, Calibration]:
    v = plan.config.values
    tb = plan.timebase
    substeps = v["model.substeps"]
    t_fine = tb.fine_times(substeps)
    theta_fine = tb.theta(t_fine)
    theta_out = theta_fine[::substeps]
    t_out = t_fine[::substeps]

    if plan.basis is None:
        p = plan.pole_pairs
        L0 = v["ideal.L0_H"]
        grid = uniform_angle_grid(v["basis.samples_per_rev"])
        L_ee = v["ideal.L_ee_H"]
        prof = Profiles(
            L_ee=np.full(theta_fine.size, L_ee),
            L_se=L0 * np.sin(p * theta_out),
            L_ce=L0 * np.cos(p * theta_out),
            grid_theta=grid,
            grid_ee=np.full(grid.size, L_ee),
            grid_se=L0 * np.sin(p * grid),
            grid_ce=L0 * np.cos(p * grid),
        )
        return prof, Calibration()

    basis = plan.basis
    grid = basis.angle_grid
    n_max, interp = v["model.n_max"], v["model.interp"]
    cal = healthy_calibration(basis, plan.winding, plan.pole_pairs)
    view = apply_faults(basis, plan.winding, plan.faults, tb.omega)
    w = view.winding

    if not view.time_varying:
        factor = view.column_factors(grid)
        se = assemble_mutual(basis.sig_basis, w.sine, w.excitation, factor).samples
        ce = assemble_mutual(basis.sig_basis, w.cosine, w.excitation, factor, kind="ce").samples
        ee = assemble_self_excitation(basis.exc_basis, w.excitation, factor).samples
        L_ee = _evaluate([ee], theta_fine, n_max, interp)[0]
        L_se, L_ce = _evaluate([se, ce], theta_out, n_max, interp)
        return Profiles(L_ee, L_se, L_ce, grid, ee, se, ce), cal

    # Time-varying airgap: keep the per-excitation-tooth columns separate and
    # apply the factors at every time step.
    cols_se = mutual_columns(basis.sig_basis, w.sine, w.excitation)
    cols_ce = mutual_columns(basis.sig_basis, w.cosine, w.excitation)
    cols_ee = self_columns(basis.exc_basis, w.excitation)

    def combine(cols, theta, t):
        values = _evaluate(list(cols.T), theta, n_max, interp)
        return (values.T * view.column_factors(theta, t)).sum(axis=1)

    L_ee = combine(cols_ee, theta_fine, t_fine)
    L_se = combine(cols_se, theta_out, t_out)
    L_ce = combine(cols_ce, theta_out, t_out)
    if np.any(L_ee <= 0):
        raise ResolverSimError("excitation self-inductance turned non-positive under eccentricity")
    # export: the first revolution along the rotor trajectory
    t_grid = grid / abs(tb.omega)
    theta_grid = tb.theta(t_grid)
    f = view.column_factors(theta_grid, t_grid)
    export = [(np.array([interpolate_periodic(c, theta_grid) for c in cols.T]).T * f).sum(axis=1)
              for cols in (cols_ee, cols_se, cols_ce)]
    return Profiles(L_ee, L_se, L_ce, theta_grid, *export), cal


def simulate_scenario(plan: _Plan):
    v = plan.config.values
    profiles, cal = build_profiles(plan)
    R_e = v["winding.R_e_ohm"] if plan.winding is None else plan.winding.R_e
    wave = simulate_wave(
        profiles.L_ee, profiles.L_se, profiles.L_ce, R_e, plan.source, plan.timebase,
        substeps=v["model.substeps"], settle_periods=v["model.settle_periods"],
    )
    estimate = estimate_from_wave(wave, plan.source, plan.timebase.theta, plan.pole_pairs, cal)
    metrics = position_metrics(estimate.error_deg, estimate.metric_mask)
    return profiles, wave, estimate, metrics, cal


def format_metrics(result: ScenarioResult, extra: dict | None = None) -> str:
    m = result.metrics
    rows = {
        "scenario_id": result.scenario_id,
        "aape_deg": repr(m.aape),
        "mpe_deg": repr(m.mpe),
        "n_samples": m.n_samples,
        "n_excluded": m.n_excluded,
        "fault_labels": ";".join(result.fault_labels) or "healthy",
        "faults": ";".join(result.fault_descriptions) or NONE,
        "calibration_direction": result.calibration.direction,
        "calibration_offset_rad": repr(result.calibration.offset),
    }
    rows.update(extra or {})
    return "".join(f"{k} = {val}\n" for k, val in rows.items())


def write_profiles_csv(profiles: Profiles, path) -> None:
    data = np.column_stack([profiles.grid_theta, profiles.grid_ee, profiles.grid_se, profiles.grid_ce])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(PROFILE_COLUMNS) + "\n")
        np.savetxt(fh, data, fmt="%.15e", delimiter=",")


def run_scenario(config: ScenarioConfig, out_dir=None, write: bool = True) -> ScenarioResult:
    """Run one scenario and, if ``write``, emit its CSVs and metrics summary.

    Files go to ``<out_dir>/<scenario_id>/`` (``out_dir`` defaults to
    ``output.dir``). Every failure is re-raised as :class:`ScenarioError`
    carrying the scenario id; nothing is written unless the run succeeds.
    """
    sid = config.values.get("scenario_id", "scenario")
    try:
        plan = plan_scenario(config)
        profiles, wave, estimate, metrics, cal = simulate_scenario(plan)
    except (ResolverSimError, OSError) as exc:
        raise ScenarioError(sid, exc) from exc

    result = ScenarioResult(
        scenario_id=sid,
        wave=wave,
        estimate=estimate,
        metrics=metrics,
        calibration=cal,
        fault_labels=tuple(f.label for f in plan.faults),
        fault_descriptions=tuple(f.describe() for f in plan.faults),
    )
    if not write:
        return result
    target = Path(out_dir if out_dir is not None else config.values["output.dir"]) / sid
    try:
        target.mkdir(parents=True, exist_ok=True)
        paths = {"wave": target / WAVE_FILE, "metrics": target / METRICS_FILE, "profiles": target / PROFILES_FILE,
                 "config": target / CONFIG_FILE}
        paths["config"].write_text(config.emit())
        write_wave_csv(wave, paths["wave"])
        write_profiles_csv(profiles, paths["profiles"])
        extra = {
            "f_e_Hz": repr(plan.source.f_e),
            "pole_pairs": plan.pole_pairs,
            "settle_samples": wave.settle_samples,
        }
        paths["metrics"].write_text(format_metrics(result, extra))
    except OSError as exc:
        raise ScenarioError(sid, exc) from exc
    result.paths.update(paths)
    return result


def read_metrics_file(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            k, val = line.split("=", 1)
            out[k.strip()] = val.strip()
    return out


def recompute_metrics(wave_path, config: ScenarioConfig | None = None) -> tuple[PositionMetrics, AngleEstimate]:
    """Metrics from a stored wave CSV.

    Carrier frequency, pole pairs, transient length and calibration come
    from ``config`` when given (calibration is rebuilt from the healthy
    profiles), otherwise from the ``metrics.txt`` written next to the wave.
    """
    wave_path = Path(wave_path)
    if config is not None:
        plan = plan_scenario(config)
        source = plan.source
        per = int(round(plan.timebase.f_s / source.f_e))
        settle = per * config.values["model.settle_periods"]
        p = plan.pole_pairs
        cal = Calibration() if plan.basis is None else healthy_calibration(plan.basis, plan.winding, p)
        wave = read_wave_csv(wave_path, plan.timebase.f_s, settle)
    else:
        sidecar = wave_path.parent / METRICS_FILE
        if not sidecar.exists():
            raise ConfigError(f"no {METRICS_FILE} next to {wave_path}; pass a scenario config")
        meta = read_metrics_file(sidecar)
        try:
            source = ExcitationSource(1.0, float(meta["f_e_Hz"]))
            p = int(meta["pole_pairs"])
            settle = int(meta["settle_samples"])
            cal = Calibration(int(meta["calibration_direction"]), float(meta["calibration_offset_rad"]))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"{sidecar}: missing or bad entry {exc}") from None
        wave = read_wave_csv(wave_path, None, settle)
    t0, theta0 = wave.t[0], wave.theta_ref[0]
    omega = (wave.theta_ref[-1] - theta0) / (wave.t[-1] - t0)
    if not math.isfinite(omega) or omega == 0:
        raise ConfigError("cannot infer rotor speed from the wave record")
    estimate = estimate_from_wave(wave, source, lambda t: theta0 + omega * (np.asarray(t) - t0), p, cal)
    return position_metrics(estimate.error_deg, estimate.metric_mask), estimate
