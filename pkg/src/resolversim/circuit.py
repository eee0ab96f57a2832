"""Excitation circuit integration and induced signal voltages.

The excitation loop ``v_e = R_e*i_e + L_ee*di_e/dt`` is stepped with the
implicit trapezoidal rule; the speed voltage ``i_e*dL_ee/dt`` is dropped
because the carrier is far faster than the rotation. The integrator runs
``substeps`` trapezoidal steps per output sample: one step per sample at
16 samples per carrier period warps the carrier reactance by about 1.3 %.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SamplingError, SingularStepError

MIN_SAMPLES_PER_CARRIER = 16
DEFAULT_SUBSTEPS = 8
DEFAULT_SETTLE_PERIODS = 5

WAVE_COLUMNS = ("t_s", "theta_ref_rad", "i_e_A", "v_e_V", "v_s_V", "v_c_V")


@dataclass(frozen=True)
class ExcitationSource:
    v_m: float = 5.0
    f_e: float = 5000.0

    def __post_init__(self):
        if self.v_m < 0 or not math.isfinite(self.v_m):
            raise SamplingError(f"v_m must be non-negative, got {self.v_m}")
        if not self.f_e > 0:
            raise SamplingError(f"f_e must be positive, got {self.f_e}")

    @property
    def omega_e(self) -> float:
        return 2 * math.pi * self.f_e


def excitation_voltage(t, source: ExcitationSource):
    return source.v_m * np.cos(2 * np.pi * source.f_e * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class Timebase:
    f_s: float = 80_000.0
    duration: float = 0.125
    omega: float = 50.27
    theta0: float = 0.0
    allow_low_fs: bool = False

    def __post_init__(self):
        if not self.f_s > 0:
            raise SamplingError(f"f_s must be positive, got {self.f_s}")
        if not self.duration > 0:
            raise SamplingError(f"duration must be positive, got {self.duration}")
        if self.omega == 0:
            raise SamplingError("rotor speed omega must be non-zero")
        rev = 2 * math.pi / abs(self.omega)
        if self.duration < rev * (1 - 1e-3):
            raise SamplingError(
                f"duration {self.duration} s is shorter than one revolution ({rev:.6g} s)"
            )

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.f_s))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.f_s

    def theta(self, t):
        return self.theta0 + self.omega * np.asarray(t, dtype=float)

    def fine_times(self, substeps: int) -> np.ndarray:
        return np.arange((self.n_samples - 1) * substeps + 1) / (self.f_s * substeps)


def check_sampling(timebase: Timebase, source: ExcitationSource) -> int:
    """Validate the sampling rate against the carrier; returns samples per carrier period."""
    ratio = timebase.f_s / source.f_e
    per = int(round(ratio))
    if abs(ratio - per) > 1e-9 * ratio or per < 2:
        raise SamplingError(f"f_s = {timebase.f_s} must be an integer multiple of f_e = {source.f_e}")
    if per % 2:
        raise SamplingError(f"f_s must be a multiple of 2*f_e for half-period demodulation, got ratio {per}")
    if per < MIN_SAMPLES_PER_CARRIER:
        msg = f"f_s = {timebase.f_s} Hz is below {MIN_SAMPLES_PER_CARRIER}*f_e"
        if not timebase.allow_low_fs:
            raise SamplingError(msg + " (set allow_low_fs to override)")
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return per


def _inductance_on_grid(L_ee, timebase, t):
    if callable(L_ee):
        return np.asarray(L_ee(timebase.theta(t)), dtype=float) * np.ones_like(t)
    arr = np.asarray(L_ee, dtype=float)
    if arr.ndim == 0:
        return np.full(t.size, float(arr))
    if arr.shape != t.shape:
        raise SingularStepError(f"L_ee samples have shape {arr.shape}, expected {t.shape} on the integration grid")
    return arr


def solve_excitation_current(L_ee, R_e: float, source: ExcitationSource, timebase: Timebase,
                             substeps: int = DEFAULT_SUBSTEPS) -> np.ndarray:
    """Excitation current on the output grid, starting from ``i_e(0) = 0``.

    ``L_ee`` is a constant, a callable of rotor angle (e.g. a
    :class:`~resolversim.assembly.FourierSeries`), or an array sampled on
    ``timebase.fine_times(substeps)``.
    """
    if not R_e > 0:
        raise SingularStepError(f"R_e must be positive, got {R_e}")
    if int(substeps) != substeps or substeps < 1:
        raise SamplingError(f"substeps must be a positive integer, got {substeps}")
    check_sampling(timebase, source)
    t = timebase.fine_times(substeps)
    L = _inductance_on_grid(L_ee, timebase, t)
    if np.any(~np.isfinite(L)) or np.any(L <= 0):
        bad = int(np.argmax(~(L > 0)))
        raise SingularStepError(f"non-positive excitation inductance at t = {t[bad]:.6g} s")
    v = excitation_voltage(t, source)
    h = 1.0 / (timebase.f_s * substeps)

    # (L_{k+1} + hR/2) i_{k+1} / L_{k+1} = (1 - hR/(2L_k)) i_k + h/2 (v_k/L_k + v_{k+1}/L_{k+1})
    inv_l = (1.0 / L).tolist()
    vl = (v / L).tolist()
    half_hr = 0.5 * h * R_e
    half_h = 0.5 * h
    i = np.empty(t.size)
    cur = 0.0
    i[0] = 0.0
    for k in range(t.size - 1):
        rhs = cur * (1.0 - half_hr * inv_l[k]) + half_h * (vl[k] + vl[k + 1])
        cur = rhs / (1.0 + half_hr * inv_l[k + 1])
        i[k + 1] = cur
    return i[::substeps].copy()


def induced_voltages(L_se, L_ce, i_e, timebase: Timebase):
    """Signal voltages ``d(L*i_e)/dt`` on the output grid.

    Centred differences at interior samples (the mean of the two adjacent
    half-sample differences), second-order one-sided at the ends.
    """
    i_e = np.asarray(i_e, dtype=float)
    n = i_e.size
    if n != timebase.n_samples:
        raise SamplingError(f"i_e has {n} samples, timebase has {timebase.n_samples}")
    out = []
    for name, L in (("L_se", L_se), ("L_ce", L_ce)):
        L = np.asarray(L, dtype=float)
        if L.ndim and L.size != n:
            raise SamplingError(f"{name} has {L.size} samples, expected {n}")
        flux = L * i_e
        if n < 3:
            raise SamplingError("need at least 3 samples to differentiate")
        out.append(np.gradient(flux, 1.0 / timebase.f_s, edge_order=2))
    return out[0], out[1]


@dataclass(frozen=True, eq=False)
class WaveRecord:
    t: np.ndarray
    theta_ref: np.ndarray
    i_e: np.ndarray
    v_e: np.ndarray
    v_s: np.ndarray
    v_c: np.ndarray
    f_s: float
    settle_samples: int = 0

    def __post_init__(self):
        n = len(self.t)
        for name in ("theta_ref", "i_e", "v_e", "v_s", "v_c"):
            if len(getattr(self, name)) != n:
                raise SamplingError(f"WaveRecord column {name} has length {len(getattr(self, name))}, expected {n}")

    def __len__(self):
        return len(self.t)

    @property
    def transient(self) -> np.ndarray:
        mask = np.zeros(len(self.t), dtype=bool)
        mask[: self.settle_samples] = True
        return mask

    def columns(self):
        return (self.t, self.theta_ref, self.i_e, self.v_e, self.v_s, self.v_c)


def simulate_wave(L_ee, L_se, L_ce, R_e: float, source: ExcitationSource, timebase: Timebase,
                  substeps: int = DEFAULT_SUBSTEPS, settle_periods: int = DEFAULT_SETTLE_PERIODS) -> WaveRecord:
    """Solve the excitation current and induced voltages in one go.

    ``L_ee`` follows :func:`solve_excitation_current`; ``L_se`` and ``L_ce``
    are constants or arrays on the output grid.
    """
    per = check_sampling(timebase, source)
    i_e = solve_excitation_current(L_ee, R_e, source, timebase, substeps)
    v_s, v_c = induced_voltages(L_se, L_ce, i_e, timebase)
    t = timebase.times
    return WaveRecord(
        t=t,
        theta_ref=timebase.theta(t),
        i_e=i_e,
        v_e=excitation_voltage(t, source),
        v_s=v_s,
        v_c=v_c,
        f_s=timebase.f_s,
        settle_samples=min(len(t), settle_periods * per),
    )


def write_wave_csv(wave: WaveRecord, path) -> None:
    data = np.column_stack(wave.columns())
    with open(path, "w", newline="") as fh:
        fh.write(",".join(WAVE_COLUMNS) + "\n")
        np.savetxt(fh, data, fmt="%.15e", delimiter=",")


def read_wave_csv(path, f_s: float | None = None, settle_samples: int = 0) -> WaveRecord:
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != WAVE_COLUMNS:
            raise SamplingError(f"{path}: unexpected columns {header}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != len(WAVE_COLUMNS):
        raise SamplingError(f"{path}: expected {len(WAVE_COLUMNS)} columns")
    t = data[:, 0]
    if f_s is None:
        if t.size < 2:
            raise SamplingError(f"{path}: cannot infer f_s from fewer than 2 samples")
        f_s = float(f"{(t.size - 1) / (t[-1] - t[0]):.9g}")
    return WaveRecord(t, data[:, 1], data[:, 2], data[:, 3], data[:, 4], data[:, 5], f_s, settle_samples)
