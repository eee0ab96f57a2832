"""Envelope demodulation, arctangent angle estimate and position-error metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import ExcitationSource, WaveRecord
from .errors import DemodulationError, MetricsError

ENVELOPE_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class Envelopes:
    t: np.ndarray
    env_s: np.ndarray
    env_c: np.ndarray
    transient: np.ndarray  # True where the carrier window overlaps the start-up transient


def carrier_phase_from_current(wave: WaveRecord, source: ExcitationSource) -> float:
    """Phase ``psi`` of the settled excitation current, ``i_e ~ A*cos(w_e*t - psi)``."""
    per = _samples_per_period(wave, source)
    start = wave.settle_samples
    usable = ((len(wave) - start) // per) * per
    if usable < per:
        start, usable = 0, (len(wave) // per) * per
    if usable < per:
        raise DemodulationError("record shorter than one carrier period")
    sl = slice(start, start + usable)
    wt = source.omega_e * wave.t[sl]
    a = np.mean(wave.i_e[sl] * np.cos(wt))
    b = np.mean(wave.i_e[sl] * np.sin(wt))
    return math.atan2(b, a)


def _samples_per_period(wave: WaveRecord, source: ExcitationSource) -> int:
    ratio = wave.f_s / source.f_e
    per = int(round(ratio))
    if abs(ratio - per) > 1e-9 * ratio or per % 2 or per < 4:
        raise DemodulationError(
            f"sampling rate {wave.f_s} Hz is not an integer multiple of 2*f_e = {2 * source.f_e} Hz"
        )
    return per


def demodulate(wave: WaveRecord, source: ExcitationSource, carrier_phase: float | None = None) -> Envelopes:
    """Signed envelopes of ``v_s`` and ``v_c`` at every carrier extremum.

    The induced voltages follow ``di_e/dt``, so their carrier is the
    excitation current's carrier advanced by a quarter period. Each extremum
    instant ``t_k`` of that carrier yields one envelope sample: the in-phase
    amplitude at ``t_k`` of a least-squares fit, over one carrier period of
    samples around ``t_k``, of a carrier whose in-phase and quadrature
    amplitudes drift linearly. The sign is corrected by the carrier polarity.
    Speed voltages land in the quadrature terms. The output rate is ``2*f_e``.

    ``carrier_phase`` gives ``beta`` in ``cos(w_e*t - beta)`` directly and
    skips the estimate from ``i_e``.
    """
    per = _samples_per_period(wave, source)
    w = source.omega_e
    if carrier_phase is None:
        beta = carrier_phase_from_current(wave, source) - math.pi / 2
    else:
        beta = float(carrier_phase)
    n = len(wave)
    f_s = wave.f_s
    half = per // 2
    t_end = wave.t[0] + (n - 1) / f_s
    k_first = math.ceil((w * wave.t[0] - beta) / math.pi)
    k_last = math.floor((w * t_end - beta) / math.pi)
    ks = np.arange(k_first, k_last + 1)
    t_k = (beta + ks * math.pi) / w
    centre = np.rint((t_k - wave.t[0]) * f_s).astype(int)
    start = centre - half
    # the end samples carry one-sided derivative estimates; keep them out
    keep = (start >= 1) & (start + per <= n - 1)
    ks, t_k, start = ks[keep], t_k[keep], start[keep]
    if ks.size == 0:
        return Envelopes(*(np.empty(0) for _ in range(3)), np.empty(0, dtype=bool))

    idx = start[:, None] + np.arange(per)[None, :]
    phase = w * (wave.t[idx] - t_k[:, None])
    tau = phase / (2 * math.pi)
    c, s = np.cos(phase), np.sin(phase)
    # (a0 + a1*tau)*cos + (b0 + b1*tau)*sin; a0 is the envelope at t_k. The
    # linear terms absorb envelope drift across the window, which a plain
    # projection would turn into a timing bias because an even-length window
    # cannot be centred on t_k.
    design = np.stack([c, tau * c, s, tau * s], axis=2)
    gram = (design[:, :, :, None] * design[:, :, None, :]).sum(axis=1)
    sign = np.where(ks % 2 == 0, 1.0, -1.0)

    def project(v):
        rhs = (design * v[idx][:, :, None]).sum(axis=1)
        return sign * np.linalg.solve(gram, rhs[:, :, None])[:, 0, 0]

    transient = start < wave.settle_samples
    return Envelopes(t_k, project(wave.v_s), project(wave.v_c), transient)


@dataclass(frozen=True)
class Calibration:
    """Orientation of the resolver's electrical angle relative to the rotor.

    ``theta_mech = direction * (alpha - offset) / pole_pairs`` where
    ``alpha = atan2(env_s, env_c)``.
    """

    direction: int = 1
    offset: float = 0.0


def calibrate(L_se, L_ce, angle_grid, pole_pairs: int = 1) -> Calibration:
    """Direction and zero offset of a winding from its healthy profiles.

    The electrical angle ``atan2(L_se, L_ce)`` is unwrapped over the grid;
    its net sweep gives the direction and the circular mean of the residual
    against ``direction * p * theta`` gives the offset.
    """
    L_se = np.asarray(L_se, dtype=float)
    L_ce = np.asarray(L_ce, dtype=float)
    theta = np.asarray(angle_grid, dtype=float)
    mag = np.hypot(L_se, L_ce)
    if mag.max() == 0 or mag.min() <= 1e-9 * mag.max():
        raise DemodulationError("winding produces no usable angle signal (L_se and L_ce vanish together)")
    alpha = np.unwrap(np.arctan2(L_se, L_ce))
    sweep = alpha[-1] - alpha[0]
    if abs(sweep) < math.pi:
        raise DemodulationError("electrical angle does not advance with the rotor")
    direction = 1 if sweep > 0 else -1
    resid = alpha - direction * pole_pairs * theta
    offset = math.atan2(np.mean(np.sin(resid)), np.mean(np.cos(resid)))
    return Calibration(direction, offset)


def estimate_angle(env_s, env_c, pole_pairs: int = 1, calibration: Calibration | None = None,
                   theta_ref=None, floor: float = ENVELOPE_FLOOR):
    """Unwrapped mechanical angle from the signed envelopes.

    Returns ``(theta_est, valid)``; samples whose envelopes are both below
    ``floor`` are invalid and carry NaN. When ``theta_ref`` is given the
    first valid sample is moved to the branch of the reference.
    """
    if pole_pairs < 1:
        raise DemodulationError(f"pole_pairs must be >= 1, got {pole_pairs}")
    cal = calibration or Calibration()
    env_s = np.asarray(env_s, dtype=float)
    env_c = np.asarray(env_c, dtype=float)
    if env_s.shape != env_c.shape:
        raise DemodulationError("envelopes are not aligned")
    valid = np.hypot(env_s, env_c) >= floor
    theta = np.full(env_s.shape, np.nan)
    if not valid.any():
        return theta, valid
    alpha = np.unwrap(np.arctan2(env_s[valid], env_c[valid]))
    mech = cal.direction * (alpha - cal.offset) / pole_pairs
    if theta_ref is not None:
        ref0 = np.asarray(theta_ref, dtype=float)[valid][0]
        span = 2 * math.pi / pole_pairs
        mech = mech - span * np.round((mech[0] - ref0) / span)
    theta[valid] = mech
    return theta, valid


def wrap_degrees(err_deg):
    """Wrap to the half-open interval (-180, 180]."""
    return 180.0 - np.mod(180.0 - np.asarray(err_deg, dtype=float), 360.0)


def angle_error_deg(theta_est, theta_ref):
    return wrap_degrees(np.degrees(np.asarray(theta_est) - np.asarray(theta_ref)))


@dataclass(frozen=True)
class PositionMetrics:
    aape: float
    mpe: float
    n_samples: int
    n_excluded: int


def position_metrics(error_deg, mask=None) -> PositionMetrics:
    """Average and maximum absolute position error over the samples in ``mask``."""
    err = np.asarray(error_deg, dtype=float)
    mask = np.ones(err.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if mask.shape != err.shape:
        raise MetricsError("mask and error series differ in length")
    sel = np.abs(err[mask])
    if sel.size == 0:
        raise MetricsError("no valid samples to compute metrics from")
    return PositionMetrics(float(sel.mean()), float(sel.max()), int(sel.size), int(err.size - sel.size))


def mae(a, b) -> float:
    """Mean absolute elementwise difference."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.size == 0:
        raise MetricsError(f"mae needs equal, non-empty series, got {a.shape} and {b.shape}")
    return float(np.mean(np.abs(a - b)))


@dataclass(frozen=True, eq=False)
class AngleEstimate:
    t: np.ndarray
    theta_est: np.ndarray
    theta_ref: np.ndarray
    error_deg: np.ndarray
    valid: np.ndarray
    transient: np.ndarray

    @property
    def metric_mask(self) -> np.ndarray:
        return self.valid & ~self.transient


def estimate_from_wave(wave: WaveRecord, source: ExcitationSource, timebase_theta, pole_pairs: int = 1,
                       calibration: Calibration | None = None) -> AngleEstimate:
    """Demodulate a wave record and compare against the reference angle.

    ``timebase_theta`` maps times to the reference rotor angle.
    """
    env = demodulate(wave, source)
    theta_ref = np.asarray(timebase_theta(env.t), dtype=float)
    theta_est, valid = estimate_angle(env.env_s, env.env_c, pole_pairs, calibration, theta_ref)
    err = np.where(valid, angle_error_deg(np.where(valid, theta_est, 0.0), theta_ref), np.nan)
    return AngleEstimate(env.t, theta_est, theta_ref, err, valid, env.transient)
