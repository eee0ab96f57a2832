"""Winding-level inductance profiles from basis matrices, and their Fourier series.

Sums run over signal teeth ``i`` and excitation teeth ``j``. An optional
``factor`` array of shape (K, N) scales every basis entry in column ``j``
(eccentricity); ``None`` means no scaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import uniform_angle_grid
from .errors import AssemblyError, FourierError

PROFILE_KINDS = ("se", "ce", "ee")
DEFAULT_N_MAX = 500
SYMMETRY_RTOL = 1e-9
_CHUNK_ELEMENTS = 1 << 20


@dataclass(frozen=True, eq=False)
class InductanceProfile:
    kind: str
    samples: np.ndarray
    time_varying: bool = False

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise AssemblyError(f"profile kind must be one of {PROFILE_KINDS}, got {self.kind!r}")
        s = np.array(self.samples, dtype=float)
        if s.ndim != 1 or s.size < 1:
            raise AssemblyError("profile samples must be a non-empty 1-D array")
        if self.kind == "ee" and np.any(s <= 0):
            raise AssemblyError("excitation self-inductance must be positive at every sample")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def angle_grid(self) -> np.ndarray:
        return uniform_angle_grid(self.samples.size)


def _as_factor(factor, k: int, n: int):
    if factor is None:
        return None
    factor = np.asarray(factor, dtype=float)
    if factor.shape != (k, n):
        raise AssemblyError(f"factor must have shape ({k}, {n}), got {factor.shape}")
    return factor


def _check_dims(basis, rows, cols):
    basis = np.asarray(basis, dtype=float)
    if basis.ndim == 2:
        basis = basis[None]
    if basis.ndim != 3 or basis.shape[1:] != (rows.size, cols.size):
        raise AssemblyError(
            f"basis shape {basis.shape} does not match turn vectors ({rows.size}, {cols.size})"
        )
    return basis


def assemble_mutual(sig_basis, signal_turns, exc_turns, factor=None, kind: str = "se") -> InductanceProfile:
    """Series-connected signal/excitation mutual inductance at every basis angle."""
    ts = np.asarray(signal_turns, dtype=float)
    te = np.asarray(exc_turns, dtype=float)
    sig = _check_dims(sig_basis, ts, te)
    terms = sig * (ts[:, None] * te[None, :])
    factor = _as_factor(factor, sig.shape[0], te.size)
    if factor is not None:
        terms = terms * factor[:, None, :]
    return InductanceProfile(kind, terms.sum(axis=(1, 2)))


def mutual_columns(sig_basis, signal_turns, exc_turns) -> np.ndarray:
    """Per-excitation-tooth contributions to the mutual inductance, shape (K, N).

    Summing the columns, each first multiplied by its eccentricity factor,
    gives the same result as :func:`assemble_mutual`.
    """
    ts = np.asarray(signal_turns, dtype=float)
    te = np.asarray(exc_turns, dtype=float)
    sig = _check_dims(sig_basis, ts, te)
    return (sig * ts[None, :, None]).sum(axis=1) * te[None, :]


def _check_symmetric(exc):
    scale = np.max(np.abs(exc))
    asym = np.max(np.abs(exc - exc.transpose(0, 2, 1)))
    if scale > 0 and asym > SYMMETRY_RTOL * scale:
        raise AssemblyError(
            f"excitation basis is not symmetric (relative asymmetry {asym / scale:.2e}); "
            "the doubled upper-triangle sum would be wrong"
        )


def assemble_self_excitation(exc_basis, exc_turns, factor=None) -> InductanceProfile:
    """Excitation self-inductance via the doubled upper triangle plus the diagonal.

    Off-diagonal pair ``(i, j)`` with ``i < j`` carries the factor of tooth
    ``j``; diagonal entry ``i`` carries the factor of tooth ``i``.
    """
    t = np.asarray(exc_turns, dtype=float)
    exc = _check_dims(exc_basis, t, t)
    _check_symmetric(exc)
    terms = exc * (t[:, None] * t[None, :])
    factor = _as_factor(factor, exc.shape[0], t.size)
    if factor is not None:
        terms = terms * factor[:, None, :]
    upper = (terms * np.triu(np.ones((t.size, t.size)), k=1)).sum(axis=(1, 2))
    diag = np.diagonal(terms, axis1=1, axis2=2).sum(axis=1)
    return InductanceProfile("ee", 2.0 * upper + diag)


def self_columns(exc_basis, exc_turns) -> np.ndarray:
    """Per-tooth contributions to the excitation self-inductance, shape (K, N).

    Column ``j`` holds the doubled pairs ``i < j`` and the diagonal term of
    tooth ``j``, matching the factor convention of
    :func:`assemble_self_excitation`.
    """
    t = np.asarray(exc_turns, dtype=float)
    exc = _check_dims(exc_basis, t, t)
    _check_symmetric(exc)
    terms = exc * (t[:, None] * t[None, :])
    above_diag = np.triu(np.ones((t.size, t.size)), k=1)
    pairs = (terms * above_diag).sum(axis=1)
    return 2.0 * pairs + np.diagonal(terms, axis1=1, axis2=2)


# --- Fourier series ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """``dc + sum_n amplitude_n * sin(n*(theta - theta0) + phase_n)``."""

    dc: float
    orders: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray
    theta0: float = 0.0

    def __post_init__(self):
        orders = np.asarray(self.orders, dtype=int)
        amps = np.asarray(self.amplitudes, dtype=float)
        phases = np.asarray(self.phases, dtype=float)
        if not (orders.shape == amps.shape == phases.shape) or orders.ndim != 1:
            raise FourierError("orders, amplitudes and phases must be 1-D arrays of equal length")
        if orders.size and (orders[0] < 1 or np.any(np.diff(orders) <= 0)):
            raise FourierError("harmonic orders must be positive and strictly increasing")
        if np.any(amps < 0):
            raise FourierError("harmonic amplitudes must be non-negative")
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "phases", phases)

    def __call__(self, theta):
        return evaluate_fourier(self, theta)


def _wrap(phase):
    return np.pi - np.mod(np.pi - phase, 2 * np.pi)


def fit_fourier(profile, n_max: int = DEFAULT_N_MAX, theta0: float = 0.0) -> FourierSeries:
    """Discrete Fourier fit of one revolution of uniformly spaced samples.

    ``profile`` is an :class:`InductanceProfile` or a 1-D sample array on the
    grid ``2*pi*k/K``. Orders up to ``K/2`` are resolvable; the order ``K/2``
    term (even K) is the cosine-only Nyquist component.
    """
    samples = profile.samples if isinstance(profile, InductanceProfile) else np.asarray(profile, dtype=float)
    k = samples.size
    if n_max < 0 or 2 * n_max > k:
        raise FourierError(
            f"n_max = {n_max} not resolvable from K = {k} samples (need K >= 2*n_max)"
        )
    c = np.fft.rfft(samples) / k
    orders = np.arange(1, n_max + 1)
    coeff = c[1 : n_max + 1]
    amps = 2.0 * np.abs(coeff)
    phases = np.angle(coeff) + np.pi / 2
    if 2 * n_max == k:
        nyq = coeff[-1].real
        amps[-1] = abs(nyq)
        phases[-1] = np.pi / 2 if nyq >= 0 else -np.pi / 2
    phases = _wrap(phases + orders * theta0)
    return FourierSeries(float(c[0].real), orders, amps, phases, theta0)


def evaluate_fourier_many(series_list, theta) -> np.ndarray:
    """Evaluate several series sharing orders and ``theta0``; returns (len(series), len(theta))."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if not series_list:
        return np.empty((0, theta.size))
    ref = series_list[0]
    for s in series_list[1:]:
        if s.theta0 != ref.theta0 or not np.array_equal(s.orders, ref.orders):
            raise FourierError("batched evaluation needs identical orders and theta0")
    out = np.empty((len(series_list), theta.size))
    for row, s in enumerate(series_list):
        out[row] = s.dc
    n = ref.orders
    if n.size == 0:
        return out
    sin_w = np.array([s.amplitudes * np.cos(s.phases) for s in series_list])
    cos_w = np.array([s.amplitudes * np.sin(s.phases) for s in series_list])
    x = theta - ref.theta0
    step = max(1, _CHUNK_ELEMENTS // n.size)
    for start in range(0, theta.size, step):
        arg = np.multiply.outer(x[start : start + step], n)
        sn, cs = np.sin(arg), np.cos(arg)
        for row in range(len(series_list)):
            out[row, start : start + step] += (sn * sin_w[row]).sum(axis=1) + (cs * cos_w[row]).sum(axis=1)
    return out


def evaluate_fourier(series: FourierSeries, theta):
    theta = np.asarray(theta, dtype=float)
    values = evaluate_fourier_many([series], theta.ravel())[0]
    return values[0] if theta.ndim == 0 else values.reshape(theta.shape)


def interpolate_periodic(samples, theta) -> np.ndarray:
    """Linear interpolation of one revolution of grid samples at arbitrary angles."""
    samples = np.asarray(samples, dtype=float)
    k = samples.size
    pos = np.mod(np.asarray(theta, dtype=float), 2 * np.pi) * k / (2 * np.pi)
    lo = np.floor(pos).astype(int) % k
    frac = pos - np.floor(pos)
    return samples[lo] * (1 - frac) + samples[(lo + 1) % k] * frac
