"""Single-turn basis inductance matrices.

A :class:`BasisSet` holds, for every rotor angle on a uniform grid, the N x N
matrix of inductances between single-turn excitation coils and the N x M
matrix between single-turn signal coils and excitation coils. Winding-level
inductances are turn-weighted sums of these entries (see ``assembly``).

``generate_synthetic_basis`` is an analytical stand-in for a one-time
finite-element extraction: a star permeance network with infinitely permeable
stator and rotor iron, one airgap permeance per tooth.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import (
    BasisAngleGridError,
    BasisDimensionError,
    BasisFormatError,
    BasisHeaderError,
    BasisIntegrityWarning,
    GeometryError,
)
from .geometry import Geometry, airgap_length

MU0 = 4e-7 * math.pi
DEFAULT_SAMPLES_PER_REV = 1000
FORMAT_VERSION = 1
SYMMETRY_RTOL = 1e-9


def uniform_angle_grid(samples_per_rev: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(samples_per_rev) / samples_per_rev


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BasisSet:
    geometry: Geometry
    exc_basis: np.ndarray  # (K, N, N) henries
    sig_basis: np.ndarray  # (K, M, N) henries, row = signal tooth, column = excitation tooth
    # On disk each sig block is written excitation-tooth-major: N lines of M values.
    integrity_warnings: tuple = field(default=())

    def __post_init__(self):
        exc = _frozen(self.exc_basis)
        sig = _frozen(self.sig_basis)
        n = self.geometry.slot_count
        if exc.ndim != 3 or exc.shape[1:] != (n, n):
            raise BasisDimensionError(f"exc_basis must have shape (K, {n}, {n}), got {exc.shape}", "exc_basis")
        if sig.ndim != 3 or sig.shape[0] != exc.shape[0] or sig.shape[2] != n:
            raise BasisDimensionError(f"sig_basis must have shape ({exc.shape[0]}, M, {n}), got {sig.shape}", "sig_basis")
        if exc.shape[0] < 1:
            raise BasisDimensionError("basis needs at least one angle sample", "K")
        object.__setattr__(self, "exc_basis", exc)
        object.__setattr__(self, "sig_basis", sig)

    @property
    def samples_per_rev(self) -> int:
        return self.exc_basis.shape[0]

    @property
    def n_exc(self) -> int:
        return self.exc_basis.shape[1]

    @property
    def n_sig(self) -> int:
        return self.sig_basis.shape[1]

    @property
    def angle_grid(self) -> np.ndarray:
        return uniform_angle_grid(self.samples_per_rev)

    def asymmetry(self) -> float:
        """Largest |L_ij - L_ji| relative to the largest |L_ij|."""
        exc = self.exc_basis
        scale = np.max(np.abs(exc))
        if scale == 0:
            return 0.0
        return float(np.max(np.abs(exc - exc.transpose(0, 2, 1))) / scale)

    def integrity_issues(self) -> list[str]:
        issues = []
        asym = self.asymmetry()
        if asym > SYMMETRY_RTOL:
            issues.append(f"exc_basis not symmetric: relative asymmetry {asym:.3e} > {SYMMETRY_RTOL:g}")
        diag = np.diagonal(self.exc_basis, axis1=1, axis2=2)
        if np.any(diag <= 0):
            issues.append("exc_basis has non-positive diagonal entries")
        return issues


def tooth_permeances(geometry: Geometry, theta) -> np.ndarray:
    """Airgap permeance (H) of every tooth at rotor angles ``theta``; shape (len(theta), N)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    g_mm = airgap_length(geometry, geometry.tooth_angles()[None, :], theta[:, None])
    if not np.all(np.isfinite(g_mm)) or np.any(g_mm <= 0):
        raise GeometryError("degenerate geometry: airgap length reaches zero")
    area_m2 = geometry.tooth_area() * 1e-6
    return MU0 * area_m2 / (g_mm * 1e-3)


def generate_synthetic_basis(geometry: Geometry, samples_per_rev: int = DEFAULT_SAMPLES_PER_REV) -> BasisSet:
    """Closed-form basis from the star permeance network.

    Unit MMF on tooth j drives flux ``P_j (S - P_j) / S`` through tooth j and
    ``-P_j P_k / S`` back through every other tooth k, where ``S`` is the sum
    of all tooth permeances. Single-turn linkage equals that flux, so these
    fluxes are the inductances. Signal coils sit on the same teeth, so the
    signal block equals the excitation block.
    """
    if int(samples_per_rev) != samples_per_rev or samples_per_rev < 2:
        raise GeometryError(f"samples_per_rev must be an integer >= 2, got {samples_per_rev}")
    perm = tooth_permeances(geometry, uniform_angle_grid(samples_per_rev))
    total = perm.sum(axis=1)
    exc = -perm[:, :, None] * perm[:, None, :] / total[:, None, None]
    idx = np.arange(geometry.slot_count)
    exc[:, idx, idx] = perm * (total[:, None] - perm) / total[:, None]
    return BasisSet(geometry, exc, exc.copy())


# --- file format -----------------------------------------------------------

_INT_FIELDS = {"slot_count", "pole_count", "winding_pole_pairs"}
_STR_FIELDS = {"airgap_kind"}


def _fmt(x: float) -> str:
    return f"{x:.17e}"


def save_basis(basis: BasisSet, path) -> None:
    path = Path(path)
    lines = [
        f"format_version = {FORMAT_VERSION}",
        f"N = {basis.n_exc}",
        f"M = {basis.n_sig}",
        f"K = {basis.samples_per_rev}",
    ]
    for f in fields(Geometry):
        value = getattr(basis.geometry, f.name)
        if f.name in _INT_FIELDS or f.name in _STR_FIELDS:
            lines.append(f"{f.name} = {value}")
        else:
            lines.append(f"{f.name} = {float(value)!r}")
    for k in range(basis.samples_per_rev):
        lines.append(f"angle_index {k}")
        for row in basis.exc_basis[k]:
            lines.append(" ".join(_fmt(v) for v in row))
        for row in basis.sig_basis[k].T:
            lines.append(" ".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _header_int(header, key):
    if key not in header:
        raise BasisHeaderError(f"missing header field {key!r}", key)
    try:
        value = int(header[key])
    except ValueError:
        raise BasisHeaderError(f"header field {key!r} is not an integer: {header[key]!r}", key) from None
    if value < 1:
        raise BasisHeaderError(f"header field {key!r} must be positive", key)
    return value


def load_basis(path) -> BasisSet:
    """Parse a basis file written by :func:`save_basis`.

    A reciprocity violation beyond ``SYMMETRY_RTOL`` does not stop the load;
    it is recorded in ``integrity_warnings`` and emitted as a warning.
    """
    lines = Path(path).read_text().splitlines()
    header = {}
    pos = 0
    while pos < len(lines) and not lines[pos].startswith("angle_index"):
        line = lines[pos].strip()
        pos += 1
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise BasisHeaderError(f"malformed header line {pos}: {line!r}", line.split()[0])
        key, value = (s.strip() for s in line.split("=", 1))
        header[key] = value

    version = _header_int(header, "format_version")
    if version != FORMAT_VERSION:
        raise BasisHeaderError(f"unsupported format_version {version}", "format_version")
    n = _header_int(header, "N")
    m = _header_int(header, "M")
    k_total = _header_int(header, "K")

    geo_kwargs = {}
    for f in fields(Geometry):
        if f.name not in header:
            raise BasisHeaderError(f"missing header field {f.name!r}", f.name)
        raw = header[f.name]
        try:
            if f.name in _INT_FIELDS:
                geo_kwargs[f.name] = int(raw)
            elif f.name in _STR_FIELDS:
                geo_kwargs[f.name] = raw
            else:
                geo_kwargs[f.name] = float(raw)
        except ValueError:
            raise BasisHeaderError(f"header field {f.name!r} has bad value {raw!r}", f.name) from None
    try:
        geometry = Geometry(**geo_kwargs)
    except GeometryError as exc:
        raise BasisHeaderError(f"invalid geometry in header: {exc}", "geometry") from None
    if geometry.slot_count != n:
        raise BasisDimensionError(f"N = {n} disagrees with slot_count = {geometry.slot_count}", "N")

    exc = np.empty((k_total, n, n))
    sig = np.empty((k_total, m, n))
    block = 0
    while pos < len(lines):
        line = lines[pos].strip()
        if not line:
            pos += 1
            continue
        parts = line.split()
        if parts[0] != "angle_index" or len(parts) != 2:
            raise BasisFormatError(f"expected 'angle_index <k>' at line {pos + 1}, got {line!r}", "angle_index")
        try:
            index = int(parts[1])
        except ValueError:
            raise BasisAngleGridError(f"bad angle index {parts[1]!r} at line {pos + 1}", "angle_index") from None
        if block >= k_total:
            raise BasisDimensionError(f"more than K = {k_total} sample blocks", "K")
        if index != block:
            raise BasisAngleGridError(
                f"non-uniform angle grid: block {block} carries angle_index {index}", "angle_index"
            )
        rows = lines[pos + 1 : pos + 1 + 2 * n]
        if len(rows) != 2 * n:
            raise BasisDimensionError(f"block {block} truncated: expected {2 * n} rows", "K")
        try:
            values = [[float(v) for v in r.split()] for r in rows]
        except ValueError:
            raise BasisFormatError(f"non-numeric entry in block {block}", "angle_index") from None
        for r, row in enumerate(values):
            width = n if r < n else m
            if len(row) != width:
                which = "exc" if r < n else "sig"
                raise BasisDimensionError(
                    f"block {block} {which} row has {len(row)} values, expected {width}", which
                )
        exc[block] = values[:n]
        sig[block] = np.array(values[n:]).T
        block += 1
        pos += 1 + 2 * n
    if block != k_total:
        raise BasisDimensionError(f"K = {k_total} declared but {block} sample blocks found", "K")

    basis = BasisSet(geometry, exc, sig)
    issues = tuple(basis.integrity_issues())
    for issue in issues:
        warnings.warn(issue, BasisIntegrityWarning, stacklevel=2)
    return BasisSet(geometry, basis.exc_basis, basis.sig_basis, integrity_warnings=issues)
