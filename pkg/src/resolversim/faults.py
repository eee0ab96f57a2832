"""Fault injection: inter-turn shorts and airgap eccentricity.

Shorts change the turn vectors. Eccentricity leaves the turns alone and
instead scales every basis entry by a per-tooth airgap factor, evaluated at
the excitation tooth of that entry (the column index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import BasisSet
from .errors import FaultError
from .geometry import Geometry, airgap_length, check_tooth
from .winding import WindingConfig

SIGNAL_SHORT = "signal_short"
EXCITATION_SHORT = "excitation_short"
STATIC_ECC = "static_ecc"
DYNAMIC_ECC = "dynamic_ecc"
NONE = "none"
FAULT_KINDS = (SIGNAL_SHORT, EXCITATION_SHORT, STATIC_ECC, DYNAMIC_ECC)

# dataset vocabulary
FAULT_LABELS = {
    SIGNAL_SHORT: "fault1",
    EXCITATION_SHORT: "fault2",
    STATIC_ECC: "fault3",
    DYNAMIC_ECC: "fault4",
}

_BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class FaultSpec:
    kind: str
    tooth: int = 1
    winding: str = "sine"
    turns: float = 0.0
    R_sc: float = 0.0
    e: float = 0.0
    theta_ecc: float | None = None
    e_d: float = 0.0

    def __post_init__(self):
        if self.kind not in FAULT_KINDS + (NONE,):
            raise FaultError(f"fault kind must be one of {FAULT_KINDS}, got {self.kind!r}")
        if self.turns < 0:
            raise FaultError(f"shorted turns must be non-negative, got {self.turns}")
        if self.R_sc < 0:
            raise FaultError(f"R_sc must be non-negative, got {self.R_sc}")
        if self.e < 0 or self.e_d < 0:
            raise FaultError("eccentricity magnitudes must be non-negative")
        if self.theta_ecc is not None and not 0 <= self.theta_ecc < 2 * math.pi:
            raise FaultError(f"theta_ecc must lie in [0, 2*pi), got {self.theta_ecc}")

    @property
    def label(self) -> str:
        return FAULT_LABELS.get(self.kind, "healthy")

    def is_zero_intensity(self) -> bool:
        if self.kind in (SIGNAL_SHORT, EXCITATION_SHORT):
            return self.turns == 0
        if self.kind == STATIC_ECC:
            return self.e == 0
        if self.kind == DYNAMIC_ECC:
            return self.e_d == 0
        return True

    def describe(self) -> str:
        if self.kind == SIGNAL_SHORT:
            detail = f"tooth={self.tooth},winding={self.winding},turns={self.turns!r}"
        elif self.kind == EXCITATION_SHORT:
            detail = f"tooth={self.tooth},turns={self.turns!r},R_sc_ohm={self.R_sc!r}"
        elif self.kind == STATIC_ECC:
            theta = "auto" if self.theta_ecc is None else repr(self.theta_ecc)
            detail = f"tooth={self.tooth},e_mm={self.e!r},theta_ecc_rad={theta}"
        elif self.kind == DYNAMIC_ECC:
            detail = f"e_d_mm={self.e_d!r}"
        else:
            return NONE
        return f"{self.label}:{self.kind}({detail})"


def static_ecc_direction(tooth: int, slot_count: int) -> float:
    """Angular direction of a stator shift toward ``tooth``."""
    return 2 * math.pi * (tooth - 1) / slot_count


def effective_turns_signal(T: float, T_short: float) -> float:
    """Turns left on a signal coil after ``T_short`` turns are shorted."""
    if T_short < 0:
        raise FaultError(f"shorted turns must be non-negative, got {T_short}")
    if T_short > abs(T) * (1 + _BOUND_SLACK):
        raise FaultError(f"cannot short {T_short} turns of a {abs(T)}-turn coil")
    return T - math.copysign(T_short, T) if T else 0.0


def effective_turns_excitation(T: float, T_short: float, R_sc: float, R_e: float) -> float:
    """Effective turns of an excitation coil with a resistive inter-turn short.

    The shorted turns count back in proportion to ``R_sc / (R_e + R_sc)``:
    a bolted short (``R_sc = 0``) removes them, an open one (``R_sc -> inf``)
    leaves the coil intact.
    """
    if not R_e > 0:
        raise FaultError(f"R_e must be positive, got {R_e}")
    if R_sc < 0:
        raise FaultError(f"R_sc must be non-negative, got {R_sc}")
    if T_short < 0 or T_short > abs(T) * (1 + _BOUND_SLACK):
        raise FaultError(f"cannot short {T_short} turns of a {abs(T)}-turn coil")
    ratio = 1.0 if math.isinf(R_sc) else R_sc / (R_e + R_sc)
    magnitude = abs(T) - T_short + ratio * T_short
    return math.copysign(magnitude, T) if T else 0.0


def _check_ecc(geometry: Geometry, magnitude: float, name: str) -> None:
    bound = geometry.g_min / 2
    if magnitude < 0 or magnitude > bound * (1 + _BOUND_SLACK):
        raise FaultError(f"{name} = {magnitude} mm outside the feasible range [0, {bound}] mm")


def static_ecc_factor(geometry: Geometry, tooth: int, theta_rotor, e: float, theta_ecc: float):
    """Airgap scaling factor of ``tooth`` under a fixed stator shift ``e`` toward ``theta_ecc``."""
    _check_ecc(geometry, e, "e")
    phi = geometry.tooth_angle(tooth)
    g = airgap_length(geometry, phi, theta_rotor)
    return g / (g + e * np.cos(phi - theta_ecc))


def dynamic_ecc_factor(geometry: Geometry, tooth: int, theta_rotor, t, e_d: float, omega: float):
    """Airgap scaling factor of ``tooth`` under a rotor offset ``e_d`` turning at ``omega``."""
    _check_ecc(geometry, e_d, "e_d")
    phi = geometry.tooth_angle(tooth)
    g = airgap_length(geometry, phi, theta_rotor)
    return g / (g + e_d * np.cos(phi - omega * np.asarray(t, dtype=float)))


@dataclass(frozen=True, eq=False)
class FaultedBasisView:
    """A basis plus the effective windings and eccentricity scaling of a fault set.

    ``column_factors`` gives the per-excitation-tooth factor that multiplies
    every basis entry in that column. It is identically 1 without
    eccentricity.
    """

    basis: BasisSet
    winding: WindingConfig
    healthy_winding: WindingConfig
    faults: tuple = ()
    static_e: float = 0.0
    static_theta: float = 0.0
    dynamic_e: float = 0.0
    omega: float | None = None

    @property
    def geometry(self) -> Geometry:
        return self.basis.geometry

    @property
    def has_static(self) -> bool:
        return self.static_e > 0

    @property
    def time_varying(self) -> bool:
        return self.dynamic_e > 0

    def column_factors(self, theta, t=None) -> np.ndarray | None:
        """Per-tooth factors at rotor angles ``theta`` (and times ``t``); shape (len, N).

        Returns ``None`` when no eccentricity is active so callers can keep
        the unscaled path bit-identical to a healthy run.
        """
        if not (self.has_static or self.time_varying):
            return None
        geo = self.geometry
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        phi = geo.tooth_angles()[None, :]
        g = airgap_length(geo, phi, theta[:, None])
        out = np.ones_like(g)
        if self.has_static:
            out = out * (g / (g + self.static_e * np.cos(phi - self.static_theta)))
        if self.time_varying:
            if t is None or self.omega is None:
                raise FaultError("dynamic eccentricity needs time samples and rotor speed")
            t = np.atleast_1d(np.asarray(t, dtype=float))
            out = out * (g / (g + self.dynamic_e * np.cos(phi - self.omega * t[:, None])))
        return out


def apply_faults(basis: BasisSet, winding: WindingConfig, faults=(), omega: float | None = None) -> FaultedBasisView:
    geo = basis.geometry
    if winding.slot_count != geo.slot_count:
        raise FaultError(f"winding has {winding.slot_count} teeth, geometry has {geo.slot_count}")
    faults = tuple(f for f in faults if f.kind != NONE)
    seen_shorts = set()
    static = dynamic = None
    eff = {"sine": winding.sine.copy(), "cosine": winding.cosine.copy(), "excitation": winding.excitation.copy()}

    for f in faults:
        if f.kind in (SIGNAL_SHORT, EXCITATION_SHORT):
            check_tooth(geo, f.tooth)
            target = "excitation" if f.kind == EXCITATION_SHORT else f.winding
            if f.kind == SIGNAL_SHORT and target not in ("sine", "cosine"):
                raise FaultError(f"signal short must target 'sine' or 'cosine', got {target!r}")
            key = (target, f.tooth)
            if key in seen_shorts:
                raise FaultError(f"duplicate short on tooth {f.tooth} of the {target} winding")
            seen_shorts.add(key)
            T = float(winding.turns(target)[f.tooth - 1])
            if f.turns > abs(T) * (1 + _BOUND_SLACK):
                raise FaultError(f"cannot short {f.turns} turns: tooth {f.tooth} of {target} has {abs(T):g}")
            if f.kind == SIGNAL_SHORT:
                eff[target][f.tooth - 1] = effective_turns_signal(T, f.turns)
            else:
                eff[target][f.tooth - 1] = effective_turns_excitation(T, f.turns, f.R_sc, winding.R_e)
        elif f.kind == STATIC_ECC:
            if static is not None:
                raise FaultError("at most one static eccentricity per scenario")
            _check_ecc(geo, f.e, "e")
            check_tooth(geo, f.tooth)
            static = f
        elif f.kind == DYNAMIC_ECC:
            if dynamic is not None:
                raise FaultError("at most one dynamic eccentricity per scenario")
            _check_ecc(geo, f.e_d, "e_d")
            dynamic = f

    effective = WindingConfig(eff["sine"], eff["cosine"], eff["excitation"], winding.R_e, winding.name)
    static_theta = 0.0
    if static is not None:
        static_theta = (static.theta_ecc if static.theta_ecc is not None
                        else static_ecc_direction(static.tooth, geo.slot_count))
    if dynamic is not None and dynamic.e_d > 0 and omega is None:
        raise FaultError("dynamic eccentricity needs the rotor speed omega")
    return FaultedBasisView(
        basis=basis,
        winding=effective,
        healthy_winding=winding,
        faults=faults,
        static_e=static.e if static is not None else 0.0,
        static_theta=static_theta,
        dynamic_e=dynamic.e_d if dynamic is not None else 0.0,
        omega=omega,
    )
