"""Resolver geometry and airgap functions.

Lengths are in millimetres, angles in radians. Tooth ``i`` (1-based) sits at
stator angle ``2*pi*(i-1)/N``, counterclockwise from tooth 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import GeometryError

SINUSOIDAL_SALIENT = "sinusoidal_salient"
UNIFORM = "uniform"
AIRGAP_KINDS = (SINUSOIDAL_SALIENT, UNIFORM)


@dataclass(frozen=True)
class Geometry:
    slot_count: int = 12
    g_min: float = 0.5
    g_max: float = 2.0
    pole_count: int = 2
    winding_pole_pairs: int = 5
    stack_length: float = 6.7
    stator_inner_diameter: float = 34.13
    rotor_outer_diameter: float = 0.0
    tooth_span_fraction: float = 0.5
    airgap_kind: str = SINUSOIDAL_SALIENT

    def __post_init__(self):
        if int(self.slot_count) != self.slot_count or self.slot_count < 4:
            raise GeometryError(f"slot_count must be an integer >= 4, got {self.slot_count}")
        if not (0 < self.g_min <= self.g_max):
            raise GeometryError(f"need 0 < g_min <= g_max, got g_min={self.g_min}, g_max={self.g_max}")
        if int(self.pole_count) != self.pole_count or self.pole_count < 2 or self.pole_count % 2:
            raise GeometryError(f"pole_count must be even and >= 2, got {self.pole_count}")
        if int(self.winding_pole_pairs) != self.winding_pole_pairs or self.winding_pole_pairs < 1:
            raise GeometryError(f"winding_pole_pairs must be a positive integer, got {self.winding_pole_pairs}")
        if self.stack_length <= 0 or self.stator_inner_diameter <= 0:
            raise GeometryError("stack_length and stator_inner_diameter must be positive")
        if not (0 < self.tooth_span_fraction <= 1):
            raise GeometryError(f"tooth_span_fraction must lie in (0, 1], got {self.tooth_span_fraction}")
        if self.airgap_kind not in AIRGAP_KINDS:
            raise GeometryError(f"airgap_kind must be one of {AIRGAP_KINDS}, got {self.airgap_kind!r}")
        if self.airgap_kind == UNIFORM and not self.stator_inner_diameter > self.rotor_outer_diameter:
            raise GeometryError("uniform airgap needs stator_inner_diameter > rotor_outer_diameter")

    @property
    def pole_pairs(self) -> int:
        return self.pole_count // 2

    def tooth_angles(self) -> np.ndarray:
        n = self.slot_count
        return 2.0 * np.pi * np.arange(n) / n

    def tooth_angle(self, tooth: int) -> float:
        """Stator angle of the 1-based ``tooth``."""
        check_tooth(self, tooth)
        return 2.0 * math.pi * (tooth - 1) / self.slot_count

    def tooth_area(self) -> float:
        """Airgap-facing tooth area in mm^2 used by the permeance stand-in."""
        return self.stack_length * self.tooth_span_fraction * math.pi * self.stator_inner_diameter / self.slot_count

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def check_tooth(geometry: Geometry, tooth) -> None:
    if int(tooth) != tooth or not 1 <= tooth <= geometry.slot_count:
        raise GeometryError(f"tooth index must be in 1..{geometry.slot_count}, got {tooth}")


def airgap_length(geometry: Geometry, phi, theta_rotor=0.0):
    """Airgap length at stator angle ``phi`` with the rotor at ``theta_rotor``.

    For the salient rotor the saliency profile turns with the rotor, so the
    profile is evaluated at the rotor-frame angle ``phi - theta_rotor``. The
    result lies in ``[g_min/2, g_max/2]``. Broadcasts over array inputs.
    """
    phi = np.asarray(phi, dtype=float)
    theta_rotor = np.asarray(theta_rotor, dtype=float)
    if geometry.airgap_kind == UNIFORM:
        g0 = 0.5 * (geometry.stator_inner_diameter - geometry.rotor_outer_diameter)
        out = np.full(np.broadcast(phi, theta_rotor).shape, g0)
    else:
        gmin, gmax = geometry.g_min, geometry.g_max
        rotor_frame = phi - theta_rotor
        out = gmin * gmax / ((gmin + gmax) + (gmin - gmax) * np.cos(0.5 * geometry.pole_count * rotor_frame))
    return out[()] if out.ndim == 0 else out


# Case-study resolver. The slot-opening and outer dimensions are kept for
# reference only; the permeance stand-in does not use them.
CASE_STUDY = Geometry(
    slot_count=12,
    g_min=0.5,
    g_max=2.0,
    pole_count=2,
    winding_pole_pairs=5,
    stack_length=6.7,
    stator_inner_diameter=34.13,
)

CASE_STUDY_EXTRAS = {
    "stator_outer_diameter_mm": 45.96,
    "slot_opening_height_mm": 0.2,
    "slot_opening_width_mm": 0.99,
    "shaft_diameter_mm": 10.0,
}
