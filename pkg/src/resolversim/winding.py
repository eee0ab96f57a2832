"""Per-tooth turn vectors for the excitation, sine and cosine windings.

Turns are signed reals: the sign is the current direction, zero means no coil
on that tooth. Values are not rounded to integers because the overlapping
layout produces irrational turn counts and shorted coils leave fractional
effective turns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WindingError

OVERLAPPING = "overlapping"
NON_OVERLAPPING = "non_overlapping"
WINDING_KINDS = (OVERLAPPING, NON_OVERLAPPING)

# relative threshold below which a sampled sin/cos turn count is snapped to 0
_ZERO_SNAP = 1e-12


def check_turns(turns, n: int | None = None, name: str = "turns") -> np.ndarray:
    turns = np.array(turns, dtype=float)
    if turns.ndim != 1:
        raise WindingError(f"{name} must be one-dimensional")
    if n is not None and turns.size != n:
        raise WindingError(f"{name} has {turns.size} entries, expected {n}")
    if not np.all(np.isfinite(turns)):
        raise WindingError(f"{name} contains non-finite values")
    if not np.any(turns):
        raise WindingError(f"{name} has no coil on any tooth")
    turns.setflags(write=False)
    return turns


@dataclass(frozen=True, eq=False)
class WindingConfig:
    sine: np.ndarray
    cosine: np.ndarray
    excitation: np.ndarray
    R_e: float
    name: str = "custom"

    def __post_init__(self):
        exc = check_turns(self.excitation, name="excitation")
        n = exc.size
        object.__setattr__(self, "excitation", exc)
        object.__setattr__(self, "sine", check_turns(self.sine, n, "sine"))
        object.__setattr__(self, "cosine", check_turns(self.cosine, n, "cosine"))
        if not self.R_e > 0:
            raise WindingError(f"R_e must be positive, got {self.R_e}")

    @property
    def slot_count(self) -> int:
        return self.excitation.size

    def turns(self, target: str) -> np.ndarray:
        try:
            return {"sine": self.sine, "cosine": self.cosine, "excitation": self.excitation}[target]
        except KeyError:
            raise WindingError(f"unknown winding {target!r}") from None

    def replace_turns(self, target: str, turns) -> "WindingConfig":
        kw = {"sine": self.sine, "cosine": self.cosine, "excitation": self.excitation}
        if target not in kw:
            raise WindingError(f"unknown winding {target!r}")
        kw[target] = turns
        return WindingConfig(R_e=self.R_e, name=self.name, **kw)


def admissible_pole_pairs(pole_count: int, slot_count: int) -> list[int]:
    """Winding pole-pair numbers allowed for a rotor with ``pole_count`` poles.

    ``pole_count`` counts poles, so the rotor pole-pair number ``p`` enters the
    admissibility rule ``P_w in {p, (N - 2p)/2, (N + 2p)/2}``.
    """
    p = pole_count // 2
    candidates = [2 * p, slot_count - 2 * p, slot_count + 2 * p]
    return sorted({c // 2 for c in candidates if c % 2 == 0 and c > 0})


def validate_winding(pole_count: int, winding_pole_pairs: int, slot_count: int) -> str | None:
    """Return ``None`` if the pole-pair choice is admissible, else a diagnostic."""
    allowed = admissible_pole_pairs(pole_count, slot_count)
    if winding_pole_pairs in allowed:
        return None
    return (
        f"P_w = {winding_pole_pairs} is not admissible for P = {pole_count}, N = {slot_count}; "
        f"admissible values: {allowed}"
    )


def overlapping_signal_turns(T_s: float, P_w: int, N: int, pole_count: int | None = None):
    """Sine and cosine turn vectors of the distributed (overlapping) winding.

    Returns ``(sine, cosine)`` with ``T_s*sin(2*pi*P_w*(i-1)/N)`` and the
    matching cosine for teeth ``i = 1..N``. When ``pole_count`` is given the
    pole-pair choice is checked first.
    """
    if N < 4:
        raise WindingError(f"need at least 4 teeth, got {N}")
    if not T_s > 0:
        raise WindingError(f"T_s must be positive, got {T_s}")
    if pole_count is not None:
        diag = validate_winding(pole_count, P_w, N)
        if diag:
            raise WindingError(diag)
    # reduce the argument exactly before scaling by 2*pi
    frac = (P_w * np.arange(N)) % N / N
    sine = T_s * np.sin(2 * np.pi * frac)
    cosine = T_s * np.cos(2 * np.pi * frac)
    sine[np.abs(sine) < _ZERO_SNAP * T_s] = 0.0
    cosine[np.abs(cosine) < _ZERO_SNAP * T_s] = 0.0
    return sine, cosine


def alternating_excitation_turns(T_e: float, N: int) -> np.ndarray:
    if N % 2:
        raise WindingError(f"alternating excitation needs an even tooth count, got N = {N}")
    if not T_e > 0:
        raise WindingError(f"T_e must be positive, got {T_e}")
    out = np.full(N, float(T_e))
    out[1::2] = -T_e
    return out


NON_OVERLAPPING_TEETH = {
    "excitation": (1, 4, 7, 10),
    "sine": (2, 6, 8, 12),
    "cosine": (3, 5, 9, 11),
}
# Polarity per coil in tooth order. The excitation coils share one polarity;
# the signal patterns pick up the first spatial harmonic in quadrature.
NON_OVERLAPPING_SIGNS = {
    "excitation": (1, 1, 1, 1),
    "sine": (1, 1, -1, -1),
    "cosine": (1, -1, -1, 1),
}


def non_overlapping_preset(T_s: float, T_e: float, N: int = 12, R_e: float = 2.0) -> WindingConfig:
    """Tooth-coil layout of the 12-slot case study: one winding per tooth."""
    if N != 12:
        raise WindingError(f"non-overlapping preset is defined for N = 12 only, got {N}")
    vectors = {}
    for name, teeth in NON_OVERLAPPING_TEETH.items():
        magnitude = T_e if name == "excitation" else T_s
        v = np.zeros(N)
        for tooth, sign in zip(teeth, NON_OVERLAPPING_SIGNS[name]):
            v[tooth - 1] = sign * magnitude
        vectors[name] = v
    return WindingConfig(R_e=R_e, name=NON_OVERLAPPING, **vectors)


def overlapping_preset(T_s: float, T_e: float, P_w: int, N: int, R_e: float = 2.0,
                       pole_count: int | None = None) -> WindingConfig:
    sine, cosine = overlapping_signal_turns(T_s, P_w, N, pole_count)
    return WindingConfig(sine, cosine, alternating_excitation_turns(T_e, N), R_e, OVERLAPPING)


def build_winding(kind: str, T_s: float, T_e: float, P_w: int, R_e: float, N: int,
                  pole_count: int | None = None) -> WindingConfig:
    if kind == OVERLAPPING:
        return overlapping_preset(T_s, T_e, P_w, N, R_e, pole_count)
    if kind == NON_OVERLAPPING:
        return non_overlapping_preset(T_s, T_e, N, R_e)
    raise WindingError(f"winding kind must be one of {WINDING_KINDS}, got {kind!r}")
