"""Scenario configuration files: dotted ``key = value`` lines.

Everything except faults is a flat key. Faults are repeatable blocks: each
``fault.kind`` line opens a new block and the following ``fault.*`` lines
belong to it. Overrides address blocks as ``fault.<n>.<key>`` (1-based);
the plain ``fault.<key>`` form targets block 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .basis import DEFAULT_SAMPLES_PER_REV
from .circuit import DEFAULT_SETTLE_PERIODS, DEFAULT_SUBSTEPS, ExcitationSource, Timebase
from .errors import ConfigError
from .faults import FAULT_KINDS, NONE, FaultSpec
from .geometry import Geometry
from .winding import WINDING_KINDS, WindingConfig, build_winding


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def _choice(*options):
    def parse(text: str) -> str:
        text = text.strip()
        if text not in options:
            raise ValueError(f"expected one of {options}, got {text!r}")
        return text
    return parse


def _str(text: str) -> str:
    text = text.strip()
    if not text:
        raise ValueError("empty value")
    return text


def _opt_float(text: str):
    text = text.strip()
    return None if text.lower() in ("auto", "none", "") else float(text)


BASIS_SOURCES = ("synthetic", "file", "ideal")
INTERP_MODES = ("fourier", "linear")

# key -> (parser, default); emission follows this order
SCHEMA = {
    "scenario_id": (_str, "scenario"),
    "output.dir": (_str, "out"),
    "basis.source": (_choice(*BASIS_SOURCES), "synthetic"),
    "basis.path": (_str, "basis.txt"),
    "basis.samples_per_rev": (_int, DEFAULT_SAMPLES_PER_REV),
    "geometry.slot_count": (_int, 12),
    "geometry.g_min_mm": (float, 0.5),
    "geometry.g_max_mm": (float, 2.0),
    "geometry.pole_count": (_int, 2),
    "geometry.stack_length_mm": (float, 6.7),
    "geometry.stator_inner_diameter_mm": (float, 34.13),
    "geometry.rotor_outer_diameter_mm": (float, 0.0),
    "geometry.tooth_span_fraction": (float, 0.5),
    "geometry.airgap_kind": (_choice("sinusoidal_salient", "uniform"), "sinusoidal_salient"),
    "winding.kind": (_choice(*WINDING_KINDS), "overlapping"),
    "winding.T_s": (float, 70.0),
    "winding.T_e": (float, 30.0),
    "winding.P_w": (_int, 5),
    "winding.R_e_ohm": (float, 2.0),
    "source.v_m_V": (float, 5.0),
    "source.f_e_Hz": (float, 5000.0),
    "timebase.f_s_Hz": (float, 80000.0),
    "timebase.duration_s": (float, 0.125),
    "timebase.omega_rad_s": (float, 50.27),
    "timebase.theta0_rad": (float, 0.0),
    "timebase.allow_low_fs": (_bool, False),
    "model.n_max": (_int, 500),
    "model.interp": (_choice(*INTERP_MODES), "fourier"),
    "model.substeps": (_int, DEFAULT_SUBSTEPS),
    "model.settle_periods": (_int, DEFAULT_SETTLE_PERIODS),
    "ideal.L0_H": (float, 1e-4),
    "ideal.L_ee_H": (float, 1.38e-3),
}

FAULT_SCHEMA = {
    "kind": (_choice(*FAULT_KINDS, NONE), NONE),
    "tooth": (_int, 1),
    "winding": (_choice("sine", "cosine"), "sine"),
    "turns": (float, 0.0),
    "R_sc_ohm": (float, 0.0),
    "e_mm": (float, 0.0),
    "theta_ecc_rad": (_opt_float, None),
    "e_d_mm": (float, 0.0),
}


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "auto"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def _parse_value(schema, key, text, where=""):
    parser = schema[key][0]
    try:
        return parser(text)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}{key}: {exc}") from None


def _new_fault() -> dict:
    return {k: default for k, (_, default) in FAULT_SCHEMA.items()}


@dataclass
class ScenarioConfig:
    values: dict = field(default_factory=lambda: {k: d for k, (_, d) in SCHEMA.items()})
    faults: list = field(default_factory=list)

    # --- text form ---------------------------------------------------------

    @classmethod
    def parse(cls, text: str, source: str = "<config>") -> "ScenarioConfig":
        cfg = cls()
        seen = set()
        block_keys = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            where = f"{source}:{lineno}: "
            if "=" not in line:
                raise ConfigError(f"{where}expected 'key = value', got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key.startswith("fault."):
                sub = key[len("fault."):]
                if sub not in FAULT_SCHEMA:
                    raise ConfigError(f"{where}unknown fault key {key!r}")
                if sub == "kind":
                    cfg.faults.append(_new_fault())
                    block_keys = set()
                elif block_keys is None:
                    raise ConfigError(f"{where}{key} appears before any fault.kind")
                if sub in block_keys:
                    raise ConfigError(f"{where}duplicate {key} in one fault block")
                block_keys.add(sub)
                cfg.faults[-1][sub] = _parse_value(FAULT_SCHEMA, sub, value, where)
            else:
                if key not in SCHEMA:
                    raise ConfigError(f"{where}unknown key {key!r}")
                if key in seen:
                    raise ConfigError(f"{where}duplicate key {key!r}")
                seen.add(key)
                cfg.values[key] = _parse_value(SCHEMA, key, value, where)
        return cfg

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.parse(text, str(path))

    def emit(self) -> str:
        lines = [f"{k} = {format_value(self.values[k])}" for k in SCHEMA]
        for block in self.faults:
            lines.append("")
            lines.extend(f"fault.{k} = {format_value(block[k])}" for k in FAULT_SCHEMA)
        return "\n".join(lines) + "\n"

    def copy(self) -> "ScenarioConfig":
        return ScenarioConfig(dict(self.values), [dict(b) for b in self.faults])

    def __getitem__(self, key):
        return self.values[key]

    @property
    def scenario_id(self) -> str:
        return self.values["scenario_id"]

    # --- overrides ---------------------------------------------------------

    def set(self, key: str, text: str) -> None:
        """Set one key from its text form; fault keys may carry a block index."""
        key = key.strip()
        if key.startswith("fault."):
            parts = key.split(".")
            if len(parts) == 3:
                try:
                    index = int(parts[1])
                except ValueError:
                    raise ConfigError(f"bad fault block index in {key!r}") from None
                sub = parts[2]
            elif len(parts) == 2:
                index, sub = 1, parts[1]
            else:
                raise ConfigError(f"malformed fault key {key!r}")
            if sub not in FAULT_SCHEMA:
                raise ConfigError(f"unknown fault key {key!r}")
            if index < 1 or index > len(self.faults) + 1:
                raise ConfigError(f"fault block {index} does not exist (have {len(self.faults)})")
            if index == len(self.faults) + 1:
                self.faults.append(_new_fault())
            self.faults[index - 1][sub] = _parse_value(FAULT_SCHEMA, sub, text)
            return
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}")
        self.values[key] = _parse_value(SCHEMA, key, text)

    def with_overrides(self, overrides) -> "ScenarioConfig":
        cfg = self.copy()
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override must be key=value, got {item!r}")
            key, value = item.split("=", 1)
            cfg.set(key, value)
        return cfg

    # --- typed views -------------------------------------------------------

    def geometry(self) -> Geometry:
        v = self.values
        return Geometry(
            slot_count=v["geometry.slot_count"],
            g_min=v["geometry.g_min_mm"],
            g_max=v["geometry.g_max_mm"],
            pole_count=v["geometry.pole_count"],
            winding_pole_pairs=v["winding.P_w"],
            stack_length=v["geometry.stack_length_mm"],
            stator_inner_diameter=v["geometry.stator_inner_diameter_mm"],
            rotor_outer_diameter=v["geometry.rotor_outer_diameter_mm"],
            tooth_span_fraction=v["geometry.tooth_span_fraction"],
            airgap_kind=v["geometry.airgap_kind"],
        )

    def winding(self, slot_count: int | None = None) -> WindingConfig:
        v = self.values
        return build_winding(
            v["winding.kind"], v["winding.T_s"], v["winding.T_e"], v["winding.P_w"], v["winding.R_e_ohm"],
            slot_count or v["geometry.slot_count"], v["geometry.pole_count"],
        )

    def fault_specs(self) -> tuple:
        specs = []
        for block in self.faults:
            specs.append(FaultSpec(
                kind=block["kind"],
                tooth=block["tooth"],
                winding=block["winding"],
                turns=block["turns"],
                R_sc=block["R_sc_ohm"],
                e=block["e_mm"],
                theta_ecc=block["theta_ecc_rad"],
                e_d=block["e_d_mm"],
            ))
        return tuple(specs)

    def source(self) -> ExcitationSource:
        return ExcitationSource(self.values["source.v_m_V"], self.values["source.f_e_Hz"])

    def timebase(self) -> Timebase:
        v = self.values
        return Timebase(
            f_s=v["timebase.f_s_Hz"],
            duration=v["timebase.duration_s"],
            omega=v["timebase.omega_rad_s"],
            theta0=v["timebase.theta0_rad"],
            allow_low_fs=v["timebase.allow_low_fs"],
        )
