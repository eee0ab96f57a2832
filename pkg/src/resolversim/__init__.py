"""Resolver simulation from single-turn basis inductances, with fault injection and dataset generation."""

from .assembly import (
    FourierSeries,
    InductanceProfile,
    assemble_mutual,
    assemble_self_excitation,
    evaluate_fourier,
    fit_fourier,
)
from .basis import BasisSet, generate_synthetic_basis, load_basis, save_basis
from .circuit import ExcitationSource, Timebase, WaveRecord, simulate_wave, solve_excitation_current
from .config import ScenarioConfig
from .demod import PositionMetrics, demodulate, estimate_angle, mae, position_metrics
from .faults import FaultSpec, apply_faults
from .geometry import CASE_STUDY, Geometry, airgap_length
from .pipeline import ScenarioResult, run_scenario
from .sweep import SweepSpec, run_sweep
from .winding import WindingConfig, build_winding

__version__ = "0.1.0"

__all__ = [
    "BasisSet", "ExcitationSource", "FaultSpec", "FourierSeries", "Geometry", "InductanceProfile",
    "PositionMetrics", "ScenarioConfig", "ScenarioResult", "SweepSpec", "CASE_STUDY", "Timebase",
    "WaveRecord", "WindingConfig", "airgap_length", "apply_faults", "assemble_mutual",
    "assemble_self_excitation", "build_winding", "demodulate", "estimate_angle", "evaluate_fourier",
    "fit_fourier", "generate_synthetic_basis", "load_basis", "mae", "position_metrics", "run_scenario",
    "run_sweep", "save_basis", "simulate_wave", "solve_excitation_current",
]
