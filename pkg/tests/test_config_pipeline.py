import csv
import math

import pytest
from hypothesis import given, settings, strategies as st

from resolversim.cli import EXIT_INVALID, EXIT_OK, EXIT_PARTIAL, main
from resolversim.config import SCHEMA, ScenarioConfig
from resolversim.errors import ConfigError, ScenarioError
from resolversim.pipeline import read_metrics_file, recompute_metrics, run_scenario
from resolversim.sweep import SweepSpec, run_sweep

# one revolution in 25 ms keeps synthetic runs short
FAST = ["timebase.omega_rad_s=251.32741228718345", "timebase.duration_s=0.0251"]


def fast_config(*extra):
    return ScenarioConfig().with_overrides(FAST + list(extra))


# --- config text ---------------------------------------------------------------

def test_default_emit_round_trip():
    text = ScenarioConfig().emit()
    assert ScenarioConfig.parse(text).emit() == text


def test_round_trip_with_faults():
    cfg = ScenarioConfig.parse(
        "scenario_id = x\n"
        "fault.kind = signal_short\nfault.tooth = 9\nfault.turns = 21\n"
        "fault.kind = static_ecc  # second block\nfault.e_mm = 0.1\n"
    )
    assert [b["kind"] for b in cfg.faults] == ["signal_short", "static_ecc"]
    text = cfg.emit()
    again = ScenarioConfig.parse(text)
    assert again.emit() == text
    assert again.faults == cfg.faults


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 1e3, allow_nan=False), st.integers(1, 12), st.sampled_from(["sine", "cosine"]))
def test_round_trip_property(turns, tooth, winding):
    cfg = ScenarioConfig().with_overrides([
        "fault.kind=signal_short", f"fault.turns={turns!r}", f"fault.tooth={tooth}",
        f"fault.winding={winding}", f"source.v_m_V={turns!r}",
    ])
    text = cfg.emit()
    assert ScenarioConfig.parse(text).emit() == text


def test_overrides_and_fault_blocks():
    cfg = ScenarioConfig().with_overrides([
        "fault.1.kind=static_ecc", "fault.1.e_mm=0.1", "fault.2.kind=dynamic_ecc", "fault.e_mm=0.2",
        "timebase.allow_low_fs=yes",
    ])
    assert cfg.faults[0]["e_mm"] == 0.2
    assert cfg.faults[1]["kind"] == "dynamic_ecc"
    assert cfg["timebase.allow_low_fs"] is True
    with pytest.raises(ConfigError):
        cfg.with_overrides(["fault.4.kind=static_ecc"])
    with pytest.raises(ConfigError):
        cfg.with_overrides(["nonsense.key=1"])
    with pytest.raises(ConfigError):
        cfg.with_overrides(["source.v_m_V"])


@pytest.mark.parametrize("text", [
    "bogus = 1\n",
    "source.v_m_V = 1\nsource.v_m_V = 2\n",
    "fault.tooth = 3\n",
    "fault.kind = static_ecc\nfault.e_mm = 1\nfault.e_mm = 2\n",
    "fault.kind = meteor\n",
    "geometry.slot_count = 12.5\n",
    "winding.kind = spiral\n",
    "just words\n",
])
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        ScenarioConfig.parse(text)


def test_schema_defaults_cover_fixture():
    assert SCHEMA["winding.T_s"][1] == 70.0 and SCHEMA["winding.T_e"][1] == 30.0
    assert SCHEMA["timebase.f_s_Hz"][1] == 16 * SCHEMA["source.f_e_Hz"][1]


# --- single scenarios ----------------------------------------------------------

def test_ideal_scenario_writes_files(tmp_path):
    cfg = ScenarioConfig().with_overrides(["basis.source=ideal", "scenario_id=ideal"])
    res = run_scenario(cfg, tmp_path)
    assert res.metrics.aape < 0.01
    assert set(res.paths) == {"wave", "metrics", "profiles", "config"}
    meta = read_metrics_file(res.paths["metrics"])
    assert meta["scenario_id"] == "ideal" and meta["fault_labels"] == "healthy"
    assert float(meta["aape_deg"]) == res.metrics.aape
    assert ScenarioConfig.load(res.paths["config"]).emit() == cfg.emit()
    header = res.paths["profiles"].read_text().splitlines()[0]
    assert header == "theta_rad,L_ee_H,L_se_H,L_ce_H"


def test_healthy_vs_static_ecc_ordering():
    healthy = run_scenario(fast_config(), write=False)
    faulty = run_scenario(fast_config("fault.kind=static_ecc", "fault.tooth=7", "fault.e_mm=0.1"), write=False)
    assert faulty.metrics.aape > healthy.metrics.aape
    assert faulty.fault_labels == ("fault3",)


def test_zero_duration_writes_nothing(tmp_path):
    cfg = ScenarioConfig().with_overrides(["timebase.duration_s=0", "scenario_id=bad"])
    with pytest.raises(ScenarioError) as info:
        run_scenario(cfg, tmp_path)
    assert "bad" in str(info.value)
    assert not any(tmp_path.iterdir())


def test_ideal_mode_rejects_faults():
    cfg = ScenarioConfig().with_overrides(["basis.source=ideal", "fault.kind=static_ecc", "fault.e_mm=0.1"])
    with pytest.raises(ScenarioError):
        run_scenario(cfg, write=False)


def test_missing_basis_file(tmp_path):
    cfg = ScenarioConfig().with_overrides(["basis.source=file", f"basis.path={tmp_path / 'nope.txt'}"])
    with pytest.raises(ScenarioError):
        run_scenario(cfg, write=False)


def test_deterministic_outputs(tmp_path):
    cfg = fast_config("fault.kind=signal_short", "fault.tooth=9", "fault.turns=21", "scenario_id=det")
    a = run_scenario(cfg, tmp_path / "a")
    b = run_scenario(cfg, tmp_path / "b")
    for key in a.paths:
        assert a.paths[key].read_bytes() == b.paths[key].read_bytes()


def test_recompute_matches_run(tmp_path):
    cfg = fast_config("fault.kind=signal_short", "fault.tooth=9", "fault.turns=21")
    res = run_scenario(cfg, tmp_path)
    from_sidecar, _ = recompute_metrics(res.paths["wave"])
    from_config, _ = recompute_metrics(res.paths["wave"], cfg)
    for m in (from_sidecar, from_config):
        assert m.n_samples == res.metrics.n_samples
        assert math.isclose(m.aape, res.metrics.aape, rel_tol=1e-9)
        assert math.isclose(m.mpe, res.metrics.mpe, rel_tol=1e-9)


# --- sweeps --------------------------------------------------------------------

def write_sweep(tmp_path, body, base=None):
    (tmp_path / "base.cfg").write_text((base or fast_config()).emit())
    path = tmp_path / "sweep.txt"
    path.write_text("base = base.cfg\n" + body)
    return path


def read_manifest(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_sweep_empty_axes_single_row(tmp_path):
    spec = SweepSpec.load(write_sweep(tmp_path, "", ScenarioConfig().with_overrides(["basis.source=ideal"])))
    manifest, rows = run_sweep(spec, tmp_path / "out")
    listed = read_manifest(manifest)
    assert len(listed) == 1 and listed[0]["status"] == "ok"
    assert (tmp_path / "out" / listed[0]["wave_path"]).exists()


def test_sweep_static_ecc_axis_increasing(tmp_path):
    base = fast_config("fault.kind=static_ecc", "fault.tooth=7")
    spec = SweepSpec.load(write_sweep(tmp_path, "axis.fault.e_mm = 0, 0.05, 0.1, 0.15\n", base))
    manifest, _ = run_sweep(spec, tmp_path / "out")
    rows = read_manifest(manifest)
    assert [r["fault.e_mm"] for r in rows] == ["0", "0.05", "0.1", "0.15"]
    aape = [float(r["aape_deg"]) for r in rows]
    assert all(b > a for a, b in zip(aape, aape[1:]))


def test_sweep_cases_outermost_and_ids(tmp_path):
    spec = SweepSpec.parse(
        "base = base.cfg\nid_prefix = ds\ncase.a =\ncase.b = source.v_m_V=2\naxis.source.f_e_Hz = 5000, 2500\n",
        base_dir=_base_dir(tmp_path),
    )
    listed = list(spec.expand())
    assert [sid for sid, _, _ in listed] == ["ds_0000", "ds_0001", "ds_0002", "ds_0003"]
    assert [c["case"] for _, c, _ in listed] == ["a", "a", "b", "b"]
    assert listed[3][2]["source.v_m_V"] == 2.0 and listed[3][2]["source.f_e_Hz"] == 2500.0


def _base_dir(tmp_path):
    (tmp_path / "base.cfg").write_text(ScenarioConfig().emit())
    return tmp_path


def test_sweep_cap(tmp_path):
    spec = SweepSpec.parse("base = base.cfg\nmax_scenarios = 3\naxis.source.v_m_V = 1, 2, 3, 4\n",
                           base_dir=_base_dir(tmp_path))
    with pytest.raises(ConfigError):
        run_sweep(spec, tmp_path / "out")
    assert not (tmp_path / "out").exists()


@pytest.mark.parametrize("text", [
    "axis.x = 1\n",
    "base = base.cfg\naxis.source.v_m_V =\n",
    "base = base.cfg\nfrobnicate = 1\n",
    "base = base.cfg\ncase.a =\ncase.a =\n",
])
def test_sweep_parse_errors(tmp_path, text):
    with pytest.raises(ConfigError):
        SweepSpec.parse(text, base_dir=_base_dir(tmp_path))


def test_sweep_partial_failure(tmp_path, capsys):
    base = ScenarioConfig().with_overrides(["basis.source=ideal"])
    path = write_sweep(tmp_path, "axis.timebase.duration_s = 0.125, 0\n", base)
    code = main(["sweep", "--config", str(path), "--out", str(tmp_path / "out")])
    assert code == EXIT_PARTIAL
    rows = read_manifest(tmp_path / "out" / "manifest.csv")
    assert [r["status"] for r in rows] == ["ok", "error"]
    assert rows[1]["error"] and rows[1]["aape_deg"] == ""
    assert "error" not in rows[0]["error"]


# --- CLI -----------------------------------------------------------------------

def test_cli_gen_basis_then_file_run(tmp_path, capsys):
    basis = tmp_path / "b" / "basis.txt"
    assert main(["gen-basis", "--out", str(basis), "--samples-per-rev", "400"]) == EXIT_OK
    cfg = tmp_path / "run.cfg"
    cfg.write_text(fast_config("basis.source=file", f"basis.path={basis}", "model.n_max=100",
                               "scenario_id=fromfile").emit())
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")]) == EXIT_OK
    assert "fromfile: aape_deg" in capsys.readouterr().out
    wave = tmp_path / "out" / "fromfile" / "wave.csv"
    metrics_out = tmp_path / "m.txt"
    assert main(["metrics", "--wave", str(wave), "--out", str(metrics_out)]) == EXIT_OK
    recomputed = read_metrics_file(metrics_out)
    stored = read_metrics_file(wave.parent / "metrics.txt")
    assert math.isclose(float(recomputed["aape_deg"]), float(stored["aape_deg"]), rel_tol=1e-9)


def test_cli_invalid_config_exit_code(tmp_path, capsys):
    assert main(["run", "--override", "timebase.duration_s=0", "--out", str(tmp_path)]) == EXIT_INVALID
    assert "error" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == EXIT_INVALID


def test_cli_low_fs_flag(tmp_path):
    args = ["run", "--override", "basis.source=ideal", "--override", "timebase.f_s_Hz=40000",
            "--out", str(tmp_path)]
    assert main(args) == EXIT_INVALID
    with pytest.warns(RuntimeWarning):
        assert main(args + ["--allow-low-fs"]) == EXIT_OK
