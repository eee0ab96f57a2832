import math
import warnings

import numpy as np
import pytest

from oracles import fit_amplitude_phase, rl_steady_state
from resolversim.circuit import (
    WAVE_COLUMNS,
    ExcitationSource,
    Timebase,
    check_sampling,
    excitation_voltage,
    induced_voltages,
    read_wave_csv,
    simulate_wave,
    solve_excitation_current,
    write_wave_csv,
)
from resolversim.errors import SamplingError, SingularStepError

# short record: 8 ms is one revolution at this speed
SHORT = dict(duration=0.008, omega=2 * math.pi / 0.008)
# tau = L/R = 50 us, so five carrier periods leave no measurable transient
R_TEST, L_TEST = 20.0, 1e-3


def steady_errors(f_s, substeps, R=R_TEST, L=L_TEST):
    src = ExcitationSource(5.0, 5000.0)
    tb = Timebase(f_s=f_s, **SHORT)
    i = solve_excitation_current(L, R, src, tb, substeps=substeps)
    skip = int(5 * f_s / src.f_e)
    amp, lag = fit_amplitude_phase(tb.times[skip:], i[skip:], src.f_e)
    amp0, lag0 = rl_steady_state(src.v_m, src.f_e, R, L)
    return amp / amp0 - 1, lag / lag0 - 1, amp


def test_excitation_voltage_examples():
    src = ExcitationSource(5.0, 5000.0)
    assert excitation_voltage(0.0, src) == 5.0
    assert abs(excitation_voltage(1 / (4 * 5000.0), src)) < 1e-12 * 5.0
    t = np.arange(161) / 80000.0
    v = excitation_voltage(t, src)
    assert v.max() == pytest.approx(5.0)
    assert np.allclose(v[:16], v[16:32], atol=1e-12)  # 5 kHz period = 16 samples


def test_rl_steady_state_within_tenth_percent():
    da, dp, _ = steady_errors(80000.0, 8)
    assert abs(da) < 1e-3 and abs(dp) < 1e-3


def test_second_order_convergence():
    coarse = steady_errors(80000.0, 8)
    fine = steady_errors(160000.0, 8)
    ratio = abs(coarse[0]) / abs(fine[0])
    assert 3 <= ratio <= 5


def test_richardson_change_small():
    _, _, a1 = steady_errors(80000.0, 8)
    _, _, a2 = steady_errors(160000.0, 8)
    extrapolated = a2 + (a2 - a1) / 3
    assert abs(extrapolated / a1 - 1) < 5e-4


def test_single_step_per_sample_is_too_coarse():
    # documents why the integrator substeps: one trapezoid step per sample
    # at 16 samples per carrier period misses the 0.1 % amplitude target
    da, _, _ = steady_errors(80000.0, 1)
    assert abs(da) > 1e-3


def test_zero_voltage_gives_zero_current():
    tb = Timebase(f_s=80000.0, **SHORT)
    i = solve_excitation_current(1e-3, 2.0, ExcitationSource(0.0, 5000.0), tb)
    assert np.all(i == 0)


def test_current_starts_at_zero_and_is_linear_in_vm():
    tb = Timebase(f_s=80000.0, **SHORT)
    i1 = solve_excitation_current(1e-3, 2.0, ExcitationSource(2.5, 5000.0), tb)
    i2 = solve_excitation_current(1e-3, 2.0, ExcitationSource(5.0, 5000.0), tb)
    assert i1[0] == 0
    assert np.allclose(i2, 2 * i1, rtol=1e-13, atol=1e-16)


def test_nonpositive_inductance_rejected():
    tb = Timebase(f_s=80000.0, **SHORT)
    src = ExcitationSource()
    with pytest.raises(SingularStepError):
        solve_excitation_current(0.0, 2.0, src, tb)
    with pytest.raises(SingularStepError):
        solve_excitation_current(lambda th: 1e-3 * np.cos(th), 2.0, src, tb)


def test_energy_sanity():
    src = ExcitationSource(5.0, 5000.0)
    tb = Timebase(f_s=80000.0, **SHORT)
    i = solve_excitation_current(L_TEST, R_TEST, src, tb)
    per = 16
    sl = slice(5 * per, 5 * per + 30 * per)
    v = excitation_voltage(tb.times, src)
    assert np.mean(v[sl] * i[sl]) >= R_TEST * np.mean(i[sl] ** 2) * (1 - 1e-3)


def test_induced_zero_current():
    tb = Timebase(f_s=80000.0, **SHORT)
    v_s, v_c = induced_voltages(1e-4, 2e-4, np.zeros(tb.n_samples), tb)
    assert np.all(v_s == 0) and np.all(v_c == 0)


def test_induced_constant_l_ratio():
    tb = Timebase(f_s=80000.0, **SHORT)
    i = solve_excitation_current(1e-3, 2.0, ExcitationSource(), tb)
    v_s, v_c = induced_voltages(3e-5, -7e-5, i, tb)
    mask = np.abs(v_c) > 1e-9
    assert np.allclose(v_s[mask] / v_c[mask], 3 / -7, rtol=1e-12)


def test_centred_difference_accuracy():
    tb = Timebase(f_s=80000.0, **SHORT)
    w = 2 * math.pi * 5000.0
    i = np.sin(w * tb.times)
    v_s, _ = induced_voltages(1.0, 1.0, i, tb)
    h = 1 / tb.f_s
    # interior: (sin(w(t+h)) - sin(w(t-h))) / 2h = sin(wh)/h * cos(wt)
    expected = math.sin(w * h) / h * np.cos(w * tb.times)
    assert np.allclose(v_s[1:-1], expected[1:-1], rtol=0, atol=1e-9 * w)


def test_misaligned_lengths_rejected():
    tb = Timebase(f_s=80000.0, **SHORT)
    with pytest.raises(SamplingError):
        induced_voltages(1.0, 1.0, np.zeros(10), tb)
    with pytest.raises(SamplingError):
        induced_voltages(np.ones(5), 1.0, np.zeros(tb.n_samples), tb)


def test_sampling_policy():
    src = ExcitationSource()
    assert check_sampling(Timebase(f_s=80000.0, **SHORT), src) == 16
    with pytest.raises(SamplingError):
        check_sampling(Timebase(f_s=40000.0, **SHORT), src)
    with pytest.raises(SamplingError):
        check_sampling(Timebase(f_s=82000.0, **SHORT), src)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        check_sampling(Timebase(f_s=40000.0, allow_low_fs=True, **SHORT), src)
    assert caught


def test_timebase_validation():
    with pytest.raises(SamplingError):
        Timebase(duration=0.0)
    with pytest.raises(SamplingError):
        Timebase(duration=0.1, omega=50.27)  # shorter than a revolution
    with pytest.raises(SamplingError):
        Timebase(omega=0.0)
    with pytest.raises(SamplingError):
        ExcitationSource(-1.0, 5000.0)


def test_theta_ref_exact_kinematics():
    tb = Timebase(theta0=0.3)
    t = tb.times
    assert np.array_equal(tb.theta(t), 0.3 + 50.27 * t)


def test_wave_deterministic_and_csv_round_trip(tmp_path):
    tb = Timebase(f_s=80000.0, **SHORT)
    th = tb.theta(tb.times)
    args = (1e-3, 1e-4 * np.sin(th), 1e-4 * np.cos(th), 2.0, ExcitationSource(), tb)
    a = simulate_wave(*args)
    b = simulate_wave(*args)
    for x, y in zip(a.columns(), b.columns()):
        assert np.array_equal(x, y)
    assert a.settle_samples == 80
    path = tmp_path / "wave.csv"
    write_wave_csv(a, path)
    assert path.read_text().splitlines()[0] == ",".join(WAVE_COLUMNS)
    back = read_wave_csv(path)
    assert back.f_s == 80000.0
    for x, y in zip(a.columns(), back.columns()):
        assert np.allclose(x, y, rtol=1e-13, atol=0)
