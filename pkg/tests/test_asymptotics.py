import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from rgflow.asymptotics import DecayFit, estimate_A, fit_decay_exponent, log_correction_fit, profile_distance
from rgflow.errors import DegenerateSeries, NonConvergent
from rgflow.problem import NonlinearitySeries, PurePower, make_problem
from rgflow.solver import linear_solve
from rgflow.spectral import Grid, fixed_point, gaussian, sample


def power_series(gamma, c=1.0, t_max=1e4, n=60, noise=0.0, seed=0):
    t = np.geomspace(1, t_max, n)
    rng = np.random.default_rng(seed)
    a = c * t ** (-gamma / 2) * np.exp(noise * rng.standard_normal(n))
    return list(zip(t, a))


def test_exact_power_law():
    fit = fit_decay_exponent(power_series(2.0, 3.0))
    assert fit.gamma_est == pytest.approx(2.0, abs=1e-12)
    assert fit.residual_rms < 1e-12
    assert fit.window[1] == pytest.approx(1e4) and fit.window[0] >= 1e3 * (1 - 1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_fit_invariant_under_amplitude_and_time_scaling(gamma, c, tau):
    series = power_series(gamma)
    base = fit_decay_exponent(series).gamma_est
    scaled = [(t * tau, c * a) for t, a in series]
    assert fit_decay_exponent(scaled).gamma_est == pytest.approx(base, abs=1e-9)


def test_fit_window_and_tuple_input():
    t = np.geomspace(1, 1e4, 81)
    a = np.where(t < 100, t ** -3.0, 1e-6 * (t / 100) ** -0.5 * 1e0)
    fit = fit_decay_exponent((t, a), window=(200, 1e4))
    assert fit.gamma_est == pytest.approx(1.0, abs=1e-10)
    early = fit_decay_exponent((t, a), window=(1, 50))
    assert early.gamma_est == pytest.approx(6.0, abs=1e-10)


def test_fit_noise_gives_stderr():
    fit = fit_decay_exponent(power_series(2.0, noise=0.01, n=400))
    assert abs(fit.gamma_est - 2.0) < 5 * fit.stderr + 1e-3
    assert fit.stderr > 0


def test_fit_rejects_bad_series():
    with pytest.raises(DegenerateSeries):
        fit_decay_exponent(power_series(2.0, n=5))
    with pytest.raises(DegenerateSeries):
        fit_decay_exponent(power_series(2.0, t_max=5.0))
    bad = power_series(2.0)
    bad[3] = (bad[3][0], 0.0)
    with pytest.raises(DegenerateSeries):
        fit_decay_exponent(bad)
    with pytest.raises(DegenerateSeries):
        fit_decay_exponent(np.zeros((10, 3)))


def test_fit_outputs(tmp_path):
    series = power_series(1.5)
    fit = fit_decay_exponent(series)
    assert isinstance(fit, DecayFit)
    fit.to_json(tmp_path / "fit.json")
    assert json.loads((tmp_path / "fit.json").read_text())["gamma_est"] == pytest.approx(1.5)
    fit.plot_csv(series, tmp_path / "fit.csv")
    rows = np.loadtxt(tmp_path / "fit.csv", delimiter=",", skiprows=1)
    np.testing.assert_allclose(rows[:, 1], rows[:, 2], atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(-10, 10), st.floats(1e-3, 10), st.floats(0.05, 0.9), st.sampled_from([-1.0, 1.0]))
def test_aitken_exact_on_geometric_sequence(limit, amp, ratio, sign):
    assume(abs(limit) > 1e-3 or limit == 0)
    seq = [limit + sign * amp * ratio ** n for n in range(6)]
    assume(abs(seq[-1] - seq[-2]) > 1e-10 * max(1.0, abs(limit)))
    assert estimate_A(seq) == pytest.approx(limit, abs=1e-8 * max(1.0, abs(limit)) / (1 - ratio))


def test_aitken_noise_floor_and_divergence():
    assert estimate_A([2.0, 2.0, 2.0]) == 2.0
    with pytest.raises(NonConvergent):
        estimate_A([1.0, 2.0, 4.0])
    with pytest.raises(DegenerateSeries):
        estimate_A([1.0, 2.0])


def test_estimate_A_from_trajectory():
    from rgflow.solver import evolve_long

    spec = make_problem(PurePower(1), NonlinearitySeries(((3, 1.0),)), 0.0)
    traj = evolve_long(sample(gaussian(0.2, 1.0), Grid()), spec, 16.0)
    assert estimate_A(traj) == pytest.approx(0.2 * math.sqrt(2 * math.pi), rel=1e-12)


@pytest.mark.parametrize("t", [4.0, 64.0])
def test_profile_distance_zero_for_heat_flow_of_fixed_point(t):
    # for c = t the heat flow of A f_p* is exactly self-similar
    spec = make_problem(PurePower(1), NonlinearitySeries(((3, 1.0),)), 0.0)
    g = Grid(40 * math.sqrt(t) * 2, 8192)
    u = linear_solve(sample(fixed_point(1, 0.3), g), spec, t)
    assert profile_distance(u, t, 1, 0.3, 2) <= 1e-10
    assert profile_distance(u, t, 1, 0.31, 2) == pytest.approx(0.01 * 2.6675, rel=1e-2)


def test_profile_distance_requires_late_time():
    with pytest.raises(ValueError):
        profile_distance(sample(gaussian(), Grid()), 1.0, 1, 1.0, 2)


def test_log_correction_exact():
    t = np.geomspace(4, 4096, 40)
    a = 0.7 * t ** -1.0 * np.log(t) ** -0.5
    lc = log_correction_fit((t, a), 2.0)
    assert lc.mu == pytest.approx(0.5, abs=1e-12)
    assert lc.stderr < 1e-7
    lc = log_correction_fit((t, a), 2.0, window=(16, 1024))
    assert lc.window[0] >= 16 and lc.window[1] <= 1024


def test_log_correction_rejects_bad_input():
    with pytest.raises(DegenerateSeries):
        log_correction_fit([(1.0, 1.0), (2.0, 0.5), (3.0, 0.3), (4.0, 0.2)], 2.0)
    with pytest.raises(DegenerateSeries):
        log_correction_fit([(2.0, 1.0), (3.0, 0.5)], 2.0)
