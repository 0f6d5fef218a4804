import math

import numpy as np
import pytest

from rgflow.errors import NoContraction, RadiusExceeded
from rgflow.problem import NonlinearitySeries, PerturbedPower, PurePower, make_problem
from rgflow.solver import (SolverConfig, Trajectory, etd_evolve, evolve_long, linear_solve, oracle_solve,
                           picard_solve, time_nodes)
from rgflow.spectral import Grid, bq_norm, fixed_point, gaussian, sample, to_spectrum

G = Grid()
CUBIC = NonlinearitySeries(((3, 1.0),))


def cubic(lam=1.0, diffusion=PurePower(1)):
    return make_problem(diffusion, CUBIC, lam)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(substeps=4)
    with pytest.raises(ValueError):
        SolverConfig(picard_tol=-1)
    with pytest.raises(ValueError):
        SolverConfig(rho_guard=0.0)


def test_time_nodes():
    t = time_nodes(1.0, 2.0, 4)
    np.testing.assert_allclose(t, [1, 1.25, 1.5, 1.75, 2])
    t = time_nodes(1.0, 16.0, 4)
    np.testing.assert_allclose(t, [1, 2, 4, 8, 16], rtol=1e-15)
    assert t[-1] == 16.0


def test_linear_solve_gaussian_closed_form():
    # exp(-x^2/2) under c = t: variance 1 + 2 s(t), s(3) = 4
    u = linear_solve(sample(gaussian(1.0, 1.0), G), cubic(), 3.0)
    x = G.x
    exact = np.exp(-x ** 2 / 18) / 3
    assert np.abs(u.values - exact).max() <= 1e-13


def test_picard_without_nonlinearity_is_linear():
    spec = cubic(0.0)
    f = sample(fixed_point(1, 0.3), G)
    traj = picard_solve(f, spec, 2.0)
    assert traj.info["iterations"] == 1
    assert np.abs(traj.final.values - linear_solve(f, spec, 2.0).values).max() <= 1e-15


def test_picard_converges_quickly_for_small_data():
    traj = picard_solve(sample(fixed_point(1, 0.01), G), cubic(), 2.0)
    r = traj.info["residuals"]
    assert traj.info["iterations"] <= 3
    assert r[-1] <= 1e-10
    assert all(b < a for a, b in zip(r, r[1:]))


@pytest.mark.parametrize("lam", [1.0, -1.0])
def test_picard_matches_etd(lam):
    spec = cubic(lam)
    f = sample(gaussian(0.1, 1.0), G)
    cfg = SolverConfig(substeps=64)
    a = picard_solve(f, spec, 2.0, cfg).final
    b = etd_evolve(f, spec, 1.0, 2.0, SolverConfig(substeps=4096)).final
    assert np.abs(a.values - b.values).max() <= 1e-7


def test_picard_semigroup_in_time():
    spec = cubic(1.0, PerturbedPower(1, 0.5, 2.0))
    f = sample(gaussian(0.05, 1.2, 0.3), G)
    whole = picard_solve(f, spec, 2.0).final
    half = picard_solve(f, spec, 1.5).final
    rest = picard_solve(half, spec, 2.0, t0=1.5).final
    assert bq_norm(to_spectrum(whole - rest), 2) <= 1e-8


def test_radius_guard():
    spec = cubic()
    with pytest.raises(RadiusExceeded):
        picard_solve(sample(gaussian(2.0, 1.0), G), spec, 2.0)
    with pytest.raises(RadiusExceeded):
        etd_evolve(sample(gaussian(0.5, 1.0), G), spec, 1.0, 2.0, SolverConfig(rho_guard=0.4))


def test_no_contraction_reported():
    cfg = SolverConfig(picard_tol=0.0, picard_max_iters=1)
    with pytest.raises(NoContraction):
        picard_solve(sample(gaussian(0.1, 1.0), G), cubic(), 2.0, cfg)


def test_etd_heat_mass_and_growth():
    spec = cubic(0.0)
    f = sample(fixed_point(1, 1.0), Grid(20, 1024))
    traj = etd_evolve(f, spec, 1.0, 64.0, grow_domain=True)
    assert traj.info["regrids"]
    assert traj.final.grid.X > 20
    np.testing.assert_allclose(traj.mass, 1.0, rtol=1e-12)
    # closed form: unit-mass Gaussian with variance 2/(p+1) + 2 s(t)
    var = 1.0 + 2 * (64 ** 2 - 1) / 2
    x = traj.final.grid.x
    exact = np.exp(-x ** 2 / (2 * var)) / math.sqrt(2 * math.pi * var)
    assert np.abs(traj.final.values - exact).max() <= 1e-12


def test_evolve_long_records_per_doubling():
    spec = cubic(-1.0)
    traj = evolve_long(sample(gaussian(0.05, 1.0), G), spec, 16.0, SolverConfig(substeps=16))
    assert traj.times[0] == 1.0 and traj.times[-1] == 16.0
    assert len(traj.times) == 4 * 4 + 1
    assert np.all(np.diff(traj.sup_abs) < 0)


def test_oracle_agrees_with_etd():
    spec = cubic(-1.0)
    prof = gaussian(0.05, 1.0)
    ref = oracle_solve(prof, spec, 2.0, Grid(40, 8192))
    etd = etd_evolve(sample(prof, G), spec, 1.0, 2.0, SolverConfig(substeps=512)).final
    assert np.abs(ref.values[::2] - etd.values).max() <= 1e-5


def test_oracle_from_gridfunction_resamples():
    spec = cubic(0.0)
    f = sample(gaussian(0.5, 1.0), G)
    u = oracle_solve(f, spec, 1.5, Grid(40, 8192))
    exact = 0.5 * np.exp(-u.grid.x ** 2 / (2 * (1 + 2 * 0.625))) / math.sqrt(1 + 2 * 0.625)
    assert np.abs(u.values - exact).max() <= 1e-5
    with pytest.raises(ValueError):
        oracle_solve(f, spec, 1.5, Grid(20, 8192))


def test_trajectory_outputs(tmp_path):
    traj = picard_solve(sample(gaussian(0.01, 1.0), G), cubic(), 2.0)
    assert isinstance(traj, Trajectory)
    assert traj.sup_norm_L() == traj.bq.max()
    traj.to_csv(tmp_path / "t.csv")
    data = np.loadtxt(tmp_path / "t.csv", delimiter=",", skiprows=1)
    assert data.shape == (len(traj.times), 4)
    traj.dump_profiles(tmp_path / "prof", every=8)
    assert len(list((tmp_path / "prof").iterdir())) == len(range(0, len(traj.times), 8))


def test_oracle_heat_mass_drift():
    spec = cubic(0.0)
    f = sample(gaussian(0.5, 1.0), G)
    u = oracle_solve(f, spec, 4.0)
    assert abs(u.mass - f.mass) <= 1e-8
