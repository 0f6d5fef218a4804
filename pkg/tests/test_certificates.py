import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rgflow.certificates import (C_n, C_pq, G_sequence, K_pq, basin_check, check_delta, const_C, const_Cq_embed,
                                 contraction_const, default_delta, delta_interval, eps_local, eps_n, n0_for,
                                 rate_const_M, rho0, rho_guard_default, series_sums)
from rgflow.errors import InvalidDelta, RadiusExceeded
from rgflow.problem import NonlinearitySeries, PerturbedPower, PurePower, make_problem, r_of
from rgflow.rg import fixed_point_image_spectrum, linear_rg_spectrum
from rgflow.spectral import Grid, GridFunction, bq_norm, fixed_point, sample, to_spectrum

G = Grid()
CUBIC = NonlinearitySeries(((3, 1.0),))


def cubic(diffusion=PurePower(1), lam=1.0, nl=CUBIC):
    return make_problem(diffusion, nl, lam)


def test_const_C_values():
    assert const_C(2) == pytest.approx(11 * math.pi, rel=1e-15)
    # (2^5 + 3) int dx/(1 + x^4) by quadrature
    assert const_C(4) == pytest.approx(77.7504514177714, rel=1e-13)
    assert const_Cq_embed(2) == pytest.approx(0.5, rel=1e-15)
    assert const_Cq_embed(3) == pytest.approx(0.3849001794597505, rel=1e-13)
    with pytest.raises(ValueError):
        const_C(1.0)


def test_rho0_conventions():
    assert rho0(cubic()) == 1.0
    assert rho_guard_default(cubic()) == 1.0
    spec = cubic(nl=NonlinearitySeries(((3, 1.0),), radius=11.0))
    assert rho0(spec) == pytest.approx(1.0, rel=1e-15)
    assert rho_guard_default(spec) == pytest.approx(0.5, rel=1e-15)
    assert rho0(spec, 0.25) == 0.25


def test_series_sums_cubic():
    S0, S1, S2 = series_sums(CUBIC, 1.0, 2.0)
    k = 5.5
    assert (S0, S1, S2) == pytest.approx((k ** 2, k ** 2, 3 * k ** 2), rel=1e-15)
    with pytest.raises(RadiusExceeded):
        series_sums(NonlinearitySeries(((3, 1.0),), radius=1.0), 1.0, 2.0)


def test_eps_local_value():
    # 1 / (16 (sqrt(3/2) + 1)^3 * 90.75), evaluated independently
    assert eps_local(cubic(), 2.0) == pytest.approx(6.254502072810316e-05, rel=1e-13)


def test_eps_n_constant_for_pure_power():
    spec = cubic()
    assert eps_n(spec, 2.0, 5) == pytest.approx(eps_local(spec, 2.0), rel=1e-14)
    assert C_n(spec, 2.0, 3) == pytest.approx(C_n(spec, 2.0, 0), rel=1e-14)


def test_contraction_constant_dense_scan():
    C, L1 = contraction_const(1, 2)
    assert C == pytest.approx(142.32836360715953, rel=1e-10)
    assert L1 == pytest.approx(math.sqrt(3), rel=1e-15)


def test_L1_for_perturbed_diffusion():
    # r(L) = (2/3)(L^{3/2} - 1); root of r(L)/L^2 = 1/4 at 30 digits
    _, L1 = contraction_const(1, 2, PerturbedPower(1, 1.0, 0.5))
    assert L1 == pytest.approx(6.2248482413597298706833131857, rel=1e-12)
    assert abs(r_of(PerturbedPower(1, 1.0, 0.5), L1)) / L1 ** 2 == pytest.approx(0.25, rel=1e-9)


def test_n0_by_scan():
    d = PerturbedPower(1, 1.0, 0.5)
    ok = [abs(r_of(d, 2.0 ** n)) / 4.0 ** n < 0.25 for n in range(65)]
    assert ok[:4] == [True, False, False, True] and all(ok[3:])
    assert n0_for(d, 2.0) == 3
    assert n0_for(PurePower(1), 2.0) == 0


def test_rate_constant_and_fixed_point_bounds():
    M, n0fn = rate_const_M(1, 2)
    assert M == pytest.approx(44.379237212553264, rel=1e-10)
    assert n0fn is n0_for
    assert C_pq(1, 2) == pytest.approx(2.6675490784287614, rel=1e-10)
    assert K_pq(1, 2, PurePower(1), 2.0) == pytest.approx(7.488352703862332, rel=1e-10)


def test_rate_bound_holds_beyond_n0():
    d = PerturbedPower(1, 1.0, 0.5)
    spec = cubic(d)
    M, _ = rate_const_M(1, 2)
    fstar = to_spectrum(sample(fixed_point(1), G))
    for n in range(n0_for(d, 2.0), 12):
        img = fixed_point_image_spectrum(1, d, 2.0, n, G)
        lhs = bq_norm(img - fstar, 2)
        assert lhs <= M * abs(r_of(d, 2.0 ** n)) / 4.0 ** n


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(2.0, 8.0))
def test_contraction_estimate_on_zero_mean_data(seed, L):
    spec = cubic()
    C, L1 = contraction_const(1, 2)
    rng = np.random.default_rng(seed)
    x = G.x
    c = rng.uniform(-2, 2)
    s = rng.uniform(0.5, 2)
    v = (x - c) * np.exp(-((x - c) / s) ** 2) + rng.uniform(-1, 1) * np.sin(x) * np.exp(-x ** 2 / 4)
    g = GridFunction(G, v - v.sum() * G.dx * np.exp(-x ** 2 / 2) / math.sqrt(2 * math.pi))
    ratio = bq_norm(linear_rg_spectrum(g, L, 0, spec), 2) / bq_norm(to_spectrum(g), 2)
    assert ratio <= C / L


def test_delta_handling():
    spec = cubic()
    assert delta_interval(spec) == (0.0, 1.0)
    assert default_delta(spec) == 0.5
    with pytest.raises(InvalidDelta):
        check_delta(spec, 1.0)
    crit = make_problem(PurePower(1), NonlinearitySeries(((2, 1.0),)), 1.0)
    with pytest.raises(InvalidDelta):
        default_delta(crit)
    quintic = make_problem(PurePower(1), NonlinearitySeries(((5, 1.0),)), 1.0)
    lo, _ = delta_interval(quintic)
    assert lo == 0.0 and default_delta(quintic) == 0.5


def test_G_sequence_small_and_large_data():
    spec = cubic()
    small = G_sequence(spec, 2.0, 0.5, 0.0, 7.5, n_max=10)
    x = 2.0 ** -0.25
    assert small == pytest.approx([x ** (n + 1) + 7.5 for n in range(10)], rel=1e-14)
    big = G_sequence(spec, 2.0, 0.5, 1.0, 7.5, n_max=40)
    assert len(big) == 40 and math.isinf(big[-1])


def test_basin_bundle_structure(tmp_path):
    spec = cubic()
    f = sample(fixed_point(1, 1e-12), G)
    b = basin_check(f, spec, 2.0)
    assert b.eps_n[0] == b.eps_local
    assert b.K_pq == pytest.approx(7.488352703862332, rel=1e-10)
    assert not b.basin_ok and "L > L_delta" in b.failed()
    d = json.loads(b.to_json(tmp_path / "c.json"))
    assert set(d) >= {"L_delta", "eps_bar", "G", "sigma", "inequalities", "G_n"}
    assert "inequalities:" in b.pretty()
