import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cauchy_pdf, cauchy_pdf_prime, stable_deriv_mp, stable_tail_coefficient
from stable_debruijn.specfun import global_deriv_bound
from stable_debruijn.stable_core import (ConvergenceError, QuadratureConfig, StableModel,
                                         dispersion_deriv, max_density, scaled_pdf, series_plan,
                                         stable_pdf, stable_pdf_deriv, stable_pdf_info,
                                         stable_tail_mass, tail_asymptote, total_mass)

ALPHAS = (0.5, 0.8, 1.0, 1.2, 1.5, 1.9)
NO_FAST = QuadratureConfig(cauchy_fast_path=False)
DIRECT = QuadratureConfig(core_table=False)


def test_model_validation():
    for alpha, eta in [(0.0, 1.0), (2.0, 1.0), (1.0, 0.0), (1.0, -1.0), (math.nan, 1.0)]:
        with pytest.raises(ValueError):
            StableModel(alpha, eta)
    assert StableModel(0.5, 4.0).scale == pytest.approx(16.0)


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(max_panels=8)
    with pytest.raises(ValueError):
        QuadratureConfig(tail_switch_radius=-1.0)


@pytest.mark.parametrize("cfg", [None, NO_FAST])
def test_cauchy_values(cfg):
    assert stable_pdf(1.0, 0.0, cfg) == pytest.approx(0.3183098862, abs=1e-10)
    assert stable_pdf(1.0, 1.0, cfg) == pytest.approx(0.1591549431, abs=1e-10)
    assert stable_pdf_deriv(1.0, 1, 0.0, cfg) == pytest.approx(0.0, abs=1e-12)
    assert stable_pdf_deriv(1.0, 1, 1.0, cfg) == pytest.approx(-0.1591549431, abs=1e-10)


def test_general_path_matches_cauchy_closed_form_on_grid():
    u = np.round(np.arange(-5000, 5001) * 0.01, 12)
    got = stable_pdf(1.0, u, NO_FAST)
    assert np.max(np.abs(got - cauchy_pdf(u))) <= 1e-12
    got1 = stable_pdf_deriv(1.0, 1, u, NO_FAST)
    assert np.max(np.abs(got1 - cauchy_pdf_prime(u))) <= 1e-12


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_against_contour_oracle(alpha, n):
    cfg = NO_FAST if alpha == 1.0 else None
    for u in (0.0, 0.03, 0.4, 1.3, 3.7, 9.0, 27.0, 160.0):
        ref = stable_deriv_mp(alpha, n, u)
        got = stable_pdf_deriv(alpha, n, u, cfg)
        scale = max(1.0, global_deriv_bound(alpha, n))
        assert abs(got - ref) <= 1e-12 * scale, (u, got, ref)


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_table_and_direct_quadrature_agree(alpha, n):
    u = np.linspace(-15.0, 15.0, 1201)
    a = stable_pdf_deriv(alpha, n, u, QuadratureConfig(cauchy_fast_path=False))
    b = stable_pdf_deriv(alpha, n, u, QuadratureConfig(cauchy_fast_path=False, core_table=False))
    assert np.max(np.abs(a - b)) <= 1e-13 * max(1.0, global_deriv_bound(alpha, n))


def test_series_and_quadrature_agree_at_the_switch():
    for alpha in ALPHAS:
        if alpha == 1.0:
            continue
        for n in range(4):
            R = series_plan(alpha, n).radius
            x = R * (1 + 1e-12)
            series = stable_pdf_deriv(alpha, n, x, DIRECT)
            forced = QuadratureConfig(core_table=False, tail_switch_radius=4 * R)
            quad = stable_pdf_deriv(alpha, n, x, forced)
            # the Fourier route carries an absolute floor from cancellation
            assert abs(series - quad) <= 1e-11 * abs(quad) + 1e-16, (alpha, n)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_symmetry(alpha):
    u = np.linspace(0.0, 40.0, 401)
    for n in range(4):
        pos = stable_pdf_deriv(alpha, n, u)
        neg = stable_pdf_deriv(alpha, n, -u)
        assert np.max(np.abs(pos - (-1) ** n * neg)) <= 1e-10
    assert stable_pdf(0.8, 2.5) == stable_pdf(0.8, -2.5)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_unimodal_at_zero(alpha):
    u = np.round(np.arange(0, 2001) * 0.05, 12)
    p = stable_pdf(alpha, u)
    assert np.all(np.diff(p) <= 1e-10)
    assert max_density(alpha) == pytest.approx(p[0])


@pytest.mark.parametrize("alpha", ALPHAS)
def test_normalization(alpha):
    assert total_mass(alpha) == pytest.approx(1.0, abs=1e-6)
    assert total_mass(alpha, NO_FAST) == pytest.approx(1.0, abs=1e-6)


def test_tail_mass_cauchy_closed_form():
    for x in (0.0, 0.3, 2.0, 40.0, 5e3):
        assert stable_tail_mass(1.0, x, NO_FAST) == pytest.approx(0.5 - math.atan(x) / math.pi, abs=1e-12)


def test_scaled_pdf_examples():
    assert scaled_pdf(StableModel(1.0, 2.0), 0.0) == pytest.approx(0.1591549431, abs=1e-10)
    t = np.linspace(-30.0, 30.0, 121)
    for alpha in (0.7, 1.3):
        assert np.allclose(scaled_pdf(StableModel(alpha, 1.0), t), stable_pdf(alpha, t), rtol=0, atol=0)
        eta = 2.7
        s = eta ** (1.0 / alpha)
        assert np.allclose(scaled_pdf(StableModel(alpha, eta), t), stable_pdf(alpha, t / s) / s, atol=1e-15)


def test_scaled_pdf_integrates_to_one():
    for alpha in (0.8, 1.5):
        eta = 1.7
        s = eta ** (1.0 / alpha)
        # mass of p_eta on [-1e4, 1e4] is the mass of p_N on [-1e4/s, 1e4/s]
        tail = stable_tail_mass(alpha, 1e4 / s)
        from stable_debruijn.quadrature import composite_rule
        from stable_debruijn.stable_core import density_breakpoints
        bp = np.unique(np.concatenate([density_breakpoints(0.0, 50.0), np.geomspace(50.0, 1e4, 200)]))
        rule = composite_rule(bp)
        body, _ = rule.integrate(scaled_pdf(StableModel(alpha, eta), rule.nodes))
        assert 2 * body + 2 * tail == pytest.approx(1.0, abs=1e-6)


def test_dispersion_deriv_examples():
    assert dispersion_deriv(StableModel(1.0, 1.0), 0.0) == pytest.approx(-1.0 / math.pi, abs=1e-12)
    t = np.linspace(0.0, 20.0, 41)
    m = StableModel(1.3, 0.9)
    assert np.allclose(dispersion_deriv(m, t), dispersion_deriv(m, -t), atol=1e-14)


@pytest.mark.parametrize("alpha", [0.5, 0.8, 1.0, 1.5, 1.9])
@pytest.mark.parametrize("eta", [0.4, 1.0, 3.0])
def test_dispersion_deriv_matches_finite_difference(alpha, eta):
    t = np.concatenate([np.linspace(-12.0, 12.0, 49), [150.0, -900.0]])
    h = 1e-5 * eta
    fd = (scaled_pdf(StableModel(alpha, eta + h), t) - scaled_pdf(StableModel(alpha, eta - h), t)) / (2 * h)
    d = dispersion_deriv(StableModel(alpha, eta), t)
    # absolute floor covers FD roundoff (~eps p / h) where d crosses zero
    assert np.all(np.abs(d - fd) <= 1e-6 * np.abs(d) + 1e-10)


def test_cauchy_dispersion_deriv_at_mode():
    # p_eta(0) = 1/(pi eta) at alpha = 1
    for eta in (0.5, 1.0, 2.0):
        assert dispersion_deriv(StableModel(1.0, eta), 0.0, NO_FAST) == pytest.approx(-1 / (math.pi * eta ** 2), rel=1e-12)


@pytest.mark.parametrize("alpha, n, expected", [(1.0, 0, -2.0), (1.0, 1, -3.0), (0.5, 0, -1.5)])
def test_tail_asymptote_examples(alpha, n, expected):
    rep = tail_asymptote(alpha, n)
    assert rep.slope == pytest.approx(expected, abs=0.05)
    assert rep.expected_slope == expected


def test_tail_constant_matches_leading_coefficient():
    for alpha in (0.5, 1.2, 1.8):
        u = 1e4
        assert stable_pdf(alpha, u) * u ** (1 + alpha) == pytest.approx(stable_tail_coefficient(alpha), rel=1e-2)


def test_global_bound_attained_at_zero_for_even_orders():
    for alpha in ALPHAS:
        for n in (0, 2):
            v = abs(stable_pdf_deriv(alpha, n, 0.0, NO_FAST))
            assert v == pytest.approx(global_deriv_bound(alpha, n), rel=1e-12)


def test_clamp_flag_reports_no_negative_noise():
    vals, info = stable_pdf_info(0.7, np.linspace(-1e5, 1e5, 2001))
    assert np.all(vals >= 0)
    assert info.clamped.shape == vals.shape


def test_convergence_error_when_panels_capped():
    with pytest.raises(ConvergenceError) as exc:
        stable_pdf(1.3, 0.5, QuadratureConfig(max_panels=16, core_table=False))
    assert exc.value.error_estimate >= 0 or math.isinf(exc.value.error_estimate)


def test_explicit_switch_radius():
    cfg = QuadratureConfig(tail_switch_radius=25.0, core_table=False)
    u = np.array([0.3, 7.0, 24.0, 26.0, 400.0])
    for alpha in (0.8, 1.5):
        assert np.allclose(stable_pdf(alpha, u, cfg), stable_pdf(alpha, u), rtol=1e-11, atol=1e-16)


def test_order_validation():
    with pytest.raises(ValueError):
        stable_pdf_deriv(1.2, 5, 0.0)
    with pytest.raises(ValueError):
        stable_pdf(1.2, math.inf)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.3, max_value=1.95), st.floats(min_value=-300.0, max_value=300.0))
def test_density_positive_and_bounded(alpha, u):
    v = stable_pdf(alpha, u)
    assert 0.0 < v <= global_deriv_bound(alpha, 0) * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=0.3, max_value=1.95), st.floats(min_value=0.1, max_value=10.0),
       st.floats(min_value=-50.0, max_value=50.0))
def test_scaling_consistency_property(alpha, eta, t):
    s = eta ** (1.0 / alpha)
    assert scaled_pdf(StableModel(alpha, eta), t) == pytest.approx(stable_pdf(alpha, t / s) / s, rel=1e-14, abs=1e-300)
