import math

import numpy as np
import pytest
from scipy import integrate

from oracles import cauchy_entropy, cauchy_pdf
from stable_debruijn.bounds_lab import DispersionWindow, build_envelope
from stable_debruijn.entropy import (build_entropy_grid, dispersion_integrals, entropy,
                                     entropy_dispersion_deriv_identity, fractional_fisher_J,
                                     integrability_check, r_b)
from stable_debruijn.mixture import (MixtureModel, fd_dispersion_deriv, mixture_pdf,
                                     mixture_pdf_and_deriv, mixture_pdf_dispersion_deriv)
from stable_debruijn.source_dist import SourceDistribution
from stable_debruijn.stable_core import (QuadratureConfig, StableModel, dispersion_deriv,
                                         scaled_pdf)

TWO = SourceDistribution.from_atoms([(-1.0, 0.5), (1.0, 0.5)])
ATOM = SourceDistribution.atom(0.0)


def model(alpha, eta, src):
    return MixtureModel(StableModel(alpha, eta), src)


def test_degenerate_source_reduces_to_stable():
    y = np.linspace(-20, 20, 81)
    m = model(1.3, 0.7, ATOM)
    assert np.array_equal(mixture_pdf(m, y), scaled_pdf(m.stable, y))
    assert np.allclose(mixture_pdf_dispersion_deriv(m, y), dispersion_deriv(m.stable, y), atol=1e-16)


def test_two_atom_cauchy_values():
    m = model(1.0, 1.0, TWO)
    assert mixture_pdf(m, 0.0) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    # (1 - eta^2) / (pi (eta^2 + 1)^2) vanishes at eta = 1
    assert mixture_pdf_dispersion_deriv(m, 0.0) == pytest.approx(0.0, abs=1e-15)
    y = np.linspace(-10, 10, 41)
    ref = 0.5 * (cauchy_pdf(y - 1) + cauchy_pdf(y + 1))
    assert np.allclose(mixture_pdf(m, y), ref, rtol=1e-13)


def test_mixture_positive_and_above_each_component(cauchy_sample_source):
    m = model(0.8, 1.3, cauchy_sample_source)
    y = np.linspace(-100, 100, 201)
    q = mixture_pdf(m, y)
    assert np.all(q > 0)
    locs, w = np.asarray(cauchy_sample_source.locations), np.asarray(cauchy_sample_source.weights)
    comp = np.max(w[None, :] * scaled_pdf(m.stable, y[:, None] - locs[None, :]), axis=1)
    assert np.all(q >= comp * (1 - 1e-14))
    assert np.all(q <= scaled_pdf(m.stable, 0.0) * (1 + 1e-14))


def test_interchange_matches_finite_difference(test_sources):
    y = np.linspace(-10, 10, 21)
    for src in test_sources.values():
        for alpha in (0.8, 1.5):
            for eta in (0.5, 2.0):
                m = model(alpha, eta, src)
                d = mixture_pdf_dispersion_deriv(m, y)
                fd = fd_dispersion_deriv(m, y)
                assert np.all(np.abs(d - fd) <= np.maximum(1e-8, 1e-5 * np.abs(d)))


def test_pdf_and_deriv_single_sweep_consistent():
    m = model(1.2, 0.9, SourceDistribution.gaussian())
    y = np.linspace(-8, 8, 33)
    q, dq = mixture_pdf_and_deriv(m, y)
    assert np.array_equal(q, mixture_pdf(m, y))
    assert np.array_equal(dq, mixture_pdf_dispersion_deriv(m, y))


def test_r_b_properties():
    spec = build_envelope(1.2, DispersionWindow(0.5))
    y = np.linspace(-300, 300, 601)
    assert np.array_equal(r_b(model(1.2, 0.75, ATOM), spec, y), spec.value(y))
    rb = r_b(model(1.2, 0.75, TWO), spec, y)
    assert np.allclose(rb, rb[::-1], rtol=1e-15)
    for eta in DispersionWindow(0.5).eta_grid():
        m = model(1.2, eta, TWO)
        assert np.all(np.abs(mixture_pdf_dispersion_deriv(m, y)) <= rb * (1 + 1e-9))


def test_integrability_chain_two_atoms():
    spec = build_envelope(1.0, DispersionWindow(0.5))
    rep = integrability_check(model(1.0, 0.75, TWO), spec)
    assert rep.passed and rep.lhs < rep.rhs
    assert rep.log_moment == pytest.approx(math.log(2))
    assert rep.to_json()["bound_id"] == "eq:ff"


def test_integrability_lhs_matches_scipy():
    spec = build_envelope(1.0, DispersionWindow(0.5))
    m = model(1.0, 0.75, TWO)
    rep = integrability_check(m, spec)
    f = lambda t: math.log1p(abs(t)) * float(r_b(m, spec, t))
    pts = [0, 1, 49, 51, 200]
    body = sum(integrate.quad(f, a, b, epsabs=1e-10, limit=200)[0] for a, b in zip(pts, pts[1:]))
    body += integrate.quad(f, 200, np.inf, epsabs=1e-10, limit=400)[0]
    assert rep.lhs == pytest.approx(2 * body, rel=1e-6)


@pytest.mark.parametrize("gamma_", [0.5, 1.0, 2.0, 5.0])
def test_cauchy_entropy_and_J(gamma_):
    m = model(1.0, gamma_, ATOM)
    rep = entropy(m)
    assert rep.h == pytest.approx(cauchy_entropy(gamma_), abs=1e-9)
    assert rep.err_est >= 0 and rep.err_est < 1e-6
    J = fractional_fisher_J(m)
    assert J.J_identity == pytest.approx(1 / gamma_, abs=1e-8)
    assert J.J_fd == pytest.approx(1 / gamma_, abs=1e-8)
    assert J.abs_diff == abs(J.J_identity - J.J_fd)
    assert J.fd_step == pytest.approx(1e-4 * gamma_)


def test_entropy_scaling_law_general_alpha():
    # h(eta^(1/alpha) N) = h(N) + ln(eta) / alpha
    for alpha in (0.7, 1.6):
        h1 = entropy(model(alpha, 1.0, ATOM)).h
        h3 = entropy(model(alpha, 3.0, ATOM)).h
        assert h3 - h1 == pytest.approx(math.log(3.0) / alpha, abs=1e-9)
        assert entropy_dispersion_deriv_identity(model(alpha, 3.0, ATOM)) == pytest.approx(1 / (3 * alpha), abs=1e-9)


def test_entropy_against_scipy_quad():
    m = model(1.4, 1.0, TWO)
    f = lambda y: -float(mixture_pdf(m, y)) * math.log(float(mixture_pdf(m, y)))
    pts = [0.0, 1.0, 5.0, 50.0]
    body = sum(integrate.quad(f, a, b, epsabs=1e-12, limit=200)[0] for a, b in zip(pts, pts[1:]))
    body += integrate.quad(f, 50.0, np.inf, epsabs=1e-12, limit=400)[0]
    assert entropy(m).h == pytest.approx(2 * body, abs=1e-7)


def test_translation_invariance():
    for alpha in (0.8, 1.5):
        h0 = entropy(model(alpha, 1.0, ATOM)).h
        h5 = entropy(model(alpha, 1.0, SourceDistribution.atom(5.0))).h
        assert abs(h0 - h5) <= 2e-8
        j0 = fractional_fisher_J(model(alpha, 1.0, ATOM)).J_identity
        j5 = fractional_fisher_J(model(alpha, 1.0, SourceDistribution.atom(-7.5))).J_identity
        assert abs(j0 - j5) <= 1e-8


def test_mixing_does_not_lower_entropy():
    for alpha in (0.8, 1.0, 1.5):
        for eta in (0.5, 2.0):
            assert entropy(model(alpha, eta, TWO)).h >= entropy(model(alpha, eta, ATOM)).h - 2e-6


def test_tail_window_soundness(cauchy_sample_source):
    m = model(0.8, 1.0, cauchy_sample_source)
    a = entropy(m)
    b = entropy(m, QuadratureConfig(abs_tol=5e-11))
    assert abs(a.h - b.h) < a.err_est
    assert b.domain_used[1] >= a.domain_used[1]


def test_mass_derivative_vanishes(test_sources):
    for src in test_sources.values():
        out = dispersion_integrals(model(1.2, 0.8, src))
        assert abs(out["mass_deriv"]) <= 1e-6


def test_grid_reused_across_stencil():
    m = model(1.5, 1.0, TWO)
    g = build_entropy_grid(m)
    assert g.rule.n_panels == g.constants["n_panels"]
    e1 = entropy(m.with_eta(1.0001), grid=g)
    assert e1.n_panels == g.rule.n_panels
    assert g.tail_h <= 1e-10 and g.tail_J <= 1e-10


def test_debruijn_report_json():
    rep = fractional_fisher_J(model(1.0, 1.0, ATOM))
    j = rep.to_json()
    assert j["bound_id"] == "eq:final111" and j["pass"]
    assert j["J_identity"] == pytest.approx(1.0, abs=1e-8)
