import math

import numpy as np
import pytest

from lmfractal.errors import DomainError
from lmfractal.levy import BrownianWithDrift, CompoundPoissonNormal, DeterministicDrift
from lmfractal.lmf import (LmfModel, SamplePath, default_horizon, independent_pair_cross_moment,
                           inverse_lamperti, mbm_analog_preset, rescale_time, sample_lmf,
                           sample_lmf_path, sample_scaled_coupled, theoretical_cov,
                           theoretical_moment, time_invert, valid_moment_range)
from lmfractal.analysis import fit_scaling_function
from lmfractal.stationary import Constant, OrnsteinUhlenbeck

T8 = 2.0 ** -np.arange(8, -1, -1)


def test_preset_parameters():
    m = mbm_analog_preset(0.5)
    assert m.levy.drift == -0.75
    assert m.levy.laplace_exponent(1.0) == pytest.approx(-0.625)
    assert m.levy.laplace_exponent(2.0) == pytest.approx(-1.0)
    assert m.stationary.rate == pytest.approx(0.375)
    assert m.horizon == 0.0


@pytest.mark.parametrize("sigma", [0.0, 1.0, 1.5, -0.2])
def test_preset_sigma_domain(sigma):
    with pytest.raises(DomainError, match="OU rate"):
        mbm_analog_preset(sigma)


def test_preset_small_sigma_limit():
    psi = mbm_analog_preset(1e-6).levy.laplace_exponent
    assert psi(3.0) == pytest.approx(-1.5, abs=1e-9)


def test_preset_tau_concave():
    psi = mbm_analog_preset(0.5).levy.laplace_exponent
    q = np.linspace(0.25, 4, 16)
    tau = -psi(q)
    assert np.all(np.diff(tau, 2) < 0)


def test_classical_lamperti(rng):
    model = LmfModel(DeterministicDrift(0.4), OrnsteinUhlenbeck(1.0), horizon=1.5)
    t = np.array([0.1, 0.5, 1.0, 3.0])
    cs = sample_lmf(model, t, rng, n_paths=5)
    assert np.allclose(cs.path.values, t ** 0.4 * cs.y, rtol=1e-13)
    s, y = inverse_lamperti(cs)
    assert np.allclose(y, np.exp(-s * 0.4) * cs.path.values, rtol=1e-13)


def test_constant_input_at_unit_time(rng):
    # the Lévy increment over zero duration sits at t = T, not at t = T e^a
    model = LmfModel(BrownianWithDrift(0.2, 1.0), Constant(1.0), horizon=0.8)
    cs = sample_lmf(model, [0.3, 1.0, math.exp(0.8)], rng, n_paths=10)
    assert np.all(cs.path.values[:, 1] == 1.0)
    top = cs.levy_values[:, cs.i_top]
    assert np.allclose(cs.path.values[:, 2], np.exp(-top), rtol=1e-14)


def test_time_beyond_set_rejected(rng):
    with pytest.raises(DomainError):
        sample_lmf(mbm_analog_preset(0.5), [0.5, 1.5], rng)


def test_inverse_lamperti_exact(rng):
    model = LmfModel(CompoundPoissonNormal(3.0, 0.1, 0.4), OrnsteinUhlenbeck(0.5), horizon=2.0)
    cs = sample_lmf(model, np.exp(np.linspace(-4, 2, 13)), rng, n_paths=1000)
    _, y = inverse_lamperti(cs)
    assert np.max(np.abs(y / cs.y - 1)) <= 1e-12


def test_inverse_lamperti_needs_coupling(rng):
    with pytest.raises(ValueError):
        inverse_lamperti(sample_lmf_path(mbm_analog_preset(0.5), [0.5], rng))


def test_mbm_normalisation(rng):
    x = sample_lmf_path(mbm_analog_preset(0.5), [1.0], rng, n_paths=100_000).values[:, 0]
    p = x * x
    assert abs(p.mean() - 1.0) <= 3 * p.std(ddof=1) / math.sqrt(p.size)


def test_time_invert():
    p = SamplePath([0.25, 0.5, 1.0], [1.0, 2.0, 3.0])
    q = time_invert(p)
    assert np.array_equal(q.times, [1.0, 2.0, 4.0])
    assert np.array_equal(q.values, [3.0, 2.0, 1.0])
    r = time_invert(q)
    assert np.array_equal(r.times, p.times) and np.array_equal(r.values, p.values)


def test_inverted_moments(rng):
    # E|X(1/t)|^q = t^{psi(q)} E|X(1)|^q for t >= 1
    model = mbm_analog_preset(0.5)
    path = time_invert(sample_lmf_path(model, T8, rng, n_paths=200_000))
    q = 2.0
    rep = fit_scaling_function(path.times, path.values, [q],
                               reference=[model.levy.laplace_exponent(q)], abs_tol=0.05)
    assert rep.passed.all()


def test_two_sided_moments_beyond_one(rng):
    model = mbm_analog_preset(0.5).with_horizon(2.0)
    t = np.exp(np.linspace(0.25, 2.0, 8))
    x = sample_lmf_path(model, t, rng, n_paths=200_000).values
    rep = fit_scaling_function(t, x, [1.0, 2.0],
                               reference=lambda q: model.levy.laplace_exponent(-q), abs_tol=0.05)
    assert rep.passed.all()
    assert theoretical_moment(model, 2.0, t[-1]) == pytest.approx(
        t[-1] ** model.levy.laplace_exponent(-2.0))


def test_rescale_time(rng):
    p = SamplePath([0.5, 1.0], [1.0, 2.0])
    assert np.array_equal(rescale_time(p, 1.0).times, p.times)
    assert np.array_equal(rescale_time(p, 2.0).times, [1.0, 2.0])
    model = mbm_analog_preset(0.5)
    path = rescale_time(sample_lmf_path(model, T8, rng, n_paths=50_000), 4.0)
    rep = fit_scaling_function(path.times, path.values, [2.0])
    # pivot: the fitted second moment equals E X(1)^2 = 1 at t = T = 4
    assert rep.intercepts[0] + rep.slopes[0] * math.log(4.0) == pytest.approx(0.0, abs=0.05)


def test_theoretical_moment_examples():
    m = mbm_analog_preset(0.5)
    assert theoretical_moment(m, 0.0, 0.3) == 1.0
    assert theoretical_moment(m, 2.0, 0.3) == pytest.approx(0.3)
    ss = LmfModel(DeterministicDrift(0.3), OrnsteinUhlenbeck(1.0), horizon=1.0)
    m1 = OrnsteinUhlenbeck(1.0).abs_moment(1.5)
    for t in (0.2, 2.0):
        assert theoretical_moment(ss, 1.5, t) == pytest.approx(t ** 0.45 * m1)
    with pytest.raises(DomainError):
        theoretical_moment(m, -1.5, 0.5)


def test_valid_moment_range():
    assert valid_moment_range(mbm_analog_preset(0.5)) == (-1.0, math.inf)


def test_matched_covariance_is_min():
    m = mbm_analog_preset(0.5, T=2.0)
    for t, s in ((0.3, 0.7), (1.0, 2.0), (0.5, 0.5)):
        assert theoretical_cov(m, t, s) == pytest.approx(min(t, s) / 2.0, rel=1e-12)
        general = LmfModel(m.levy, m.stationary, time_scale=2.0)
        assert theoretical_cov(general, t, s) == pytest.approx(min(t, s) / 2.0, rel=1e-12)
    assert theoretical_cov(m, 0.4, 0.4) == pytest.approx(theoretical_moment(m, 2.0, 0.4))


def test_three_case_covariance_monte_carlo(rng):
    model = LmfModel(BrownianWithDrift(-0.4, 0.3), OrnsteinUhlenbeck(1.0), horizon=1.0)
    t = np.array([0.2, 0.6, 1.5, 2.5])
    n = 200_000
    x = sample_lmf_path(model, t, rng, n_paths=n).values
    for i in range(4):
        for j in range(i, 4):
            p = x[:, i] * x[:, j]
            ref = theoretical_cov(model, t[i], t[j])
            assert abs(p.mean() - ref) <= 3.5 * p.std(ddof=1) / math.sqrt(n), (i, j)


def test_default_horizon():
    assert default_horizon([0.1, 0.5]) == 1.0
    assert default_horizon([0.1, math.e ** 2]) == pytest.approx(3.0)


def test_coupled_scaling_matches_direct_product_moments(rng):
    model = mbm_analog_preset(0.5)
    t = np.array([0.25, 1.0])
    n = 100_000
    c = sample_scaled_coupled(model, 0.5, t, rng, n)
    p = c[:, 0] * c[:, 1]
    assert abs(p.mean() - 0.125) <= 4 * p.std(ddof=1) / math.sqrt(n)


def test_independent_factor_pair_misses_cross_moment():
    # the independent-pair product reproduces E X(lam t) X(lam s) only on the diagonal
    model = mbm_analog_preset(0.5)
    assert independent_pair_cross_moment(model, 0.5, 0.5, 0.5) == pytest.approx(0.25)
    val = independent_pair_cross_moment(model, 0.25, 0.25, 1.0)
    lam = 0.25
    assert val == pytest.approx(lam ** 1.25 * 0.25)
    assert val < lam * 0.25 * 0.8
