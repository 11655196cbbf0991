import math

import mpmath as mp
import numpy as np
import pytest

from lmfractal import cascade as cc
from lmfractal.errors import DomainError
from lmfractal.suites import cascade_measure_cases


def test_spec_validation():
    with pytest.raises(DomainError):
        cc.CascadeSpec(T=1.0, l=2.0)
    with pytest.raises(DomainError):
        cc.CascadeSpec(variance=-0.1)


def test_psi_normalisation():
    s = cc.CascadeSpec(variance=0.3)
    assert s.laplace_exponent(1.0) == 0.0
    assert s.laplace_exponent(2.0) == pytest.approx(0.3)


@pytest.mark.parametrize("l, expected", [(1.0, 1.0), (math.exp(-1), 2.0)])
def test_cone_measure_examples(l, expected):
    spec = cc.CascadeSpec(T=1.0, l=l)
    assert cc.cone_measure(spec) == pytest.approx(expected)
    assert cc.numeric_cone_measure(1.0, [(0.0, l)], include=[0]) == pytest.approx(expected,
                                                                                  abs=1e-9)
    assert cc.cone_measure(spec, 0.0) == cc.cone_measure(spec, 5.0)


def test_pair_measures_at_regime_boundary_give_log4():
    # l = t/2: (lam1 - lam2) t = lam1 l, where the logarithmic forms are exact
    spec = cc.CascadeSpec(T=1.0, l=0.5)
    pm = cc.cone_pair_measures(spec, 1.0, 0.5, 0.25)
    assert pm.small_l
    assert pm.b2 == pytest.approx(math.log(4), abs=1e-12)
    assert pm.numeric[1] == pytest.approx(math.log(4), abs=1e-6)


def test_pair_measures_outside_regime_follow_geometry():
    spec = cc.CascadeSpec(T=1.0, l=1.0)
    pm = cc.cone_pair_measures(spec, 1.0, 0.5, 0.25)
    assert not pm.small_l
    assert pm.b2 == pytest.approx(math.log(2) + 0.5, abs=1e-12)
    assert pm.max_abs_error <= 1e-6
    assert cc.pair_measures_small_l(spec, 1.0, 0.5, 0.25)[1] == pytest.approx(math.log(4))


def test_pair_measure_limit_lam1_to_one():
    lam = 0.3
    spec = cc.CascadeSpec(T=1.0, l=1.0)
    pm = cc.cone_pair_measures(spec, 1.0, 1.0, lam)
    assert pm.b2 == pytest.approx(lam, abs=1e-12)
    assert pm.numeric[1] == pytest.approx(lam, abs=1e-6)
    assert cc.pair_measures_small_l(spec, 1.0, 1.0 - 1e-12, lam)[1] == \
        pytest.approx(-math.log(1 - lam), rel=1e-9)


@pytest.mark.parametrize("case", cascade_measure_cases()[::5])
def test_pair_measures_against_quadrature(case):
    T, l, t, lam1, lam2 = case
    spec = cc.CascadeSpec(T=T, l=l)
    pm = cc.cone_pair_measures(spec, t, lam1, lam2)
    assert pm.max_abs_error <= 1e-6
    a1 = cc.numeric_cone_measure(T, [(lam1 * t, lam1 * l)], include=[0])
    assert pm.b1 + pm.b2 == pytest.approx(a1, abs=1e-6)
    assert pm.b1 + pm.b2 == pytest.approx(1 + math.log(T / (lam1 * l)), abs=1e-12)
    a2 = 1 + math.log(T / (lam2 * l))
    assert pm.b1 + pm.b2 + pm.b3 == pytest.approx(1 + math.log(T / (lam1 * l)) + a2 - pm.b2)
    if pm.small_l:
        assert np.allclose(cc.pair_measures_small_l(spec, t, lam1, lam2),
                           (pm.b1, pm.b2, pm.b3), atol=1e-12)


def test_pair_argument_errors():
    spec = cc.CascadeSpec(T=1.0, l=0.1)
    with pytest.raises(ValueError):
        cc.cone_pair_measures(spec, 1.0, 0.25, 0.5)
    with pytest.raises(ValueError):
        cc.cone_pair_measures(spec, 0.05, 0.5, 0.25)


def test_omega_covariance_branches():
    spec = cc.CascadeSpec(T=1.0, l=0.1, variance=0.2)
    assert cc.omega_covariance(spec, 0.0) == pytest.approx(0.2 * (1 + math.log(10)))
    assert cc.omega_covariance(spec, 1.0) == 0.0
    assert cc.omega_covariance(spec, 0.1) == pytest.approx(0.2 * math.log(10))
    assert cc.omega_covariance(spec, 0.1 * (1 - 1e-12)) == pytest.approx(0.2 * math.log(10))
    for tau in (0.0, 0.05, 0.1, 0.4, 1.0, 1.3):
        assert cc.omega_covariance(spec, tau) == pytest.approx(
            cc.numeric_omega_covariance(spec, tau), abs=1e-6)


def test_cascade_mean(rng):
    spec = cc.CascadeSpec(T=1.0, l=1 / 64, variance=0.2, n=128)
    q = cc.simulate_lognormal_cascade(spec, rng, 10_000)
    t = cc.cell_edges(spec)
    se = q.std(axis=0, ddof=1) / 100
    assert np.max(np.abs(q.mean(axis=0) - t) / se) <= 4


def test_degenerate_cascade():
    spec = cc.CascadeSpec(variance=0.0, n=16)
    q = cc.simulate_lognormal_cascade(spec, np.random.default_rng(0))
    assert np.array_equal(q, cc.cell_edges(spec))


def test_pair_cf_marginals():
    spec = cc.CascadeSpec(variance=0.2)
    for a1, s1, s2 in ((1.0, 0.5, 1.0), (-2.0, 0.25, 3.0)):
        ref = np.exp(spec.characteristic_exponent(a1) * s1)
        assert cc.pair_cf_scaling_process(spec, a1, 0.0, s1, s2) == pytest.approx(ref, abs=0)
        assert cc.pair_cf_levy(spec, 0.0, a1, s1, s2) == pytest.approx(
            np.exp(spec.characteristic_exponent(a1) * s2), abs=1e-15)


def test_pair_cf_regression_constant():
    # pinned against a 64-digit evaluation of the same expression
    mp.mp.dps = 64
    v = mp.mpf("0.2")
    psi = lambda th: -0.5j * v * th - 0.5 * v * th ** 2  # noqa: E731
    s1, s2 = mp.mpf("0.5"), mp.mpf(1)
    ref = mp.exp(psi(1) * s1 + psi(1) * s2
                 + mp.log(mp.exp(-s1) - mp.exp(-s2)) * (2 * psi(1) - psi(2)))
    got = cc.pair_cf_scaling_process(cc.CascadeSpec(variance=0.2), 1, 1, 0.5, 1)
    assert got == pytest.approx(complex(ref), rel=1e-14)
    assert got == pytest.approx(0.6390050841115954 - 0.09657617272756516j, rel=1e-14)
    lev = cc.pair_cf_levy(cc.CascadeSpec(variance=0.2), 1, 1, 0.5, 1)
    assert abs(got - lev) > 0.1


def test_pure_drift_exponent_is_levy():
    psi = lambda th: 0.7j * np.asarray(th)  # noqa: E731
    assert cc.non_levy_gap(psi) <= 1e-15


def test_gap_behaviour():
    gaps = [cc.non_levy_gap(cc.CascadeSpec(variance=v)) for v in (0.1, 0.2, 0.4)]
    assert all(g > 0 for g in gaps)
    assert gaps[0] < gaps[1] < gaps[2]
    assert cc.non_levy_gap(cc.CascadeSpec(variance=0.0)) == 0.0


def test_cf_order_error():
    with pytest.raises(ValueError):
        cc.pair_cf_scaling_process(cc.CascadeSpec(), 1, 1, 1.0, 0.5)
    with pytest.raises(ValueError):
        cc.pair_cf_levy(cc.CascadeSpec(), 1, 1, 1.0, 1.0)
