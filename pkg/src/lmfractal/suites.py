"""Verification suites: each returns a list of :class:`TestReport`.

All randomness is drawn through :func:`lmfractal.rng.run_chunked`, so verdicts
depend only on ``(seed, chunk_size)`` and never on the worker count.
"""
from __future__ import annotations

import dataclasses
import inspect
import itertools
import math

import numpy as np

from . import cascade as cc
from .analysis import TestReport, empirical_cov, fit_scaling_function, ks_two_sample
from .levy import BrownianWithDrift, CompoundPoissonNormal, DeterministicDrift, GammaProcess
from .lmf import (LmfModel, independent_pair_cross_moment, inverse_lamperti, mbm_analog_preset,
                  sample_lmf, sample_scaled_coupled, theoretical_cov)
from .rng import DEFAULT_CHUNK_SIZE, run_chunked
from .scaling import marginal_cf_reference, sample_scaling_grid
from .stationary import OrnsteinUhlenbeck, gamma_from_psi

DYADIC_TIMES = 2.0 ** -np.arange(8, -1, -1)
MOMENT_QS = (0.5, 1.0, 2.0, 3.0)


class Runner:
    """Shared ensemble settings for one suite run."""

    def __init__(self, seed: int, workers: int = 1, chunk_size: int = DEFAULT_CHUNK_SIZE):
        self.seed = int(seed)
        self.workers = int(workers)
        self.chunk_size = int(chunk_size)

    def run(self, fn, n, label):
        return run_chunked(fn, n, self.seed, label, self.chunk_size, self.workers)

    def lmf_values(self, model, times, n, label):
        return self.run(lambda rng, m: sample_lmf(model, times, rng, m).path.values, n, label)

    def factors(self, levy, a, lambdas, times, n, label):
        return self.run(lambda rng, m: sample_scaling_grid(levy, a, lambdas, times, rng, m).values,
                        n, label)


def _rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def _z(diff, se):
    se = np.asarray(se, dtype=float)
    diff = np.abs(np.asarray(diff, dtype=float))
    return float(np.max(np.where(se > 0, diff / np.where(se > 0, se, 1.0),
                                 np.where(diff > 0, np.inf, 0.0))))


# ---------------------------------------------------------------- inverse-lamperti

def inverse_lamperti_suite(r: Runner, n_exact: int = 1000, n_stat: int = 10_000):
    model = mbm_analog_preset(0.5).with_horizon(1.0)
    times = np.exp(np.linspace(-3.0, 1.0, 9))

    def recovery(rng, m):
        cs = sample_lmf(model, times, rng, m)
        return np.stack([inverse_lamperti(cs)[1], cs.y], axis=1)

    both = r.run(recovery, n_exact, "inverse-exact")
    reports = [TestReport("inverse-lamperti/pathwise", statistic=_rel_err(both[:, 0], both[:, 1]),
                          value=_rel_err(both[:, 0], both[:, 1]), threshold=1e-12,
                          details={"n_paths": n_exact})]
    rec = r.run(lambda rng, m: inverse_lamperti(sample_lmf(model, times, rng, m))[1],
                n_stat, "inverse-stationarity")
    rep = ks_two_sample(rec[:, 0], rec[:, -1], name="inverse-lamperti/shift-invariance")
    reports.append(rep)
    return reports


# ---------------------------------------------------------------- scaling-family

def scaling_family_suite(r: Runner, n_ks: int = 10_000, n_cf: int = 100_000):
    levy = BrownianWithDrift(-0.75, 0.5)
    reports = []
    lam = 2.0 ** -np.arange(8)
    t = 2.0 ** -np.arange(8)
    a = 1.0
    vals = r.factors(levy, a, lam, t, 200, "algebra")
    grid_lam = np.sort(lam)
    ones = vals[:, -1, :]
    reports.append(TestReport("scaling-family/unit-scale", statistic=float(np.sum(ones != 1.0)),
                              value=float(np.sum(ones != 1.0)), threshold=0.0))
    # M(l1 l2, t) = M(l1, l2 t) M(l2, t) for every triple on the dyadic grid
    idx = {k: i for i, k in enumerate(np.round(-np.log2(grid_lam)).astype(int))}
    tidx = {k: j for j, k in enumerate(np.round(-np.log2(np.sort(t))).astype(int))}
    worst, checked = 0.0, 0
    for k1, k2, j in itertools.product(range(8), repeat=3):
        if k1 + k2 > 7 or k2 + j > 7:
            continue
        lhs = vals[:, idx[k1 + k2], tidx[j]]
        rhs = vals[:, idx[k1], tidx[k2 + j]] * vals[:, idx[k2], tidx[j]]
        worst = max(worst, _rel_err(lhs, rhs))
        checked += 1
    reports.append(TestReport("scaling-family/multiplicativity", statistic=worst, value=worst,
                              threshold=1e-12, details={"triples": checked}))

    # n-fold divisibility: M(lam, t) vs product of n independent M(lam^(1/n), t)
    n_fold, lam0, t0 = 4, math.exp(-1.0), 0.5
    direct = r.factors(levy, 0.0, [lam0], [t0], n_ks, "divisibility-direct")[:, 0, 0]
    parts = r.factors(levy, 0.0, [lam0 ** (1 / n_fold)], [t0], n_ks * n_fold,
                      "divisibility-parts")[:, 0, 0]
    prod = parts.reshape(n_ks, n_fold).prod(axis=1)
    reports.append(ks_two_sample(np.log(direct), np.log(prod), name="scaling-family/divisibility"))

    # stationarity in log-time and independence of the horizon
    times = np.exp(np.array([-2.0, -1.0, 0.0]))
    st = r.factors(levy, 0.0, [lam0], times, n_ks, "log-time")[:, 0, :]
    reports.append(ks_two_sample(np.log(st[:, 0]), np.log(st[:, -1]),
                                 name="scaling-family/log-time-stationarity"))
    hb = r.factors(levy, 2.5, [lam0], times, n_ks, "horizon")[:, 0, :]
    reports.append(ks_two_sample(np.log(st[:, 1]), np.log(hb[:, 1]),
                                 name="scaling-family/horizon-consistency"))

    # marginal law: CF of log M(e^-1, t) vs exp(Psi(theta))
    thetas = np.array([-2.0, -1.0, 1.0, 2.0])
    for t_cf in (0.25, 1.0):
        logm = np.log(r.factors(levy, 0.0, [lam0], [t_cf], n_cf, f"cf-{t_cf}")[:, 0, 0])
        z = np.exp(1j * thetas[None, :] * logm[:, None])
        emp = z.mean(axis=0)
        ref = marginal_cf_reference(levy, lam0, thetas)
        se_re = z.real.std(axis=0, ddof=1) / math.sqrt(n_cf)
        se_im = z.imag.std(axis=0, ddof=1) / math.sqrt(n_cf)
        dev = max(_z(emp.real - ref.real, se_re), _z(emp.imag - ref.imag, se_im))
        reports.append(TestReport(f"scaling-family/marginal-cf/t={t_cf}", statistic=dev,
                                  value=dev, threshold=4.0, details={"n": n_cf}))
    return reports


# ---------------------------------------------------------------- lmf-law

def _self_similar_model(H=0.3):
    return LmfModel(levy=DeterministicDrift(H), stationary=OrnsteinUhlenbeck(1.0, 1.0))


def moment_scaling_report(r: Runner, model: LmfModel, n: int, times=DYADIC_TIMES,
                          qs=MOMENT_QS, k_se=3.0, abs_tol=0.05, label="moments", reference=None):
    vals = r.lmf_values(model, times, n, label)
    if reference is None:
        def reference(q):
            return -model.levy.laplace_exponent(q)
    return fit_scaling_function(times / 1.0, vals, qs, reference=reference,
                                k_se=k_se, abs_tol=abs_tol)


def scaling_law_reports(r: Runner, model: LmfModel, n: int = 10_000, lambdas=(0.5, 0.25),
                        times=(0.25, 0.5, 0.75, 1.0), prefix="lmf-law"):
    """Compare ``X(lam t)`` with ``M(lam, t) X(t)``.

    Per-coordinate laws use a factor grid independent of the path. Pairwise
    product moments use the coupled construction, which is the one matching
    jointly in time; the independent pair is checked against its own
    analytic cross moment.
    """
    times = np.asarray(times)
    reports = []
    pairs = list(itertools.combinations_with_replacement(range(times.size), 2))
    for lam in lambdas:
        direct = r.lmf_values(model, lam * times, n, f"{prefix}-direct-{lam}")
        x = r.lmf_values(model, times, n, f"{prefix}-base-{lam}")
        m = r.factors(model.levy, 0.0, [lam], times, n, f"{prefix}-factor-{lam}")[:, 0, :]
        indep = m * x
        coupled = r.run(lambda rng, k: sample_scaled_coupled(model, lam, times, rng, k), n,
                        f"{prefix}-coupled-{lam}")
        for j in range(times.size):
            reports.append(ks_two_sample(direct[:, j], indep[:, j],
                                         name=f"{prefix}/ks/lam={lam}/t={times[j]}"))
        worst = 0.0
        for i, j in pairs:
            p, q = direct[:, i] * direct[:, j], coupled[:, i] * coupled[:, j]
            se = math.sqrt(p.var(ddof=1) / n + q.var(ddof=1) / n)
            worst = max(worst, abs(p.mean() - q.mean()) / se)
        reports.append(TestReport(f"{prefix}/product-moments/lam={lam}", statistic=worst,
                                  value=worst, threshold=4.0))
        if _has_second_moments(model):
            worst = 0.0
            for i, j in pairs:
                p = indep[:, i] * indep[:, j]
                ref = independent_pair_cross_moment(model, lam, times[i], times[j])
                worst = max(worst, abs(p.mean() - ref) / (p.std(ddof=1) / math.sqrt(n)))
            reports.append(TestReport(f"{prefix}/independent-pair-moments/lam={lam}",
                                      statistic=worst, value=worst, threshold=4.0))
    return reports


def _has_second_moments(model):
    try:
        theoretical_cov(model, 1.0, 0.5)
    except Exception:
        return False
    return True


def lmf_law_suite(r: Runner, n_law: int = 10_000, n_moments: int = 200_000,
                  n_selfsim: int = 20_000):
    reports = scaling_law_reports(r, mbm_analog_preset(0.5), n_law)
    cp = LmfModel(levy=CompoundPoissonNormal(2.0, -0.2, 0.3), stationary=OrnsteinUhlenbeck(1.0))
    reports += scaling_law_reports(r, cp, n_law, lambdas=(0.5,), prefix="lmf-law-cp")

    rep = moment_scaling_report(r, mbm_analog_preset(0.5), n_moments, label="moments-mbm")
    for q, slope, se, ref, ok in rep.rows():
        reports.append(TestReport(f"lmf-law/moment-scaling/q={q}", statistic=slope,
                                  value=abs(slope - ref), threshold=max(3 * se, 0.05),
                                  details={"slope": slope, "se": se, "reference": ref}))
    ss = moment_scaling_report(r, _self_similar_model(0.3), n_selfsim, k_se=3.0, abs_tol=0.0,
                               label="moments-selfsim", reference=lambda q: 0.3 * q)
    dev = _z(ss.slopes - 0.3 * ss.qs, ss.ses)
    reports.append(TestReport("lmf-law/self-similar-linear", statistic=dev, value=dev,
                              threshold=3.0, details={"slopes": ss.slopes, "ses": ss.ses}))
    return reports


# ---------------------------------------------------------------- covariance

COV_TIMES = np.array([1 / 32, 1 / 16, 1 / 8, 1 / 4, 1 / 2, 1.0])


def covariance_suite(r: Runner, n: int = 200_000, eps: float = 0.125):
    model = mbm_analog_preset(0.5, T=1.0)
    reports = []
    vals = r.lmf_values(model, COV_TIMES, n, "cov-grid")
    cov, se = empirical_cov(vals)
    ref = np.minimum.outer(COV_TIMES, COV_TIMES) / model.time_scale
    dev = _z(cov - ref, se)
    reports.append(TestReport("covariance/min(t,s)/T", statistic=dev, value=dev, threshold=3.0,
                              details={"n": n}))

    grid = eps * np.arange(1, int(round(1 / eps)) + 1)
    incs = np.diff(r.lmf_values(model, grid, n, "cov-increments"), axis=1)
    icov, ise = empirical_cov(incs)
    off = ~np.eye(incs.shape[1], dtype=bool)
    dev = _z(icov[off], ise[off])
    reports.append(TestReport("covariance/increments-uncorrelated", statistic=dev, value=dev,
                              threshold=3.0))
    diag_ref = eps * np.ones(incs.shape[1])
    dev = _z(np.diag(icov) - diag_ref, np.diag(ise))
    reports.append(TestReport("covariance/increment-variance", statistic=dev, value=dev,
                              threshold=3.0))

    reports.append(gamma_formula_report())
    return reports


def gamma_formula_report(h=np.linspace(0.0, 20.0, 201)) -> TestReport:
    """The covariance recipe against its two closed-form reductions.

    OU with rate ``psi(1) + 1`` when ``psi(2) = -1``; ``exp(-h/2)`` for ``psi(q) = -q/2``.
    """
    worst = 0.0
    for sigma in (0.1, 0.5, 0.9):
        levy = mbm_analog_preset(sigma).levy
        p1, p2 = levy.laplace_exponent(1.0), levy.laplace_exponent(2.0)
        worst = max(worst, float(np.max(np.abs(gamma_from_psi(p1, p2, 1.7, h)
                                               - 1.7 * np.exp(-(p1 + 1) * h)))))
    worst = max(worst, float(np.max(np.abs(gamma_from_psi(-0.5, -1.0, 1.0, h) - np.exp(-h / 2)))))
    return TestReport("covariance/gamma-formula", statistic=worst, value=worst, threshold=1e-12)


# ---------------------------------------------------------------- cascades

def cascade_measure_cases():
    """Parameter combinations ``(T, l, t, lam1, lam2)`` for the cone checks."""
    cases = []
    for T in (1.0, 2.5):
        for l_frac in (1.0, 0.5, 0.1, 1 / 256):
            for t_frac in (1.0, 0.6):
                for lam1, lam2 in ((1.0, 0.5), (0.5, 0.25), (0.9, 0.1)):
                    t = t_frac * T
                    l = min(l_frac * T, t)
                    cases.append((T, l, t, lam1, lam2))
    return cases


def cascade_geometry_reports(cases=None) -> list[TestReport]:
    """Closed-form cone measures against quadrature."""
    cases = cascade_measure_cases() if cases is None else cases
    worst_cone = worst_pair = worst_cov = 0.0
    for T, l, t, lam1, lam2 in cases:
        spec = cc.CascadeSpec(T=T, l=l)
        worst_cone = max(worst_cone, abs(cc.cone_measure(spec, t) - cc.numeric_cone_measure(
            T, [(t, l)], include=[0])))
        pm = cc.cone_pair_measures(spec, t, lam1, lam2)
        worst_pair = max(worst_pair, pm.max_abs_error)
        if pm.small_l:
            closed = cc.pair_measures_small_l(spec, t, lam1, lam2)
            worst_pair = max(worst_pair, max(abs(a - b) for a, b in zip(closed, pm.numeric)))
        for tau in (0.0, 0.5 * l, l, 0.5 * (l + T), T, 1.5 * T):
            worst_cov = max(worst_cov, abs(cc.omega_covariance(spec, tau)
                                           - cc.numeric_omega_covariance(spec, tau)))
    return [TestReport(f"cascade-measures/{name}", statistic=val, value=val, threshold=1e-6,
                       details={"cases": len(cases)})
            for name, val in (("cone", worst_cone), ("pairs", worst_pair),
                              ("omega-cov", worst_cov))]


def cascade_simulation_reports(r: Runner, n_replicas: int = 10_000, variance: float = 0.2):
    """Mean and moment-ratio scaling of simulated cascades at ``l = T/256``, ``n = 512``."""
    spec = cc.CascadeSpec(T=1.0, l=1 / 256, variance=variance, n=512)
    q = r.run(lambda rng, m: cc.simulate_lognormal_cascade(spec, rng, m), n_replicas, "cascade")
    t = cc.cell_edges(spec)
    se = q.std(axis=0, ddof=1) / math.sqrt(n_replicas)
    dev = _z(q.mean(axis=0) - t, se)
    reports = [TestReport("cascade-measures/mean", statistic=dev, value=dev, threshold=3.0,
                          details={"n": n_replicas})]
    row_t, row_h = spec.n // 2 - 1, spec.n // 4 - 1   # t = T/2 and t = T/4
    for qq in (1.0, 2.0):
        est, se = _log2_ratio(q[:, row_t], q[:, row_h], qq)
        ref = cc.cascade_moment_ratio_exponent(spec, qq)
        dev = abs(est - ref) / se
        reports.append(TestReport(f"cascade-measures/scaling/q={qq}", statistic=est, value=dev,
                                  threshold=4.0, details={"estimate": est, "se": se,
                                                          "reference": ref}))
    return reports


def cascade_measures_suite(r: Runner, n_replicas: int = 10_000):
    return cascade_geometry_reports() + cascade_simulation_reports(r, n_replicas)


def _log2_ratio(x, y, q):
    """``log2(E x^q / E y^q)`` with a delta-method standard error."""
    a, b = x ** q, y ** q
    ma, mb = a.mean(), b.mean()
    c = np.cov(np.stack([a, b]))
    g = np.array([1 / ma, -1 / mb]) / math.log(2)
    return float(math.log2(ma / mb)), float(math.sqrt(g @ c @ g / a.size))


def cascade_cf_suite(r: Runner):
    reports = []
    for v in (0.1, 0.2, 0.4):
        gap = cc.non_levy_gap(cc.CascadeSpec(variance=v))
        reports.append(TestReport(f"cascade-cf/gap-positive/v={v}", statistic=gap, value=-gap,
                                  threshold=-1e-12 if gap > 0 else 0.0))
    gaps = [cc.non_levy_gap(cc.CascadeSpec(variance=v)) for v in (0.1, 0.2, 0.4)]
    mono = float(all(b > a for a, b in zip(gaps, gaps[1:])))
    reports.append(TestReport("cascade-cf/gap-increasing", statistic=mono, value=1 - mono,
                              threshold=0.0))
    g0 = cc.non_levy_gap(cc.CascadeSpec(variance=0.0))
    reports.append(TestReport("cascade-cf/gap-zero-degenerate", statistic=g0, value=g0,
                              threshold=0.0))
    worst = 0.0
    spec = cc.CascadeSpec(variance=0.2)
    for a1, a2, s1, s2 in cc.DEFAULT_CF_GRID:
        for b1, b2 in ((a1, 0.0), (0.0, a2)):
            x = cc.pair_cf_scaling_process(spec, b1, b2, s1, s2)
            y = cc.pair_cf_levy(spec, b1, b2, s1, s2)
            worst = max(worst, abs(x - y))
        worst = max(worst, abs(cc.pair_cf_scaling_process(spec, a1, 0.0, s1, s2)
                               - np.exp(spec.characteristic_exponent(a1) * s1)))
    reports.append(TestReport("cascade-cf/marginals-coincide", statistic=worst, value=worst,
                              threshold=1e-14))
    return reports


# ---------------------------------------------------------------- mellin

def mellin_suite(r: Runner, n: int = 100_000, thetas=(-2.0, -0.5, 1.0, 3.0)):
    def draw(rng, m):
        x = np.exp(rng.normal(0.0, 1.0, m))
        y = rng.gamma(2.0, 1.5, m)
        return np.stack([x, y], axis=1)

    xy = r.run(draw, n, "mellin")
    x, y = xy[:, 0], xy[:, 1]
    reports = []
    for th in thetas:
        zx, zy = np.exp(1j * th * np.log(x)), np.exp(1j * th * np.log(y))
        mx, my = zx.mean(), zy.mean()
        diff = (zx * zy).mean() - mx * my
        # linearised influence of each sample on the difference
        infl = zx * zy - my * zx - mx * zy
        se_re = infl.real.std(ddof=1) / math.sqrt(n)
        se_im = infl.imag.std(ddof=1) / math.sqrt(n)
        dev = max(_z(diff.real, se_re), _z(diff.imag, se_im))
        reports.append(TestReport(f"mellin/product/theta={th}", statistic=abs(diff), value=dev,
                                  threshold=4.0))
    return reports


SUITES = {
    "scaling-family": scaling_family_suite,
    "lmf-law": lmf_law_suite,
    "inverse-lamperti": inverse_lamperti_suite,
    "cascade-measures": cascade_measures_suite,
    "cascade-cf": cascade_cf_suite,
    "covariance": covariance_suite,
    "mellin": mellin_suite,
}


def suite_parameters(name: str) -> set:
    """Size keywords accepted by a suite (union over suites for ``"all"``)."""
    names = SUITES if name == "all" else [name]
    return {p for key in names for p in list(inspect.signature(SUITES[key]).parameters)[1:]}


def run_suite(name: str, seed: int, workers: int = 1, chunk_size: int = DEFAULT_CHUNK_SIZE,
              **sizes) -> list[TestReport]:
    """Run one suite by name, or every suite for ``"all"``.

    With ``"all"`` each size keyword goes to the suites that accept it.
    """
    if name != "all" and name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; expected one of {sorted(SUITES)} or 'all'")
    unknown = set(sizes) - suite_parameters(name)
    if unknown:
        raise TypeError(f"suite {name!r} does not accept {sorted(unknown)}")
    r = Runner(seed, workers, chunk_size)
    out = []
    for key in (SUITES if name == "all" else [name]):
        accepted = suite_parameters(key)
        out += bonferroni(SUITES[key](r, **{k: v for k, v in sizes.items() if k in accepted}))
    return out


def bonferroni(reports: list[TestReport]) -> list[TestReport]:
    """Divide the level of the p-value reports of one suite by their number."""
    m = sum(r.kind == "p-value" for r in reports)
    if m <= 1:
        return reports
    return [dataclasses.replace(r, threshold=r.threshold / m,
                                details={**r.details, "family_size": m, "alpha": r.threshold})
            if r.kind == "p-value" else r for r in reports]
