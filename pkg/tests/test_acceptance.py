"""Acceptance criteria, one test each, at the stated sizes and tolerances.

Every test prints a single ``[criterion k] PASS|FAIL ...`` line; the
collected lines are repeated in the terminal summary.
"""
import json
import time

import numpy as np
import pytest

from lmfractal import cascade as cc
from lmfractal.cli import main
from lmfractal.io import strip_timestamp
from lmfractal.lmf import LmfModel, mbm_analog_preset
from lmfractal.levy import DeterministicDrift
from lmfractal.stationary import OrnsteinUhlenbeck
from lmfractal import suites

SEED = 42
RESULTS = []


def record(k, ok, elapsed, limit, detail):
    bound = "no time limit" if limit is None else f"limit {limit:g}s"
    line = f"[criterion {k:2d}] {'PASS' if ok else 'FAIL'}  {detail}  ({elapsed:.2f}s, {bound})"
    RESULTS.append(line)
    print(line)
    return line


@pytest.fixture
def runner():
    return suites.Runner(SEED)


def by_name(reports):
    return {r.name: r for r in reports}


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def test_criterion_01_inverse_lamperti(runner):
    reps, dt = timed(suites.inverse_lamperti_suite, runner, n_exact=1000)
    r = by_name(reps)["inverse-lamperti/pathwise"]
    ok = r.value <= 1e-12 and dt < 1 and r.details["n_paths"] == 1000
    record(1, ok, dt, 1, f"max rel err {r.value:.2e} <= 1e-12 over 1000 paths")
    assert ok


def test_criterion_02_scaling_algebra(runner):
    reps, dt = timed(suites.scaling_family_suite, runner, n_ks=10_000, n_cf=1_000)
    r = by_name(reps)
    unit, mult, div = (r["scaling-family/unit-scale"], r["scaling-family/multiplicativity"],
                       r["scaling-family/divisibility"])
    # KS level asserted on the raw p-value, outside any family correction
    ok = (unit.value == 0 and mult.value <= 1e-12 and div.value > 0.01 and dt < 10
          and div.details["n_x"] == 10_000)
    record(2, ok, dt, 10, f"M(1,t)!=1 count {unit.value:g}; multiplicativity {mult.value:.1e}; "
                          f"n=4 divisibility KS p={div.value:.3f}")
    assert ok


def test_criterion_03_levy_marginal(runner):
    reps, dt = timed(suites.scaling_family_suite, runner, n_ks=1_000, n_cf=100_000)
    cf = [r for r in reps if r.name.startswith("scaling-family/marginal-cf/")]
    ok = len(cf) == 2 and all(r.value <= 4 for r in cf) and dt < 30
    record(3, ok, dt, 30, "CF deviations " + ", ".join(f"{r.name.split('/')[-1]}: "
                                                       f"{r.value:.2f} SE" for r in cf))
    assert ok


def test_criterion_04_moment_scaling(runner):
    model = mbm_analog_preset(0.5, T=1.0)
    rep, dt = timed(suites.moment_scaling_report, runner, model, 200_000,
                    times=suites.DYADIC_TIMES, qs=(0.5, 1.0, 2.0, 3.0), k_se=3.0, abs_tol=0.05)
    ok = bool(np.all(rep.passed)) and rep.times.size == 9 and dt < 120
    record(4, ok, dt, 120, "; ".join(f"q={q:g}: |tau - ref|={d:.4f} <= {t:.4f}"
                                     for q, d, t in zip(rep.qs, rep.deviations, rep.tolerances)))
    assert ok


def test_criterion_05_covariance(runner):
    reps, dt = timed(suites.covariance_suite, runner, n=200_000)
    r = by_name(reps)
    cov, inc = r["covariance/min(t,s)/T"], r["covariance/increments-uncorrelated"]
    ok = cov.value <= 3 and inc.value <= 3 and dt < 120 and suites.COV_TIMES.size == 6
    record(5, ok, dt, 120, f"max |cov - min(t,s)/T| = {cov.value:.2f} SE; "
                           f"max increment cov = {inc.value:.2f} SE")
    assert ok


def test_criterion_06_self_similar(runner):
    model = LmfModel(DeterministicDrift(0.3), OrnsteinUhlenbeck(1.0))
    rep, dt = timed(suites.moment_scaling_report, runner, model, 20_000,
                    reference=lambda q: 0.3 * q, k_se=3.0, abs_tol=0.0,
                    label="acceptance-selfsim")
    z = rep.deviations / rep.ses
    ok = bool(np.all(rep.passed)) and dt < 60
    record(6, ok, dt, 60, f"max |tau - 0.3 q| / SE = {z.max():.2f} <= 3")
    assert ok


def test_criterion_07_cascade_measures():
    cases = suites.cascade_measure_cases()
    reps, dt = timed(suites.cascade_geometry_reports, cases)
    worst = max(r.value for r in reps)
    ok = len(cases) >= 20 and worst <= 1e-6 and dt < 30
    record(7, ok, dt, 30, f"{len(cases)} combinations, max |closed - numeric| = {worst:.1e}")
    assert ok


def test_criterion_08_cascade_mean_and_scaling(runner):
    reps, dt = timed(suites.cascade_simulation_reports, runner, n_replicas=10_000,
                     variance=0.2)
    r = by_name(reps)
    mean, q2 = r["cascade-measures/mean"], r["cascade-measures/scaling/q=2.0"]
    ok = (mean.value <= 3 and q2.value <= 4 and dt < 180
          and q2.details["reference"] == pytest.approx(2 - 0.2))
    record(8, ok, dt, 180, f"mean {mean.value:.2f} SE; q=2 exponent "
                           f"{q2.details['estimate']:.4f} vs 1.8 ({q2.value:.2f} SE)")
    assert ok


def test_criterion_09_non_levy(runner):
    reps, dt = timed(suites.cascade_cf_suite, runner)
    r = by_name(reps)
    gaps = [cc.non_levy_gap(cc.CascadeSpec(variance=v)) for v in (0.1, 0.2, 0.4)]
    ok = (all(g > 0 for g in gaps) and r["cascade-cf/gap-zero-degenerate"].value == 0
          and r["cascade-cf/marginals-coincide"].value <= 1e-14 and all(x.verdict for x in reps)
          and dt < 1)
    record(9, ok, dt, 1, "gaps " + ", ".join(f"{g:.3f}" for g in gaps)
           + f"; v=0 gap {r['cascade-cf/gap-zero-degenerate'].value:g}; marginal diff "
             f"{r['cascade-cf/marginals-coincide'].value:.1e}")
    assert ok


def test_criterion_10_gamma_formula():
    rep, dt = timed(suites.gamma_formula_report)
    ok = rep.value <= 1e-12 and dt < 1
    record(10, ok, dt, 1, f"max abs error {rep.value:.1e} over h in [0, 20]")
    assert ok


def test_criterion_11_mellin(runner):
    reps, dt = timed(suites.mellin_suite, runner, n=100_000)
    ok = len(reps) == 4 and all(r.value <= 4 for r in reps) and dt < 10
    record(11, ok, dt, 10, "deviations " + ", ".join(f"{r.value:.2f}" for r in reps) + " SE")
    assert ok


def test_criterion_12_reproducibility(tmp_path):
    t0 = time.perf_counter()
    cfg = tmp_path / "exp.yaml"
    texts = {}
    for chunk in (4096, 1000):
        cfg.write_text(f"seed: {SEED}\nensemble: {{chunk_size: {chunk}}}\n")
        for workers in (1, 4):
            out = tmp_path / f"c{chunk}-w{workers}"
            assert main(["verify", "all", "--config", str(cfg), "--workers", str(workers),
                         "--out", str(out)]) in (0, 1)
            texts[chunk, workers] = (out / "verify-all.json").read_text()
    dt = time.perf_counter() - t0
    same = all(strip_timestamp(texts[c, 1]) == strip_timestamp(texts[c, 4]) for c in (4096, 1000))
    n = len(json.loads(texts[4096, 1])["reports"])
    record(12, same, dt, None,
           f"verify all ({n} reports), workers 1 vs 4, chunk sizes 4096 and 1000: byte-equal "
           "after dropping the timestamp line")
    assert same
