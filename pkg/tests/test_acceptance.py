"""Acceptance criteria 1-10, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line with the measured
figures; the lines are repeated in the terminal summary by ``conftest.py``.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from pointpair.bounds import (
    antipodal_pair,
    assess_sharpness,
    estimate_quasimetric_constant,
    extremal_halfball_pair,
    extremal_halfspace_pair,
    extremal_limit_pair,
    extremal_strip_pair,
    get_bound,
    lemma43_witness,
    lower_limit_k,
    verify_bound,
)
from pointpair.geometry import BallComplementInBox, HalfSpace, PairSampler, PuncturedSpace, Strip, UnitBall
from pointpair.metrics import gpp, j_star, rho_half_space, s_metric, t_metric, th_half_rho
from pointpair.search import RadialStretch, conformal_factors, conjecture_scan, qr_distortion_rhs, quasiregular_check
from pointpair.specfun import ell_K, gamma2, lambda2_estimate

pytestmark = pytest.mark.acceptance

RESULTS = []
TOL = 1e-9
SEED = 7
LAMBDA2 = {}


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def campaign(b, d, alpha, count=100_000, beta=None):
    return verify_bound(b, d, alpha, PairSampler(d, seed=SEED, count=count), TOL, beta=beta)


def worst(reports):
    return min(min(m for m in (r.worst_lower_margin, r.worst_upper_margin) if m is not None) for r in reports)


def test_criterion_1_thm31():
    b = get_bound("thm3.1")
    alphas = [0.5, 1, 2, 4, 9, 16]
    domains = [HalfSpace(2), HalfSpace(3), UnitBall(2), PuncturedSpace(2), Strip(2)]
    reports = [campaign(b, d, a) for d in domains for a in alphas]
    margins_ok = all(r.passed for r in reports)

    strip, box = Strip(2), BallComplementInBox(2)
    witness_err = 0.0
    for a in alphas:
        target = math.sqrt((a + 4) / a)
        for d, (x, y) in ((HalfSpace(2), extremal_halfspace_pair(a, 2)), (HalfSpace(3), extremal_halfspace_pair(a, 3)),
                          (strip, extremal_strip_pair(a, strip)), (box, extremal_halfball_pair(a, box))):
            q = gpp(d, a, x, y) / j_star(d, x, y)
            witness_err = max(witness_err, abs(q - target))

    limit_err = 0.0
    for d in domains:
        for a in alphas:
            x, y = extremal_limit_pair(d, a, lower_limit_k(a))
            q = gpp(d, a, x, y) / j_star(d, x, y)
            limit_err = max(limit_err, abs(q - min(1.0, 2 / math.sqrt(a))))

    ok = margins_ok and witness_err <= 1e-12 and limit_err <= 1e-3
    record(1, ok, f"worst margin {worst(reports):.3g} over {len(reports)} cells, "
                  f"upper witness error {witness_err:.3g}, lower limit error {limit_err:.3g}")
    assert ok


def test_criterion_2_lem33():
    b = get_bound("lem3.3")
    reports = [campaign(b, PuncturedSpace(n), a) for n in (2, 3) for a in (1, 2, 4, 9, 16)]
    d = PuncturedSpace(2)
    x, y = antipodal_pair(d)
    eq_err = abs(gpp(d, 4, x, y) / j_star(d, x, y) - math.sqrt(2))
    ok = all(r.passed for r in reports) and eq_err <= 1e-12
    printed = [float(n.rsplit(" ", 1)[-1]) for r in reports for n in r.notes if n.startswith("printed lower")]
    record(2, ok, f"worst margin {worst(reports):.3g}, antipodal error {eq_err:.3g}; "
                  f"printed (swapped) lower constants give worst margin {min(printed):.3g}")
    assert ok


def test_criterion_3_hyperbolic_identity():
    err = 0.0
    for n in (2, 3):
        d = HalfSpace(n)
        xs, ys = PairSampler(d, seed=SEED, count=10_000).arrays()
        p = gpp(d, 4, xs, ys)
        err = max(err, float(np.max(np.abs(p - np.tanh(rho_half_space(xs, ys) / 2)))),
                  float(np.max(np.abs(p - th_half_rho(d, xs, ys)))))
    ok = err <= 1e-12
    record(3, ok, f"max |p^4 - th(rho/2)| = {err:.3g}")
    assert ok


def test_criterion_4_thm52():
    b = get_bound("thm5.2")
    d = UnitBall(2)
    alphas = [0.5, 1, 4, 9]
    reports = [campaign(b, d, a) for a in alphas]
    ratios = []
    for a in alphas:
        r = assess_sharpness(b, d, a, starts=8, seed=SEED, samples=20_000)
        ratios += [r["sides"]["upper"]["ratio"], r["sides"]["lower"]["ratio"]]
    ok = all(r.passed for r in reports) and min(ratios) >= 0.98 and max(ratios) <= 1 + 1e-9
    record(4, ok, f"worst margin {worst(reports):.3g}, sharpness ratios in [{min(ratios):.6f}, {max(ratios):.6f}]")
    assert ok


def test_criterion_5_lemmas_4x():
    alphas = [0.5, 1, 2, 4, 9, 16]
    domains = [HalfSpace(2), UnitBall(2), Strip(2), PuncturedSpace(2), BallComplementInBox(2)]
    reports, skipped = [], []
    for bid in ("lem4.1", "lem4.2", "lem4.2c", "lem4.3"):
        b = get_bound(bid)
        for d in domains:
            if not b.applicable(d):
                continue
            if bid == "lem4.2" and isinstance(d, BallComplementInBox):
                # s has no closed form there; the boundary search is too slow for 1e5 pairs
                skipped.append(f"{bid}@{d.tag}")
                continue
            reports += [campaign(b, d, a) for a in alphas]
    convex_domains = {r.domain["type"] for r in reports if r.bound_id == "lem4.2c"}

    wit_err = 0.0
    for d in (HalfSpace(2), UnitBall(2), Strip(2)):
        for a in (0.5, 1, 1.5):
            x, y = lemma43_witness(d, a)
            wit_err = max(wit_err, abs(gpp(d, a, x, y) / t_metric(d, x, y) - 4 / math.sqrt(a * (4 - a))))
    ok = all(r.passed for r in reports) and wit_err <= 1e-10
    record(5, ok, f"{len(reports)} cells, worst margin {worst(reports):.3g}, convex record on {sorted(convex_domains)}, "
                  f"t witness error {wit_err:.3g}, skipped {skipped}")
    assert ok


def test_criterion_6_s_oracle():
    rel = {}
    for d in (HalfSpace(2), Strip(2), PuncturedSpace(2), UnitBall(2)):
        xs, ys = PairSampler(d, seed=SEED, count=250).arrays()
        closed = s_metric(d, xs, ys)
        brute = s_metric(d, xs, ys, mode="brute_force")
        rel[d.tag] = float(np.max(np.abs(closed - brute) / np.maximum(brute, 1e-300)))
    ok = max(rel.values()) <= 1e-6
    record(6, ok, "max relative error " + ", ".join(f"{k} {v:.3g}" for k, v in rel.items()) + " (1000 pairs)")
    assert ok


def test_criterion_7_quasimetric():
    d = HalfSpace(2)
    results = {}
    for a in (1, 2, 4, 9, 16):
        r = estimate_quasimetric_constant(d, a, PairSampler(d, seed=SEED, count=1_000_000), starts=8)
        results[a] = r
    est4 = results[4].best_value
    in_range = 1.0 <= est4 <= math.sqrt(5) / 2 + 1e-6
    chain_ok = all(r.best_value <= r.extra["proof_chain_constant"] + 1e-6 for r in results.values())
    disc = all(r.extra["discrepancy"] == (a > 4) and ("note" in r.extra) == (a > 4) for a, r in results.items())
    ok = in_range and chain_ok and disc
    record(7, ok, f"alpha=4 estimate {est4:.15g}; estimates "
                  + ", ".join(f"{a}:{r.best_value:.6g}<={r.extra['proof_chain_constant']:.6g}" for a, r in results.items())
                  + f"; discrepancy flagged for alpha>4: {disc}")
    assert ok


def _K_quad(r):
    return quad(lambda t: 1 / math.sqrt(1 - (r * math.sin(t)) ** 2), 0, math.pi / 2, epsabs=0, epsrel=1e-13)[0]


def test_criterion_8_special_functions():
    k0 = abs(ell_K(0) - math.pi / 2)
    agm_rel = max(abs(ell_K(r) - _K_quad(r)) / _K_quad(r) for r in np.arange(1, 10) / 10)
    g = abs(gamma2(math.sqrt(2)) - 4)
    est = lambda2_estimate(1e8)
    LAMBDA2["value"] = est.lambda2
    ok = k0 <= 1e-12 and agm_rel <= 1e-10 and g <= 1e-10 and 3.99 <= est.lambda2 <= 4.01
    record(8, ok, f"|K(0)-pi/2| {k0:.3g}, AGM vs quadrature {agm_rel:.3g}, |gamma2(sqrt2)-4| {g:.3g}, "
                  f"lambda2 {est.lambda2:.15g}")
    assert ok


def test_criterion_9_conjecture():
    disk = UnitBall(2)
    rows, ok = [], True
    for alpha in (1, 4, 9):
        for mod in (0.3, 0.6, 0.9):
            r = conjecture_scan(alpha, complex(mod, 0), PairSampler(disk, seed=SEED, count=100_000), starts=8)
            bound = 1 + mod
            cell = r.best_value <= bound + 1e-6 and r.best_value >= 0.98 * bound
            ok &= cell
            rows.append(f"({alpha},{mod}) {r.best_value / bound:.6f}")
    record(9, ok, "sup/(1+|a|): " + ", ".join(rows))
    assert ok


def test_criterion_10_quasiregular():
    lam = LAMBDA2.get("value") or lambda2_estimate(1e8).lambda2
    disk = UnitBall(2)
    margins = []
    for alpha in (1, 4, 9):
        sampler = PairSampler(disk, seed=SEED, count=10_000)
        for K in (1, 2, 4):
            reps = quasiregular_check(RadialStretch(K), alpha, sampler, lam, TOL)
            margins += [reps["thm5.6"].worst_upper_margin, reps["cor5.7"].worst_upper_margin]
    factor_eq = all(float(qr_distortion_rhs(a, 1.0, lam, 1.0)) == conformal_factors(a)[1] for a in (1, 4, 9))
    ok = min(margins) >= -1e-9 and factor_eq
    record(10, ok, f"worst margin {min(margins):.3g} over {len(margins)} checks, K=1 factor equals conformal factor: "
                   f"{factor_eq}")
    assert ok
