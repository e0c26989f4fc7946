import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import disk_points
from pointpair.geometry import DomainError, HalfSpace, PairSampler, ParameterError, PuncturedSpace, Strip, UnitBall, BallComplementInBox
from pointpair.metrics import gpp, j_star, t_metric, th_half_rho
from pointpair.search import (
    _mobius_image_gpp,
    _param_size,
    RadialStretch,
    conformal_distortion_check,
    conformal_factors,
    conjecture_scan,
    decode,
    encode,
    mobius_T,
    qr_apply,
    qr_distortion_rhs,
    quasiregular_check,
    refine_extremum,
)

B2 = UnitBall(2)


@pytest.mark.parametrize("d", [HalfSpace(2), HalfSpace(3), UnitBall(2), PuncturedSpace(2), Strip(2),
                               BallComplementInBox(2)])
def test_encode_decode_round_trip(d):
    xs, _ = PairSampler(d, seed=1, count=50).arrays()
    for x in xs:
        np.testing.assert_allclose(decode(d, encode(d, x)), x, rtol=1e-9, atol=1e-12)
    if isinstance(d, BallComplementInBox):
        return
    rng = np.random.default_rng(0)
    for w in rng.normal(scale=3.0, size=(50, _param_size(d))):
        assert d.contains(decode(d, w))


def test_refine_reaches_analytic_values():
    d = HalfSpace(2)
    r = refine_extremum(lambda x, y: float(gpp(d, 4, x, y) / j_star(d, x, y)), d, 4, starts=16, seed=0)
    assert r.best_value >= math.sqrt(2) - 1e-6
    r = refine_extremum(lambda x, y: float(gpp(d, 1, x, y) / t_metric(d, x, y)), d, 1, starts=16, seed=0)
    assert r.best_value >= 4 / math.sqrt(3) - 1e-4


def test_refine_constant_objective():
    r = refine_extremum(lambda x, y: 1.0, HalfSpace(2), starts=3, maximize=False)
    assert r.best_value == 1.0


def test_refine_is_deterministic_and_replayable():
    d = UnitBall(2)

    def f(x, y):
        return float(gpp(d, 2, x, y) / th_half_rho(d, x, y))

    a = refine_extremum(f, d, 2, starts=4, seed=5)
    b = refine_extremum(f, d, 2, starts=4, seed=5)
    assert a.best_value == b.best_value and a.witness == b.witness
    x, y = (np.array(p) for p in a.witness["points"])
    assert abs(f(x, y) - a.best_value) <= 1e-14


def test_refine_counts_rejected_starts():
    r = refine_extremum(lambda x, y: math.nan, HalfSpace(2), starts=4)
    assert r.rejected_starts == 4 and math.isnan(r.best_value)


def test_mobius_examples():
    assert mobius_T(0, 0.3 + 0.4j) == pytest.approx(0.3 + 0.4j)
    assert mobius_T(0.5, 0.5) == pytest.approx(0)
    assert mobius_T(0.5, 0) == pytest.approx(-0.5)
    with pytest.raises(DomainError):
        mobius_T(1.0, 0)
    with pytest.raises(DomainError):
        mobius_T(0.5, 1.0)


def test_mobius_preserves_hyperbolic_quantity():
    xs, ys = PairSampler(B2, seed=7, count=10000, radial_scale_decades=2).arrays()
    zx, zy = xs[:, 0] + 1j * xs[:, 1], ys[:, 0] + 1j * ys[:, 1]
    a = 0.4 - 0.3j
    tx, ty = mobius_T(a, zx), mobius_T(a, zy)
    before = np.abs(zx - zy) / np.abs(1 - zx * np.conj(zy))
    after = np.abs(tx - ty) / np.abs(1 - tx * np.conj(ty))
    depth = np.minimum.reduce([1 - np.abs(w) for w in (zx, zy, tx, ty)])
    # 1e-12 where well conditioned, widened by the rounding of 1 - z conj(w) near the circle
    tol = 1e-12 + 16 * np.finfo(float).eps / depth
    assert np.all(np.abs(after - before) <= tol)
    assert np.mean(depth > 1e-3) > 0.5
    well = depth > 1e-3
    np.testing.assert_allclose(after[well], before[well], rtol=0, atol=1e-12)


def test_stable_image_against_high_precision():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 40
    xs, ys = PairSampler(B2, seed=3, count=200).arrays()
    a = 0.6 + 0.2j
    got = _mobius_image_gpp(3.0, a, xs[:, 0] + 1j * xs[:, 1], ys[:, 0] + 1j * ys[:, 1])
    A = mpmath.mpc(a.real, a.imag)

    def p(u, v):
        e = abs(u - v)
        return e / mpmath.sqrt(e ** 2 + 3 * (1 - abs(u)) * (1 - abs(v)))

    for g, x, y in zip(got, xs, ys):
        u, v = mpmath.mpc(*x), mpmath.mpc(*y)
        exact = p((u - A) / (1 - mpmath.conj(A) * u), (v - A) / (1 - mpmath.conj(A) * v))
        # 1 - |x| in double carries an error of about eps / (1 - |x|) relative
        depth = min(1 - np.linalg.norm(x), 1 - np.linalg.norm(y))
        assert abs(g - float(exact)) <= (1e-13 + 1e-15 / depth) * float(exact)


def test_conjecture_scan_identity():
    r = conjecture_scan(2.0, 0.0, PairSampler(B2, seed=0, count=2000), refine=False)
    assert r.best_value == pytest.approx(1.0, abs=1e-14)
    assert r.extra["min_ratio"] == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ParameterError):
        conjecture_scan(2.0, 0.5, PairSampler(HalfSpace(2), count=10))


def test_conjecture_scan_small():
    r = conjecture_scan(1.0, 0.9, PairSampler(B2, seed=0, count=20000), refine=False)
    assert r.best_value <= 1.9 + 1e-6
    assert not r.extra["exceeds_upper"]


def test_qr_apply_examples():
    assert qr_apply(RadialStretch(1), 0.3 + 0.2j) == pytest.approx(0.3 + 0.2j)
    assert abs(qr_apply(RadialStretch(2), 0.5)) == pytest.approx(0.25)
    assert abs(qr_apply(RadialStretch(4), 0.9)) == pytest.approx(0.6561)
    assert qr_apply(RadialStretch(3), 0) == 0
    assert RadialStretch(4).c == 0.25 and RadialStretch(4).inner_dilatation == 4
    with pytest.raises(ParameterError):
        RadialStretch(0.5)


def test_qr_rhs_examples():
    assert qr_distortion_rhs(4, 1, 4, 0.3) == pytest.approx(0.6)
    assert qr_distortion_rhs(4, 0.5, 4, 0.25) == pytest.approx(math.sqrt(2))
    assert qr_distortion_rhs(4, 0.5, 4, 0.0) == 0.0
    with pytest.raises(ParameterError):
        qr_distortion_rhs(4, 0, 4, 0.2)


@pytest.mark.parametrize("alpha", [0.25, 1, 4, 9, 30])
def test_cor57_factor_reduces_to_conformal_factor(alpha):
    assert qr_distortion_rhs(alpha, 1.0, 4.0, 1.0) == pytest.approx(conformal_factors(alpha)[1], abs=0)


def test_quasiregular_and_conformal_checks():
    s = PairSampler(B2, seed=0, count=5000)
    for K in (1, 3):
        reps = quasiregular_check(RadialStretch(K), 4, s, 4.0)
        assert reps["thm5.6"].passed and reps["cor5.7"].passed
    assert conformal_distortion_check(4, 0.5, s).passed
    r = conformal_distortion_check(4, 0, s)
    assert r.passed and r.max_quotient == pytest.approx(1.0, abs=1e-14)


@given(disk_points(), disk_points(), st.floats(0, 0.95), st.floats(0, 2 * math.pi))
def test_mobius_distortion_within_conformal_factors(x, y, r, phi):
    a = r * complex(math.cos(phi), math.sin(phi))
    if np.allclose(x, y):
        return
    s = PairSampler(B2, count=1)
    lo, hi = conformal_factors(2.0)
    zx, zy = complex(*x), complex(*y)
    tx, ty = mobius_T(a, zx), mobius_T(a, zy)
    ratio = gpp(B2, 2.0, [tx.real, tx.imag], [ty.real, ty.imag]) / gpp(B2, 2.0, x, y)
    assert lo - 1e-9 <= ratio <= hi + 1e-9
