"""The generalized point pair function and the hyperbolic-type metrics it is compared with.

All functions broadcast over leading axes of the point arrays.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .geometry import (
    BallComplementInBox,
    Domain,
    DomainError,
    HalfSpace,
    ParameterError,
    PuncturedSpace,
    Strip,
    UnitBall,
    as_point,
    norm,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
ARC_STARTS = 16
ARC_TOL = 1e-10
BRUTE_STARTS = 3


class ClosedFormUnavailable(UserWarning):
    """Emitted when ``s_metric`` falls back to the brute-force route."""


def _pair(d: Domain, x, y):
    x = d.check_interior(as_point(x, d.n))
    y = d.check_interior(as_point(y, d.n))
    return x, y


def _check_alpha(alpha):
    if not (np.isfinite(alpha) and alpha > 0):
        raise ParameterError(f"alpha must be positive and finite, got {alpha!r}")


def gpp(d: Domain, alpha: float, x, y):
    """Generalized point pair function ``|x-y| / sqrt(|x-y|^2 + alpha d(x) d(y))``."""
    _check_alpha(alpha)
    x, y = _pair(d, x, y)
    # grouping keeps the value exactly symmetric in x and y
    return _pair_ratio(norm(x - y), alpha * (d._dist(x) * d._dist(y)))


def _pair_ratio(e, prod):
    """``e / sqrt(e^2 + prod)``; the square-root-of-ratio form rounds better, the plain one covers underflow."""
    e2 = e * e
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.sqrt(e2 / (e2 + prod))
        plain = e / np.sqrt(e2 + prod)
    return np.where(e2 > 0, ratio, plain)[()]


def point_pair(d: Domain, x, y):
    return gpp(d, 4.0, x, y)


def j_metric(d: Domain, x, y):
    x, y = _pair(d, x, y)
    return np.log1p(norm(x - y) / np.minimum(d._dist(x), d._dist(y)))


def j_star(d: Domain, x, y):
    x, y = _pair(d, x, y)
    e = norm(x - y)
    return e / (e + 2.0 * np.minimum(d._dist(x), d._dist(y)))


def t_metric(d: Domain, x, y):
    x, y = _pair(d, x, y)
    e = norm(x - y)
    return e / (e + d._dist(x) + d._dist(y))


def rho_half_space(x, y):
    """Hyperbolic distance in the upper half-space."""
    x = as_point(x)
    d = HalfSpace(x.shape[-1])
    x, y = _pair(d, x, y)
    # ch(rho) - 1 = 2 sh^2(rho/2)
    return 2.0 * np.arcsinh(norm(x - y) / (2.0 * np.sqrt(x[..., -1] * y[..., -1])))


def rho_ball(x, y):
    """Hyperbolic distance in the unit ball."""
    x = as_point(x)
    d = UnitBall(x.shape[-1])
    x, y = _pair(d, x, y)
    sx = 1.0 - np.sum(x * x, axis=-1)
    sy = 1.0 - np.sum(y * y, axis=-1)
    return 2.0 * np.arcsinh(norm(x - y) / np.sqrt(sx * sy))


def th_half_rho(d: Domain, x, y):
    """``th(rho/2)`` for the half-space or the unit ball, from the algebraic form."""
    x, y = _pair(d, x, y)
    e = norm(x - y)
    if isinstance(d, HalfSpace):
        return _pair_ratio(e, 4.0 * (x[..., -1] * y[..., -1]))
    if isinstance(d, UnitBall):
        sx = 1.0 - np.sum(x * x, axis=-1)
        sy = 1.0 - np.sum(y * y, axis=-1)
        return _pair_ratio(e, sx * sy)
    raise ParameterError(f"the hyperbolic metric is only available on halfspace and ball, not {d.tag}")


# -- triangular ratio metric ------------------------------------------------------


def _golden_min(f, a, b, iters):
    """Vectorized golden-section search on the intervals ``[a, b]``; returns the minimum values."""
    fa, fb = f(a), f(b)
    c = b - GOLDEN * (b - a)
    e = a + GOLDEN * (b - a)
    fc, fe = f(c), f(e)
    for _ in range(iters):
        left = fc < fe
        b = np.where(left, e, b)
        a = np.where(left, a, c)
        c, e = np.where(left, b - GOLDEN * (b - a), e), np.where(left, c, a + GOLDEN * (b - a))
        new = np.where(left, c, e)
        fn = f(new)
        fc, fe = np.where(left, fn, fe), np.where(left, fc, fn)
    return np.minimum(np.minimum(fa, fb), np.minimum(fc, fe))


# sub-arcs are at most pi / ARC_STARTS wide; a fixed count keeps batched and
# single-pair evaluations bitwise identical
ARC_ITERS = int(math.ceil(math.log(ARC_TOL / (math.pi / ARC_STARTS)) / math.log(GOLDEN))) + 1


def _sphere_path_min(x, y, radius):
    """``min_{|z| = radius} |x-z| + |z-y|`` for point arrays ``x``, ``y`` (centre at the origin).

    The problem lives in the plane through 0, x and y. Writing x on the
    positive real axis, the minimizer lies on the short arc between the
    directions of x and y (reflecting across the line through 0 orthogonal to
    the arc midpoint never increases either distance), which is split into
    ``ARC_STARTS`` sub-arcs, each searched by golden sections.
    """
    rx = norm(x)
    ry = norm(y)
    safe_rx = np.where(rx > 0, rx, 1.0)
    e1 = x / safe_rx[..., None]
    b = np.sum(y * e1, axis=-1)
    # orthogonal part taken directly; sqrt(|y|^2 - b^2) cancels for nearly parallel x, y
    w = norm(y - b[..., None] * e1)
    zx = np.where(rx > 0, rx, 0.0).astype(complex)
    zy = np.where(rx > 0, b + 1j * w, ry + 0j)
    theta_y = np.where(rx > 0, np.angle(zy), 0.0)
    lo = np.where(rx > 0, 0.0, theta_y)

    k = np.arange(ARC_STARTS)
    a = lo[..., None] + (theta_y - lo)[..., None] * k / ARC_STARTS
    bb = lo[..., None] + (theta_y - lo)[..., None] * (k + 1) / ARC_STARTS
    zx_, zy_ = zx[..., None], zy[..., None]

    def f(t):
        z = radius * np.exp(1j * t)
        return np.abs(zx_ - z) + np.abs(zy_ - z)

    vals = _golden_min(f, a, bb, ARC_ITERS)
    return vals.min(axis=-1)


def _segment_path_min(x, y, axis, value, lo, hi):
    """Minimum of ``|x-z| + |z-y|`` over the planar segment ``z[axis] = value``, other coordinate in [lo, hi]."""
    other = 1 - axis
    ha = x[..., axis] - value
    hb = y[..., axis] - value
    # the unconstrained minimizer is where the segment from x to the mirror of y crosses the line
    denom = np.abs(ha) + np.abs(hb)
    t = np.where(denom > 0, np.abs(ha) / np.where(denom > 0, denom, 1.0), 0.5)
    u = x[..., other] + t * (y[..., other] - x[..., other])
    u = np.clip(u, lo, hi)
    z = np.empty(x.shape)
    z[..., axis] = value
    z[..., other] = u
    return norm(x - z) + norm(z - y)


def _s_closed_denominator(d: Domain, x, y):
    if isinstance(d, HalfSpace):
        return norm(x - d.reflect(y))
    if isinstance(d, Strip):
        return np.minimum(norm(x - d.reflect(y, 0)), norm(x - d.reflect(y, 1)))
    if isinstance(d, PuncturedSpace):
        c = d.points
        total = norm(np.expand_dims(x, -2) - c) + norm(np.expand_dims(y, -2) - c)
        return total.min(axis=-1)
    if isinstance(d, UnitBall):
        return _sphere_path_min(x, y, 1.0)
    if isinstance(d, BallComplementInBox) and d.n == 2:
        best = _sphere_path_min(x, y, d.radius)
        lo, hi = d.lower, d.upper
        for axis in (0, 1):
            other = 1 - axis
            for value in (lo[axis], hi[axis]):
                best = np.minimum(best, _segment_path_min(x, y, axis, value, lo[other], hi[other]))
        return best
    return None


def _brute_denominator_single(d: Domain, x, y):
    best = math.inf
    for pts, params, lift in d.boundary_patches(x, y):
        vals = norm(pts - x) + norm(pts - y)
        best = min(best, float(vals.min()))
        if lift is None:
            continue

        def obj(u):
            z = lift(u)
            if z is None:
                return math.inf
            return float(norm(z - x) + norm(z - y))

        for i in np.argsort(vals)[:BRUTE_STARTS]:
            res = minimize(obj, params[i], method="Nelder-Mead",
                           options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 4000})
            best = min(best, float(res.fun))
    return best


def s_metric(d: Domain, x, y, mode: str = "closed_form"):
    """Triangular ratio metric ``|x-y| / inf_{z in boundary} (|x-z| + |z-y|)``.

    ``mode="brute_force"`` minimizes over a dense boundary sample followed by
    Nelder-Mead refinement, one pair at a time; it serves as the oracle for the
    closed forms. Variants without a closed form fall back to it with a
    :class:`ClosedFormUnavailable` warning.
    """
    if mode not in ("closed_form", "brute_force"):
        raise ParameterError(f"unknown mode {mode!r}")
    x, y = _pair(d, x, y)
    x, y = np.broadcast_arrays(x, y)
    e = norm(x - y)
    den = None
    if mode == "closed_form":
        den = _s_closed_denominator(d, x, y)
        if den is None:
            warnings.warn(f"no closed form for s on {d.label()}; using brute force", ClosedFormUnavailable,
                          stacklevel=2)
    if den is None:
        flat_x = x.reshape(-1, d.n)
        flat_y = y.reshape(-1, d.n)
        den = np.array([_brute_denominator_single(d, a, b) for a, b in zip(flat_x, flat_y)]).reshape(e.shape)
    # never below |x-y| by the triangle inequality; guards the last ulp
    den = np.maximum(den, e)
    return np.where(e > 0, e / np.where(den > 0, den, 1.0), 0.0)


# -- metric identifiers -------------------------------------------------------------

METRIC_TAGS = ("gpp", "pointpair", "j", "jstar", "s", "t", "rho_halfspace", "rho_ball", "th_half_rho")


@dataclass(frozen=True)
class MetricId:
    """Names one metric; ``gpp`` carries its ``alpha`` (``pointpair`` is ``gpp`` with alpha 4)."""

    tag: str
    alpha: float | None = None

    def __post_init__(self):
        if self.tag not in METRIC_TAGS:
            raise ParameterError(f"unknown metric {self.tag!r}; choose from {METRIC_TAGS}")
        if self.tag == "pointpair":
            object.__setattr__(self, "tag", "gpp")
            object.__setattr__(self, "alpha", 4.0)
        if self.tag == "gpp" and self.alpha is not None:
            _check_alpha(self.alpha)

    def bind(self, alpha):
        return MetricId(self.tag, alpha) if self.tag == "gpp" else self

    def __str__(self):
        return f"gpp({self.alpha:g})" if self.tag == "gpp" and self.alpha is not None else self.tag

    def evaluate(self, d: Domain, x, y):
        if self.tag == "gpp":
            if self.alpha is None:
                raise ParameterError("gpp needs an alpha")
            return gpp(d, self.alpha, x, y)
        if self.tag == "j":
            return j_metric(d, x, y)
        if self.tag == "jstar":
            return j_star(d, x, y)
        if self.tag == "s":
            return s_metric(d, x, y)
        if self.tag == "t":
            return t_metric(d, x, y)
        if self.tag == "th_half_rho":
            return th_half_rho(d, x, y)
        if self.tag == "rho_halfspace":
            if not isinstance(d, HalfSpace):
                raise DomainError("rho_halfspace needs the half-space")
            return rho_half_space(x, y)
        if not isinstance(d, UnitBall):
            raise DomainError("rho_ball needs the unit ball")
        return rho_ball(x, y)
