"""Points, canonical domains, boundary-distance oracles and seeded pair samplers.

Every routine is vectorized over leading axes: a point array has shape
``(..., n)`` and scalar-valued results have shape ``(...)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

MIN_DIM = 2
MAX_DIM = 8

# pairs closer than this (relative to the local scale) are re-drawn
PAIR_EPS = 1e-12

_MAX_REDRAW_ROUNDS = 200


class DomainError(ValueError):
    """A point lies on or outside the boundary of the domain."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ParameterError(ValueError):
    """A numeric parameter is outside its admissible range."""


def norm(v):
    """Euclidean norm over the last axis.

    Summation order is fixed so that batched and single evaluations agree
    bit for bit.
    """
    v = np.asarray(v, dtype=float)
    return np.sqrt(np.sum(v * v, axis=-1))


def as_point(coords, dim: int | None = None) -> np.ndarray:
    """Validate ``coords`` and return them as a float array of shape ``(..., n)``."""
    x = np.asarray(coords, dtype=float)
    if x.ndim == 0:
        raise ValueError("a point needs at least two coordinates")
    n = x.shape[-1]
    if n < MIN_DIM:
        raise ValueError(f"points must have dimension >= {MIN_DIM}, got {n}")
    if dim is not None and n != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point coordinates must be finite")
    return x


def _unit_vectors(rng, m, n):
    v = rng.standard_normal((m, n))
    return v / norm(v)[:, None]


def _check_dim(n):
    if not isinstance(n, (int, np.integer)) or not MIN_DIM <= n <= MAX_DIM:
        raise ParameterError(f"dimension must be an integer in [{MIN_DIM}, {MAX_DIM}], got {n!r}")


@dataclass(frozen=True)
class Domain:
    """Base class of the supported proper subdomains of R^n."""

    n: int

    tag = "domain"
    convex = False

    def __post_init__(self):
        _check_dim(self.n)

    # -- membership and distance -------------------------------------------------

    def _contains(self, x):
        raise NotImplementedError

    def _dist(self, x):
        raise NotImplementedError

    def _nearest(self, x):
        raise NotImplementedError

    def contains(self, x):
        """True where ``x`` is an interior point."""
        x = as_point(x, self.n)
        return self._contains(x) & (self._dist(x) > 0)

    def check_interior(self, x) -> np.ndarray:
        x = as_point(x, self.n)
        inside = self.contains(x)
        if not np.all(inside):
            bad = np.asarray(x)[~inside] if x.ndim > 1 else x
            witness = np.atleast_2d(bad)[0].tolist()
            raise DomainError(f"point {witness} is not interior to {self.label()}", witness)
        return x

    def dist_to_boundary(self, x):
        return self._dist(self.check_interior(x))

    def nearest_boundary_point(self, x):
        return self._nearest(self.check_interior(x))

    # -- description ------------------------------------------------------------

    def describe(self) -> dict:
        return {"type": self.tag, "n": self.n}

    def label(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.describe().items() if k != "type")
        return f"{self.tag}({params})"

    # -- sampling ---------------------------------------------------------------

    def sample_points(self, rng, m, decades):
        raise NotImplementedError

    def base_point(self):
        """Canonical interior point used by the normal-ray constructions."""
        raise NotImplementedError

    # -- boundary patches for brute-force searches ------------------------------

    def boundary_patches(self, x, y):
        """List of ``(points, params, lift)`` triples covering the boundary.

        ``points`` are boundary samples, ``params`` their parameter vectors and
        ``lift`` maps one unconstrained parameter vector to a boundary point.
        Finite boundary sets use ``params = lift = None``.
        """
        raise NotImplementedError


@dataclass(frozen=True)
class HalfSpace(Domain):
    """Upper half-space ``x_n > 0``."""

    tag = "halfspace"
    convex = True

    def _contains(self, x):
        return x[..., -1] > 0

    def _dist(self, x):
        return x[..., -1].copy()

    def _nearest(self, x):
        z = np.array(x, dtype=float, copy=True)
        z[..., -1] = 0.0
        return z

    def reflect(self, y, face=0):
        if face != 0:
            raise ParameterError("a half-space has a single face (0)")
        z = np.array(y, dtype=float, copy=True)
        z[..., -1] = -z[..., -1]
        return z

    def sample_points(self, rng, m, decades):
        h = 10.0 ** rng.uniform(-decades, decades, m)
        scale = 10.0 ** rng.uniform(-decades, decades, (m, 1))
        lateral = rng.uniform(-1.0, 1.0, (m, self.n - 1)) * scale
        return np.column_stack([lateral, h])

    def base_point(self):
        b = np.zeros(self.n)
        b[-1] = 1.0
        return b

    def boundary_patches(self, x, y):
        lat = np.vstack([x[:-1], y[:-1]])
        span = abs(x[-1]) + abs(y[-1]) + norm(x - y)
        lo, hi = lat.min(axis=0) - span, lat.max(axis=0) + span
        u = _window_samples(lo, hi, self.n - 1, lat)
        return [(np.column_stack([u, np.zeros(len(u))]), u, lambda v: np.append(v, 0.0))]


@dataclass(frozen=True)
class UnitBall(Domain):
    """Unit ball ``|x| < 1``."""

    tag = "ball"
    convex = True

    def _contains(self, x):
        return norm(x) < 1.0

    def _dist(self, x):
        return 1.0 - norm(x)

    def _nearest(self, x):
        r = norm(x)
        e1 = np.zeros(self.n)
        e1[0] = 1.0
        safe = np.where(r > 0, r, 1.0)
        z = x / np.expand_dims(safe, -1)
        return np.where(np.expand_dims(r > 0, -1), z, e1)

    def sample_points(self, rng, m, decades):
        u = _unit_vectors(rng, m, self.n)
        uniform = rng.uniform(0.0, 1.0, m) ** (1.0 / self.n)
        near = 1.0 - 10.0 ** rng.uniform(-decades, 0.0, m)
        r = np.where(rng.random(m) < 0.5, uniform, near)
        return u * r[:, None]

    def base_point(self):
        return np.zeros(self.n)

    def boundary_patches(self, x, y):
        n = self.n
        if n == 2:
            t = np.linspace(0.0, 2 * np.pi, 4096, endpoint=False)
            samples = np.column_stack([np.cos(t), np.sin(t)])
        else:
            rng = np.random.default_rng(12345)
            samples = _unit_vectors(rng, 20000, n)
        samples = np.vstack([samples, _radial_anchors(np.zeros(n), x, y)])
        return [(samples, samples, _sphere_lift(np.zeros(n), 1.0))]


@dataclass(frozen=True)
class PuncturedSpace(Domain):
    """R^n with finitely many points removed."""

    punctures: tuple = ()

    tag = "punctured"
    convex = False

    def __post_init__(self):
        super().__post_init__()
        pts = tuple(tuple(float(c) for c in p) for p in self.punctures) or (tuple([0.0] * self.n),)
        object.__setattr__(self, "punctures", pts)
        arr = np.array(pts)
        if arr.shape[1] != self.n or not np.all(np.isfinite(arr)):
            raise ParameterError("punctures must be finite points of the domain dimension")
        if len(set(pts)) != len(pts):
            raise ParameterError("punctures must be distinct")

    @property
    def points(self):
        return np.array(self.punctures)

    def _offsets(self, x):
        return norm(np.expand_dims(x, -2) - self.points)

    def _contains(self, x):
        return np.ones(x.shape[:-1], dtype=bool)

    def _dist(self, x):
        return self._offsets(x).min(axis=-1)

    def _nearest(self, x):
        # argmin returns the first index, i.e. the lowest label, on ties
        return self.points[self._offsets(x).argmin(axis=-1)]

    def describe(self):
        return {"type": self.tag, "n": self.n, "punctures": [list(p) for p in self.punctures]}

    def _scale(self):
        if len(self.punctures) == 1:
            return 1.0
        d = norm(self.points[:, None, :] - self.points[None, :, :])
        return float(d[d > 0].min()) / 2

    def sample_points(self, rng, m, decades):
        idx = rng.integers(0, len(self.punctures), m)
        r = self._scale() * 10.0 ** rng.uniform(-decades, decades, m)
        return self.points[idx] + _unit_vectors(rng, m, self.n) * r[:, None]

    def base_point(self):
        b = self.points[0].copy()
        b[0] += self._scale()
        return b

    def boundary_patches(self, x, y):
        return [(self.points, None, None)]


@dataclass(frozen=True)
class Strip(Domain):
    """Slab ``0 < x_1 < 2r``; it contains a ball whose diameter ends on both faces."""

    half_width: float = 1.0

    tag = "strip"
    convex = True

    def __post_init__(self):
        super().__post_init__()
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise ParameterError("half_width must be positive and finite")

    @property
    def width(self):
        return 2.0 * self.half_width

    def _contains(self, x):
        return (x[..., 0] > 0) & (x[..., 0] < self.width)

    def _dist(self, x):
        return np.minimum(x[..., 0], self.width - x[..., 0])

    def _nearest(self, x):
        z = np.array(x, dtype=float, copy=True)
        # face 0 (x_1 = 0) wins ties
        far = self.width - x[..., 0] < x[..., 0]
        z[..., 0] = np.where(far, self.width, 0.0)
        return z

    def reflect(self, y, face=0):
        z = np.array(y, dtype=float, copy=True)
        if face == 0:
            z[..., 0] = -z[..., 0]
        elif face == 1:
            z[..., 0] = 2 * self.width - z[..., 0]
        else:
            raise ParameterError("strip faces are 0 (x_1 = 0) and 1 (x_1 = 2r)")
        return z

    def describe(self):
        return {"type": self.tag, "n": self.n, "half_width": self.half_width}

    def sample_points(self, rng, m, decades):
        r = self.half_width
        x1 = rng.uniform(0.0, self.width, m)
        gap = r * 10.0 ** rng.uniform(-decades, 0.0, m)
        near = np.where(rng.random(m) < 0.5, gap, self.width - gap)
        x1 = np.where(rng.random(m) < 0.5, x1, near)
        spread = r * 10.0 ** rng.uniform(-1.0, decades / 2, (m, 1))
        rest = rng.uniform(-1.0, 1.0, (m, self.n - 1)) * spread
        return np.column_stack([x1, rest])

    def base_point(self):
        b = np.zeros(self.n)
        b[0] = self.half_width
        return b

    def boundary_patches(self, x, y):
        lat = np.vstack([x[1:], y[1:]])
        span = self.width + norm(x - y)
        lo, hi = lat.min(axis=0) - span, lat.max(axis=0) + span
        u = _window_samples(lo, hi, self.n - 1, lat)
        w = self.width
        return [
            (np.column_stack([np.zeros(len(u)), u]), u, lambda v: np.concatenate([[0.0], v])),
            (np.column_stack([np.full(len(u), w), u]), u, lambda v: np.concatenate([[w], v])),
        ]


@dataclass(frozen=True)
class BallComplementInBox(Domain):
    """Open box ``(0, 2L) x (-L, L)^(n-1)`` minus the closed ball ``B(0, r)``.

    The removed ball is centred on the face ``x_1 = 0``, so the domain is not
    convex. Any point ``(0, c, 0, ...)`` of that face with ``r < c < L`` is the
    centre of a half-ball of radius ``(L - r) / 2`` that lies in the domain
    and has a diameter on the boundary.
    """

    half_side: float = 3.0
    radius: float = 1.0

    tag = "boxminusball"
    convex = False

    def __post_init__(self):
        super().__post_init__()
        L, r = self.half_side, self.radius
        if not (math.isfinite(L) and math.isfinite(r) and L > 0 and r > 0):
            raise ParameterError("half_side and radius must be positive and finite")
        if r >= L:
            raise ParameterError("the removed ball must meet only the face x_1 = 0 (need radius < half_side)")

    @property
    def lower(self):
        lo = np.full(self.n, -self.half_side)
        lo[0] = 0.0
        return lo

    @property
    def upper(self):
        return np.full(self.n, self.half_side) + np.eye(self.n)[0] * self.half_side

    def _face_gaps(self, x):
        # face order: (axis 0, low), (axis 0, high), (axis 1, low), ...
        lo = x - self.lower
        hi = self.upper - x
        return np.stack([lo, hi], axis=-1).reshape(x.shape[:-1] + (2 * self.n,))

    def _contains(self, x):
        in_box = np.all((x > self.lower) & (x < self.upper), axis=-1)
        return in_box & (norm(x) > self.radius)

    def _dist(self, x):
        return np.minimum(self._face_gaps(x).min(axis=-1), norm(x) - self.radius)

    def _nearest(self, x):
        gaps = self._face_gaps(x)
        k = gaps.argmin(axis=-1)
        face_d = np.take_along_axis(gaps, k[..., None], -1)[..., 0]
        axis, side = k // 2, k % 2
        z_face = np.array(x, dtype=float, copy=True)
        bounds = np.where(side == 0, self.lower[axis], self.upper[axis])
        np.put_along_axis(z_face, axis[..., None], bounds[..., None], -1)
        r = norm(x)
        z_ball = x * np.expand_dims(self.radius / r, -1)
        use_ball = (r - self.radius) < face_d
        return np.where(use_ball[..., None], z_ball, z_face)

    def describe(self):
        return {"type": self.tag, "n": self.n, "half_side": self.half_side, "radius": self.radius}

    def halfball(self):
        """Centre and radius of the canonical boundary half-ball (centre on ``x_1 = 0``)."""
        c = np.zeros(self.n)
        c[1] = (self.radius + self.half_side) / 2
        return c, (self.half_side - self.radius) / 2

    def sample_points(self, rng, m, decades):
        out = np.empty((0, self.n))
        while len(out) < m:
            cand = rng.uniform(self.lower, self.upper, (2 * m, self.n))
            out = np.vstack([out, cand[self._contains(cand)]])
        x = out[:m]
        z = self._nearest(x)
        t = 10.0 ** rng.uniform(-decades, 0.0, m)
        shrunk = z + (x - z) * t[:, None]
        keep = rng.random(m) < 0.5
        return np.where(keep[:, None], x, shrunk)

    def base_point(self):
        b = np.zeros(self.n)
        b[0] = self.half_side
        return b

    def boundary_patches(self, x, y):
        patches = []
        lo, hi = self.lower, self.upper
        for axis in range(self.n):
            others = [i for i in range(self.n) if i != axis]
            feet = np.clip(np.vstack([x[others], y[others]]), lo[others], hi[others])
            u = _window_samples(lo[others], hi[others], self.n - 1, feet)
            for value in (lo[axis], hi[axis]):
                pts = np.insert(u, axis, value, axis=1)
                patches.append((pts, u, _face_lift(axis, value, lo[others], hi[others])))
        unit = UnitBall(self.n).boundary_patches(x / self.radius, y / self.radius)[0][0]
        patches.append((unit * self.radius, unit, _sphere_lift(np.zeros(self.n), self.radius)))
        return patches


def _window_samples(lo, hi, k, anchors=None):
    """Boundary parameters on a window; ``anchors`` (feet of the query points) are always included."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    if k == 1:
        u = np.linspace(lo[0], hi[0], 4097)[:, None]
    else:
        rng = np.random.default_rng(2024)
        u = rng.uniform(lo, hi, (20000, k))
    if anchors is not None:
        u = np.vstack([u, np.asarray(anchors, float).reshape(-1, k)])
    return u


def _radial_anchors(center, *pts):
    out = [(p - center) / norm(p - center) for p in pts if norm(p - center) > 0]
    return np.array(out).reshape(-1, len(center))


def _sphere_lift(center, radius):
    def lift(v):
        r = norm(v)
        if r == 0:
            return None
        return center + radius * v / r
    return lift


def _face_lift(axis, value, lo, hi):
    def lift(u):
        u = np.clip(u, lo, hi)
        return np.insert(u, axis, value)
    return lift


DOMAIN_TYPES = {
    "halfspace": HalfSpace,
    "ball": UnitBall,
    "punctured": PuncturedSpace,
    "strip": Strip,
    "boxminusball": BallComplementInBox,
}


def make_domain(kind: str, n: int = 2, **params) -> Domain:
    try:
        cls = DOMAIN_TYPES[kind]
    except KeyError:
        raise ParameterError(f"unknown domain {kind!r}; choose from {sorted(DOMAIN_TYPES)}") from None
    return cls(n, **params)


def dist_to_boundary(d: Domain, x):
    return d.dist_to_boundary(x)


def nearest_boundary_point(d: Domain, x):
    return d.nearest_boundary_point(x)


def reflect_across_nearest_face(d: Domain, y, face=0):
    """Mirror ``y`` across a boundary hyperplane of a half-space or a strip."""
    if not isinstance(d, (HalfSpace, Strip)):
        raise ParameterError(f"reflection is only defined for half-spaces and strips, not {d.tag}")
    return d.reflect(d.check_interior(y), face)


@dataclass(frozen=True)
class PairSampler:
    """Deterministic stream of interior point pairs.

    Pairs are drawn from a mixture of four regimes so that both
    boundary-adjacent and scale-separated configurations occur: independent
    points, a local perturbation of ``x``, a point on the normal ray through
    ``x`` and its nearest boundary point, and two points pushed towards the
    boundary.
    """

    domain: Domain
    seed: int = 0
    radial_scale_decades: int = 6
    count: int = 1000
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def _rng(self, salt=0):
        return np.random.default_rng([int(self.seed) & (2**64 - 1), salt])

    def arrays(self):
        """Return ``(X, Y)`` of shape ``(count, n)``."""
        if "pairs" not in self._cache:
            self._cache["pairs"] = _draw_pairs(self.domain, self._rng(0), self.count, self.radial_scale_decades)
        x, y = self._cache["pairs"]
        return x.copy(), y.copy()

    def __iter__(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        x, y = self.arrays()
        for i in range(len(x)):
            yield x[i], y[i]

    def triples(self):
        """Return ``(X, Y, Z)``; ``Z`` is drawn near ``X``, near the segment ``XY`` or independently."""
        if "triples" not in self._cache:
            self._cache["triples"] = _draw_triples(self.domain, self._rng(1), self.count, self.radial_scale_decades)
        return tuple(a.copy() for a in self._cache["triples"])

    def split(self, k: int) -> list["PairSampler"]:
        """Independent sub-streams with seeds derived from this sampler's seed."""
        seqs = np.random.SeedSequence(int(self.seed)).spawn(k)
        per, extra = divmod(self.count, k)
        return [
            PairSampler(self.domain, int(s.generate_state(1, np.uint64)[0]), self.radial_scale_decades,
                        per + (i < extra))
            for i, s in enumerate(seqs)
        ]


def sample_pair(s: PairSampler):
    """Iterate over the sampler's pairs."""
    return iter(s)


def _interior(d, x):
    ok = np.all(np.isfinite(x), axis=-1)
    safe = np.where(ok[:, None], x, d.base_point())
    return ok & d._contains(safe) & (d._dist(safe) > 0)


def _draw_pairs(d: Domain, rng, m, decades):
    xs = np.empty((m, d.n))
    ys = np.empty((m, d.n))
    todo = np.arange(m)
    for _ in range(_MAX_REDRAW_ROUNDS):
        k = len(todo)
        if k == 0:
            return xs, ys
        x = d.sample_points(rng, k, decades)
        y = _partner(d, rng, x, decades)
        good = _interior(d, x) & _interior(d, y)
        dx, dy = d._dist(np.where(good[:, None], x, d.base_point())), d._dist(np.where(good[:, None], y, d.base_point()))
        good &= norm(x - y) >= PAIR_EPS * np.maximum(dx, dy)
        xs[todo[good]], ys[todo[good]] = x[good], y[good]
        todo = todo[~good]
    raise RuntimeError("pair sampler exceeded its redraw budget")


def _partner(d, rng, x, decades):
    k = len(x)
    mode = rng.integers(0, 4, k)
    indep = d.sample_points(rng, k, decades)
    dx = d._dist(x)
    step = dx * 10.0 ** rng.uniform(-decades, 0.5, k)
    local = x + _unit_vectors(rng, k, d.n) * step[:, None]
    z = d._nearest(x)
    ray = z + (x - z) * (10.0 ** rng.uniform(-decades / 2, decades / 2, k))[:, None]
    zi = d._nearest(indep)
    pushed = zi + (indep - zi) * (10.0 ** rng.uniform(-decades, 0.0, k))[:, None]
    out = np.select([mode[:, None] == 0, mode[:, None] == 1, mode[:, None] == 2], [indep, local, ray], pushed)
    return out


def _draw_triples(d: Domain, rng, m, decades):
    x, y = _draw_pairs(d, rng, m, decades)
    z = np.empty_like(x)
    todo = np.arange(m)
    for _ in range(_MAX_REDRAW_ROUNDS):
        k = len(todo)
        if k == 0:
            return x, y, z
        xa, ya = x[todo], y[todo]
        mode = rng.integers(0, 3, k)
        t = rng.uniform(0.0, 1.0, (k, 1))
        sep = norm(xa - ya)
        seg = xa + t * (ya - xa) + _unit_vectors(rng, k, d.n) * (sep * 10.0 ** rng.uniform(-decades, 0.0, k))[:, None]
        near = xa + _unit_vectors(rng, k, d.n) * (d._dist(xa) * 10.0 ** rng.uniform(-decades, 0.5, k))[:, None]
        indep = d.sample_points(rng, k, decades)
        cand = np.select([mode[:, None] == 0, mode[:, None] == 1], [seg, near], indep)
        good = _interior(d, cand)
        z[todo[good]] = cand[good]
        todo = todo[~good]
    raise RuntimeError("triple sampler exceeded its redraw budget")
