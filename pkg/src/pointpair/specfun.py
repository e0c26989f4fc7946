"""Complete elliptic integral K, the planar Grötzsch capacity and the constant lambda_2."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import ParameterError

# omega_1, the length of the unit circle
OMEGA_1 = 2.0 * math.pi
LOG_LAMBDA2_THRESHOLD = 1e-12


def agm(a: float, b: float) -> float:
    """Arithmetic-geometric mean of two positive numbers."""
    if not (a > 0 and b > 0) or not (math.isfinite(a) and math.isfinite(b)):
        raise ParameterError(f"agm needs positive finite arguments, got {a!r}, {b!r}")
    a, b = float(a), float(b)
    for _ in range(64):
        if abs(a - b) <= 1e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def ell_K(r: float) -> float:
    """Complete elliptic integral of the first kind with modulus ``r`` in [0, 1)."""
    if not 0.0 <= r < 1.0:
        raise ParameterError(f"K(r) needs 0 <= r < 1, got {r!r}")
    return math.pi / (2.0 * agm(1.0, math.sqrt((1.0 - r) * (1.0 + r))))


def ell_K_complement(r: float) -> float:
    """``K(sqrt(1 - r^2))`` for r in (0, 1], computed without forming the complementary modulus.

    Since ``K(k) = pi / (2 agm(1, k'))``, the complementary integral is
    ``pi / (2 agm(1, r))``, which stays accurate as r -> 0 where
    ``sqrt(1 - r^2)`` rounds to 1.
    """
    if not 0.0 < r <= 1.0:
        raise ParameterError(f"K'(r) needs 0 < r <= 1, got {r!r}")
    return math.pi / (2.0 * agm(1.0, r))


def gamma2(t: float) -> float:
    """Capacity of the planar Grötzsch ring, ``4 K(1/t) / K(sqrt(1 - 1/t^2))``."""
    if not (math.isfinite(t) and t > 1.0):
        raise ParameterError(f"gamma2 needs t > 1, got {t!r}")
    r = 1.0 / t
    return 4.0 * ell_K(r) / ell_K_complement(r)


@dataclass
class LambdaEstimate:
    t_values: list
    estimates: list
    extrapolated: float
    converged: bool
    # the literal orientation (gamma2/omega_1)^(n-1) - log t, which diverges for n = 2
    literal: list = field(default_factory=list)

    @property
    def lambda2(self) -> float:
        return math.exp(self.extrapolated)

    def to_dict(self):
        return {
            "t_values": self.t_values,
            "log_lambda2_estimates": self.estimates,
            "log_lambda2": self.extrapolated,
            "lambda2": self.lambda2,
            "converged": self.converged,
            "literal_orientation": self.literal,
        }


def lambda2_estimate(t_max: float = 1e8, points_per_decade: int = 2) -> LambdaEstimate:
    """Estimate ``log lambda_2 = lim (omega_1 / gamma2(t) - log t)`` on a geometric grid up to ``t_max``.

    The companion list ``literal`` holds ``gamma2(t)/omega_1 - log t`` on the
    same grid for comparison.
    """
    if not math.isfinite(t_max) or t_max <= 1.0:
        raise ParameterError(f"t_max must be a finite number above 1, got {t_max!r}")
    decades = math.log10(t_max)
    first = min(1.0, decades / 2)
    ts = np.logspace(first, decades, max(2, int(math.ceil((decades - first) * points_per_decade)) + 1))
    est = [OMEGA_1 / gamma2(t) - math.log(t) for t in ts]
    literal = [gamma2(t) / OMEGA_1 - math.log(t) for t in ts]
    converged = t_max >= 100.0 and abs(est[-1] - est[-2]) < LOG_LAMBDA2_THRESHOLD
    return LambdaEstimate([float(t) for t in ts], est, est[-1], converged, literal)
