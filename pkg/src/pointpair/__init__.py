"""Generalized point pair function: metrics, bound catalog, extremal searches and a CLI."""

from .bounds import catalog, check_pair, get_bound, verify_bound
from .geometry import (
    BallComplementInBox,
    DomainError,
    HalfSpace,
    PairSampler,
    ParameterError,
    PuncturedSpace,
    Strip,
    UnitBall,
    make_domain,
)
from .metrics import MetricId, gpp, j_star, s_metric, t_metric, th_half_rho

__version__ = "0.1.0"
