"""Result records shared by the verification and search routines."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field


def _min_opt(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _max_opt(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


@dataclass
class ViolationReport:
    """Outcome of checking one inequality over a stream of sampled pairs.

    Margins are ``lhs - lower_const * rhs`` and ``upper_const * rhs - lhs``;
    one-sided checks leave the unused side as ``None``.
    """

    bound_id: str
    domain: dict
    alpha: float
    samples: int
    tol: float
    lower_const: float | None
    upper_const: float | None
    worst_lower_margin: float | None = None
    lower_witness: list | None = None
    worst_upper_margin: float | None = None
    upper_witness: list | None = None
    max_quotient: float | None = None
    min_quotient: float | None = None
    beta: float | None = None
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(m is None or m >= -self.tol for m in (self.worst_lower_margin, self.worst_upper_margin))

    def merge(self, other: "ViolationReport") -> "ViolationReport":
        """Combine reports of disjoint sample streams (worst margins win)."""
        if (self.bound_id, self.alpha, self.beta) != (other.bound_id, other.alpha, other.beta):
            raise ValueError("can only merge reports of the same bound and parameters")
        out = ViolationReport(**{**asdict(self), "notes": list(self.notes)})
        out.samples = self.samples + other.samples
        for side in ("lower", "upper"):
            a, b = getattr(self, f"worst_{side}_margin"), getattr(other, f"worst_{side}_margin")
            m = _min_opt(a, b)
            setattr(out, f"worst_{side}_margin", m)
            src = self if m == a else other
            setattr(out, f"{side}_witness", getattr(src, f"{side}_witness"))
        out.max_quotient = _max_opt(self.max_quotient, other.max_quotient)
        out.min_quotient = _min_opt(self.min_quotient, other.min_quotient)
        out.notes = sorted(set(self.notes) | set(other.notes))
        return out

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


@dataclass
class SearchResult:
    """Best configuration found by a sampled sweep and/or multi-start refinement."""

    best_value: float
    witness: dict
    evaluations: int
    converged: bool
    rejected_starts: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def finite_or_none(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None
