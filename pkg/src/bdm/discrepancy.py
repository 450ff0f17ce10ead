"""Discrepancy measure and the threshold test built on it.

For a scalar posterior with distribution function G and a hypothesized value
theta_H, the discrepancy is

    delta_H = 1 - 2 min{G(theta_H), 1 - G(theta_H)},

twice the posterior mass between the median and theta_H.  For a hypothesis
phi(theta) = phi_H that splits the parameter space in two, the same formula
uses the posterior masses of the two sides.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import ClassVar

from .numerics import DEFAULT_QUADRATURE, DomainError, Interval, QuadratureSpec, RngStream
from .posteriors import (
    JointPosterior,
    PartitioningHypothesis,
    PartitionProbabilities,
    ScalarPosterior,
    partition_probabilities,
)

__all__ = [
    "AtomError",
    "Decision",
    "DiscrepancyResult",
    "Threshold",
    "bdm_via_discrepancy_interval",
    "bdm_via_external_interval",
    "bdt_decide",
    "frequentist_pvalue_relation",
    "hypothesis_bdm",
    "partition_bdm",
    "scalar_bdm",
]


class AtomError(DomainError):
    """The posterior puts positive mass on the hypothesized value."""


class Decision(str, enum.Enum):
    REJECT = "reject"
    NOT_REJECT = "not-reject"


@dataclass(frozen=True)
class Threshold:
    """Critical value omega; the test rejects when delta > omega."""

    omega: float = 0.95
    PRESETS: ClassVar[tuple[float, ...]] = (0.95, 0.99, 0.995, 0.999)

    def __post_init__(self):
        if not (0.0 < self.omega < 1.0):
            raise DomainError(f"omega must lie in (0, 1), got {self.omega}")

    @classmethod
    def presets(cls) -> list["Threshold"]:
        return [cls(w) for w in cls.PRESETS]


@dataclass(frozen=True)
class DiscrepancyResult:
    """Discrepancy of a hypothesis plus what it was computed from.

    Scalar results carry the median, G(theta_H) and both intervals; partition
    results carry the two side probabilities.
    """

    delta: float
    theta_H: float | None = None
    median: float | None = None
    cdf_at_h: float | None = None
    discrepancy_interval: Interval | None = None
    external_interval: Interval | None = None
    partition: PartitionProbabilities | None = None

    def __post_init__(self):
        if not (0.0 <= self.delta <= 1.0) or math.isnan(self.delta):
            raise DomainError(f"delta {self.delta} outside [0, 1]")

    @property
    def external_mass(self) -> float:
        return 0.5 * (1.0 - self.delta)

    def decision_at(self, omega: float | Threshold = 0.95) -> Decision:
        return bdt_decide(self, omega if isinstance(omega, Threshold) else Threshold(omega))

    def as_dict(self) -> dict:
        d: dict = {"delta": self.delta}
        if self.theta_H is not None:
            d.update(theta_H=self.theta_H, median=self.median, cdf_at_h=self.cdf_at_h,
                     discrepancy_interval=list(self.discrepancy_interval.as_tuple()),
                     external_interval=list(self.external_interval.as_tuple()))
        if self.partition is not None:
            d["partition"] = self.partition.as_dict()
        return d


def _check_theta(post: ScalarPosterior, theta_H: float) -> float:
    theta_H = float(theta_H)
    if math.isnan(theta_H) or not (post.support.lo <= theta_H <= post.support.hi):
        raise DomainError(f"theta_H = {theta_H} lies outside the support {post.support.as_tuple()}")
    if theta_H in getattr(post, "atoms", ()):
        raise AtomError(f"posterior has an atom at {theta_H}; only continuous posteriors are handled")
    return theta_H


def _intervals(post: ScalarPosterior, theta_H: float, median: float):
    lo, hi = post.support.lo, post.support.hi
    if theta_H < median:
        return Interval(theta_H, median), Interval(lo, theta_H)
    # tie: the external interval is reported on the right by convention
    return Interval(median, theta_H), Interval(theta_H, hi)


def scalar_bdm(post: ScalarPosterior, theta_H: float) -> DiscrepancyResult:
    """Discrepancy of H: theta = theta_H from the posterior distribution function.

    Examples
    --------
    >>> from bdm.posteriors import exp_jeffreys_posterior
    >>> round(scalar_bdm(exp_jeffreys_posterior(6, 7.2), 2.4).delta, 3)
    0.832
    """
    theta_H = _check_theta(post, theta_H)
    g = float(post.cdf(theta_H))
    s = float(post.sf(theta_H))
    median = post.median()
    delta = 1.0 - 2.0 * min(g, s)
    delta = min(max(delta, 0.0), 1.0)
    i_h, i_e = _intervals(post, theta_H, median)
    return DiscrepancyResult(delta, theta_H, median, g, i_h, i_e)


def bdm_via_discrepancy_interval(post: ScalarPosterior, theta_H: float,
                                 spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """2 x (posterior mass of the interval between median and theta_H), by quadrature."""
    theta_H = _check_theta(post, theta_H)
    i_h, _ = _intervals(post, theta_H, post.median())
    return 2.0 * post.mass(i_h.lo, i_h.hi, spec)


def bdm_via_external_interval(post: ScalarPosterior, theta_H: float,
                              spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """1 - 2 x (posterior mass of the tail beyond theta_H), by quadrature."""
    theta_H = _check_theta(post, theta_H)
    _, i_e = _intervals(post, theta_H, post.median())
    return 1.0 - 2.0 * post.mass(i_e.lo, i_e.hi, spec)


def partition_bdm(pp: PartitionProbabilities) -> DiscrepancyResult:
    """delta = 1 - 2 min{P(Theta_a), P(Theta_b)}."""
    delta = min(max(1.0 - 2.0 * min(pp.p_a, pp.p_b), 0.0), 1.0)
    return DiscrepancyResult(delta, partition=pp)


def hypothesis_bdm(post: JointPosterior | ScalarPosterior, hyp: PartitioningHypothesis,
                   method: str = "quadrature", rng: RngStream | None = None,
                   draws: int = 50_000) -> DiscrepancyResult:
    return partition_bdm(partition_probabilities(post, hyp, method, rng, draws))


def bdt_decide(result: DiscrepancyResult | float, threshold: Threshold = Threshold()) -> Decision:
    """Reject iff delta > omega (strictly)."""
    delta = result.delta if isinstance(result, DiscrepancyResult) else float(result)
    return Decision.REJECT if delta > threshold.omega else Decision.NOT_REJECT


def frequentist_pvalue_relation(delta: float) -> float:
    """The p-value 1 - delta that a matching prior reproduces."""
    if not (0.0 <= delta <= 1.0):
        raise DomainError("delta must lie in [0, 1]")
    return 1.0 - delta
