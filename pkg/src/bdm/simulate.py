"""Monte-Carlo calibration studies for the discrepancy test and the e-value.

Under H true, delta is uniform on (0, 1) for the exponential model with the
Jeffreys prior, so the test rejecting at delta > omega has size 1 - omega.
The studies here check that, and the drift of delta towards 1 as n grows
when H is false.

Replication ``r`` at sample size ``n`` draws from its own stream
(``stream_id = n * 2**32 + r``), so results do not depend on how
replications are split across workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .fbst import ReferenceFunction, e_value_scalar_mc
from .numerics import DomainError, RngStream
from .posteriors import exp_jeffreys_posterior, poisson_jeffreys_posterior

__all__ = [
    "KSResult",
    "METHODS",
    "RateTable",
    "SimulationPlan",
    "TrendTable",
    "bdm_trend",
    "false_positive_study",
    "ks_critical_value",
    "ks_statistic",
    "simulate_measures",
    "uniformity_study",
]

METHODS = ("bdm", "ev-flat", "ev-prior")
FAMILIES = ("exp", "poisson")


@dataclass(frozen=True)
class SimulationPlan:
    """Design of a replication study.

    ``family`` is "exp" (mean theta) or "poisson" (rate lambda), both under
    their Jeffreys priors.  ``draws`` is only used by the Monte-Carlo
    e-value route (``ev_method="monte-carlo"``).
    """

    family: str = "exp"
    theta_star: float = 1.2
    theta_h: float = 1.2
    sample_sizes: tuple[int, ...] = (10, 100, 1000)
    replications: int = 5000
    draws: int = 5000
    omegas: tuple[float, ...] = (0.90, 0.95, 0.99)
    seed: int = 0
    ev_method: str = "level-set"

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        if self.family not in FAMILIES:
            raise DomainError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.replications < 100:
            raise DomainError("at least 100 replications are required")
        if not self.sample_sizes or min(self.sample_sizes) < 1:
            raise DomainError("sample sizes must be positive")
        if not (self.theta_star > 0 and self.theta_h > 0):
            raise DomainError("theta_star and theta_h must be positive")
        if any(not (0.0 < w < 1.0) for w in self.omegas):
            raise DomainError("thresholds must lie in (0, 1)")
        if self.ev_method not in ("level-set", "monte-carlo"):
            raise DomainError("ev_method must be 'level-set' or 'monte-carlo'")
        if self.draws < 1:
            raise DomainError("draws must be positive")

    def stream_id(self, n: int, rep: int) -> int:
        return int(n) * 2**32 + int(rep)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["sample_sizes"] = list(self.sample_sizes)
        d["omegas"] = list(self.omegas)
        return d


def _sufficient_sum(plan: SimulationPlan, n: int, rep: int) -> float:
    rng = RngStream(plan.seed, plan.stream_id(n, rep))
    if plan.family == "exp":
        return float(rng.exponential(plan.theta_star, n).sum())
    return float(rng.poisson(plan.theta_star, n).sum())


def _levelset_args(family: str, n: int, sums: np.ndarray, theta_h: float, ref: str):
    if family == "exp":
        a = np.full_like(sums, float(n))
        k = a + 1.0 if ref == "flat" else a
        return a, k, sums / theta_h
    a = sums + 0.5
    k = a - 1.0 if ref == "flat" else sums
    return a, k, np.full_like(sums, n * theta_h)


def _measures_chunk(plan: SimulationPlan, n: int, reps: range) -> np.ndarray:
    """(len(reps), 3) array of delta, ev_flat, ev_prior."""
    sums = np.array([_sufficient_sum(plan, n, r) for r in reps], dtype=float)
    out = np.empty((sums.size, 3))
    for j, ref in enumerate(("flat", "prior")):
        ev, delta = kernels.gamma_levelset_array(*_levelset_args(plan.family, n, sums, plan.theta_h, ref))
        out[:, 1 + j] = ev
        if j == 0:
            out[:, 0] = delta
    if plan.ev_method == "monte-carlo":
        for i, (r, s) in enumerate(zip(reps, sums)):
            post = (exp_jeffreys_posterior(n, s) if plan.family == "exp"
                    else poisson_jeffreys_posterior(n, s))
            base = RngStream(plan.seed, plan.stream_id(n, r)).child(1)
            for j, ref in enumerate((ReferenceFunction.flat(), ReferenceFunction.prior())):
                out[i, 1 + j] = e_value_scalar_mc(post, ref, plan.theta_h, plan.draws,
                                                  base.child(j)).ev_bar
    return out


def simulate_measures(plan: SimulationPlan, n: int, workers: int | None = None,
                      chunk: int = 1000) -> np.ndarray:
    """delta, ev_flat and ev_prior for every replication at sample size ``n``."""
    chunks = [range(s, min(s + chunk, plan.replications)) for s in range(0, plan.replications, chunk)]
    if workers and workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_measures_chunk, [plan] * len(chunks), [n] * len(chunks), chunks))
    else:
        parts = [_measures_chunk(plan, n, c) for c in chunks]
    return np.concatenate(parts, axis=0)


@dataclass
class RateTable:
    """Rejection rates keyed by (method, omega, n) with binomial standard errors."""

    plan: SimulationPlan
    cells: dict = field(default_factory=dict)

    def rate(self, method: str, omega: float, n: int) -> float:
        return self.cells[(method, float(omega), int(n))][0]

    def std_err(self, method: str, omega: float, n: int) -> float:
        return self.cells[(method, float(omega), int(n))][1]

    def rows(self) -> list[dict]:
        return [{"method": m, "omega": w, "n": n, "rate": r, "std_err": se,
                 "replications": self.plan.replications}
                for (m, w, n), (r, se) in sorted(self.cells.items(),
                                                 key=lambda kv: (kv[0][1], kv[0][2], METHODS.index(kv[0][0])))]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["method", "omega", "n", "rate", "std_err", "replications"],
                           lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow({**row, "rate": f"{row['rate']:.6g}", "std_err": f"{row['std_err']:.6g}"})
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"plan": self.plan.as_dict(), "rates": self.rows()}, indent=2, sort_keys=True)

    def within_band(self, k: float = 3.0) -> bool:
        """Every rate within k binomial standard deviations of its nominal 1 - omega."""
        s = self.plan.replications
        return all(abs(r - (1 - w)) <= k * math.sqrt((1 - w) * w / s)
                   for (_, w, _), (r, _) in self.cells.items())


def false_positive_study(plan: SimulationPlan, workers: int | None = None) -> RateTable:
    """Rejection rate of each measure at each threshold and sample size.

    With theta_star = theta_h the rates are false-positive rates and should
    sit near 1 - omega.
    """
    table = RateTable(plan)
    s = plan.replications
    for n in plan.sample_sizes:
        m = simulate_measures(plan, n, workers)
        for j, method in enumerate(METHODS):
            for w in plan.omegas:
                r = float(np.count_nonzero(m[:, j] > w)) / s
                table.cells[(method, w, n)] = (r, math.sqrt(r * (1 - r) / s))
    return table


# -------------------------------------------------------------- uniformity

def ks_statistic(u) -> float:
    """Two-sided Kolmogorov-Smirnov distance of a sample from Unif(0, 1)."""
    u = np.sort(np.asarray(u, dtype=float))
    m = u.size
    if m == 0:
        raise DomainError("empty sample")
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - u), np.max(u - (i - 1) / m)))


def ks_critical_value(m: int, level: float = 0.01) -> float:
    """Asymptotic critical value sqrt(-ln(level/2) / 2) / sqrt(m)."""
    if not (0.0 < level < 1.0):
        raise DomainError("level must lie in (0, 1)")
    return math.sqrt(-0.5 * math.log(level / 2.0)) / math.sqrt(m)


@dataclass(frozen=True)
class KSResult:
    n: int
    statistic: float
    critical_value: float
    level: float
    replications: int

    @property
    def passed(self) -> bool:
        return self.statistic <= self.critical_value

    def as_dict(self) -> dict:
        return {"n": self.n, "statistic": self.statistic, "critical_value": self.critical_value,
                "level": self.level, "replications": self.replications, "pass": self.passed}


def uniformity_study(plan: SimulationPlan, level: float = 0.01,
                     workers: int | None = None) -> list[KSResult]:
    """KS test of delta against Unif(0, 1), one result per sample size."""
    out = []
    for n in plan.sample_sizes:
        deltas = simulate_measures(plan, n, workers)[:, 0]
        out.append(KSResult(n, ks_statistic(deltas), ks_critical_value(deltas.size, level),
                            level, plan.replications))
    return out


# ------------------------------------------------------------------ trend

@dataclass
class TrendTable:
    """delta(n, mean) on a grid for a fixed theta_h."""

    theta_h: float
    mle_values: list
    n_range: list
    values: np.ndarray  # shape (len(mle_values), len(n_range))

    def column(self, mle: float) -> np.ndarray:
        return self.values[self.mle_values.index(mle)]

    def rows(self) -> list[dict]:
        return [{"mle": m, "n": n, "delta": float(self.values[i, j])}
                for i, m in enumerate(self.mle_values) for j, n in enumerate(self.n_range)]

    def to_csv(self) -> str:
        lines = ["mle,n,delta"] + [f"{r['mle']:g},{r['n']},{r['delta']:.6g}" for r in self.rows()]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({"theta_h": self.theta_h, "rows": self.rows()}, indent=2)


def bdm_trend(mle_values, n_range, theta_h: float = 2.4) -> TrendTable:
    """delta for the exponential model with sufficient statistic n * mean."""
    mle_values = [float(m) for m in mle_values]
    n_range = [int(n) for n in n_range]
    if min(mle_values) <= 0 or min(n_range) < 1:
        raise DomainError("means must be positive and sample sizes at least 1")
    vals = np.empty((len(mle_values), len(n_range)))
    for i, m in enumerate(mle_values):
        for j, n in enumerate(n_range):
            # posterior of w = n m / theta is Gamma(n, 1); delta needs only its tails
            _, vals[i, j] = kernels.gamma_levelset(float(n), float(n), n * m / theta_h)
    return TrendTable(theta_h, mle_values, n_range, vals)
