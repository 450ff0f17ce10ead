"""E-value of the Full Bayesian Significance Test, for comparison with delta.

The surprise function is s(theta) = g1(theta | x) / r(theta) with a flat
reference (r = 1) or the prior as reference (r = g0, used unnormalized).
With s* the supremum of s over the null set, the evidence against H is the
posterior mass of the tangential set {theta : s(theta) > s*}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .numerics import (
    DomainError,
    Interval,
    NonConvergenceError,
    RngStream,
    find_root,
    maximize_1d,
    prescan_bracket,
)
from .posteriors import JointPosterior, ScalarPosterior

__all__ = [
    "EValueResult",
    "NullCurve",
    "ReferenceFunction",
    "e_value_exponential",
    "e_value_mc",
    "e_value_poisson",
    "e_value_scalar",
    "e_value_scalar_mc",
    "log_surprise",
    "surprise",
]


@dataclass(frozen=True)
class ReferenceFunction:
    """``kind`` is "flat" (r = 1) or "prior" (r = the posterior's prior density)."""

    kind: str = "flat"

    def __post_init__(self):
        if self.kind not in ("flat", "prior"):
            raise DomainError(f"reference kind must be 'flat' or 'prior', got {self.kind!r}")

    @classmethod
    def flat(cls) -> "ReferenceFunction":
        return cls("flat")

    @classmethod
    def prior(cls) -> "ReferenceFunction":
        return cls("prior")

    def log_value(self, post, theta):
        if self.kind == "flat":
            return np.zeros(np.shape(theta)[:-1] if isinstance(post, JointPosterior)
                            else np.shape(theta))
        if isinstance(post, ScalarPosterior) and not post.has_prior:
            raise DomainError("posterior carries no prior to use as reference")
        return np.asarray(post.log_prior(theta), dtype=float)


@dataclass(frozen=True)
class EValueResult:
    """Evidence against H (``ev_bar``) with the surprise level that defines it.

    ``log_s_star`` is ln s* up to the additive constant of an unnormalized
    reference.  ``tangential`` is the level-set interval in the scalar case.
    """

    ev_bar: float
    log_s_star: float
    reference: str
    method: str
    draws: int | None = None
    mc_std_err: float | None = None
    tangential: Interval | None = None
    argmax: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.ev_bar <= 1.0):
            raise DomainError(f"ev_bar {self.ev_bar} outside [0, 1]")

    @property
    def ev(self) -> float:
        """Evidence in favour of H."""
        return 1.0 - self.ev_bar

    @property
    def s_star(self) -> float:
        return math.exp(self.log_s_star)

    def as_dict(self) -> dict:
        d = {"ev_bar": self.ev_bar, "log_s_star": self.log_s_star, "reference": self.reference,
             "method": self.method}
        if self.draws is not None:
            d.update(draws=self.draws, mc_std_err=self.mc_std_err)
        if self.tangential is not None:
            d["tangential"] = list(self.tangential.as_tuple())
        return d


def _in_support(post, theta) -> bool:
    th = np.asarray(theta, dtype=float)
    if isinstance(post, ScalarPosterior):
        return bool(np.all((th >= post.support.lo) & (th <= post.support.hi)))
    return all(bool(np.all((th[..., i] >= s.lo) & (th[..., i] <= s.hi)))
               for i, s in enumerate(post.support))


def log_surprise(post: ScalarPosterior | JointPosterior, ref: ReferenceFunction, theta):
    """ln s(theta) = ln g1(theta | x) - ln r(theta), vectorized."""
    with np.errstate(all="ignore"):
        val = np.asarray(post.log_density(theta), dtype=float) - ref.log_value(post, theta)
    val = np.where(np.isnan(val), -np.inf, val)
    return float(val) if val.ndim == 0 else val


def surprise(post, ref: ReferenceFunction, theta):
    if not _in_support(post, theta):
        raise DomainError("theta lies outside the posterior support")
    return np.exp(log_surprise(post, ref, theta))


# ------------------------------------------------------------ scalar case

def _scan_bracket(post: ScalarPosterior) -> tuple[float, float]:
    w = post.working
    lo = float(w.forward(post.quantile(1e-12)))
    hi = float(w.forward(post.quantile(1 - 1e-12)))
    pad = hi - lo
    return lo - pad, hi + pad


def e_value_scalar(post: ScalarPosterior, ref: ReferenceFunction, theta_H: float) -> EValueResult:
    """E-value of H: theta = theta_H by level-set root finding.

    The surprise is maximized in the posterior's working coordinate (a
    64-point pre-scan rejects surprise functions with several peaks), then
    the second crossing of the level s(theta_H) is found on the far side of
    the maximizer.  ev_bar is the posterior mass between the two crossings.
    """
    theta_H = float(theta_H)
    if not (post.support.lo <= theta_H <= post.support.hi):
        raise DomainError(f"theta_H = {theta_H} lies outside the support")
    w = post.working

    def ls(u):
        return log_surprise(post, ref, w.inverse(u))

    lo, hi = _scan_bracket(post)
    prescan_bracket(ls, (lo, hi), 64)  # raises on several local maxima
    u_mode, ls_max = maximize_1d(lambda u: float(ls(u)), (lo, hi), tol=1e-12)
    ls_h = float(log_surprise(post, ref, theta_H))
    u_h = float(w.forward(theta_H))
    if ls_h == -math.inf:
        return EValueResult(1.0, ls_h, ref.kind, "level-set", tangential=post.support,
                            argmax=float(w.inverse(u_mode)))
    if ls_h >= ls_max - 1e-13 * max(1.0, abs(ls_max)):
        return EValueResult(0.0, ls_h, ref.kind, "level-set",
                            tangential=Interval(theta_H, theta_H), argmax=float(w.inverse(u_mode)))

    step = max(hi - lo, 1.0) / 64.0
    direction = 1.0 if u_h < u_mode else -1.0
    x = u_mode
    other = None
    for _ in range(100):
        nxt = x + direction * step
        val = float(ls(nxt))
        if val <= ls_h:
            a, b = sorted((x, nxt))
            other = find_root(lambda u: float(ls(u)) - ls_h, (a, b), tol=1e-13)
            break
        x = nxt
        step *= 2.0
        if not math.isfinite(float(w.inverse(nxt))) or abs(nxt) > 1e6:
            break
    if other is None:
        # the surprise never falls back to s*: the level set runs to the support edge
        theta_o = post.support.hi if direction > 0 else post.support.lo
    else:
        theta_o = float(w.inverse(other))
    t_lo, t_hi = sorted((theta_H, theta_o))
    ev = 1.0 - float(post.cdf(t_lo)) - float(post.sf(t_hi))
    return EValueResult(min(max(ev, 0.0), 1.0), ls_h, ref.kind, "level-set",
                        tangential=Interval(t_lo, t_hi), argmax=float(w.inverse(u_mode)))


def e_value_scalar_mc(post: ScalarPosterior, ref: ReferenceFunction, theta_H: float,
                      draws: int, rng: RngStream) -> EValueResult:
    """Monte-Carlo version of :func:`e_value_scalar` (for cross-checks)."""
    ls_h = float(log_surprise(post, ref, float(theta_H)))
    x = post.sample(rng, draws)
    ev = float(np.count_nonzero(log_surprise(post, ref, x) > ls_h)) / draws
    return EValueResult(ev, ls_h, ref.kind, "monte-carlo", draws, math.sqrt(ev * (1 - ev) / draws))


def _gamma_levelset_result(a, k, w_h, ref):
    ev, _ = kernels.gamma_levelset(a, k, w_h)
    if math.isnan(ev):
        raise NonConvergenceError("level-set kernel failed")
    return ev


def e_value_exponential(n: int, sum_x: float, theta_H: float,
                        ref: ReferenceFunction = ReferenceFunction()) -> float:
    """Closed-form e-value for the exponential mean under the 1/theta prior.

    In w = sum_x / theta the posterior is Gamma(n, 1) and the surprise is
    w^k e^-w with k = n + 1 (flat) or k = n (prior reference).
    """
    if not (n >= 1 and sum_x > 0 and theta_H > 0):
        raise DomainError("need n >= 1, sum_x > 0, theta_H > 0")
    k = n + 1 if ref.kind == "flat" else n
    return _gamma_levelset_result(float(n), float(k), sum_x / theta_H, ref)


def e_value_poisson(n: int, sum_x: float, lam_H: float,
                    ref: ReferenceFunction = ReferenceFunction()) -> float:
    """Closed-form e-value for a Poisson rate under the lambda^(-1/2) prior."""
    if not (n >= 1 and sum_x >= 0 and lam_H > 0):
        raise DomainError("need n >= 1, sum_x >= 0, lam_H > 0")
    a = sum_x + 0.5
    k = a - 1.0 if ref.kind == "flat" else float(sum_x)
    return _gamma_levelset_result(a, k, n * lam_H, ref)


# ------------------------------------------------------- multivariate case

@dataclass(frozen=True)
class NullCurve:
    """The null set as a one-parameter curve t -> theta(t), t in ``bracket``.

    ``point`` must accept an array of t values and return an array of
    parameter vectors (coordinate on the last axis).  With ``log_scale`` the
    supremum search runs over ln t.
    """

    point: Callable[[np.ndarray], np.ndarray]
    bracket: Interval
    log_scale: bool = True
    name: str = ""

    def __post_init__(self):
        if not isinstance(self.bracket, Interval):
            object.__setattr__(self, "bracket", Interval(*self.bracket))
        if not self.bracket.is_finite or (self.log_scale and self.bracket.lo <= 0):
            raise DomainError("null-curve bracket must be finite (and positive on log scale)")


def null_supremum(post: JointPosterior, curve: NullCurve, ref: ReferenceFunction) -> tuple[float, float]:
    """(argmax t, ln s*) of the surprise along the null curve."""
    if curve.log_scale:
        to_t = np.exp
        br = (math.log(curve.bracket.lo), math.log(curve.bracket.hi))
    else:
        to_t = np.asarray
        br = curve.bracket.as_tuple()

    def f(v):
        v = np.asarray(v, dtype=float)
        return log_surprise(post, ref, curve.point(to_t(v)))

    v, fv = maximize_1d(lambda v: float(f(v)), br, tol=1e-12)
    return float(to_t(v)), fv


def e_value_mc(post: JointPosterior, curve: NullCurve | Sequence[NullCurve], ref: ReferenceFunction,
               draws: int = 50_000, rng: RngStream | None = None,
               batch_size: int | None = None) -> EValueResult:
    """E-value as the fraction of posterior draws whose surprise exceeds s*.

    ``curve`` may be a sequence of curves (branches of one null set); s* is
    the largest of their suprema.  With ``batch_size`` the draws come in
    batches, batch ``b`` taking ``rng.child(b)``, so the count does not
    depend on how batches are scheduled.
    """
    if draws < 1:
        raise DomainError("draws must be positive")
    rng = rng if rng is not None else RngStream(0)
    curves = [curve] if isinstance(curve, NullCurve) else list(curve)
    t_star, ls_star = max((null_supremum(post, c, ref) for c in curves), key=lambda r: r[1])
    if batch_size is None:
        theta = post.sample(rng, draws)
        count = int(np.count_nonzero(log_surprise(post, ref, theta) > ls_star))
    else:
        count = 0
        for b, start in enumerate(range(0, draws, batch_size)):
            m = min(batch_size, draws - start)
            theta = post.sample(rng.child(b), m)
            count += int(np.count_nonzero(log_surprise(post, ref, theta) > ls_star))
    ev = count / draws
    return EValueResult(ev, ls_star, ref.kind, "monte-carlo", draws,
                        math.sqrt(ev * (1 - ev) / draws), argmax=t_star)
