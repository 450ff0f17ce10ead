"""Posterior distributions and partition probabilities.

Scalar posteriors expose ``log_density``, ``cdf``, ``sf``, ``quantile`` and a
sampler.  Closed-form families evaluate their distribution functions through
the regularized incomplete gamma/beta kernels; ``QuadraturePosterior``
normalizes an arbitrary log kernel by Gauss-Kronrod panels in a working
coordinate that maps the support onto the real line.

Joint posteriors factor as (outer marginal) x (closed-form conditional), which
reduces every partition probability to a one-dimensional outer integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import kernels
from .numerics import (
    DEFAULT_QUADRATURE,
    GK_NODES,
    GK_WEIGHTS,
    DomainError,
    Interval,
    NonConvergenceError,
    QuadratureSpec,
    RngStream,
    find_root,
    gk21,
    integrate,
    maximize_1d,
)

__all__ = [
    "BetaPosterior",
    "GammaPosterior",
    "GammaShapeRatePosterior",
    "InverseGammaPosterior",
    "InverseGaussianPosterior",
    "JointPosterior",
    "MethodUnsupportedError",
    "NormalGammaPosterior",
    "NormalPosterior",
    "NormalizationError",
    "PartitionProbabilities",
    "PartitioningHypothesis",
    "ProductPosterior",
    "QuadraturePosterior",
    "ScalarPosterior",
    "StudentTPosterior",
    "beta_posterior",
    "comparison_hypothesis",
    "coordinate_hypothesis",
    "exp_jeffreys_posterior",
    "gamma_alpha_marginal",
    "gamma_conditional_beta_cdf",
    "gamma_posterior",
    "ig_mean_posterior",
    "ig_posterior",
    "normal_approx_posterior",
    "normal_gamma_posterior",
    "partition_probabilities",
    "poisson_jeffreys_posterior",
    "section_hypothesis",
    "two_population",
]

_LN_2PI = math.log(2.0 * math.pi)
_BREAK_PROBS = (1e-6, 1e-3, 0.02, 0.1, 0.3, 0.5, 0.7, 0.9, 0.98, 0.999, 1 - 1e-6)


class NormalizationError(NonConvergenceError):
    """A log kernel could not be normalized (non-integrable or no mode found)."""


class MethodUnsupportedError(ValueError):
    """The requested computation needs structure the posterior does not have."""


def _scalar_out(x, arr):
    arr = np.asarray(arr, dtype=float)
    return float(arr) if np.ndim(x) == 0 else arr


def _log_gamma_pdf(x, shape, rate):
    x = np.asarray(x, dtype=float)
    shape = np.asarray(shape, dtype=float)
    rate = np.asarray(rate, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (shape * np.log(rate) - kernels.log_gamma_array(shape)
               + (shape - 1.0) * np.log(x) - rate * x)
    return np.where(x > 0, out, -np.inf)


# -------------------------------------------------------- working coordinate

class _Working:
    """Monotone map of a support interval onto the real line.

    ``forward`` takes theta to u, ``inverse`` takes u back, ``log_jac(u)`` is
    ln |d theta / d u|.
    """

    def __init__(self, support: Interval):
        lo, hi = support.lo, support.hi
        self.support = support
        if math.isinf(lo) and math.isinf(hi):
            self.kind = "identity"
        elif math.isinf(hi):
            self.kind = "log"
        elif math.isinf(lo):
            self.kind = "neglog"
        else:
            self.kind = "logit"

    def forward(self, theta):
        t = np.asarray(theta, dtype=float)
        lo, hi = self.support.lo, self.support.hi
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "identity":
                return t
            if self.kind == "log":
                return np.log(t - lo)
            if self.kind == "neglog":
                return -np.log(hi - t)
            z = (t - lo) / (hi - lo)
            return np.log(z) - np.log1p(-z)

    def inverse(self, u):
        u = np.asarray(u, dtype=float)
        lo, hi = self.support.lo, self.support.hi
        with np.errstate(over="ignore"):
            if self.kind == "identity":
                return u
            if self.kind == "log":
                return lo + np.exp(u)
            if self.kind == "neglog":
                return hi - np.exp(-u)
            return lo + (hi - lo) / (1.0 + np.exp(-u))

    def log_jac(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "identity":
            return np.zeros_like(u)
        if self.kind == "log":
            return u
        if self.kind == "neglog":
            return -u
        w = self.support.hi - self.support.lo
        return math.log(w) - np.logaddexp(0.0, -u) - np.logaddexp(0.0, u)


# ---------------------------------------------------------- scalar posteriors

class ScalarPosterior:
    """Base class for one-dimensional posteriors.

    Subclasses provide ``log_density`` and ``cdf``; the base class derives the
    rest.  ``log_prior`` is the (possibly unnormalized, possibly improper) log
    prior density, used as the reference function of the e-value.
    """

    family = "scalar"
    support: Interval
    params: dict

    def __init__(self, support: Interval, params: dict | None = None,
                 log_prior: Callable | None = None):
        self.support = support
        self.params = dict(params or {})
        self._log_prior = log_prior
        self.working = _Working(support)
        self._breaks = None

    def __repr__(self):
        args = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                         for k, v in self.params.items())
        return f"{type(self).__name__}({args})"

    # -- interface
    def log_density(self, theta):
        raise NotImplementedError

    def cdf(self, theta):
        raise NotImplementedError

    def sf(self, theta):
        return _scalar_out(theta, 1.0 - np.asarray(self.cdf(theta)))

    def pdf(self, theta):
        return _scalar_out(theta, np.exp(self.log_density(theta)))

    def log_prior(self, theta):
        if self._log_prior is None:
            return _scalar_out(theta, np.zeros_like(np.asarray(theta, dtype=float)))
        return _scalar_out(theta, self._log_prior(np.asarray(theta, dtype=float)))

    @property
    def has_prior(self) -> bool:
        return self._log_prior is not None

    def _center(self) -> float:
        """A point in the bulk of the distribution (subclasses refine)."""
        return float(self.working.inverse(0.0))

    def _working_scale(self) -> float:
        return 1.0

    # -- derived
    def quantile(self, p):
        arr = np.asarray(p, dtype=float)
        if np.any(~((arr >= 0) & (arr <= 1))):
            raise DomainError("probabilities must lie in [0, 1]")
        out = np.array([self._quantile_scalar(float(q)) for q in arr.reshape(-1)])
        return _scalar_out(p, out.reshape(arr.shape))

    def _quantile_scalar(self, p: float) -> float:
        if p == 0.0:
            return self.support.lo
        if p == 1.0:
            return self.support.hi
        w = self.working

        def f(u):
            theta = float(w.inverse(u))
            return self.cdf(theta) - p if p <= 0.5 else (1.0 - p) - self.sf(theta)

        u0 = float(w.forward(self._center()))
        step = self._working_scale()
        lo, hi = u0 - step, u0 + step
        for _ in range(200):
            if f(lo) <= 0:
                break
            lo -= step
            step *= 2
        step = self._working_scale()
        for _ in range(200):
            if f(hi) >= 0:
                break
            hi += step
            step *= 2
        u = find_root(f, (lo, hi), tol=1e-14 * max(1.0, abs(u0)))
        return float(w.inverse(u))

    def median(self) -> float:
        return float(self.quantile(0.5))

    def sample(self, rng: RngStream, size: int) -> np.ndarray:
        return np.asarray(self.quantile(rng.uniform(size)), dtype=float)

    def breakpoints(self) -> np.ndarray:
        """Working-coordinate images of a fixed ladder of quantiles."""
        if self._breaks is None:
            q = np.array([self._quantile_scalar(p) for p in _BREAK_PROBS])
            u = self.working.forward(q)
            self._breaks = np.unique(u[np.isfinite(u)])
        return self._breaks

    def _working_integrand(self, g):
        w = self.working

        def h(u):
            theta = w.inverse(u)
            val = np.exp(self.log_density(theta) + w.log_jac(u))
            if g is not None:
                with np.errstate(invalid="ignore", over="ignore"):
                    val = np.where(val > 0, val * np.asarray(g(theta), dtype=float), 0.0)
            return np.where(np.isfinite(val), val, 0.0)
        return h

    def expect(self, g: Callable | None = None, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
        """Posterior expectation of ``g`` (total mass if ``g`` is None).

        Integrates in the working coordinate, split at quantile breakpoints.
        """
        return integrate(self._working_integrand(g), Interval(-math.inf, math.inf), spec,
                         points=tuple(self.breakpoints()))

    def mass(self, lo: float, hi: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
        """Posterior probability of (lo, hi) by direct quadrature of the density.

        This route never calls ``cdf``; it is the integral form of the
        interval probabilities.
        """
        lo = max(lo, self.support.lo)
        hi = min(hi, self.support.hi)
        if hi <= lo:
            return 0.0
        a, b = float(self.working.forward(lo)), float(self.working.forward(hi))
        pts = tuple(u for u in self.breakpoints() if a < u < b)
        return integrate(self._working_integrand(None), Interval(a, b), spec, points=pts)

    def log_reparametrized(self, **kwargs) -> "QuadraturePosterior":
        """The posterior of lambda = ln(theta), built by change of variables.

        The result is normalized independently by quadrature, so it doubles
        as a check of the closed-form distribution function.
        """
        if self.support.lo != 0.0 or not math.isinf(self.support.hi):
            raise DomainError("log reparametrization needs support (0, inf)")

        def kern(lam):
            lam = np.asarray(lam, dtype=float)
            return self.log_density(np.exp(lam)) + lam

        hint = math.log(self.median())
        return QuadraturePosterior(kern, Interval(-math.inf, math.inf), family="log-" + self.family,
                                   hint=hint, **kwargs)


class InverseGammaPosterior(ScalarPosterior):
    """InvGamma(shape, scale): density proportional to theta^(-shape-1) exp(-scale/theta)."""

    family = "inverse-gamma"

    def __init__(self, shape: float, scale: float, log_prior=None):
        if not (shape > 0 and scale > 0):
            raise DomainError("inverse-gamma needs shape > 0 and scale > 0")
        super().__init__(Interval(0.0, math.inf), {"shape": float(shape), "scale": float(scale)},
                         log_prior)
        self.shape = float(shape)
        self.scale = float(scale)
        self._norm = self.shape * math.log(self.scale) - math.lgamma(self.shape)

    def log_density(self, theta):
        t = np.asarray(theta, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self._norm - (self.shape + 1.0) * np.log(t) - self.scale / t
        return _scalar_out(theta, np.where(t > 0, out, -np.inf))

    def cdf(self, theta):
        t = np.asarray(theta, dtype=float)
        with np.errstate(divide="ignore"):
            w = np.where(t > 0, self.scale / np.where(t > 0, t, 1.0), np.inf)
        return _scalar_out(theta, kernels.reg_gamma_upper_array(self.shape, w))

    def sf(self, theta):
        t = np.asarray(theta, dtype=float)
        w = np.where(t > 0, self.scale / np.where(t > 0, t, 1.0), np.inf)
        return _scalar_out(theta, kernels.reg_gamma_lower_array(self.shape, w))

    def _center(self):
        return self.scale / self.shape

    def _working_scale(self):
        return 1.0 / math.sqrt(self.shape)

    def sample(self, rng, size):
        return self.scale / rng.gamma(self.shape, 1.0, size)


class GammaPosterior(ScalarPosterior):
    """Gamma(shape, rate)."""

    family = "gamma"

    def __init__(self, shape: float, rate: float, log_prior=None):
        if not (shape > 0 and rate > 0):
            raise DomainError("gamma needs shape > 0 and rate > 0")
        super().__init__(Interval(0.0, math.inf), {"shape": float(shape), "rate": float(rate)},
                         log_prior)
        self.shape = float(shape)
        self.rate = float(rate)

    def log_density(self, theta):
        return _scalar_out(theta, _log_gamma_pdf(theta, self.shape, self.rate))

    def cdf(self, theta):
        t = np.maximum(np.asarray(theta, dtype=float), 0.0)
        return _scalar_out(theta, kernels.reg_gamma_lower_array(self.shape, self.rate * t))

    def sf(self, theta):
        t = np.maximum(np.asarray(theta, dtype=float), 0.0)
        return _scalar_out(theta, kernels.reg_gamma_upper_array(self.shape, self.rate * t))

    def _center(self):
        return self.shape / self.rate

    def _working_scale(self):
        return 1.0 / math.sqrt(self.shape)

    def sample(self, rng, size):
        return rng.gamma(self.shape, 1.0 / self.rate, size)


class BetaPosterior(ScalarPosterior):
    family = "beta"

    def __init__(self, a: float, b: float, log_prior=None):
        if not (a > 0 and b > 0):
            raise DomainError("beta needs a > 0 and b > 0")
        super().__init__(Interval(0.0, 1.0), {"a": float(a), "b": float(b)}, log_prior)
        self.a = float(a)
        self.b = float(b)
        self._norm = math.lgamma(self.a + self.b) - math.lgamma(self.a) - math.lgamma(self.b)

    def log_density(self, theta):
        t = np.asarray(theta, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self._norm + (self.a - 1) * np.log(t) + (self.b - 1) * np.log1p(-t)
        return _scalar_out(theta, np.where((t > 0) & (t < 1), out, -np.inf))

    def cdf(self, theta):
        t = np.clip(np.asarray(theta, dtype=float), 0.0, 1.0)
        return _scalar_out(theta, kernels.reg_beta_array(self.a, self.b, t))

    def sf(self, theta):
        t = np.clip(np.asarray(theta, dtype=float), 0.0, 1.0)
        return _scalar_out(theta, kernels.reg_beta_array(self.b, self.a, 1.0 - t))

    def mean(self) -> float:
        return self.a / (self.a + self.b)

    def _center(self):
        return self.mean()

    def _working_scale(self):
        return 2.0 / math.sqrt(self.a + self.b)

    def sample(self, rng, size):
        return rng.generator.beta(self.a, self.b, size)


class NormalPosterior(ScalarPosterior):
    family = "normal"

    def __init__(self, mean: float, sd: float, log_prior=None):
        if not (sd > 0 and math.isfinite(mean)):
            raise DomainError("normal needs finite mean and sd > 0")
        super().__init__(Interval(-math.inf, math.inf), {"mean": float(mean), "sd": float(sd)},
                         log_prior)
        self.mean = float(mean)
        self.sd = float(sd)
        self._dist = NormalDist(self.mean, self.sd)

    def log_density(self, theta):
        z = (np.asarray(theta, dtype=float) - self.mean) / self.sd
        return _scalar_out(theta, -0.5 * z * z - math.log(self.sd) - 0.5 * _LN_2PI)

    def cdf(self, theta):
        z = (np.asarray(theta, dtype=float) - self.mean) / self.sd
        return _scalar_out(theta, 0.5 * _erfc(-z / math.sqrt(2.0)))

    def sf(self, theta):
        z = (np.asarray(theta, dtype=float) - self.mean) / self.sd
        return _scalar_out(theta, 0.5 * _erfc(z / math.sqrt(2.0)))

    def _quantile_scalar(self, p):
        if p in (0.0, 1.0):
            return -math.inf if p == 0.0 else math.inf
        return self._dist.inv_cdf(p)

    def _center(self):
        return self.mean

    def _working_scale(self):
        return self.sd

    def sample(self, rng, size):
        return rng.normal(self.mean, self.sd, size)


_erfc = np.vectorize(math.erfc, otypes=[float])


class StudentTPosterior(ScalarPosterior):
    """Location-scale Student-t with ``df`` degrees of freedom."""

    family = "student-t"

    def __init__(self, loc: float, scale: float, df: float, log_prior=None):
        if not (scale > 0 and df > 0):
            raise DomainError("student-t needs scale > 0 and df > 0")
        super().__init__(Interval(-math.inf, math.inf),
                         {"loc": float(loc), "scale": float(scale), "df": float(df)}, log_prior)
        self.loc = float(loc)
        self.scale = float(scale)
        self.df = float(df)
        nu = self.df
        self._norm = (math.lgamma(0.5 * (nu + 1)) - math.lgamma(0.5 * nu)
                      - 0.5 * math.log(nu * math.pi) - math.log(self.scale))

    def log_density(self, theta):
        t = (np.asarray(theta, dtype=float) - self.loc) / self.scale
        return _scalar_out(theta, self._norm - 0.5 * (self.df + 1) * np.log1p(t * t / self.df))

    def _tail(self, t):
        # P(T > |t|)
        x = self.df / (self.df + t * t)
        return 0.5 * kernels.reg_beta_array(0.5 * self.df, 0.5, x)

    def cdf(self, theta):
        t = (np.asarray(theta, dtype=float) - self.loc) / self.scale
        tail = self._tail(t)
        return _scalar_out(theta, np.where(t < 0, tail, 1.0 - tail))

    def sf(self, theta):
        t = (np.asarray(theta, dtype=float) - self.loc) / self.scale
        tail = self._tail(t)
        return _scalar_out(theta, np.where(t > 0, tail, 1.0 - tail))

    def _center(self):
        return self.loc

    def _working_scale(self):
        return self.scale

    def sample(self, rng, size):
        return self.loc + self.scale * rng.standard_t(self.df, size)


class QuadraturePosterior(ScalarPosterior):
    """Posterior known through an unnormalized log kernel.

    The kernel is carried to a working coordinate ``u`` on the real line
    (log for positive supports).  Around the mode, the range where the log
    density is within ``drop`` of its maximum is cut into ``panels`` equal
    Gauss-Kronrod panels; the two remaining tails are integrated adaptively.
    The cumulative panel masses give the distribution function, and a
    monotone cubic spline through them drives inverse-CDF sampling.

    Parameters
    ----------
    log_kernel : callable
        Vectorized ln of the unnormalized density in the original coordinate.
    support : Interval
    hint : float, optional
        A working-coordinate value near the mode, used to start the search.
    log_prior : callable, optional
    panels : int
        Number of panels (and spline nodes minus one).
    drop : float
        Log-density drop that delimits the panel range.
    """

    family = "quadrature"

    def __init__(self, log_kernel: Callable, support: Interval, family: str = "quadrature",
                 params: dict | None = None, hint: float | None = None,
                 log_prior: Callable | None = None, panels: int = 4096, drop: float = 40.0,
                 spec: QuadratureSpec = DEFAULT_QUADRATURE):
        super().__init__(support, params, log_prior)
        self.family = family
        self._kernel = log_kernel
        self.panels = int(panels)
        w = self.working

        def h(u):
            u = np.asarray(u, dtype=float)
            with np.errstate(all="ignore"):
                val = np.asarray(log_kernel(w.inverse(u)), dtype=float) + w.log_jac(u)
            return np.where(np.isnan(val), -np.inf, val)

        self._h = h
        u_mode, h_max = self._find_mode(h, 0.0 if hint is None else float(hint))
        self.u_mode = u_mode
        self._hmax = h_max
        scale = self._curvature_scale(h, u_mode, h_max)
        self._u_scale = scale
        level = h_max - drop
        u_lo = self._edge(h, u_mode, -scale, level)
        u_hi = self._edge(h, u_mode, scale, level)
        edges = np.linspace(u_lo, u_hi, self.panels + 1)
        self._edges = edges
        half = 0.5 * np.diff(edges)
        nodes = 0.5 * (edges[:-1] + edges[1:])[:, None] + half[:, None] * GK_NODES[None, :]
        vals = np.exp(h(nodes) - h_max)
        masses = half * (vals @ GK_WEIGHTS)

        def shifted(u):
            return np.exp(h(u) - h_max)

        tail_lo = integrate(shifted, Interval(-math.inf, u_lo), spec)
        tail_hi = integrate(shifted, Interval(u_hi, math.inf), spec)
        cum = np.empty(self.panels + 1)
        cum[0] = tail_lo
        cum[1:] = tail_lo + np.cumsum(masses)
        total = cum[-1] + tail_hi
        if not (total > 0 and math.isfinite(total)):
            raise NormalizationError("posterior kernel has no finite positive mass", total)
        self._cum = cum
        self._masses = masses
        self._tail_lo = tail_lo
        self._tail_hi = tail_hi
        self._total = total
        self.log_norm = h_max + math.log(total)
        self._spline = None
        self._spec = spec

    # -- construction helpers
    @staticmethod
    def _find_mode(h, hint):
        width = 40.0
        for _ in range(30):
            grid = np.linspace(hint - width, hint + width, 801)
            vals = h(grid)
            i = int(np.argmax(vals))
            if not np.isfinite(vals[i]):
                hint += width
                width *= 2
                continue
            if 0 < i < grid.size - 1:
                x, fx = maximize_1d(lambda u: float(h(u)), (grid[i - 1], grid[i + 1]), tol=1e-12,
                                    prescan=0)
                return x, fx
            hint = grid[i]
        raise NormalizationError("could not locate the posterior mode")

    @staticmethod
    def _curvature_scale(h, u, hu):
        for eps in (1e-3, 1e-2, 1e-1):
            d2 = (float(h(u + eps)) - 2 * hu + float(h(u - eps))) / (eps * eps)
            if d2 < 0 and math.isfinite(d2):
                return min(max(1.0 / math.sqrt(-d2), 1e-8), 10.0)
        return 1.0

    @staticmethod
    def _edge(h, u0, step, level):
        x = u0
        for _ in range(200):
            nxt = x + step
            if float(h(nxt)) <= level:
                return find_root(lambda u: float(h(u)) - level, (min(x, nxt), max(x, nxt)),
                                 tol=1e-10)
            x = nxt
            step *= 1.5
        raise NormalizationError("posterior kernel does not decay; it may be improper")

    # -- evaluation
    def log_density(self, theta):
        t = np.asarray(theta, dtype=float)
        inside = (t > self.support.lo) & (t < self.support.hi)
        with np.errstate(all="ignore"):
            val = np.asarray(self._kernel(np.where(inside, t, self._center())), dtype=float)
        return _scalar_out(theta, np.where(inside, val - self.log_norm, -np.inf))

    def _center(self):
        return float(self.working.inverse(self.u_mode))

    def _working_scale(self):
        return self._u_scale

    def _partial(self, u, idx):
        """Unnormalized mass from the left edge of panel ``idx`` to ``u``."""
        a = self._edges[idx]
        half = 0.5 * (u - a)
        nodes = (0.5 * (a + u))[..., None] + half[..., None] * GK_NODES
        vals = np.exp(self._h(nodes) - self._hmax)
        return half * (vals @ GK_WEIGHTS)

    def _lower_mass(self, u):
        """Unnormalized mass below each working-coordinate value."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty_like(u)
        e = self._edges
        low = u <= e[0]
        high = u >= e[-1]
        mid = ~(low | high)
        if np.any(mid):
            idx = np.minimum(np.searchsorted(e, u[mid], side="right") - 1, self.panels - 1)
            out[mid] = self._cum[idx] + self._partial(u[mid], idx)
        for k in np.flatnonzero(low):
            out[k] = self._tail_integral(-math.inf, u[k])
        for k in np.flatnonzero(high):
            out[k] = self._total - self._tail_integral(u[k], math.inf)
        return out

    def _upper_mass(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty_like(u)
        e = self._edges
        low = u <= e[0]
        high = u >= e[-1]
        mid = ~(low | high)
        if np.any(mid):
            idx = np.minimum(np.searchsorted(e, u[mid], side="right") - 1, self.panels - 1)
            above = self._total - self._cum[idx + 1]
            out[mid] = above + (self._masses[idx] - self._partial(u[mid], idx))
        for k in np.flatnonzero(low):
            out[k] = self._total - self._tail_integral(-math.inf, u[k])
        for k in np.flatnonzero(high):
            out[k] = self._tail_integral(u[k], math.inf)
        return out

    def _tail_integral(self, a, b):
        if a == b or (math.isinf(a) and math.isinf(b) and a > 0):
            return 0.0
        f = lambda u: np.exp(self._h(u) - self._hmax)  # noqa: E731
        return integrate(f, Interval(a, b), self._spec)

    def cdf(self, theta):
        t = np.asarray(theta, dtype=float)
        u = self.working.forward(np.clip(t, self.support.lo, self.support.hi))
        out = np.clip(self._lower_mass(u) / self._total, 0.0, 1.0)
        out = np.where(t <= self.support.lo, 0.0, np.where(t >= self.support.hi, 1.0, out))
        return _scalar_out(theta, out.reshape(t.shape))

    def sf(self, theta):
        t = np.asarray(theta, dtype=float)
        u = self.working.forward(np.clip(t, self.support.lo, self.support.hi))
        out = np.clip(self._upper_mass(u) / self._total, 0.0, 1.0)
        out = np.where(t <= self.support.lo, 1.0, np.where(t >= self.support.hi, 0.0, out))
        return _scalar_out(theta, out.reshape(t.shape))

    def _quantile_scalar(self, p):
        if p <= 0.0:
            return self.support.lo
        if p >= 1.0:
            return self.support.hi
        target = p * self._total
        cum = self._cum
        if not (cum[0] < target < cum[-1]):
            return super()._quantile_scalar(p)
        idx = int(np.searchsorted(cum, target, side="right") - 1)
        idx = min(max(idx, 0), self.panels - 1)
        a, b = self._edges[idx], self._edges[idx + 1]
        if p <= 0.5:
            f = lambda u: float(cum[idx] + self._partial(np.asarray(u), idx)) - target  # noqa: E731
        else:
            up = (1.0 - p) * self._total
            above = self._total - cum[idx + 1]
            f = lambda u: up - float(above + self._masses[idx] - self._partial(np.asarray(u), idx))  # noqa: E731
        u = find_root(f, (a, b), tol=1e-15 * max(1.0, abs(a)))
        return float(self.working.inverse(u))

    def breakpoints(self):
        if self._breaks is None:
            idx = np.searchsorted(self._cum / self._total, _BREAK_PROBS)
            idx = np.clip(idx, 0, self.panels)
            self._breaks = np.unique(self._edges[idx])
        return self._breaks

    def _build_spline(self):
        f = self._cum / self._total
        keep = np.concatenate([[True], np.diff(f) > 0])
        self._spline = PchipInterpolator(f[keep], self._edges[keep], extrapolate=True)

    def sample(self, rng, size):
        """Inverse-CDF draws through a monotone spline of the panel table."""
        if self._spline is None:
            self._build_spline()
        f = self._cum / self._total
        v = np.clip(rng.uniform(size), f[0], f[-1])
        return self.working.inverse(self._spline(v))


# ------------------------------------------------------ scalar constructors

def _require_count(n, minimum, name="n"):
    if int(n) != n or n < minimum:
        raise DomainError(f"{name} must be an integer >= {minimum}, got {n!r}")
    return int(n)


def _log_inverse(theta):
    with np.errstate(divide="ignore"):
        return -np.log(theta)


def exp_jeffreys_posterior(n: int, sum_x: float) -> InverseGammaPosterior:
    """Exponential mean theta under the prior 1/theta: InvGamma(n, sum_x)."""
    n = _require_count(n, 1)
    if not (sum_x > 0 and math.isfinite(sum_x)):
        raise DomainError("sum_x must be positive")
    return InverseGammaPosterior(n, sum_x, log_prior=_log_inverse)


def poisson_jeffreys_posterior(n: int, sum_x: float) -> GammaPosterior:
    """Poisson rate under the prior lambda^(-1/2): Gamma(sum_x + 1/2, n)."""
    n = _require_count(n, 1)
    if not (sum_x >= 0):
        raise DomainError("sum_x must be >= 0")
    return GammaPosterior(sum_x + 0.5, n, log_prior=lambda t: -0.5 * np.log(t))


def beta_posterior(successes: int, failures: int, a0: float = 1.0, b0: float = 1.0) -> BetaPosterior:
    """Bernoulli proportion under a Beta(a0, b0) prior."""
    s = _require_count(successes, 0, "successes")
    f = _require_count(failures, 0, "failures")
    if not (a0 > 0 and b0 > 0):
        raise DomainError("prior parameters must be positive")

    def log_prior(t):
        with np.errstate(divide="ignore"):
            return (a0 - 1) * np.log(t) + (b0 - 1) * np.log1p(-t)
    return BetaPosterior(a0 + s, b0 + f, log_prior=log_prior)


def normal_approx_posterior(theta_hat: float, n: int) -> NormalPosterior:
    """Large-sample Normal approximation N(theta_hat, theta_hat (1 - theta_hat) / n)."""
    n = _require_count(n, 1)
    if not (0 < theta_hat < 1):
        raise DomainError("theta_hat must lie in (0, 1)")
    return NormalPosterior(theta_hat, math.sqrt(theta_hat * (1 - theta_hat) / n))


def _gamma_alpha_log_kernel(n, mean, geo_mean):
    c = math.log(geo_mean / (n * mean))

    def kern(alpha):
        a = np.asarray(alpha, dtype=float)
        with np.errstate(all="ignore"):
            pos = np.where(a > 0, a, 1.0)
            val = (kernels.shape_jeffreys_log_array(pos) + kernels.log_gamma_array(n * pos)
                   - n * kernels.log_gamma_array(pos) + n * pos * c)
        return np.where(a > 0, val, -np.inf)
    return kern


def _check_gamma_stats(n, mean, geo_mean):
    n = _require_count(n, 2)
    if not (0 < geo_mean <= mean):
        raise DomainError("need 0 < geo_mean <= mean")
    if geo_mean == mean:
        raise DomainError("all observations equal: the shape posterior is improper")
    return n


def gamma_alpha_marginal(n: int, mean: float, geo_mean: float, **kwargs) -> QuadraturePosterior:
    """Marginal posterior of a Gamma shape under the factorized Jeffreys prior.

    Density proportional to sqrt(a trigamma(a) - 1) Gamma(n a) / Gamma(a)^n
    (geo_mean / (n mean))^(n a), the rate integrated out against 1/beta.
    """
    n = _check_gamma_stats(n, mean, geo_mean)
    # method-of-moments style start: a ~ 1 / (2 ln(mean / geo_mean))
    hint = math.log(0.5 / math.log(mean / geo_mean))
    return QuadraturePosterior(_gamma_alpha_log_kernel(n, mean, geo_mean), Interval(0.0, math.inf),
                               family="gamma-shape-marginal",
                               params={"n": n, "mean": float(mean), "geo_mean": float(geo_mean)},
                               hint=hint, log_prior=kernels.shape_jeffreys_log_array, **kwargs)


def gamma_conditional_beta_cdf(alpha, n: int, mean: float, at):
    """P(beta <= at | alpha) with beta | alpha ~ Gamma(n alpha, rate n mean)."""
    a = np.asarray(alpha, dtype=float)
    x = np.asarray(at, dtype=float)
    if np.any(a <= 0) or n < 1 or not mean > 0 or np.any(x < 0):
        raise DomainError("invalid arguments for the conditional rate distribution")
    out = kernels.reg_gamma_lower_array(n * a, n * mean * x)
    return float(out) if out.ndim == 0 else out


def ig_mean_posterior(n: int, mean: float, nu0: float, **kwargs) -> QuadraturePosterior:
    """Inverse-Gaussian mean with known shape nu0 under the prior mu^(-3/2)."""
    n = _require_count(n, 1)
    if not (mean > 0 and nu0 > 0):
        raise DomainError("mean and nu0 must be positive")

    def kern(mu):
        m = np.asarray(mu, dtype=float)
        with np.errstate(all="ignore"):
            val = -1.5 * np.log(m) - n * nu0 * (mean / (2 * m * m) - 1 / m)
        return np.where(m > 0, val, -np.inf)

    return QuadraturePosterior(kern, Interval(0.0, math.inf), family="ig-mean",
                               params={"n": n, "mean": float(mean), "nu0": float(nu0)},
                               hint=math.log(mean), log_prior=lambda m: -1.5 * np.log(m), **kwargs)


# ----------------------------------------------------------- joint posteriors

class JointPosterior:
    """Posterior over a parameter vector with box support.

    Arrays of parameter vectors have the coordinate on the last axis.
    Subclasses with an (outer marginal, closed-form conditional) structure set
    ``outer_index``/``inner_index`` and implement ``conditional_interval_prob``.
    """

    names: tuple[str, ...]
    support: tuple[Interval, ...]
    outer_index: int | None = None
    inner_index: int | None = None

    @property
    def dim(self) -> int:
        return len(self.names)

    def log_density(self, theta):
        raise NotImplementedError

    def log_prior(self, theta):
        raise NotImplementedError

    def sample(self, rng: RngStream, size: int) -> np.ndarray:
        raise NotImplementedError

    def marginal(self, index: int) -> ScalarPosterior:
        raise MethodUnsupportedError(f"no marginal available for coordinate {index}")

    @property
    def outer_marginal(self) -> ScalarPosterior:
        if self.outer_index is None:
            raise MethodUnsupportedError("posterior has no conditional structure")
        return self.marginal(self.outer_index)

    def conditional_interval_prob(self, outer, lo, hi):
        raise MethodUnsupportedError("posterior has no closed-form conditional")

    def _stack(self, cols):
        cols = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in cols])
        return np.stack(cols, axis=-1)

    # -- iterated quadrature checks (two-dimensional posteriors)
    def _axis_breaks(self, index, draws=4000):
        w = _Working(self.support[index])
        x = self.sample(RngStream(0, 0), draws)[:, index]
        u = w.forward(x)
        return w, tuple(np.unique(np.quantile(u, [0.001, 0.05, 0.25, 0.5, 0.75, 0.95, 0.999])))

    def quadrature_marginal_pdf(self, index: int, value: float,
                                spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
        """Density of coordinate ``index`` at ``value`` by integrating out the other one."""
        if self.dim != 2:
            raise MethodUnsupportedError("iterated quadrature is implemented for d = 2")
        other = 1 - index
        w, pts = self._axis_breaks(other)

        def f(u):
            cols = [None, None]
            cols[index] = np.full_like(u, value)
            cols[other] = w.inverse(u)
            val = np.exp(self.log_density(self._stack(cols)) + w.log_jac(u))
            return np.where(np.isfinite(val), val, 0.0)
        return integrate(f, Interval(-math.inf, math.inf), spec, points=pts)

    def check_normalization(self, spec: QuadratureSpec = QuadratureSpec(1e-9, 1e-11)) -> float:
        """Total mass of exp(log_density) by iterated one-dimensional quadrature."""
        if self.dim != 2:
            raise MethodUnsupportedError("iterated quadrature is implemented for d = 2")
        w0, pts0 = self._axis_breaks(0)

        def outer(u):
            u = np.atleast_1d(u)
            x = w0.inverse(u)
            vals = np.array([self.quadrature_marginal_pdf(0, float(xi), spec) if np.isfinite(xi) else 0.0
                             for xi in x])
            with np.errstate(over="ignore", invalid="ignore"):
                out = vals * np.exp(w0.log_jac(u))
            return np.where(vals > 0, out, 0.0)
        return integrate(outer, Interval(-math.inf, math.inf), spec, points=pts0)


class _ConditionalGammaJoint(JointPosterior):
    """(outer, inner) with inner | outer ~ Gamma(shape(outer), rate(outer))."""

    outer_index = 0
    inner_index = 1

    def __init__(self, names, outer: ScalarPosterior, shape_fn, rate_fn, log_prior_fn):
        self.names = tuple(names)
        self.support = (outer.support, Interval(0.0, math.inf))
        self._outer = outer
        self._shape = shape_fn
        self._rate = rate_fn
        self._log_prior_fn = log_prior_fn

    def marginal(self, index):
        if index == 0:
            return self._outer
        return super().marginal(index)

    def log_density(self, theta):
        theta = np.asarray(theta, dtype=float)
        x, y = theta[..., 0], theta[..., 1]
        ok = (x > self.support[0].lo) & (y > 0)
        xs = np.where(ok, x, self._outer._center())
        ys = np.where(ok, y, 1.0)
        with np.errstate(all="ignore"):
            val = self._outer.log_density(xs) + _log_gamma_pdf(ys, self._shape(xs), self._rate(xs))
        return np.where(ok, val, -np.inf)

    def log_prior(self, theta):
        theta = np.asarray(theta, dtype=float)
        with np.errstate(all="ignore"):
            return self._log_prior_fn(theta[..., 0], theta[..., 1])

    def conditional_interval_prob(self, outer, lo, hi):
        k = self._shape(outer)
        r = self._rate(outer)
        lo = np.maximum(np.asarray(lo, dtype=float), 0.0)
        hi = np.maximum(np.asarray(hi, dtype=float), lo)
        with np.errstate(invalid="ignore"):
            x_lo = np.where(lo > 0, r * lo, 0.0)
            x_hi = np.where(np.isinf(hi), np.inf, r * hi)
        upper = kernels.reg_gamma_upper_array(k, x_lo)
        upper_hi = kernels.reg_gamma_upper_array(k, x_hi)
        return np.maximum(upper - upper_hi, 0.0)

    def sample(self, rng, size):
        x = np.asarray(self._outer.sample(rng, size), dtype=float)
        y = rng.gamma(self._shape(x), 1.0, size) / self._rate(x)
        return np.stack([x, y], axis=-1)


class GammaShapeRatePosterior(_ConditionalGammaJoint):
    """(alpha, beta) of a Gamma sample under g0 = sqrt(a trigamma(a) - 1) / beta."""

    family = "gamma-shape-rate"

    def __init__(self, n: int, mean: float, geo_mean: float, **kwargs):
        n = _check_gamma_stats(n, mean, geo_mean)
        self.n, self.mean, self.geo_mean = n, float(mean), float(geo_mean)
        outer = gamma_alpha_marginal(n, mean, geo_mean, **kwargs)
        self.log_geo_mean = math.log(geo_mean)
        super().__init__(("alpha", "beta"), outer,
                         lambda a: n * np.asarray(a, dtype=float),
                         lambda a: n * mean * np.ones_like(np.asarray(a, dtype=float)),
                         lambda a, b: kernels.shape_jeffreys_log_array(a) - np.log(b))

    def log_likelihood(self, theta):
        """Log-likelihood up to a data-only constant."""
        theta = np.asarray(theta, dtype=float)
        a, b = theta[..., 0], theta[..., 1]
        with np.errstate(all="ignore"):
            return self.n * (a * np.log(b) - kernels.log_gamma_array(a) + a * self.log_geo_mean
                             - self.mean * b)


class InverseGaussianPosterior(_ConditionalGammaJoint):
    """(mu, nu) of an Inverse-Gaussian sample under g0 = mu^(-3/2) nu^(-1/2).

    nu | mu ~ Gamma((n + 1)/2, (n/2) R(mu)) with R(mu) = mean/mu^2 - 2/mu + 1/harm_mean,
    and the mu-marginal is proportional to mu^(-3/2) R(mu)^(-(n + 1)/2).
    """

    family = "inverse-gaussian"

    def __init__(self, n: int, mean: float, harm_mean: float, **kwargs):
        n = _require_count(n, 2)
        if not (0 < harm_mean <= mean):
            raise DomainError("need 0 < harm_mean <= mean")
        if harm_mean == mean:
            raise DomainError("all observations equal: the posterior is improper")
        self.n, self.mean, self.harm_mean = n, float(mean), float(harm_mean)
        shape = 0.5 * (n + 1)

        def rate(mu):
            mu = np.asarray(mu, dtype=float)
            with np.errstate(all="ignore"):
                return 0.5 * n * (mean / (mu * mu) - 2.0 / mu + 1.0 / harm_mean)

        self.rate_at = rate
        assert rate(mean) >= 0.0

        def kern(mu):
            m = np.asarray(mu, dtype=float)
            with np.errstate(all="ignore"):
                val = -1.5 * np.log(m) - shape * np.log(rate(m))
            return np.where(m > 0, val, -np.inf)

        outer = QuadraturePosterior(kern, Interval(0.0, math.inf), family="ig-mean-marginal",
                                    params={"n": n, "mean": self.mean, "harm_mean": self.harm_mean},
                                    hint=math.log(mean), log_prior=lambda m: -1.5 * np.log(m),
                                    **kwargs)
        super().__init__(("mu", "nu"), outer,
                         lambda m: shape * np.ones_like(np.asarray(m, dtype=float)), rate,
                         lambda m, v: -1.5 * np.log(m) - 0.5 * np.log(v))


class NormalGammaPosterior(JointPosterior):
    """(mu, phi) with phi ~ Gamma(alpha, beta) and mu | phi ~ N(eta, 1/(nu phi)).

    Built from a Normal sample under g0 = 1/phi: eta = mean, nu = n,
    alpha = (n - 1)/2, beta = n s2 / 2 with s2 the variance MLE.
    """

    family = "normal-gamma"
    outer_index = 1
    inner_index = 0

    def __init__(self, eta: float, nu: float, alpha: float, beta: float):
        if not (nu > 0 and alpha > 0 and beta > 0):
            raise DomainError("normal-gamma needs nu, alpha, beta > 0")
        self.names = ("mu", "phi")
        self.support = (Interval(-math.inf, math.inf), Interval(0.0, math.inf))
        self.eta, self.nu, self.alpha, self.beta = float(eta), float(nu), float(alpha), float(beta)
        self._phi = GammaPosterior(alpha, beta, log_prior=_log_inverse)
        self._mu = StudentTPosterior(eta, math.sqrt(beta / (nu * alpha)), 2 * alpha)

    def marginal(self, index):
        if index == 0:
            return self._mu
        if index == 1:
            return self._phi
        return super().marginal(index)

    def log_density(self, theta):
        theta = np.asarray(theta, dtype=float)
        mu, phi = theta[..., 0], theta[..., 1]
        ok = phi > 0
        p = np.where(ok, phi, 1.0)
        val = (_log_gamma_pdf(p, self.alpha, self.beta) + 0.5 * np.log(self.nu * p) - 0.5 * _LN_2PI
               - 0.5 * self.nu * p * (mu - self.eta) ** 2)
        return np.where(ok, val, -np.inf)

    def log_prior(self, theta):
        theta = np.asarray(theta, dtype=float)
        with np.errstate(divide="ignore"):
            return -np.log(theta[..., 1])

    def conditional_interval_prob(self, outer, lo, hi):
        with np.errstate(all="ignore"):
            sd = 1.0 / np.sqrt(self.nu * np.asarray(outer, dtype=float))
            zl = (np.asarray(lo, dtype=float) - self.eta) / sd
            zh = (np.asarray(hi, dtype=float) - self.eta) / sd
        # difference of tails keeps precision on either side of eta
        same_side = zl >= 0
        p_up = 0.5 * (_erfc(zl / math.sqrt(2)) - _erfc(zh / math.sqrt(2)))
        p_dn = 0.5 * (_erfc(-zh / math.sqrt(2)) - _erfc(-zl / math.sqrt(2)))
        return np.maximum(np.where(same_side, p_up, p_dn), 0.0)

    def sample(self, rng, size):
        phi = rng.gamma(self.alpha, 1.0 / self.beta, size)
        mu = rng.normal(self.eta, 1.0 / np.sqrt(self.nu * phi))
        return np.stack([mu, phi], axis=-1)


class ProductPosterior(JointPosterior):
    """Independent posteriors of two (or more) populations, coordinates concatenated."""

    family = "product"

    def __init__(self, parts: Sequence[JointPosterior], labels: Sequence[str] | None = None):
        self.parts = tuple(parts)
        labels = labels or [str(i + 1) for i in range(len(self.parts))]
        self.names = tuple(f"{nm}{lab}" for p, lab in zip(self.parts, labels) for nm in p.names)
        self.support = tuple(s for p in self.parts for s in p.support)
        self._offsets = np.cumsum([0] + [p.dim for p in self.parts])

    def _locate(self, index):
        k = int(np.searchsorted(self._offsets, index, side="right") - 1)
        return k, index - int(self._offsets[k])

    def marginal(self, index):
        k, j = self._locate(index)
        return self.parts[k].marginal(j)

    def _split(self, theta):
        theta = np.asarray(theta, dtype=float)
        return [theta[..., self._offsets[k]:self._offsets[k + 1]] for k in range(len(self.parts))]

    def log_density(self, theta):
        return sum(p.log_density(t) for p, t in zip(self.parts, self._split(theta)))

    def log_prior(self, theta):
        return sum(p.log_prior(t) for p, t in zip(self.parts, self._split(theta)))

    def sample(self, rng, size):
        return np.concatenate([p.sample(rng.child(k), size) for k, p in enumerate(self.parts)],
                              axis=-1)


def gamma_posterior(n: int, mean: float, geo_mean: float, **kwargs) -> GammaShapeRatePosterior:
    return GammaShapeRatePosterior(n, mean, geo_mean, **kwargs)


def normal_gamma_posterior(x_bar: float, n: int, s2: float) -> NormalGammaPosterior:
    """Normal sample (mean x_bar, variance MLE s2) under the prior 1/phi."""
    n = _require_count(n, 2)
    if not (s2 > 0 and math.isfinite(s2)):
        raise DomainError("s2 must be positive (zero spread gives an improper posterior)")
    return NormalGammaPosterior(x_bar, n, 0.5 * (n - 1), 0.5 * n * s2)


def ig_posterior(n: int, mean: float, harm_mean: float, **kwargs) -> InverseGaussianPosterior:
    return InverseGaussianPosterior(n, mean, harm_mean, **kwargs)


def two_population(first: JointPosterior, second: JointPosterior) -> ProductPosterior:
    return ProductPosterior([first, second])


# -------------------------------------------------------------- hypotheses

@dataclass(frozen=True)
class PartitioningHypothesis:
    """H: phi(theta) = phi_H, splitting the space into {phi < phi_H} and {phi > phi_H}.

    ``phi`` maps an array of parameter vectors (coordinate on the last axis)
    to an array of reals.  The optional fields tell the quadrature path how
    the split looks:

    coordinate
        phi is the coordinate itself; the marginal CDF gives the split.
    compare
        ``(i, j)`` with phi = theta_i - theta_j and phi_H = 0, for
        coordinates of independent populations.
    section
        Function of the outer coordinate returning the inner-coordinate
        interval ``(lo, hi)`` that makes up the ``section_side`` set.
    """

    phi: Callable[[np.ndarray], np.ndarray]
    phi_H: float
    name: str = ""
    coordinate: int | None = None
    compare: tuple[int, int] | None = None
    section: Callable | None = field(default=None, compare=False)
    section_side: str = "b"

    def __post_init__(self):
        if self.section_side not in ("a", "b"):
            raise DomainError("section_side must be 'a' or 'b'")


def coordinate_hypothesis(index: int, value: float, name: str = "") -> PartitioningHypothesis:
    return PartitioningHypothesis(lambda th: np.asarray(th)[..., index], float(value),
                                  name or f"theta[{index}] = {value:g}", coordinate=index)


def comparison_hypothesis(i: int, j: int, name: str = "") -> PartitioningHypothesis:
    return PartitioningHypothesis(lambda th: np.asarray(th)[..., i] - np.asarray(th)[..., j], 0.0,
                                  name or f"theta[{i}] = theta[{j}]", compare=(i, j))


def section_hypothesis(phi, phi_H, section, side="b", name="") -> PartitioningHypothesis:
    return PartitioningHypothesis(phi, float(phi_H), name, section=section, section_side=side)


@dataclass(frozen=True)
class PartitionProbabilities:
    """Posterior masses of {phi < phi_H} (``p_a``) and {phi > phi_H} (``p_b``)."""

    p_a: float
    p_b: float
    p_method: str
    mc_std_err: float | None = None
    draws: int | None = None

    def __post_init__(self):
        for v in (self.p_a, self.p_b):
            if not (-1e-12 <= v <= 1 + 1e-12):
                raise DomainError(f"partition probability {v} outside [0, 1]")
        if self.p_a + self.p_b > 1 + 1e-9:
            raise DomainError("partition probabilities sum above one")
        if self.p_method not in ("closed-form", "quadrature", "monte-carlo"):
            raise DomainError(f"unknown method tag {self.p_method!r}")

    @property
    def external(self) -> float:
        """The smaller of the two masses (the external set)."""
        return min(self.p_a, self.p_b)

    @property
    def external_side(self) -> str:
        return "a" if self.p_a <= self.p_b else "b"

    def as_dict(self) -> dict:
        d = {"p_a": self.p_a, "p_b": self.p_b, "method": self.p_method}
        if self.mc_std_err is not None:
            d["mc_std_err"] = self.mc_std_err
            d["draws"] = self.draws
        return d


def _clip01(x):
    return float(min(max(x, 0.0), 1.0))


def partition_probabilities(post: JointPosterior | ScalarPosterior, hyp: PartitioningHypothesis,
                            method: str = "quadrature", rng: RngStream | None = None,
                            draws: int = 50_000,
                            spec: QuadratureSpec = DEFAULT_QUADRATURE) -> PartitionProbabilities:
    """Posterior probabilities of the two sets a partitioning hypothesis induces.

    ``method="quadrature"`` uses the marginal CDF, the comparison integral
    int F_i(t) f_j(t) dt, or an outer integral over closed-form conditional
    masses, depending on how ``hyp`` is described.  ``method="monte-carlo"``
    counts posterior draws on each side and reports the standard error of
    the smaller proportion.
    """
    if method == "monte-carlo":
        if rng is None:
            raise DomainError("monte-carlo partition probabilities need an RngStream")
        theta = post.sample(rng, draws)
        if isinstance(post, ScalarPosterior):
            theta = np.asarray(theta)[:, None]
        with np.errstate(all="ignore"):
            v = np.asarray(hyp.phi(theta), dtype=float)
        p_a = float(np.count_nonzero(v < hyp.phi_H)) / draws
        p_b = float(np.count_nonzero(v > hyp.phi_H)) / draws
        p = min(p_a, p_b)
        return PartitionProbabilities(p_a, p_b, "monte-carlo",
                                      math.sqrt(p * (1 - p) / draws), draws)
    if method != "quadrature":
        raise DomainError(f"unknown method {method!r}")

    if isinstance(post, ScalarPosterior):
        if hyp.coordinate not in (None, 0):
            raise MethodUnsupportedError("scalar posterior has a single coordinate")
        if hyp.coordinate is None:
            raise MethodUnsupportedError("scalar quadrature needs phi to be the parameter itself")
        kind = "closed-form" if not isinstance(post, QuadraturePosterior) else "quadrature"
        return PartitionProbabilities(_clip01(post.cdf(hyp.phi_H)), _clip01(post.sf(hyp.phi_H)), kind)

    if hyp.coordinate is not None:
        m = post.marginal(hyp.coordinate)
        kind = "closed-form" if not isinstance(m, QuadraturePosterior) else "quadrature"
        return PartitionProbabilities(_clip01(m.cdf(hyp.phi_H)), _clip01(m.sf(hyp.phi_H)), kind)

    if hyp.compare is not None:
        i, j = hyp.compare
        if hyp.phi_H != 0.0:
            raise MethodUnsupportedError("comparison hypotheses use phi_H = 0")
        if not isinstance(post, ProductPosterior) or post._locate(i)[0] == post._locate(j)[0]:
            raise MethodUnsupportedError("comparison needs coordinates of independent populations")
        mi, mj = post.marginal(i), post.marginal(j)
        # P(theta_i < theta_j) = E_j[F_i(theta_j)]
        p_a = mj.expect(mi.cdf, spec)
        p_b = mj.expect(mi.sf, spec)
        return PartitionProbabilities(_clip01(p_a), _clip01(p_b), "quadrature")

    if hyp.section is not None:
        if post.outer_index is None:
            raise MethodUnsupportedError("posterior has no conditional structure")

        def inner_mass(t):
            with np.errstate(all="ignore"):
                lo, hi = hyp.section(t)
                return np.nan_to_num(post.conditional_interval_prob(t, lo, hi))

        p_side = _clip01(post.outer_marginal.expect(inner_mass, spec))
        other = _clip01(1.0 - p_side)
        p_a, p_b = (p_side, other) if hyp.section_side == "a" else (other, p_side)
        return PartitionProbabilities(p_a, p_b, "quadrature")

    raise MethodUnsupportedError("hypothesis lacks the structure needed for quadrature; "
                                 "use method='monte-carlo'")
