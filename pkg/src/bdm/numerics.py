"""Special functions, adaptive quadrature, root finding and seeded random streams.

Everything downstream (posteriors, discrepancy, e-values, simulation) is built
on this module.  Scalar special functions dispatch to the compiled kernels in
:mod:`bdm.kernels` when available.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from . import kernels

__all__ = [
    "BracketError",
    "DomainError",
    "Interval",
    "NonConvergenceError",
    "NonUnimodalError",
    "QuadratureSpec",
    "RngStream",
    "find_root",
    "integrate",
    "log_gamma",
    "maximize_1d",
    "prescan_bracket",
    "reg_beta",
    "reg_gamma_lower",
    "reg_gamma_upper",
    "shape_jeffreys_log",
    "trigamma",
]


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class BracketError(ValueError):
    """A root bracket whose endpoint signs do not straddle zero."""


class NonUnimodalError(ArithmeticError):
    """A pre-scan found more than one local maximum."""


class NonConvergenceError(ArithmeticError):
    """An iterative method stopped before meeting its tolerance.

    ``estimate`` and ``error`` carry the best value reached and its error bound.
    """

    def __init__(self, message: str, estimate: float = math.nan, error: float = math.inf):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class Interval:
    """Closed/open real interval; infinite endpoints are ``math.inf`` literally."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise DomainError("interval endpoints must not be NaN")
        if lo > hi:
            raise DomainError(f"interval requires lo <= hi, got ({lo}, {hi})")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def as_tuple(self) -> tuple[float, float]:
        return (self.lo, self.hi)


REAL_LINE = Interval(-math.inf, math.inf)
POSITIVE = Interval(0.0, math.inf)
UNIT = Interval(0.0, 1.0)


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_depth: int = 60

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise DomainError("max_depth must be >= 1")


DEFAULT_QUADRATURE = QuadratureSpec()


class RngStream:
    """A reproducible random stream keyed by ``(seed, stream_id)``.

    Streams with equal keys replay identical draws; distinct ``stream_id``
    values are independent children of the same seed (numpy ``SeedSequence``
    spawn keys feeding a PCG64 generator).  A stream is owned by one consumer;
    parallel workers take their own ``stream_id``.
    """

    def __init__(self, seed: int = 0, stream_id: int = 0, _path: tuple = ()):
        if not (0 <= int(seed) < 2**64 and 0 <= int(stream_id) < 2**64):
            raise DomainError("seed and stream_id must be unsigned 64-bit integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._path = tuple(int(i) for i in _path)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self._path))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        extra = f", path={self._path}" if self._path else ""
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}{extra})"

    def spawn(self, stream_id: int) -> "RngStream":
        """Sibling stream with the same seed and a different ``stream_id``."""
        return RngStream(self.seed, stream_id)

    def child(self, index: int) -> "RngStream":
        """Independent sub-stream, e.g. one per batch of a parallel computation."""
        return RngStream(self.seed, self.stream_id, (*self._path, index))

    def uniform(self, size=None):
        return self.generator.random(size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self.generator.normal(loc, scale, size)

    def gamma(self, shape, scale=1.0, size=None):
        return self.generator.gamma(shape, scale, size)

    def exponential(self, scale=1.0, size=None):
        return self.generator.exponential(scale, size)

    def poisson(self, lam, size=None):
        return self.generator.poisson(lam, size)

    def standard_t(self, df, size=None):
        return self.generator.standard_t(df, size)


# ------------------------------------------------------------ special functions

def _positive_arg(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be finite and > 0, got {x!r}")
    return arr


def log_gamma(x):
    """ln Gamma(x) for x > 0 (scalar or array)."""
    arr = _positive_arg(x)
    if arr.ndim == 0:
        return kernels.log_gamma(float(arr))
    return kernels.log_gamma_array(arr)


def trigamma(x):
    """Second derivative of ln Gamma: sum over j >= 0 of (x + j)^-2."""
    arr = _positive_arg(x)
    if arr.ndim == 0:
        return kernels.trigamma(float(arr))
    return kernels.trigamma_array(arr)


def shape_jeffreys_log(x):
    """0.5 ln(x * trigamma(x) - 1), evaluated without cancellation for large x."""
    arr = _positive_arg(x)
    if arr.ndim == 0:
        return kernels.shape_jeffreys_log(float(arr))
    return kernels.shape_jeffreys_log_array(arr)


def _gamma_args(shape, x):
    a = np.asarray(shape, dtype=float)
    xx = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise DomainError(f"shape must be finite and > 0, got {shape!r}")
    if np.any(np.isnan(xx)) or np.any(xx < 0):
        raise DomainError(f"x must be >= 0, got {x!r}")
    return a, xx


def reg_gamma_lower(shape, x):
    """Regularized lower incomplete gamma P(shape, x)."""
    a, xx = _gamma_args(shape, x)
    if a.ndim == 0 and xx.ndim == 0:
        return kernels.reg_gamma_lower(float(a), float(xx))
    return kernels.reg_gamma_lower_array(a, xx)


def reg_gamma_upper(shape, x):
    """Regularized upper incomplete gamma Q(shape, x) = 1 - P(shape, x)."""
    a, xx = _gamma_args(shape, x)
    if a.ndim == 0 and xx.ndim == 0:
        return kernels.reg_gamma_upper(float(a), float(xx))
    return kernels.reg_gamma_upper_array(a, xx)


def reg_beta(a, b, x):
    """Regularized incomplete beta I_x(a, b)."""
    aa = np.asarray(a, dtype=float)
    bb = np.asarray(b, dtype=float)
    xx = np.asarray(x, dtype=float)
    if np.any(~(aa > 0)) or np.any(~(bb > 0)):
        raise DomainError("beta parameters must be > 0")
    if np.any(~((xx >= 0) & (xx <= 1))):
        raise DomainError("x must lie in [0, 1]")
    if aa.ndim == 0 and bb.ndim == 0 and xx.ndim == 0:
        return kernels.reg_beta(float(aa), float(bb), float(xx))
    return kernels.reg_beta_array(aa, bb, xx)


# ---------------------------------------------------------------- quadrature

# 21-point Gauss-Kronrod rule (QUADPACK qk21); odd-indexed nodes carry the
# embedded 10-point Gauss rule.
_XGK = np.array([
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0,
])
_WGK = np.array([
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # ascending, 21 nodes
GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G_WEIGHTS = np.zeros(21)
_G_WEIGHTS[1:10:2] = _WG
_G_WEIGHTS[11:20:2] = _WG[::-1]
_EPS = np.finfo(float).eps


def _eval(f, x):
    try:
        vals = np.asarray(f(x), dtype=float)
    except (TypeError, ValueError):  # scalar-only callable (math.*, or `if x > 0` on an array)
        vals = None
    if vals is None or vals.shape != x.shape:
        vals = np.array([float(f(float(v))) for v in x.reshape(-1)]).reshape(x.shape)
    return vals


def _mapped(f, domain: Interval):
    """Integrand on a finite t-interval equivalent to f on ``domain``."""
    lo, hi = domain.lo, domain.hi
    if math.isfinite(lo) and math.isfinite(hi):
        return f, lo, hi
    if math.isfinite(lo):
        def g(t):
            s = 1.0 - t
            return _eval(f, lo + t / s) / (s * s)
        return g, 0.0, 1.0
    if math.isfinite(hi):
        def g(t):
            s = 1.0 - t
            return _eval(f, hi - t / s) / (s * s)
        return g, 0.0, 1.0

    def g(t):
        s = 1.0 - t * t
        return _eval(f, t / s) * (1.0 + t * t) / (s * s)
    return g, -1.0, 1.0


def gk21(f, a: float, b: float) -> tuple[float, float]:
    """One 21-point Gauss-Kronrod panel: (integral, error estimate)."""
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    x = center + half * GK_NODES
    fx = _eval(f, x)
    with np.errstate(invalid="ignore", over="ignore"):
        kron = half * float(GK_WEIGHTS @ fx)
        gauss = half * float(_G_WEIGHTS @ fx)
        mean = kron / (b - a) if b != a else 0.0
        resabs = abs(half) * float(GK_WEIGHTS @ np.abs(fx))
        resasc = abs(half) * float(GK_WEIGHTS @ np.abs(fx - mean))
    err = abs(kron - gauss)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > np.finfo(float).tiny / (50 * _EPS):
        err = max(50 * _EPS * resabs, err)
    if not math.isfinite(kron):
        raise NonConvergenceError(f"non-finite integrand on [{a}, {b}]", kron, math.inf)
    return kron, err


def integrate(f: Callable, domain: Interval | tuple, spec: QuadratureSpec = DEFAULT_QUADRATURE,
              points=(), return_error: bool = False):
    """Adaptive Gauss-Kronrod quadrature of ``f`` over ``domain``.

    ``f`` should accept a numpy array of abscissae (scalar-only callables are
    detected and evaluated pointwise).  Infinite endpoints are mapped onto a
    finite parameter interval; ``points`` lists interior breakpoints (kinks)
    to split at before adapting.  The global error estimate is driven below
    ``max(abs_tol, rel_tol * |I|)`` by bisecting the worst panel.
    """
    if not isinstance(domain, Interval):
        domain = Interval(*domain)
    if domain.lo == domain.hi:
        return (0.0, 0.0) if return_error else 0.0
    cuts = sorted(p for p in points if domain.lo < p < domain.hi)
    if cuts:
        edges = [domain.lo, *cuts, domain.hi]
        total = 0.0
        err = 0.0
        n = len(edges) - 1
        sub = QuadratureSpec(spec.rel_tol, spec.abs_tol / n, spec.max_depth)
        for lo, hi in zip(edges[:-1], edges[1:]):
            v, e = integrate(f, Interval(lo, hi), sub, return_error=True)
            total += v
            err += e
        return (total, err) if return_error else total

    g, a, b = _mapped(f, domain)
    value, err = gk21(g, a, b)
    heap = [(-err, a, b, value, err, 0)]
    total, total_err = value, err
    while total_err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        neg, lo, hi, v, e, depth = heapq.heappop(heap)
        if depth >= spec.max_depth or hi - lo <= 4 * _EPS * max(abs(lo), abs(hi), 1e-300):
            raise NonConvergenceError(
                f"quadrature did not converge on {domain.as_tuple()} "
                f"(estimate {total!r}, error {total_err:.3g})", total, total_err)
        mid = 0.5 * (lo + hi)
        v1, e1 = gk21(g, lo, mid)
        v2, e2 = gk21(g, mid, hi)
        total += v1 + v2 - v
        total_err += e1 + e2 - e
        heapq.heappush(heap, (-e1, lo, mid, v1, e1, depth + 1))
        heapq.heappush(heap, (-e2, mid, hi, v2, e2, depth + 1))
        if len(heap) % 64 == 0:
            # resum to stop drift from incremental updates
            total = math.fsum(item[3] for item in heap)
            total_err = math.fsum(item[4] for item in heap)
    total = math.fsum(item[3] for item in heap)
    total_err = math.fsum(item[4] for item in heap)
    return (total, total_err) if return_error else total


# ----------------------------------------------------------- roots and optima

def find_root(f: Callable[[float], float], bracket: Interval | tuple, tol: float = 1e-12,
              rtol: float = 4 * _EPS) -> float:
    """Root of ``f`` in a sign-changing finite bracket (Brent's method)."""
    if not isinstance(bracket, Interval):
        bracket = Interval(*bracket)
    if not bracket.is_finite:
        raise DomainError("find_root needs a finite bracket")
    lo, hi = bracket.lo, bracket.hi
    flo, fhi = float(f(lo)), float(f(hi))
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if math.isnan(flo) or math.isnan(fhi) or (flo > 0) == (fhi > 0):
        raise BracketError(f"f({lo})={flo} and f({hi})={fhi} do not straddle zero")
    return float(optimize.brentq(lambda x: float(f(x)), lo, hi, xtol=tol, rtol=rtol, maxiter=500))


def prescan_bracket(f: Callable, bracket: Interval | tuple, points: int = 64,
                    check_unimodal: bool = True) -> Interval:
    """Coarse grid scan returning the sub-bracket around the best grid point.

    Raises :class:`NonUnimodalError` if the scan sees more than one strict
    local maximum (ties from flat plateaus are ignored).
    """
    if not isinstance(bracket, Interval):
        bracket = Interval(*bracket)
    grid = np.linspace(bracket.lo, bracket.hi, points)
    vals = _eval(f, grid)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    if check_unimodal:
        finite = np.isfinite(vals)
        v = vals[finite]
        if v.size >= 3:
            d = np.sign(np.diff(v))
            d = d[d != 0]
            peaks = np.sum((d[:-1] > 0) & (d[1:] < 0))
            if peaks > 1:
                raise NonUnimodalError(f"{peaks} local maxima found in pre-scan of {bracket.as_tuple()}")
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, points - 1)]
    return Interval(lo, hi)


def maximize_1d(f: Callable[[float], float], bracket: Interval | tuple, tol: float = 1e-10,
                prescan: int = 64) -> tuple[float, float]:
    """Maximizer and maximum of a unimodal ``f`` on a finite bracket.

    A ``prescan``-point grid narrows the bracket first (set ``prescan=0`` to
    skip it); bounded Brent minimization of ``-f`` finishes the job.
    """
    if not isinstance(bracket, Interval):
        bracket = Interval(*bracket)
    if not bracket.is_finite:
        raise DomainError("maximize_1d needs a finite bracket")
    full = bracket
    if prescan:
        bracket = prescan_bracket(f, bracket, prescan)
    res = optimize.minimize_scalar(lambda x: -float(f(x)), bounds=bracket.as_tuple(),
                                   method="bounded", options={"xatol": tol, "maxiter": 1000})
    x = float(res.x)
    fx = float(f(x))
    # the bounded method never evaluates the endpoints
    for edge in (full.lo, full.hi):
        fe = float(f(edge))
        if fe > fx:
            x, fx = edge, fe
    if not math.isfinite(fx):
        raise NonConvergenceError(f"non-finite objective at {x}", x, math.inf)
    return x, fx


def expand_bracket(f: Callable[[float], float], start: float, step: float, limit: float,
                   max_steps: int = 200) -> float:
    """Walk from ``start`` by doubling steps until ``f`` turns non-positive.

    Returns the first point reached with ``f <= 0``, or ``limit`` if none.
    ``step`` carries the direction.
    """
    x = start
    for _ in range(max_steps):
        nxt = x + step
        if (step > 0 and nxt >= limit) or (step < 0 and nxt <= limit):
            return limit
        if f(nxt) <= 0:
            return nxt
        x = nxt
        step *= 2.0
    return limit
