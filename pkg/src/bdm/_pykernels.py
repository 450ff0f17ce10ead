"""Pure-Python versions of the hot numerical kernels.

Mirrors ``_ckernels.pyx`` function for function.  Inputs are assumed to be
validated by :mod:`bdm.numerics`; invalid arguments give ``nan`` rather than
raising, which keeps the two implementations interchangeable inside loops.
"""

import math

import numpy as np

IMPLEMENTATION = "python"

_EPS = 2.220446049250313e-16
_FPMIN = 1e-300
_MAXITER = 100_000
_LN_SQRT_2PI = 0.9189385332046727


def log_gamma(x):
    if not (x > 0.0) or math.isinf(x):
        return math.nan
    return math.lgamma(x)


def _stirling_correction(a):
    # lgamma(a) - [(a - 1/2) ln a - a + ln sqrt(2 pi)], valid for a >= 10
    t = 1.0 / a
    t2 = t * t
    return t * (1.0 / 12 - t2 * (1.0 / 360 - t2 * (1.0 / 1260 - t2 * (1.0 / 1680 - t2 / 1188))))


def _log_gamma_prefactor(a, x):
    """ln(x^a e^-x / Gamma(a)) with the large-a cancellation removed."""
    if x == 0.0:
        return -math.inf
    if a < 10.0:
        return a * math.log(x) - x - math.lgamma(a)
    t = (x - a) / a
    return 0.5 * math.log(a) + a * (math.log1p(t) - t) - _LN_SQRT_2PI - _stirling_correction(a)


def _gamma_pq(a, x):
    if not (a > 0.0) or not (x >= 0.0) or math.isnan(x):
        return math.nan, math.nan
    if x == 0.0:
        return 0.0, 1.0
    if math.isinf(x):
        return 1.0, 0.0
    lp = _log_gamma_prefactor(a, x)
    if x < a + 1.0:
        ap = a
        term = 1.0 / a
        total = term
        for _ in range(_MAXITER):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * _EPS:
                break
        p = total * math.exp(lp)
        p = min(p, 1.0)
        return p, 1.0 - p
    # modified Lentz continued fraction for Q
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAXITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    q = min(h * math.exp(lp), 1.0)
    return 1.0 - q, q


def reg_gamma_lower(a, x):
    return _gamma_pq(a, x)[0]


def reg_gamma_upper(a, x):
    return _gamma_pq(a, x)[1]


def _betacf(a, b, x):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAXITER):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def reg_beta(a, b, x):
    if not (a > 0.0 and b > 0.0) or not (0.0 <= x <= 1.0):
        return math.nan
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    lbt = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
           + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(lbt) * _betacf(a, b, x) / a
    return 1.0 - math.exp(lbt) * _betacf(b, a, 1.0 - x) / b


# Bernoulli-number tail of the trigamma asymptotic series
_B = (1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6)


def _bernoulli_tail(t2):
    s = 0.0
    for coef in reversed(_B):
        s = coef + t2 * s
    return s


def trigamma(x):
    if not (x > 0.0) or math.isinf(x):
        return math.nan
    acc = 0.0
    while x < 20.0:
        acc += 1.0 / x / x  # x * x underflows for tiny x
        x += 1.0
    t = 1.0 / x
    t2 = t * t
    return acc + t + 0.5 * t2 + t * t2 * _bernoulli_tail(t2)


def shape_jeffreys_log(x):
    """0.5 * ln(x * trigamma(x) - 1), the log Jeffreys weight of a Gamma shape."""
    if not (x > 0.0) or math.isinf(x):
        return math.nan
    if x >= 20.0:
        t = 1.0 / x
        t2 = t * t
        return 0.5 * math.log(0.5 * t + t2 * _bernoulli_tail(t2))
    if x < 1.0:
        # x psi1(x) - 1 = (1 - x + x^2 psi1(x + 1)) / x, finite for tiny x
        return 0.5 * (math.log1p(x * x * trigamma(x + 1.0) - x) - math.log(x))
    return 0.5 * math.log(x * trigamma(x) - 1.0)


def _other_root(yh):
    """Other solution of y - e^y = yh - e^yh (the level g(y) = y + 1 - e^y)."""
    if yh == 0.0:
        return 0.0
    gh = yh - math.expm1(yh)
    if yh < 0.0:
        lo, hi = 0.0, math.sqrt(-2.0 * gh)
    else:
        lo, hi = gh - 1.0, 0.0
    y = 0.5 * (lo + hi)
    for _ in range(200):
        em1 = math.expm1(y)
        f = y - em1 - gh
        # g decreasing on (0, inf), increasing on (-inf, 0)
        if (f > 0.0) == (yh < 0.0):
            lo = y
        else:
            hi = y
        fp = -em1
        step_ok = fp != 0.0
        if step_ok:
            ynew = y - f / fp
            step_ok = lo < ynew < hi
        if not step_ok:
            ynew = 0.5 * (lo + hi)
        if abs(ynew - y) <= 4.0 * _EPS * max(1.0, abs(ynew)) or hi - lo <= 4.0 * _EPS * max(1.0, abs(lo)):
            return ynew
        y = ynew
    return y


def gamma_levelset(a, k, w_h):
    """E-value and BDM for a Gamma(a, 1) posterior in the coordinate w.

    The surprise is ``k ln w - w`` (mode at ``w = k``).  Returns
    ``(ev_bar, delta)``; both tangential-set and tail masses are Gamma(a, 1)
    probabilities.
    """
    if not (a > 0.0) or not (w_h > 0.0):
        return math.nan, math.nan
    p_h, q_h = _gamma_pq(a, w_h)
    delta = 1.0 - 2.0 * min(p_h, q_h)
    if k <= 0.0:
        # surprise decreasing in w: the tangential set is (0, w_h)
        return p_h, delta
    yh = math.log(w_h / k)
    yo = _other_root(yh)
    w_lo = k * math.exp(min(yh, yo))
    w_hi = k * math.exp(max(yh, yo))
    ev = 1.0 - _gamma_pq(a, w_lo)[0] - _gamma_pq(a, w_hi)[1]
    return min(max(ev, 0.0), 1.0), delta


def _map1(fn, x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty_like(x)
    flat_in = x.reshape(-1)
    flat_out = out.reshape(-1)
    for i in range(flat_in.size):
        flat_out[i] = fn(flat_in[i])
    return out


def _map2(fn, a, x):
    a, x = np.broadcast_arrays(np.asarray(a, dtype=np.float64), np.asarray(x, dtype=np.float64))
    out = np.empty(a.shape, dtype=np.float64)
    fa, fx, fo = a.reshape(-1), x.reshape(-1), out.reshape(-1)
    for i in range(fo.size):
        fo[i] = fn(fa[i], fx[i])
    return out


def log_gamma_array(x):
    return _map1(log_gamma, x)


def trigamma_array(x):
    return _map1(trigamma, x)


def shape_jeffreys_log_array(x):
    return _map1(shape_jeffreys_log, x)


def reg_gamma_lower_array(a, x):
    return _map2(reg_gamma_lower, a, x)


def reg_gamma_upper_array(a, x):
    return _map2(reg_gamma_upper, a, x)


def reg_beta_array(a, b, x):
    a, b, x = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (a, b, x)))
    out = np.empty(a.shape, dtype=np.float64)
    fa, fb, fx, fo = a.reshape(-1), b.reshape(-1), x.reshape(-1), out.reshape(-1)
    for i in range(fo.size):
        fo[i] = reg_beta(fa[i], fb[i], fx[i])
    return out


def gamma_levelset_array(a, k, w_h):
    a, k, w_h = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (a, k, w_h)))
    ev = np.empty(a.shape, dtype=np.float64)
    delta = np.empty(a.shape, dtype=np.float64)
    fa, fk, fw = a.reshape(-1), k.reshape(-1), w_h.reshape(-1)
    fe, fd = ev.reshape(-1), delta.reshape(-1)
    for i in range(fe.size):
        fe[i], fd[i] = gamma_levelset(fa[i], fk[i], fw[i])
    return ev, delta
