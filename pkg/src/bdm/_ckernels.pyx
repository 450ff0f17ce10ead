# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot numerical kernels.

Same algorithms and signatures as ``_pykernels``; array entry points take
anything broadcastable and return float64 arrays.
"""

import numpy as np

from libc.math cimport exp, expm1, fabs, isinf, isnan, lgamma, log, log1p, sqrt, NAN, INFINITY

IMPLEMENTATION = "cython"

cdef double _EPS = 2.220446049250313e-16
cdef double _FPMIN = 1e-300
cdef int _MAXITER = 100000
cdef double _LN_SQRT_2PI = 0.9189385332046727


cdef inline double _log_gamma(double x) nogil:
    if not (x > 0.0) or isinf(x):
        return NAN
    return lgamma(x)


cdef inline double _stirling_correction(double a) nogil:
    cdef double t = 1.0 / a
    cdef double t2 = t * t
    return t * (1.0 / 12 - t2 * (1.0 / 360 - t2 * (1.0 / 1260 - t2 * (1.0 / 1680 - t2 / 1188))))


cdef inline double _log_gamma_prefactor(double a, double x) nogil:
    cdef double t
    if x == 0.0:
        return -INFINITY
    if a < 10.0:
        return a * log(x) - x - lgamma(a)
    t = (x - a) / a
    return 0.5 * log(a) + a * (log1p(t) - t) - _LN_SQRT_2PI - _stirling_correction(a)


cdef void _gamma_pq(double a, double x, double* p, double* q) nogil:
    cdef double lp, ap, term, total, b, c, d, h, an, delta
    cdef int i
    if not (a > 0.0) or not (x >= 0.0) or isnan(x):
        p[0] = NAN
        q[0] = NAN
        return
    if x == 0.0:
        p[0] = 0.0
        q[0] = 1.0
        return
    if isinf(x):
        p[0] = 1.0
        q[0] = 0.0
        return
    lp = _log_gamma_prefactor(a, x)
    if x < a + 1.0:
        ap = a
        term = 1.0 / a
        total = term
        for i in range(_MAXITER):
            ap += 1.0
            term *= x / ap
            total += term
            if fabs(term) < fabs(total) * _EPS:
                break
        total = total * exp(lp)
        if total > 1.0:
            total = 1.0
        p[0] = total
        q[0] = 1.0 - total
        return
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAXITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < _EPS:
            break
    h = h * exp(lp)
    if h > 1.0:
        h = 1.0
    p[0] = 1.0 - h
    q[0] = h


cdef double _betacf(double a, double b, double x) nogil:
    cdef double qab = a + b
    cdef double qap = a + 1.0
    cdef double qam = a - 1.0
    cdef double c = 1.0
    cdef double d = 1.0 - qab * x / qap
    cdef double h, aa, delta
    cdef int m, m2
    if fabs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAXITER):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < _EPS:
            break
    return h


cdef double _reg_beta(double a, double b, double x) nogil:
    cdef double lbt
    if not (a > 0.0 and b > 0.0) or not (x >= 0.0 and x <= 1.0):
        return NAN
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    lbt = lgamma(a + b) - lgamma(a) - lgamma(b) + a * log(x) + b * log1p(-x)
    if x < (a + 1.0) / (a + b + 2.0):
        return exp(lbt) * _betacf(a, b, x) / a
    return 1.0 - exp(lbt) * _betacf(b, a, 1.0 - x) / b


cdef inline double _bernoulli_tail(double t2) nogil:
    return 1.0 / 6 + t2 * (-1.0 / 30 + t2 * (1.0 / 42 + t2 * (-1.0 / 30 + t2 * (
        5.0 / 66 + t2 * (-691.0 / 2730 + t2 * 7.0 / 6)))))


cdef double _trigamma(double x) nogil:
    cdef double acc = 0.0
    cdef double t, t2
    if not (x > 0.0) or isinf(x):
        return NAN
    while x < 20.0:
        acc += 1.0 / (x * x)
        x += 1.0
    t = 1.0 / x
    t2 = t * t
    return acc + t + 0.5 * t2 + t * t2 * _bernoulli_tail(t2)


cdef double _shape_jeffreys_log(double x) nogil:
    cdef double t, t2
    if not (x > 0.0) or isinf(x):
        return NAN
    if x >= 20.0:
        t = 1.0 / x
        t2 = t * t
        return 0.5 * log(0.5 * t + t2 * _bernoulli_tail(t2))
    if x < 1.0:
        # x psi1(x) - 1 = (1 - x + x^2 psi1(x + 1)) / x, finite for tiny x
        return 0.5 * (log1p(x * x * _trigamma(x + 1.0) - x) - log(x))
    return 0.5 * log(x * _trigamma(x) - 1.0)


cdef double _other_root(double yh) nogil:
    cdef double gh, lo, hi, y, ynew, em1, f, fp
    cdef bint step_ok
    cdef int it
    if yh == 0.0:
        return 0.0
    gh = yh - expm1(yh)
    if yh < 0.0:
        lo = 0.0
        hi = sqrt(-2.0 * gh)
    else:
        lo = gh - 1.0
        hi = 0.0
    y = 0.5 * (lo + hi)
    for it in range(200):
        em1 = expm1(y)
        f = y - em1 - gh
        if (f > 0.0) == (yh < 0.0):
            lo = y
        else:
            hi = y
        fp = -em1
        step_ok = fp != 0.0
        if step_ok:
            ynew = y - f / fp
            step_ok = lo < ynew and ynew < hi
        if not step_ok:
            ynew = 0.5 * (lo + hi)
        if (fabs(ynew - y) <= 4.0 * _EPS * max(1.0, fabs(ynew))
                or hi - lo <= 4.0 * _EPS * max(1.0, fabs(lo))):
            return ynew
        y = ynew
    return y


cdef void _gamma_levelset(double a, double k, double w_h, double* ev, double* delta) nogil:
    cdef double p_h, q_h, yh, yo, w_lo, w_hi, p_lo, q_lo, p_hi, q_hi, e
    if not (a > 0.0) or not (w_h > 0.0):
        ev[0] = NAN
        delta[0] = NAN
        return
    _gamma_pq(a, w_h, &p_h, &q_h)
    delta[0] = 1.0 - 2.0 * (p_h if p_h < q_h else q_h)
    if k <= 0.0:
        ev[0] = p_h
        return
    yh = log(w_h / k)
    yo = _other_root(yh)
    w_lo = k * exp(yh if yh < yo else yo)
    w_hi = k * exp(yo if yh < yo else yh)
    _gamma_pq(a, w_lo, &p_lo, &q_lo)
    _gamma_pq(a, w_hi, &p_hi, &q_hi)
    e = 1.0 - p_lo - q_hi
    if e < 0.0:
        e = 0.0
    if e > 1.0:
        e = 1.0
    ev[0] = e


# ---------------------------------------------------------------- scalar API

def log_gamma(double x):
    return _log_gamma(x)


def trigamma(double x):
    return _trigamma(x)


def shape_jeffreys_log(double x):
    return _shape_jeffreys_log(x)


def reg_gamma_lower(double a, double x):
    cdef double p, q
    _gamma_pq(a, x, &p, &q)
    return p


def reg_gamma_upper(double a, double x):
    cdef double p, q
    _gamma_pq(a, x, &p, &q)
    return q


def reg_beta(double a, double b, double x):
    return _reg_beta(a, b, x)


def gamma_levelset(double a, double k, double w_h):
    cdef double ev, delta
    _gamma_levelset(a, k, w_h, &ev, &delta)
    return ev, delta


# ----------------------------------------------------------------- array API

def log_gamma_array(x):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).reshape(-1)
    out = np.empty(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(xv.shape[0]):
            ov[i] = _log_gamma(xv[i])
    return out.reshape(np.shape(x))


def trigamma_array(x):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).reshape(-1)
    out = np.empty(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(xv.shape[0]):
            ov[i] = _trigamma(xv[i])
    return out.reshape(np.shape(x))


def shape_jeffreys_log_array(x):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).reshape(-1)
    out = np.empty(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(xv.shape[0]):
            ov[i] = _shape_jeffreys_log(xv[i])
    return out.reshape(np.shape(x))


def _broadcast_flat(*arrays):
    bs = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in arrays))
    shape = bs[0].shape
    return shape, [np.ascontiguousarray(b).reshape(-1) for b in bs]


def reg_gamma_lower_array(a, x):
    shape, (fa, fx) = _broadcast_flat(a, x)
    cdef double[::1] av = fa
    cdef double[::1] xv = fx
    out = np.empty(av.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef double p, q
    cdef Py_ssize_t i
    with nogil:
        for i in range(av.shape[0]):
            _gamma_pq(av[i], xv[i], &p, &q)
            ov[i] = p
    return out.reshape(shape)


def reg_gamma_upper_array(a, x):
    shape, (fa, fx) = _broadcast_flat(a, x)
    cdef double[::1] av = fa
    cdef double[::1] xv = fx
    out = np.empty(av.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef double p, q
    cdef Py_ssize_t i
    with nogil:
        for i in range(av.shape[0]):
            _gamma_pq(av[i], xv[i], &p, &q)
            ov[i] = q
    return out.reshape(shape)


def reg_beta_array(a, b, x):
    shape, (fa, fb, fx) = _broadcast_flat(a, b, x)
    cdef double[::1] av = fa
    cdef double[::1] bv = fb
    cdef double[::1] xv = fx
    out = np.empty(av.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(av.shape[0]):
            ov[i] = _reg_beta(av[i], bv[i], xv[i])
    return out.reshape(shape)


def gamma_levelset_array(a, k, w_h):
    shape, (fa, fk, fw) = _broadcast_flat(a, k, w_h)
    cdef double[::1] av = fa
    cdef double[::1] kv = fk
    cdef double[::1] wv = fw
    ev = np.empty(av.shape[0], dtype=np.float64)
    delta = np.empty(av.shape[0], dtype=np.float64)
    cdef double[::1] ev_v = ev
    cdef double[::1] dv = delta
    cdef Py_ssize_t i
    with nogil:
        for i in range(av.shape[0]):
            _gamma_levelset(av[i], kv[i], wv[i], &ev_v[i], &dv[i])
    return ev.reshape(shape), delta.reshape(shape)
