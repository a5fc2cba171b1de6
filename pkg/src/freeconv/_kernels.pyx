# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled power-sum kernels.

Same contracts as :mod:`freeconv._kernels_py`; the continuation runs one
point at a time in C instead of sweeping numpy masks.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log, exp, fmin, fmax, isfinite, sqrt

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex clog(double complex)
    double cabs(double complex)
    double creal(double complex)
    double cimag(double complex)

cnp.import_array()

BACKEND = "cython"

cdef enum:
    OK = 0
    DIVERGED = 1
    CRITICAL = 2
    STEP_NEWTON = 10
    MAX_NEWTON = 100

cdef double CRITICAL_DERIV = 1e-8


cdef struct PS:
    double complex *c
    double *p
    int n
    double complex a
    double complex L


cdef inline void ps_eval(PS *ps, double complex ell, double complex *val,
                         double complex *der) noexcept nogil:
    cdef double complex v = ps.a + ps.L * ell
    cdef double complex d = ps.L
    cdef double complex t
    cdef int k
    for k in range(ps.n):
        t = ps.c[k] * cexp(ps.p[k] * ell)
        v = v + t
        d = d + ps.p[k] * t
    val[0] = v
    der[0] = d


cdef int ps_newton(PS *ps, double complex *ell, double complex target, int max_iter,
                   double tol, double complex *der_out) noexcept nogil:
    """Damped Newton; returns 1 on convergence."""
    cdef double complex val, der, res, step, trial, tval, tder
    cdef double scale = tol * fmax(1.0, cabs(target))
    cdef double absres, tres, lam
    cdef int it, h
    ps_eval(ps, ell[0], &val, &der)
    res = val - target
    absres = cabs(res)
    for it in range(max_iter + 1):
        if absres <= scale:
            der_out[0] = der
            return 1
        if it == max_iter or not isfinite(absres):
            break
        step = res / der
        lam = 1.0
        trial = ell[0] - step
        ps_eval(ps, trial, &tval, &tder)
        tres = cabs(tval - target)
        for h in range(10):
            if tres < absres:
                break
            lam *= 0.5
            trial = ell[0] - lam * step
            ps_eval(ps, trial, &tval, &tder)
            tres = cabs(tval - target)
        ell[0] = trial
        val = tval
        der = tder
        res = val - target
        absres = tres
    der_out[0] = der
    return 0


cdef inline double height(double s, double y_a, double log_top, double span_a,
                          double y_end) noexcept nogil:
    cdef double frac
    if s <= span_a:
        return exp(log_top - s)
    frac = fmin(fmax(s - span_a, 0.0), 1.0)
    return y_a + frac * (y_end - y_a)


cdef int continue_one(PS *ps, double complex z, double y_top, double y_floor,
                      double tol, int max_steps, double complex *ell_out,
                      double *min_der_out) noexcept nogil:
    cdef double x = creal(z)
    cdef double y_end = fmax(cimag(z), 0.0)
    cdef double top = fmax(y_top, 10.0 * cabs(z))
    cdef double floor = y_floor
    cdef double y_a, log_top, span_a, total, s, ds, step, ds_max, h_old, h_new
    cdef double complex zeta0, ell, der, ell_pred, ell_try, der_try, zeta_old, zeta_new
    cdef double corr, moved, ad, min_der
    cdef int ok, steps = 0
    if floor <= 0.0:
        floor = 1e-8 * fmax(1.0, fabs(x))
    y_a = fmax(y_end, floor)
    log_top = log(top)
    span_a = log_top - log(y_a)
    total = span_a + (1.0 if y_end < y_a else 0.0)

    zeta0 = x + 1j * top
    ell = clog(zeta0)
    if not ps_newton(ps, &ell, zeta0, MAX_NEWTON, tol, &der):
        ell_out[0] = ell
        min_der_out[0] = cabs(der) * exp(-creal(ell))
        return DIVERGED
    min_der = cabs(der) * exp(-creal(ell))
    s = 0.0
    ds = 0.5
    while s < total - 1e-15 * fmax(1.0, total):
        steps += 1
        if steps > max_steps:
            ell_out[0] = ell
            min_der_out[0] = min_der
            return DIVERGED
        ds_max = 0.5 if s < span_a else 0.25
        step = fmin(fmin(ds, ds_max), total - s)
        h_old = height(s, y_a, log_top, span_a, y_end)
        h_new = height(s + step, y_a, log_top, span_a, y_end)
        zeta_old = x + 1j * h_old
        zeta_new = x + 1j * h_new
        ell_pred = ell + (zeta_new - zeta_old) / der
        ell_try = ell_pred
        ok = ps_newton(ps, &ell_try, zeta_new, STEP_NEWTON, tol, &der_try)
        corr = cabs(ell_try - ell_pred)
        moved = cabs(ell_pred - ell)
        if ok and corr <= 0.5 * moved + 1e-9 * (1.0 + cabs(ell)) and isfinite(cabs(ell_try)):
            ell = ell_try
            der = der_try
            s = s + step
            ds = fmin(step * 2.0, 0.5)
            ad = cabs(der) * exp(-creal(ell))
            if ad < min_der:
                min_der = ad
        else:
            ds = step * 0.5
            if ds < 1e-13 * fmax(1.0, total):
                ell_out[0] = ell
                min_der_out[0] = min_der
                return DIVERGED
    if not ps_newton(ps, &ell, z, MAX_NEWTON, tol, &der):
        ell_out[0] = ell
        min_der_out[0] = min_der
        return DIVERGED
    ell_out[0] = ell
    min_der_out[0] = min_der
    if min_der < CRITICAL_DERIV:
        return CRITICAL
    return OK


def powersum_eval(ell, coefs, powers, c0=0.0, logc=0.0):
    """Evaluate ``F(l)`` and ``dF/dl`` elementwise."""
    arr = np.asarray(ell, dtype=complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] e = np.ascontiguousarray(arr.ravel())
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] c = np.ascontiguousarray(coefs, dtype=complex)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.ascontiguousarray(powers, dtype=float)
    cdef Py_ssize_t i, n = e.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] val = np.empty(n, dtype=complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] der = np.empty(n, dtype=complex)
    cdef PS ps
    ps.c = <double complex *> c.data if c.shape[0] else NULL
    ps.p = <double *> p.data if p.shape[0] else NULL
    ps.n = c.shape[0]
    ps.a = complex(c0)
    ps.L = complex(logc)
    with nogil:
        for i in range(n):
            ps_eval(&ps, e[i], &val[i], &der[i])
    return val.reshape(arr.shape), der.reshape(arr.shape)


def powersum_solve(targets, seeds, coefs, powers, c0=0.0, logc=0.0, tol=1e-12):
    """Plain Newton from given seeds (no continuation)."""
    tarr = np.asarray(targets, dtype=complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] t = np.ascontiguousarray(tarr.ravel())
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.array(
        np.broadcast_to(np.asarray(seeds, dtype=complex), tarr.shape).ravel(), dtype=complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] c = np.ascontiguousarray(coefs, dtype=complex)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.ascontiguousarray(powers, dtype=float)
    cdef Py_ssize_t i, n = t.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] conv = np.zeros(n, dtype=np.uint8)
    cdef double complex der
    cdef double tl = tol
    cdef PS ps
    ps.c = <double complex *> c.data if c.shape[0] else NULL
    ps.p = <double *> p.data if p.shape[0] else NULL
    ps.n = c.shape[0]
    ps.a = complex(c0)
    ps.L = complex(logc)
    with nogil:
        for i in range(n):
            conv[i] = ps_newton(&ps, &out[i], t[i], MAX_NEWTON, tl, &der)
    return out.reshape(tarr.shape), conv.astype(bool).reshape(tarr.shape)


def powersum_continue(targets, coefs, powers, c0=0.0, logc=0.0,
                      y_top=1e6, y_floor=None, tol=1e-12):
    """Invert the power sum at each target by vertical continuation."""
    tarr = np.atleast_1d(np.asarray(targets, dtype=complex))
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] t = np.ascontiguousarray(tarr.ravel())
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] c = np.ascontiguousarray(coefs, dtype=complex)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.ascontiguousarray(powers, dtype=float)
    cdef Py_ssize_t i, n = t.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] ell = np.empty(n, dtype=complex)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] status = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] min_der = np.empty(n, dtype=float)
    cdef double top = y_top
    cdef double floor = -1.0 if y_floor is None else y_floor
    cdef double tl = tol
    cdef PS ps
    ps.c = <double complex *> c.data if c.shape[0] else NULL
    ps.p = <double *> p.data if p.shape[0] else NULL
    ps.n = c.shape[0]
    ps.a = complex(c0)
    ps.L = complex(logc)
    with nogil:
        for i in range(n):
            status[i] = continue_one(&ps, t[i], top, floor, tl, 20000, &ell[i], &min_der[i])
    return ell, status, min_der
