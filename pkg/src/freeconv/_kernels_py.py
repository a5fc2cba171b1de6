"""Pure-Python (numpy) implementation of the power-sum kernels.

A power sum is ``F(l) = a + L*l + sum_k c_k exp(p_k l)`` in the logarithmic
coordinate ``l = log w``.  Boolean stable laws, their affine images, Boolean
powers and continuous Boolean mixtures all have reciprocal Cauchy transforms
of this shape, and so does the inverse of a free stable F-transform.  Working
in ``l`` rather than ``w`` makes the map entire, so continuation can cross the
negative real axis onto further sheets without branch bookkeeping.
"""
from __future__ import annotations

import numpy as np

from .continuation import continue_vertical, newton

BACKEND = "python"


def powersum_eval(ell, coefs, powers, c0=0.0, logc=0.0):
    """Evaluate ``F(l)`` and ``dF/dl`` elementwise."""
    ell = np.asarray(ell, dtype=complex)
    coefs = np.asarray(coefs, dtype=complex)
    powers = np.asarray(powers, dtype=float)
    val = np.full(ell.shape, complex(c0)) + logc * ell
    der = np.full(ell.shape, complex(logc))
    for c, p in zip(coefs, powers):
        term = c * np.exp(p * ell)
        val = val + term
        der = der + p * term
    return val, der


def powersum_solve(targets, seeds, coefs, powers, c0=0.0, logc=0.0, tol=1e-12):
    """Plain Newton from given seeds (no continuation)."""
    fn = _make_fn(coefs, powers, c0, logc)
    v, res, der, conv = newton(fn, np.asarray(seeds, dtype=complex),
                               np.asarray(targets, dtype=complex), max_iter=100, tol=tol)
    return v, conv


def powersum_continue(targets, coefs, powers, c0=0.0, logc=0.0,
                      y_top=1e6, y_floor=None, tol=1e-12):
    """Invert the power sum at each target by vertical continuation.

    Returns ``(log w, status, min |dF/dw|)`` with status codes from
    :mod:`freeconv.continuation`.
    """
    fn = _make_fn(coefs, powers, c0, logc)
    # diverging Newton steps overflow; they end up flagged through the status codes
    with np.errstate(over="ignore", invalid="ignore"):
        return continue_vertical(fn, _log_seed, targets, y_top=y_top, y_floor=y_floor,
                                 dv_dw=_dw, tol=tol)


def _make_fn(coefs, powers, c0, logc):
    coefs = np.asarray(coefs, dtype=complex)
    powers = np.asarray(powers, dtype=float)

    def fn(ell):
        return powersum_eval(ell, coefs, powers, c0, logc)

    return fn


def _log_seed(zeta):
    return np.log(zeta)


def _dw(ell, der):
    # dF/dw = (dF/dl) / w
    return np.abs(der) * np.exp(-ell.real)
