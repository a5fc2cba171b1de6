"""Vectorised Newton continuation along vertical rays in the upper half-plane.

Every inversion in the package (free stable F, Voiculescu transforms,
subordination maps evaluated from the asymptotic regime) follows the same
recipe: start at ``x + iY`` with ``Y`` huge, where the map is the identity to
leading order, and walk down to the target keeping a Newton solution alive.
The walk uses adaptive steps with a predictor and a sheet-jump guard.

The unknown ``v`` lives in whatever coordinate the caller chooses: the
logarithm of ``w`` for power-sum maps (so the walk can leave the principal
sheet) or ``w`` itself for opaque oracles.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

OK = 0
DIVERGED = 1
CRITICAL = 2

# Residual tolerance of a Newton solve, relative to max(1, |target|).
NEWTON_TOL = 1e-12
MAX_NEWTON = 100
STEP_NEWTON = 10
CRITICAL_DERIV = 1e-8

MapFn = Callable[[np.ndarray], "tuple[np.ndarray, np.ndarray]"]


def vertical_path(x, y_end, y_top, y_floor):
    """Return (heights at phase break, total parameter length) helpers.

    Phase A runs geometrically from ``y_top`` to ``y_a = max(y_end, y_floor)``
    and is parametrised by log-height; phase B runs linearly from ``y_a`` down
    to ``y_end`` (only when the target sits below the floor, e.g. on the real
    axis) over one parameter unit.
    """
    y_a = np.maximum(y_end, y_floor)
    log_top = np.log(y_top)
    span_a = log_top - np.log(y_a)
    has_b = y_end < y_a
    total = span_a + np.where(has_b, 1.0, 0.0)
    return y_a, log_top, span_a, total


def _height(s, y_a, log_top, span_a, y_end):
    in_a = s <= span_a
    h_a = np.exp(log_top - np.minimum(s, span_a))
    frac = np.clip(s - span_a, 0.0, 1.0)
    h_b = y_a + frac * (y_end - y_a)
    return np.where(in_a, h_a, h_b)


def newton(fn: MapFn, v, target, max_iter=STEP_NEWTON, tol=NEWTON_TOL):
    """Damped Newton for ``fn(v) = target``, vectorised.

    Returns ``(v, residual, derivative, converged)``.  A correction that does
    not reduce the residual is halved up to ten times before being taken.
    """
    v = np.array(v, dtype=complex, copy=True)
    target = np.asarray(target, dtype=complex)
    scale = tol * np.maximum(1.0, np.abs(target))
    val, der = fn(v)
    res = val - target
    absres = np.abs(res)
    conv = absres <= scale
    for _ in range(max_iter):
        act = ~conv & np.isfinite(absres)
        if not act.any():
            break
        idx = np.flatnonzero(act)
        with np.errstate(all="ignore"):
            step = res[idx] / der[idx]
        lam = np.ones(idx.size)
        vi = v[idx]
        best_v = vi - step
        bval, bder = fn(best_v)
        bres = np.abs(bval - target[idx])
        for _h in range(10):
            worse = ~(bres < absres[idx])
            if not worse.any():
                break
            lam = np.where(worse, lam * 0.5, lam)
            trial = vi - lam * step
            tval, tder = fn(trial[worse])
            sub = np.flatnonzero(worse)
            best_v[sub] = trial[worse]
            bval[sub] = tval
            bder[sub] = tder
            bres[sub] = np.abs(tval - target[idx][sub])
        v[idx] = best_v
        res[idx] = bval - target[idx]
        der[idx] = bder
        absres[idx] = bres
        conv = absres <= scale
    return v, res, der, conv


def continue_vertical(
    fn: MapFn,
    seed: Callable[[np.ndarray], np.ndarray],
    targets,
    *,
    y_top: float = 1e6,
    y_floor: float | None = None,
    dv_dw: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
    max_steps: int = 20000,
    tol: float = NEWTON_TOL,
):
    """Solve ``fn(v) = z`` for every target by continuation from ``Re z + iY``.

    Parameters
    ----------
    fn : callable
        ``fn(v) -> (value, d value / d v)`` on complex arrays.
    seed : callable
        Initial guess for ``v`` at the top of the ray.
    targets : array_like
        Points with ``Im z >= 0``.
    dv_dw : callable, optional
        ``dv_dw(v, dvalue)`` returning ``|dF/dw|`` for the critical-point
        test; defaults to ``|dvalue|``.

    Returns
    -------
    v, status, min_abs_deriv : ndarray
        ``status`` is ``OK``, ``DIVERGED`` (step underflow or Newton failure)
        or ``CRITICAL`` (|F'| dropped below 1e-8 somewhere on the path).
    """
    z = np.atleast_1d(np.asarray(targets, dtype=complex)).ravel()
    n = z.size
    x = z.real
    y_end = np.maximum(z.imag, 0.0)
    top = np.maximum(y_top, 10.0 * np.abs(z))
    if y_floor is None:
        floor = 1e-8 * np.maximum(1.0, np.abs(x))
    else:
        floor = np.full(n, float(y_floor))
    y_a, log_top, span_a, total = vertical_path(x, y_end, top, floor)

    zeta0 = x + 1j * top
    v0 = seed(zeta0)
    v, _, der, conv = newton(fn, v0, zeta0, max_iter=MAX_NEWTON, tol=tol)
    status = np.where(conv, OK, DIVERGED)
    absder = _absder(dv_dw, v, der)
    min_der = absder.copy()

    s = np.zeros(n)
    ds = np.full(n, 0.5)
    active = conv & (s < total)
    steps = 0
    while active.any() and steps < max_steps:
        steps += 1
        idx = np.flatnonzero(active)
        ds_max = np.where(s[idx] < span_a[idx], 0.5, 0.25)
        step = np.minimum(np.minimum(ds[idx], ds_max), total[idx] - s[idx])
        s_new = s[idx] + step
        h_old = _height(s[idx], y_a[idx], log_top[idx], span_a[idx], y_end[idx])
        h_new = _height(s_new, y_a[idx], log_top[idx], span_a[idx], y_end[idx])
        zeta_old = x[idx] + 1j * h_old
        zeta_new = x[idx] + 1j * h_new
        with np.errstate(all="ignore"):
            v_pred = v[idx] + (zeta_new - zeta_old) / der[idx]
        v_try, _, der_try, ok = newton(fn, v_pred, zeta_new, tol=tol)
        corr = np.abs(v_try - v_pred)
        moved = np.abs(v_pred - v[idx])
        guard = corr <= 0.5 * moved + 1e-9 * (1.0 + np.abs(v[idx]))
        ok &= guard & np.isfinite(v_try)
        acc = idx[ok]
        v[acc] = v_try[ok]
        der[acc] = der_try[ok]
        s[acc] = s_new[ok]
        ds[acc] = np.minimum(step[ok] * 2.0, 0.5)
        ad = _absder(dv_dw, v[acc], der[acc])
        min_der[acc] = np.minimum(min_der[acc], ad)
        rej = idx[~ok]
        ds[rej] = step[~ok] * 0.5
        dead = rej[ds[rej] < 1e-13 * np.maximum(1.0, total[rej])]
        status[dead] = DIVERGED
        active = (status == OK) & (s < total - 1e-15 * np.maximum(1.0, total))
    status[active] = DIVERGED

    good = status == OK
    if good.any():
        gi = np.flatnonzero(good)
        vf, _, derf, conv = newton(fn, v[gi], z[gi], max_iter=MAX_NEWTON, tol=tol)
        v[gi] = vf
        der[gi] = derf
        status[gi[~conv]] = DIVERGED
    status[(status == OK) & (min_der < CRITICAL_DERIV)] = CRITICAL
    return v, status, min_der


def _absder(dv_dw, v, der):
    if dv_dw is None:
        return np.abs(der)
    return dv_dw(v, der)


# -- two unknowns ---------------------------------------------------------------

System = Callable[[np.ndarray, np.ndarray, np.ndarray], tuple]


def newton2(fn: System, v1, v2, zeta, max_iter=STEP_NEWTON, tol=NEWTON_TOL):
    """Damped Newton for a 2x2 system ``fn(v1, v2, zeta) = 0``, vectorised.

    ``fn`` returns ``(e1, e2, j11, j12, j21, j22)``.  Returns
    ``(v1, v2, jac, converged)`` with ``jac`` the last Jacobian tuple.
    """
    v1 = np.array(v1, dtype=complex, copy=True)
    v2 = np.array(v2, dtype=complex, copy=True)
    zeta = np.asarray(zeta, dtype=complex)
    scale = tol * np.maximum(1.0, np.abs(zeta))
    out = fn(v1, v2, zeta)
    e1, e2, jac = out[0], out[1], list(out[2:])
    res = np.maximum(np.abs(e1), np.abs(e2))
    conv = res <= scale
    for _ in range(max_iter):
        act = ~conv & np.isfinite(res)
        if not act.any():
            break
        i = np.flatnonzero(act)
        j11, j12, j21, j22 = (j[i] for j in jac)
        with np.errstate(all="ignore"):
            det = j11 * j22 - j12 * j21
            d1 = (j22 * e1[i] - j12 * e2[i]) / det
            d2 = (j11 * e2[i] - j21 * e1[i]) / det
        lam = np.ones(i.size)
        b1, b2 = v1[i] - d1, v2[i] - d2
        o = fn(b1, b2, zeta[i])
        br = np.maximum(np.abs(o[0]), np.abs(o[1]))
        bo = list(o)
        for _h in range(10):
            worse = ~(br < res[i])
            if not worse.any():
                break
            lam = np.where(worse, lam * 0.5, lam)
            w = np.flatnonzero(worse)
            t1, t2 = v1[i][w] - lam[w] * d1[w], v2[i][w] - lam[w] * d2[w]
            ot = fn(t1, t2, zeta[i][w])
            b1[w], b2[w] = t1, t2
            for k in range(6):
                bo[k][w] = ot[k]
            br[w] = np.maximum(np.abs(ot[0]), np.abs(ot[1]))
        v1[i], v2[i] = b1, b2
        e1[i], e2[i] = bo[0], bo[1]
        for k in range(4):
            jac[k][i] = bo[k + 2]
        res[i] = br
        conv = res <= scale
    return v1, v2, tuple(jac), conv


def continue_vertical_2d(fn: System, seed, targets, *, y_top: float = 1e6,
                         y_floor: float | None = None, max_steps: int = 20000,
                         tol: float = NEWTON_TOL):
    """Continuation of a 2x2 system ``E(v1, v2; zeta) = 0`` down vertical rays.

    ``E`` must depend on ``zeta`` through ``-zeta`` in both components, so the
    tangent is ``J^{-1} (1, 1) dzeta``.  ``seed(zeta)`` gives ``(v1, v2)`` at
    the top of each ray.  Same path schedule, guard and status codes as
    :func:`continue_vertical`; returns ``(v1, v2, jac, status)``.
    """
    z = np.atleast_1d(np.asarray(targets, dtype=complex)).ravel()
    n = z.size
    x = z.real
    y_end = np.maximum(z.imag, 0.0)
    top = np.maximum(y_top, 10.0 * np.abs(z))
    floor = 1e-8 * np.maximum(1.0, np.abs(x)) if y_floor is None else np.full(n, float(y_floor))
    y_a, log_top, span_a, total = vertical_path(x, y_end, top, floor)

    zeta0 = x + 1j * top
    s1, s2 = seed(zeta0)
    v1, v2, jac, conv = newton2(fn, s1, s2, zeta0, max_iter=MAX_NEWTON, tol=tol)
    jac = [np.array(j) for j in jac]
    status = np.where(conv, OK, DIVERGED)
    s = np.zeros(n)
    ds = np.full(n, 0.5)
    active = conv & (s < total)
    steps = 0
    while active.any() and steps < max_steps:
        steps += 1
        idx = np.flatnonzero(active)
        ds_max = np.where(s[idx] < span_a[idx], 0.5, 0.25)
        step = np.minimum(np.minimum(ds[idx], ds_max), total[idx] - s[idx])
        s_new = s[idx] + step
        h_old = _height(s[idx], y_a[idx], log_top[idx], span_a[idx], y_end[idx])
        h_new = _height(s_new, y_a[idx], log_top[idx], span_a[idx], y_end[idx])
        dz = 1j * (h_new - h_old)
        j11, j12, j21, j22 = (j[idx] for j in jac)
        with np.errstate(all="ignore"):
            det = j11 * j22 - j12 * j21
            p1 = v1[idx] + (j22 - j12) / det * dz
            p2 = v2[idx] + (j11 - j21) / det * dz
        t1, t2, tj, ok = newton2(fn, p1, p2, x[idx] + 1j * h_new, tol=tol)
        corr = np.hypot(np.abs(t1 - p1), np.abs(t2 - p2))
        moved = np.hypot(np.abs(p1 - v1[idx]), np.abs(p2 - v2[idx]))
        size = np.hypot(np.abs(v1[idx]), np.abs(v2[idx]))
        ok &= (corr <= 0.5 * moved + 1e-9 * (1.0 + size)) & np.isfinite(t1) & np.isfinite(t2)
        acc = idx[ok]
        v1[acc], v2[acc] = t1[ok], t2[ok]
        for k in range(4):
            jac[k][acc] = tj[k][ok]
        s[acc] = s_new[ok]
        ds[acc] = np.minimum(step[ok] * 2.0, 0.5)
        rej = idx[~ok]
        ds[rej] = step[~ok] * 0.5
        status[rej[ds[rej] < 1e-13 * np.maximum(1.0, total[rej])]] = DIVERGED
        active = (status == OK) & (s < total - 1e-15 * np.maximum(1.0, total))
    status[active] = DIVERGED
    good = np.flatnonzero(status == OK)
    if good.size:
        f1, f2, fj, conv = newton2(fn, v1[good], v2[good], z[good], max_iter=MAX_NEWTON, tol=tol)
        v1[good], v2[good] = f1, f2
        for k in range(4):
            jac[k][good] = fj[k]
        status[good[~conv]] = DIVERGED
    return v1, v2, tuple(jac), status
