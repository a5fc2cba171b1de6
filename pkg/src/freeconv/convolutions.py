"""Boolean, free additive, free multiplicative and classical multiplicative convolutions.

Boolean convolution adds energy functions and is exact on oracles.  Free
additive convolution goes through subordination, free powers through the
equivalent relation ``t u + (1 - t) F(u) = z`` (``F_new = F(u)``), and the
free multiplicative product of measures on the half-line through the
multiplicative subordination system written in energy functions:

    K(zeta) = K1(zeta1) K2(zeta2),  zeta1 K2(zeta2) = zeta = zeta2 K1(zeta1),

which is the S-transform product ``S = S1 S2`` rewritten with
``eta(1/zeta) = K(zeta)/zeta``.  Classical multiplicative convolution of
densities is additive convolution in ``log x``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from . import kernels
from .continuation import DIVERGED, continue_vertical, continue_vertical_2d
from .errors import ConvergenceError, DomainError, InversionError, PreconditionError
from .stable_laws import StableLaw, boolean_stable_handle
from .transform_core import (
    Capabilities,
    GriddedDensity,
    MeasureHandle,
    PowerSumMeasure,
    dilate,
    point_mass,
    s_transform,
    standard_grid,
)

__all__ = [
    "ConvolutionResult",
    "IdentityReport",
    "boolean_convolve",
    "boolean_power",
    "free_convolve",
    "free_power",
    "free_mult_convolve",
    "verify_boolean_reproducing",
    "verify_scaling_identity",
    "classical_mult_convolve",
    "reciprocal_pushforward",
    "log_grid",
]

METHODS = ("transform_algebra", "subordination_fixpoint", "s_transform", "log_mellin")


@dataclass
class ConvolutionResult:
    handle: MeasureHandle
    method: str
    max_residual: float = 0.0
    grid_size: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    def to_dict(self):
        return {"schema": 1, "label": self.handle.label, "method": self.method,
                "max_residual": float(self.max_residual), "grid_size": int(self.grid_size),
                **self.extra}


# -- Boolean --------------------------------------------------------------------

def _is_positive_powersum(terms, kappa0, log_coef):
    """True for continuous Boolean mixtures of positive Boolean stable laws.

    That is, ``K = -sum lambda_k e^{i pi a_k} z^{1 - a_k}`` with ``a_k`` in
    (0, 1) and ``lambda_k > 0``, no constant and no log term.
    """
    if kappa0 != 0 or log_coef != 0:
        return False
    for kappa, p in terms:
        a = 1.0 - p
        if not 0 < a < 1:
            return False
        lam = kappa / (-np.exp(1j * np.pi * a))
        if not (lam.real > 0 and abs(lam.imag) <= 1e-12 * lam.real):
            return False
    return True


def _powersum_support(terms, kappa0, log_coef):
    if not terms and log_coef == 0 and kappa0.imag == 0:
        return (kappa0.real, kappa0.real)
    return (0.0, math.inf) if _is_positive_powersum(terms, kappa0, log_coef) else (-math.inf, math.inf)


def boolean_convolve(m1: MeasureHandle, m2: MeasureHandle) -> ConvolutionResult:
    """``K = K1 + K2``."""
    label = f"({m1.label})+({m2.label})"
    if isinstance(m1, PowerSumMeasure) and isinstance(m2, PowerSumMeasure):
        terms = list(m1.terms) + list(m2.terms)
        k0, lam = m1.kappa0 + m2.kappa0, m1.log_coef + m2.log_coef
        closed = m1.capabilities.closed_density and m2.capabilities.closed_density
        h = PowerSumMeasure(terms, k0, lam, density_closed=closed,
                            support=_powersum_support(PowerSumMeasure(terms).terms, k0, lam),
                            label=label)
        return ConvolutionResult(h, "transform_algebra")
    h = MeasureHandle(lambda z: m1.F(z) + m2.F(z) - z,
                      dF=lambda z: m1.dF(z) + m2.dF(z) - 1.0,
                      capabilities=Capabilities(closed_K=m1.capabilities.closed_K
                                                and m2.capabilities.closed_K),
                      label=label)
    return ConvolutionResult(h, "transform_algebra")


def boolean_power(m: MeasureHandle, t: float) -> ConvolutionResult:
    """``m^{⊎t}``: ``K -> t K``; ``t = 0`` gives ``delta_0``."""
    t = float(t)
    if not t >= 0:
        raise DomainError("Boolean powers need t >= 0")
    if t == 0:
        return ConvolutionResult(point_mass(0.0), "transform_algebra")
    label = f"({m.label})^(+{t:g})"
    if isinstance(m, PowerSumMeasure):
        terms = [(t * k, p) for k, p in m.terms]
        k0, lam = t * m.kappa0, t * m.log_coef
        h = PowerSumMeasure(terms, k0, lam, density_closed=m.capabilities.closed_density,
                            support=_powersum_support(PowerSumMeasure(terms).terms, k0, lam),
                            label=label)
        return ConvolutionResult(h, "transform_algebra")
    h = MeasureHandle(lambda z: (1.0 - t) * z + t * m.F(z),
                      dF=lambda z: (1.0 - t) + t * m.dF(z),
                      capabilities=Capabilities(closed_K=m.capabilities.closed_K),
                      label=label)
    return ConvolutionResult(h, "transform_algebra")


# -- free additive ----------------------------------------------------------------

FIX_TOL = 1e-12
FIX_MAX = 2000


def _subordinate_add(m1, m2, z, tol=FIX_TOL, max_iter=FIX_MAX):
    """Solve ``w = T(w) = z + h2(z + h1(w))`` with ``h = F - id``.

    Plain iteration with a Newton acceleration on ``w - T(w)``; a Newton step
    that leaves the half-plane or does not shrink the residual is replaced by
    the averaged step ``(w + T(w)) / 2``.  Returns ``(omega1, omega2)``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    w = z + 1j * np.maximum(1.0, np.abs(z))
    done = np.zeros(z.shape, dtype=bool)
    resid = np.full(z.shape, np.inf)
    for _ in range(max_iter):
        a = ~done
        if not a.any():
            break
        wa, za = w[a], z[a]
        f1 = m1.F(wa)
        u = za + f1 - wa
        f2 = m2.F(u)
        T = za + f2 - u
        g = wa - T
        dT = (m2.dF(u) - 1.0) * (m1.dF(wa) - 1.0)
        with np.errstate(all="ignore"):
            newton = wa - g / (1.0 - dT)
        avg = 0.5 * (wa + T)
        cand = np.where(np.isfinite(newton) & (newton.imag > 0), newton, T)
        # accept the Newton/plain candidate only if it does not blow up the residual
        f1c = m1.F(cand)
        uc = za + f1c - cand
        gc = cand - (za + m2.F(uc) - uc)
        worse = ~(np.abs(gc) <= np.abs(g))
        new = np.where(worse, avg, cand)
        step = np.abs(new - wa)
        w[a] = new
        resid[a] = np.where(worse, np.abs(g), np.abs(gc))
        done[a] = (step <= tol * np.maximum(1.0, np.abs(wa))) | (
            resid[a] <= tol * np.maximum(1.0, np.abs(za)))
    if not done.all():
        raise ConvergenceError(f"subordination stagnated at {int((~done).sum())} point(s)",
                               residual=resid[~done])
    omega1 = w
    omega2 = z + m1.F(omega1) - omega1
    return omega1, omega2


def free_convolve(m1: MeasureHandle, m2: MeasureHandle, *, diagnose: bool = True) -> ConvolutionResult:
    """``m1 ⊞ m2`` via subordination: ``F(z) = F1(omega1(z))``."""

    def F(z):
        z = np.asarray(z, dtype=complex)
        o1, _ = _subordinate_add(m1, m2, z.ravel())
        return m1.F(o1).reshape(z.shape)

    def dF(z):
        z = np.asarray(z, dtype=complex)
        zf = z.ravel()
        o1, o2 = _subordinate_add(m1, m2, zf)
        h1p, h2p = m1.dF(o1) - 1.0, m2.dF(o2) - 1.0
        d1 = (1.0 + h2p) / (1.0 - h2p * h1p)
        return (m1.dF(o1) * d1).reshape(z.shape)

    h = MeasureHandle(F, dF=dF, label=f"({m1.label})[+]({m2.label})")
    res, n = 0.0, 0
    if diagnose:
        g = standard_grid()
        o1, o2 = _subordinate_add(m1, m2, g)
        res = float(np.max(np.abs(m1.F(o1) - m2.F(o2))))
        n = g.size
    return ConvolutionResult(h, "subordination_fixpoint", res, n)


def _certified_fid(m: MeasureHandle):
    """Return an FID verdict for ``m`` (closed form when the law is known)."""
    from .divisibility import FIDVerdict, classify_fid, verify_fid_numeric

    law = getattr(m, "law", None)
    if isinstance(law, StableLaw) and law.family == "boolean":
        return classify_fid(law.alpha, law.rho)
    if isinstance(law, StableLaw) and law.family == "free":
        return FIDVerdict(True, "numeric", alpha=law.alpha, rho=law.rho)
    if isinstance(m, PowerSumMeasure) and _is_positive_powersum(m.terms, m.kappa0, m.log_coef) \
            and all(1.0 - p <= 0.5 for _, p in m.terms):
        # Boolean mixtures of positive stable laws with indices <= 1/2 are FID
        return FIDVerdict(True, "numeric")
    return verify_fid_numeric(m)


def free_power(m: MeasureHandle, t: float, *, diagnose: bool = True) -> ConvolutionResult:
    """``m^{⊞t}`` with ``F_new(z) = F(u)``, ``t u + (1 - t) F(u) = z``.

    This is ``F_new^{-1}(z) = z + t phi(z)`` written in the variable
    ``u = F^{-1}(F_new(z))``; for ``t >= 1`` ``u`` is the subordination map.
    Powers ``t < 1`` require ``m`` to be freely infinitely divisible.
    """
    t = float(t)
    if t < 0:
        raise DomainError("free powers need t >= 0")
    if t < 1:
        verdict = _certified_fid(m)
        if not verdict.decision:
            raise PreconditionError(
                f"free power t={t:g} < 1 needs a freely infinitely divisible input; "
                f"{m.label} is not (rule {verdict.rule!r})")
    if t == 0:
        return ConvolutionResult(point_mass(0.0), "transform_algebra")
    if t == 1:
        return ConvolutionResult(m, "transform_algebra")
    label = f"({m.label})^([+]{t:g})"
    if isinstance(m, PowerSumMeasure):
        h = _powersum_free_power(m, t, label)
    else:
        h = _generic_free_power(m, t, label)
    res, n = 0.0, 0
    if diagnose:
        g = standard_grid()
        u, w = h.subordinate(g)
        res = float(np.max(np.abs(t * u + (1 - t) * w - g) / np.maximum(1.0, np.abs(g))))
        n = g.size
    return ConvolutionResult(h, "subordination_fixpoint", res, n, {"power": t})


class _FreePowerHandle(MeasureHandle):
    def subordinate(self, z):
        raise NotImplementedError


def _powersum_free_power(m: PowerSumMeasure, t, label):
    # t u + (1-t)(u - K(u)) = u + (t-1) K(u)
    coefs = np.array([1.0 + 0j] + [(t - 1.0) * k for k, _ in m.terms])
    powers = np.array([1.0] + [p for _, p in m.terms])
    c0, logc = (t - 1.0) * m.kappa0, (t - 1.0) * m.log_coef

    def solve(z):
        z = np.asarray(z, dtype=complex)
        ell, status, _ = kernels.powersum_continue(z.ravel(), coefs, powers, c0, logc)
        if np.any(status == DIVERGED):
            raise InversionError("free power subordination failed", last=np.exp(ell[status == DIVERGED]))
        return ell.reshape(z.shape)

    class H(_FreePowerHandle):
        def subordinate(self, z):
            ell = solve(z)
            return np.exp(ell), m.F_log(ell)

    def F(z):
        return m.F_log(solve(z))

    def dF(z):
        ell = solve(z)
        _, dG = kernels.powersum_eval(ell, coefs, powers, c0, logc)
        return m.dF_log(ell) / dG

    support = m.support if m.positive else (-math.inf, math.inf)
    return H(F, dF=dF, support=support, label=label)


def _generic_free_power(m: MeasureHandle, t, label):
    def fn(u):
        u = np.asarray(u, dtype=complex)
        val = np.full(u.shape, np.nan + 0j)
        der = np.full(u.shape, np.nan + 0j)
        ok = np.isfinite(u) & (u.imag > 0)
        if ok.any():
            with np.errstate(all="ignore"):
                val[ok] = t * u[ok] + (1 - t) * m.F(u[ok])
                der[ok] = t + (1 - t) * m.dF(u[ok])
        return val, der

    def solve(z):
        z = np.asarray(z, dtype=complex)
        u, status, _ = continue_vertical(fn, lambda q: q, z.ravel())
        if np.any(status == DIVERGED):
            raise InversionError("free power subordination failed", last=u[status == DIVERGED])
        return u.reshape(z.shape)

    class H(_FreePowerHandle):
        def subordinate(self, z):
            u = solve(z)
            return u, m.F(u)

    def F(z):
        return m.F(solve(z))

    def dF(z):
        u = solve(z)
        d = m.dF(u)
        return d / (t + (1 - t) * d)

    return H(F, dF=dF, support=m.support if m.positive else (-math.inf, math.inf), label=label)


# -- free multiplicative ------------------------------------------------------------

def _K_pair(m):
    """Energy function and its derivative off the real axis.

    The lower half-plane is reached by reflection, ``K(conj z) = conj K(z)``;
    for measures on the half-line the negative axis is admitted as the limit
    from above.
    """
    def split(z):
        low = z.imag < 0
        return low, np.where(low, np.conj(z), z)

    def K(z):
        low, w = split(np.asarray(z, dtype=complex))
        k = w - m.F(w)
        return np.where(low, np.conj(k), k)

    def dK(z):
        low, w = split(np.asarray(z, dtype=complex))
        d = 1.0 - m.dF(w)
        return np.where(low, np.conj(d), d)

    def admissible(z):
        ok = np.isfinite(z) & (z.imag != 0)
        if m.positive:
            ok |= np.isfinite(z) & (z.imag == 0) & (z.real < 0)
        return ok

    return K, dK, admissible


def _mult_system(m1, m2):
    K1, dK1, ok1 = _K_pair(m1)
    K2, dK2, ok2 = _K_pair(m2)

    def fn(z1, z2, zeta):
        z1 = np.asarray(z1, dtype=complex)
        z2 = np.asarray(z2, dtype=complex)
        shape = z1.shape
        nan = np.full(shape, np.nan + 0j)
        ok = ok1(z1) & ok2(z2)
        k1, d1, k2, d2 = nan.copy(), nan.copy(), nan.copy(), nan.copy()
        if ok.any():
            with np.errstate(all="ignore"):
                k1[ok], d1[ok] = K1(z1[ok]), dK1(z1[ok])
                k2[ok], d2[ok] = K2(z2[ok]), dK2(z2[ok])
        return (z1 * k2 - zeta, z2 * k1 - zeta, k2, z1 * d2, z2 * d1, k1)

    def seed(zeta):
        z1 = np.array(zeta, dtype=complex)
        z2 = np.array(zeta, dtype=complex)
        for _ in range(200):
            z2n = zeta / K1(z1)
            z1n = zeta / K2(z2n)
            delta = np.abs(z1n - z1) + np.abs(z2n - z2)
            z1, z2 = z1n, z2n
            if np.all(delta <= 1e-13 * np.abs(z1)):
                break
        return z1, z2

    return fn, seed, K1, dK1, K2, dK2


def free_mult_convolve(m1: MeasureHandle, m2: MeasureHandle, *, allow_real_first: bool = False,
                       diagnose: bool = True) -> ConvolutionResult:
    """``m1 ⊠ m2`` for measures on the half-line.

    The energy function of the product is ``K1(zeta1) K2(zeta2)`` where
    ``(zeta1, zeta2)`` solve ``zeta1 K2(zeta2) = zeta = zeta2 K1(zeta1)``; the
    pair is followed down vertical rays from the asymptotic regime.
    ``allow_real_first`` admits a first factor on the whole line (used for
    the strict-stability check of products with Boolean stable laws).
    Diagnostics report ``|S - S1 S2|`` at a few points of (-1, 0).
    """
    if not m2.positive:
        raise PreconditionError(f"{m2.label}: second factor of ⊠ must live on [0, inf)")
    if not m1.positive and not allow_real_first:
        raise PreconditionError(f"{m1.label}: first factor of ⊠ must live on [0, inf)")
    fn, seed, K1, dK1, K2, dK2 = _mult_system(m1, m2)

    def solve(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        z1, z2, jac, status = continue_vertical_2d(fn, seed, zeta.ravel())
        if np.any(status == DIVERGED):
            raise InversionError(f"⊠ subordination failed at {int((status == DIVERGED).sum())} "
                                 "point(s)", last=z1[status == DIVERGED])
        return z1, z2, jac

    def F(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        z1, z2, _ = solve(zeta)
        return (zeta.ravel() - K1(z1) * K2(z2)).reshape(zeta.shape)

    def dF(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        z1, z2, (j11, j12, j21, j22) = solve(zeta)
        det = j11 * j22 - j12 * j21
        d1 = (j22 - j12) / det
        d2 = (j11 - j21) / det
        dK = dK1(z1) * K2(z2) * d1 + K1(z1) * dK2(z2) * d2
        return (1.0 - dK).reshape(zeta.shape)

    support = (0.0, math.inf) if m1.positive else (-math.inf, math.inf)
    h = MeasureHandle(F, dF=dF, support=support, label=f"({m1.label})[x]({m2.label})")
    res, n = 0.0, 0
    extra = {}
    if diagnose and m1.positive:
        w = np.array([-0.8, -0.6, -0.5, -0.4, -0.2])
        s_p = s_transform(h, w)
        s_12 = s_transform(m1, w) * s_transform(m2, w)
        res = float(np.max(np.abs(s_p - s_12) / np.abs(s_12)))
        n = w.size
        extra = {"s_points": w.tolist()}
    return ConvolutionResult(h, "s_transform", res, n, extra)


# -- identity reports -------------------------------------------------------------

@dataclass
class IdentityReport:
    identity: str
    grid: int
    sup_rel_err: float
    tol: float
    witness: complex | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.sup_rel_err) and self.sup_rel_err <= self.tol)

    def to_dict(self):
        w = None if self.witness is None else {"z": [self.witness.real, self.witness.imag]}
        return {"schema": 1, "identity": self.identity, "grid": self.grid,
                "sup_rel_err": float(self.sup_rel_err), "tol": self.tol, "passed": self.passed,
                "witness": w, **self.details}

    def to_json(self):
        return json.dumps(self.to_dict())


def _compare(identity, a, b, z, tol, **details):
    err = np.abs(a - b) / np.maximum(np.abs(b), 1e-300)
    k = int(np.argmax(err))
    return IdentityReport(identity, int(np.size(z)), float(err[k]), tol, complex(z.ravel()[k]),
                          details)


def identity_points(n_x: int = 5, n_y: int = 4) -> np.ndarray:
    """Twenty points of the standard grid region: 5 abscissae x 4 heights."""
    xs = np.linspace(-10, 10, n_x)
    ys = np.logspace(-2, 2, n_y)
    return (xs[None, :] + 1j * ys[:, None]).ravel()


def verify_boolean_reproducing(rho: float, s: float, t: float, tol: float = 1e-3) -> IdentityReport:
    """Product of ``b^rho_{1/(1+t)}`` and ``b^1_{1/(1+s)}``.

    For ``rho`` in {0, 1/2, 1} the Cauchy transform of the product is compared
    with that of ``b^rho_{1/(1+s+t)}`` at twenty points.  For other ``rho``
    the product ``p`` is tested for Boolean strict stability with index
    ``1/(1+s+t)``: ``K_{p⊎p}`` against ``K_{D_{2^{1+s+t}} p}`` and against
    ``D_{1/2}(mu^{⊎2} ⊠ nu^{⊎2})`` (the Boolean-power scaling rule).
    """
    if not (s > 0 and t > 0):
        raise DomainError("s and t must be positive")
    mu = boolean_stable_handle(StableLaw("boolean", 1.0 / (1.0 + t), rho))
    nu = boolean_stable_handle(StableLaw("boolean", 1.0 / (1.0 + s), 1.0))
    prod = free_mult_convolve(mu, nu, allow_real_first=True, diagnose=False).handle
    z = identity_points()
    if rho in (0.0, 0.5, 1.0):
        target = boolean_stable_handle(StableLaw("boolean", 1.0 / (1.0 + s + t), rho))
        return _compare(f"b({rho:g})_1/(1+{t:g}) [x] b(1)_1/(1+{s:g}) = b({rho:g})_1/(1+{s:g}+{t:g})",
                        prod.G(z), target.G(z), z, tol, rho=rho, s=s, t=t, kind="identification")
    c = 2.0 ** (1.0 + s + t)
    lhs = 2.0 * prod.K(z)
    rhs_dil = dilate(prod, c).K(z)
    mu2 = boolean_power(mu, 2.0).handle
    nu2 = boolean_power(nu, 2.0).handle
    rhs_scal = dilate(free_mult_convolve(mu2, nu2, allow_real_first=True, diagnose=False).handle,
                      0.5).K(z)
    r1 = _compare("", lhs, rhs_dil, z, tol)
    r2 = _compare("", lhs, rhs_scal, z, tol)
    worst = r1 if r1.sup_rel_err >= r2.sup_rel_err else r2
    return IdentityReport(f"p=b({rho:g})_1/(1+{t:g}) [x] b(1)_1/(1+{s:g}) is (+)-strictly stable, "
                          f"index 1/(1+{s:g}+{t:g})", z.size, worst.sup_rel_err, tol,
                          worst.witness, {"rho": rho, "s": s, "t": t, "kind": "strict_stability",
                                          "err_dilation": r1.sup_rel_err,
                                          "err_scaling_rule": r2.sup_rel_err})


def verify_scaling_identity(m1: MeasureHandle, m2: MeasureHandle, t: float, tol: float = 1e-3,
                            grid=None) -> IdentityReport:
    """``(m1 ⊠ m2)^{⊎t}`` against ``D_{1/t}(m1^{⊎t} ⊠ m2^{⊎t})`` in K on a grid."""
    if not t > 0:
        raise DomainError("t must be positive")
    z = standard_grid() if grid is None else np.asarray(grid, dtype=complex)
    lhs = boolean_power(free_mult_convolve(m1, m2, diagnose=False).handle, t).handle
    rhs = dilate(free_mult_convolve(boolean_power(m1, t).handle, boolean_power(m2, t).handle,
                                    diagnose=False).handle, 1.0 / t)
    return _compare(f"(m1[x]m2)^(+{t:g}) = D_1/{t:g}(m1^(+{t:g})[x]m2^(+{t:g}))",
                    lhs.K(z), rhs.K(z), z, tol, t=t)


# -- classical multiplicative ---------------------------------------------------------

LOG_HALF_WIDTH = 12.0
LOG_NODES = 2**14 + 1


def log_grid(n: int = LOG_NODES, half_width: float = LOG_HALF_WIDTH) -> np.ndarray:
    """Uniform grid in ``log x`` over ``[-half_width, half_width]`` (returned as ``x``)."""
    return np.exp(np.linspace(-half_width, half_width, n))


def _on_log_grid(d: GriddedDensity, u):
    """``x f(x)`` at ``x = e^u``: linear interpolation of ``x f`` in ``log x``
    inside the node range, power-law closures (when set) outside it."""
    if d.nodes[0] <= 0:
        raise PreconditionError("classical ⊛ needs densities on (0, inf)")
    ud = np.log(d.nodes)
    gd = d.nodes * d.values
    g = np.interp(u, ud, gd, left=0.0, right=0.0)
    if d.tail_exponent is not None:
        right = u > ud[-1]
        g[right] = gd[-1] * np.exp((d.tail_exponent + 1.0) * (u[right] - ud[-1]))
    if d.head_exponent is not None:
        left = u < ud[0]
        g[left] = gd[0] * np.exp((d.head_exponent + 1.0) * (u[left] - ud[0]))
    return g


def _fit_exponent(x, f, end):
    sl = slice(-3, None) if end == "tail" else slice(0, 3)
    xs, fs = x[sl], f[sl]
    if np.any(fs <= 0):
        return None
    return float(np.polyfit(np.log(xs), np.log(fs), 1)[0])


def classical_mult_convolve(d1: GriddedDensity, d2: GriddedDensity, *, n: int = LOG_NODES,
                            half_width: float = LOG_HALF_WIDTH,
                            mass_tol: float = 1e-4) -> GriddedDensity:
    """Density of ``XY`` for independent positive ``X ~ d1``, ``Y ~ d2``.

    In ``u = log x`` the densities ``g_i(u) = x f_i(x)`` convolve additively;
    the convolution runs by FFT on a uniform grid and the result is mapped
    back with ``f(x) = g(log x) / x``.  Inputs are sampled on twice the output
    range, using their power-law closures beyond their own nodes.  Power-law closures are fitted at both
    ends; a mass defect above ``mass_tol`` raises a warning.
    """
    if n % 2 == 0:
        raise ValueError("the log grid needs an odd number of nodes")
    u = np.linspace(-half_width, half_width, n)
    du = u[1] - u[0]
    # inputs on the doubled range so that every output node sees the full
    # product; beyond the input nodes the closures take over
    h = (n - 1) // 2
    u_ext = np.linspace(-2 * half_width, 2 * half_width, 4 * h + 1)
    g1, g2 = _on_log_grid(d1, u_ext), _on_log_grid(d2, u_ext)
    g = signal.fftconvolve(g1, g2)[3 * h:3 * h + n] * du
    g = np.maximum(g, 0.0)
    x = np.exp(u)
    f = g / x
    out = GriddedDensity(x, f, _fit_exponent(x, f, "tail"), _fit_exponent(x, f, "head"))
    if out.tail_exponent is not None and not out.tail_exponent < -1:
        out.tail_exponent = None
    if out.head_exponent is not None and not out.head_exponent > -1:
        out.head_exponent = None
    loss = 1.0 - out.mass()
    out.mass_loss = loss
    if abs(loss) > mass_tol:
        warnings.warn(f"classical ⊛: mass defect {loss:.2e} after truncation to "
                      f"|log x| <= {half_width:g}", RuntimeWarning, stacklevel=2)
    return out


def reciprocal_pushforward(d: GriddedDensity) -> GriddedDensity:
    """Law of ``1/X``: ``f_out(y) = f(1/y) / y^2``, exact on the mirrored nodes."""
    if d.nodes[0] <= 0:
        raise PreconditionError("reciprocal push-forward needs a density on (0, inf)")
    y = 1.0 / d.nodes[::-1]
    vals = d.values[::-1] * d.nodes[::-1] ** 2
    head = None if d.tail_exponent is None else -d.tail_exponent - 2.0
    tail = None if d.head_exponent is None else -d.head_exponent - 2.0
    return GriddedDensity(y, vals, tail, head)
