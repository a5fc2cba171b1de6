"""Free infinite divisibility of Boolean stable laws and related diagnostics.

A measure is freely infinitely divisible (FID) iff its Voiculescu transform
``phi(z) = F^{-1}(z) - z`` continues analytically to the whole upper
half-plane with ``Im phi <= 0``.  Numerically ``phi`` is followed down
vertical rays from the asymptotic regime.  For laws that are not FID the
ray-wise continuation still produces values with ``Im phi <= 0``, but two
neighbouring rays reach ``z`` on different sheets; the verifier looks for
that discontinuity by bisecting between grid neighbours.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import optimize

from . import kernels
from .continuation import CRITICAL, DIVERGED, OK, continue_vertical
from .errors import DomainError, InversionError, ParameterError
from .stable_laws import StableLaw, boolean_stable_handle, check_params
from .transform_core import MeasureHandle, PowerSumMeasure, standard_grid

__all__ = [
    "FIDVerdict",
    "BranchAngles",
    "classify_fid",
    "numeric_phi",
    "verify_fid_numeric",
    "f0_diverges",
    "branch_angles",
    "ray_noninjectivity_witness",
    "ui_boundary_diagnostic",
    "belinschi_nica",
    "indicator_probe",
]

RULES = ("alpha_le_half", "middle_band", "cauchy", "numeric", "none")
IM_PHI_TOL = 1e-9
JUMP_TOL = 1e-3
# Rounding slack for the inclusive boundaries of the closed-form rule.
_EDGE = 1e-12
_SPLIT = 0.4990234375


@dataclass
class FIDVerdict:
    """Outcome of a closed-form or numerical FID test.

    ``rule`` names the matched case of the classification (``numeric`` for a
    verdict established only by the grid sweep).  ``witness`` is a dict with
    the point ``z``, its ``kind`` (``im_phi``, ``jump``, ``f0_divergence``,
    ``obstruction``) and the measured ``value``.
    """

    decision: bool
    rule: str
    min_neg_im_phi: float | None = None
    witness: dict | None = None
    alpha: float | None = None
    rho: float | None = None
    flagged_fraction: float = 0.0
    max_jump: float = 0.0
    n_points: int = 0

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown rule {self.rule!r}")
        if self.decision != (self.rule != "none"):
            raise ValueError("decision must be true exactly when a rule matched")

    def to_dict(self):
        w = None
        if self.witness is not None:
            z = complex(self.witness["z"])
            w = {"z": [z.real, z.imag], "kind": self.witness["kind"],
                 "value": float(self.witness["value"])}
        return {"schema": 1, "alpha": self.alpha, "rho": self.rho, "decision": self.decision,
                "rule": self.rule, "min_neg_im_phi": _finite_or_none(self.min_neg_im_phi),
                "witness": w, "flagged_fraction": self.flagged_fraction,
                "max_jump": self.max_jump, "n_points": self.n_points}

    def to_json(self):
        return json.dumps(self.to_dict())


def _finite_or_none(v):
    if v is None or not math.isfinite(v):
        return None
    return float(v)


def classify_fid(alpha: float, rho: float) -> FIDVerdict:
    """Closed-form FID classification of the Boolean stable law ``b_alpha^rho``.

    FID iff ``alpha <= 1/2``; or ``1/2 < alpha <= 2/3`` with
    ``2 - 1/alpha <= rho <= 1/alpha - 1``; or ``alpha = 1, rho = 1/2``.
    """
    check_params("boolean", alpha, rho)
    if alpha <= 0.5:
        rule = "alpha_le_half"
    elif alpha <= 2.0 / 3.0 + _EDGE and 2.0 - 1.0 / alpha - _EDGE <= rho <= 1.0 / alpha - 1.0 + _EDGE:
        rule = "middle_band"
    elif alpha == 1.0 and rho == 0.5:
        rule = "cauchy"
    else:
        rule = "none"
    return FIDVerdict(rule != "none", rule, alpha=alpha, rho=rho)


def distance_to_boundary(alpha: float, rho: float) -> float:
    """Euclidean distance in the (alpha, rho) plane to the classification boundary."""
    a = np.linspace(0.5, 2.0 / 3.0, 2001)
    curves = [np.c_[np.full(101, 0.5), np.linspace(0, 1, 101)],
              np.c_[a, 2 - 1 / a], np.c_[a, 1 / a - 1],
              np.c_[np.full(101, 2.0 / 3.0), np.linspace(0, 1, 101)]]
    pts = np.vstack(curves)
    d = np.hypot(pts[:, 0] - alpha, pts[:, 1] - rho).min()
    return float(min(d, math.hypot(alpha - 1, rho - 0.5)))


# -- numerical phi --------------------------------------------------------------

def numeric_phi(m: MeasureHandle, z, *, full: bool = False, y_top: float = 1e6):
    """Voiculescu transform by continuation down the vertical ray through ``z``.

    Power-sum handles use the compiled kernel in the logarithmic coordinate;
    other handles run the generic continuation in ``w``.  With ``full=True``
    returns ``(phi, status, min |F'|)``; otherwise a diverged point raises
    :class:`InversionError`.
    """
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    zf = z.ravel()
    if np.any(zf.imag < 0):
        raise DomainError("numeric_phi needs Im z >= 0")
    if isinstance(m, PowerSumMeasure) and not m.terms and m.log_coef == 0:
        # F(w) = w - kappa0 is inverted exactly; the log coordinate would hit w = 0
        phi = np.full(shape, m.kappa0, dtype=complex)
        ok = np.zeros(shape, dtype=int) + OK
        if full:
            return phi, ok, np.ones(shape)
        return phi
    if isinstance(m, PowerSumMeasure):
        coefs, powers, c0, logc = m.kernel_args
        ell, status, min_der = kernels.powersum_continue(zf, coefs, powers, c0, logc, y_top=y_top)
        w = np.exp(ell)
    else:
        w, status, min_der = continue_vertical(_safe_map(m), lambda q: q, zf, y_top=y_top)
    phi = (w - zf).reshape(shape)
    status = status.reshape(shape)
    if full:
        return phi, status, min_der.reshape(shape)
    if np.any(status == DIVERGED):
        raise InversionError(f"continuation failed at {int((status == DIVERGED).sum())} point(s)",
                             last=phi[status == DIVERGED])
    return phi


def _safe_map(m):
    def fn(w):
        w = np.asarray(w, dtype=complex)
        val = np.full(w.shape, np.nan + 0j)
        der = np.full(w.shape, np.nan + 0j)
        ok = np.isfinite(w) & (w.imag > 0)
        if ok.any():
            try:
                with np.errstate(all="ignore"):
                    val[ok] = m.F(w[ok])
                    der[ok] = m.dF(w[ok])
            except (InversionError, DomainError, FloatingPointError):
                pass
        return val, der
    return fn


def f0_diverges(m: MeasureHandle) -> bool:
    """True when ``|F(i eps)|`` keeps growing without settling as ``eps -> 0``.

    Uses ``eps = 10^-2 ... 10^-14``: the sequence must increase monotonically
    and its last increment must be at least half the first (so logarithmic
    and power growth fire, convergence to a finite limit does not).
    """
    eps = 10.0 ** -np.arange(2, 15, dtype=float)
    with np.errstate(all="ignore"):
        vals = np.abs(m.F(1j * eps))
    if not np.all(np.isfinite(vals)):
        return True
    inc = np.diff(vals)
    return bool(np.all(inc > 0) and inc[-1] >= 0.5 * inc[0])


def _rows(grid):
    """Split a grid into rows of constant ``Im z`` sorted by ``Re z``."""
    g = np.asarray(grid, dtype=complex)
    if g.ndim == 2:
        return [np.sort_complex(r) for r in g]
    out = []
    for y in np.unique(g.imag):
        r = g[g.imag == y]
        out.append(r[np.argsort(r.real)])
    return out


def _max_jump(m, rows, width_tol=1e-9, max_iter=60):
    """Largest discontinuity of ray-wise phi between row neighbours.

    Diverged rays are skipped, so a ray running into a critical value is
    bracketed by its neighbours.  Each pair with ``|dphi| > JUMP_TOL`` is
    bisected (with a slightly off-centre split, so a symmetric bracket never
    lands on the critical ray itself), keeping the half with the larger
    difference, until the bracket is narrower than ``width_tol``.  A smooth
    phi drops below the threshold, a sheet jump does not.  Returns
    ``(jump, location)``.
    """
    lo, hi, plo, phi_ = [], [], [], []
    for r in rows:
        if r.size < 2:
            continue
        p, st, _ = numeric_phi(m, r, full=True)
        keep = st != DIVERGED
        r, p = r[keep], p[keep]
        lo.append(r[:-1]); hi.append(r[1:])
        plo.append(p[:-1]); phi_.append(p[1:])
    if not lo:
        return 0.0, None
    lo, hi, plo, phi_ = (np.concatenate(a) for a in (lo, hi, plo, phi_))
    for _ in range(max_iter):
        cand = np.abs(phi_ - plo) > JUMP_TOL
        lo, hi, plo, phi_ = lo[cand], hi[cand], plo[cand], phi_[cand]
        if lo.size == 0:
            return 0.0, None
        if np.all(np.abs(hi - lo) < width_tol):
            break
        mid = lo + _SPLIT * (hi - lo)
        pm, st, _ = numeric_phi(m, mid, full=True)
        alive = st != DIVERGED
        lo, hi, plo, phi_, mid, pm = (a[alive] for a in (lo, hi, plo, phi_, mid, pm))
        if lo.size == 0:
            return 0.0, None
        left = np.abs(pm - plo) >= np.abs(phi_ - pm)
        hi = np.where(left, mid, hi)
        phi_ = np.where(left, pm, phi_)
        lo = np.where(left, lo, mid)
        plo = np.where(left, plo, pm)
    d = np.abs(phi_ - plo)
    k = int(np.argmax(d))
    return float(d[k]), complex(0.5 * (lo[k] + hi[k]))


def verify_fid_numeric(m: MeasureHandle, grid=None, tol: float = IM_PHI_TOL, *,
                       jump_search: bool = True, fast_path: bool = True) -> FIDVerdict:
    """Grid test of the FID property.

    FID is accepted when ``Im phi <= tol`` at every unflagged grid point, at
    most 1% of points are flagged (continuation diverged or passed within
    ``1e-8`` of a critical point), and no ray-to-ray jump above ``1e-3``
    exists.  Laws whose ``F(0)`` diverges are rejected before the sweep.
    """
    law = getattr(m, "law", None)
    alpha = getattr(law, "alpha", None)
    rho = getattr(law, "rho", None)
    if fast_path and isinstance(m, PowerSumMeasure) and f0_diverges(m):
        z0 = 1e-14j
        return FIDVerdict(False, "none", None,
                          {"z": z0, "kind": "f0_divergence", "value": float(abs(m.F(z0)))},
                          alpha=alpha, rho=rho)
    if grid is None:
        grid = standard_grid().reshape(20, 21)
    grid = np.asarray(grid, dtype=complex)
    if np.any(grid.imag <= 0):
        raise DomainError("verification grid must lie in the open upper half-plane")
    phi, status, _ = numeric_phi(m, grid.ravel(), full=True)
    flagged = status != OK
    n = phi.size
    frac = float(flagged.mean())
    im = np.where(flagged, -np.inf, phi.imag)
    k = int(np.argmax(im))
    min_neg = float(-im[k]) if np.isfinite(im[k]) else math.nan
    witness = None
    decision = True
    if np.isfinite(im[k]) and im[k] > tol:
        decision = False
        witness = {"z": complex(grid.ravel()[k]), "kind": "im_phi", "value": float(im[k])}
    jump = 0.0
    if jump_search:
        jump, where = _max_jump(m, _rows(grid))
        if jump > JUMP_TOL and decision:
            decision = False
            witness = {"z": where, "kind": "jump", "value": jump}
    if frac > 0.01 and decision:
        decision = False
        j = int(np.flatnonzero(flagged)[0])
        witness = {"z": complex(grid.ravel()[j]), "kind": "obstruction", "value": frac}
    return FIDVerdict(decision, "numeric" if decision else "none", min_neg, witness,
                      alpha=alpha, rho=rho, flagged_fraction=frac, max_jump=jump, n_points=n)


# -- branch angles and ray diagnostics --------------------------------------------

@dataclass(frozen=True)
class BranchAngles:
    theta1: float
    theta2: float
    theta3: float | None
    theta4: float | None
    phi_angle: float

    def to_dict(self):
        return {"schema": 1, "theta1": _finite_or_none(self.theta1),
                "theta2": _finite_or_none(self.theta2), "theta3": self.theta3,
                "theta4": self.theta4, "phi_angle": self.phi_angle}


def branch_angles(alpha: float, rho: float) -> BranchAngles:
    """Angles of the rays on which ``F(z) = z + e^{i phi} z^{1-alpha}`` is real-sided.

    ``theta1 = -phi/(1-alpha)`` and ``theta2 = (pi-phi)/(1-alpha)`` (for
    ``alpha < 1``); ``theta3 = (phi+pi)/alpha`` when ``phi < (2 alpha - 1) pi``
    and ``theta4 = (phi-pi)/alpha`` when ``phi > (1 - alpha) pi``, both only
    for ``alpha`` in (1/2, 1).  Here ``phi = alpha rho pi``.
    """
    check_params("boolean", alpha, rho)
    phi = alpha * rho * math.pi
    t1 = -phi / (1 - alpha) if alpha < 1 else math.nan
    t2 = (math.pi - phi) / (1 - alpha) if alpha < 1 else math.nan
    t3 = t4 = None
    if 0.5 < alpha < 1:
        if phi < (2 * alpha - 1) * math.pi:
            t3 = (phi + math.pi) / alpha
        if phi > (1 - alpha) * math.pi:
            t4 = (phi - math.pi) / alpha
    return BranchAngles(t1, t2, t3, t4, phi)


def _ray_F(alpha, rho, r, theta):
    """``F(r e^{i theta})`` on the sheet reached by rotating from the positive axis."""
    h = boolean_stable_handle(alpha=alpha, rho=rho)
    coefs, powers, c0, logc = h.kernel_args
    ell = np.log(np.asarray(r, dtype=float)) + 1j * theta
    val, _ = kernels.powersum_eval(ell, coefs, powers, c0, logc)
    return val


class RayWitness(NamedTuple):
    r1: float
    r2: float
    value: complex
    residual: float
    theta: float


def ray_noninjectivity_witness(alpha: float, rho: float):
    """Two radii on one ray with the same image under the continued ``F``.

    On ``theta = theta3`` (or ``theta4``) the continued ``F`` equals
    ``(r - r^{1-alpha}) e^{i theta}``, which has an interior minimum at
    ``r* = (1-alpha)^{1/alpha}``; the level at half the minimum is hit once on
    each side of ``r*``.  Returns a :class:`RayWitness` ``(r1, r2, value,
    residual, theta)`` with ``value`` the common image point and ``residual``
    the distance between the two evaluations.
    """
    check_params("boolean", alpha, rho)
    ang = branch_angles(alpha, rho)
    if not 0.5 < alpha < 1 or (ang.theta3 is None and ang.theta4 is None):
        raise ParameterError("witness exists only for 1/2 < alpha < 1 and "
                             "alpha rho pi < (2 alpha - 1) pi or > (1 - alpha) pi")
    theta = ang.theta3 if ang.theta3 is not None else ang.theta4
    a = alpha
    r_star = (1 - a) ** (1 / a)
    level = -0.5 * a * (1 - a) ** ((1 - a) / a)

    def g(r):
        return r - r ** (1 - a) - level

    r1 = optimize.brentq(g, 0.0, r_star, xtol=1e-300, rtol=1e-15, maxiter=500)
    hi = max(2.0, 2 * r_star)
    while g(hi) < 0:
        hi *= 2
    r2 = optimize.brentq(g, r_star, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    f1, f2 = _ray_F(a, rho, np.array([r1, r2]), theta)
    return RayWitness(r1, r2, complex(0.5 * (f1 + f2)), float(abs(f1 - f2)), theta)


@dataclass
class UIReport:
    alpha: float
    rho: float
    theta1: float
    theta2: float
    im_ok: bool
    sector_ok: bool
    separation_ok: bool
    disjoint_ok: bool
    monotone: bool
    max_im: float
    min_separation: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = self.im_ok and self.sector_ok and self.separation_ok and self.disjoint_ok

    def to_dict(self):
        d = dict(self.__dict__)
        d["schema"] = 1
        return d


def ui_boundary_diagnostic(alpha: float, rho: float, n: int = 400) -> UIReport:
    """Sample the continued ``F`` on the rays ``theta1`` and ``theta2``.

    Checks ``Im F <= 1e-10`` on both rays, that each ray image stays in its
    closed sector (``[theta1, 0]`` resp. ``[pi, theta2]``), that distinct
    samples on one ray have images more than ``1e-8`` apart, and that the two
    images meet only near 0.  Monotonicity of ``|F|`` along each ray is
    reported but does not enter ``passed``.  This is a diagnostic only.
    """
    check_params("boolean", alpha, rho)
    if not 0 < alpha <= 0.5:
        raise ParameterError("boundary diagnostic is defined for alpha in (0, 1/2]")
    ang = branch_angles(alpha, rho)
    r = np.logspace(-4, 4, n)
    im1 = _ray_F(alpha, rho, r, ang.theta1)
    im2 = _ray_F(alpha, rho, r, ang.theta2)
    max_im = float(max(im1.imag.max(), im2.imag.max()))
    im_ok = max_im <= 1e-10
    slack = 1e-12

    def in_sector(vals, lo, hi):
        a = np.angle(vals)
        # bring into [lo, lo + 2 pi)
        a = lo + np.mod(a - lo + slack, 2 * np.pi) - slack
        return bool(np.all(a <= hi + slack))

    sector_ok = in_sector(im1, ang.theta1, 0.0) and in_sector(im2, np.pi, ang.theta2)
    sep = min(_min_pair_distance(im1), _min_pair_distance(im2))
    separation_ok = sep > 1e-8
    cross = np.abs(im1[:, None] - im2[None, :])
    near0 = np.minimum(np.abs(im1)[:, None], np.abs(im2)[None, :])
    disjoint_ok = bool(np.all((cross > 1e-8) | (near0 < 1e-3)))
    monotone = bool(np.all(np.diff(np.abs(im1)) > 0) and np.all(np.diff(np.abs(im2)) > 0))
    return UIReport(alpha, rho, ang.theta1, ang.theta2, im_ok, sector_ok, separation_ok,
                    disjoint_ok, monotone, max_im, float(sep))


def _min_pair_distance(v):
    d = np.abs(v[:, None] - v[None, :])
    d[np.diag_indices_from(d)] = np.inf
    return float(d.min())


# -- Belinschi-Nica map and the divisibility indicator ---------------------------

def belinschi_nica(m: MeasureHandle, t: float) -> MeasureHandle:
    """``B_t(m) = (m^{⊞(1+t)})^{⊎ 1/(1+t)}``; ``B_0`` is the identity."""
    from .convolutions import boolean_power, free_power

    if t < 0:
        raise DomainError("t must be nonnegative")
    if t == 0:
        return m
    fp = free_power(m, 1.0 + t).handle
    out = boolean_power(fp, 1.0 / (1.0 + t)).handle
    out.label = f"B_{t:g}({m.label})"
    return out


@dataclass
class IndicatorReport:
    alpha: float
    rho: float
    taus: list
    verdicts: list

    @property
    def pattern(self):
        return [v.decision for v in self.verdicts]

    @property
    def all_fid(self):
        return all(self.pattern)

    @property
    def none_fid(self):
        return not any(self.pattern)

    def to_dict(self):
        return {"schema": 1, "alpha": self.alpha, "rho": self.rho, "taus": list(self.taus),
                "fid": self.pattern, "verdicts": [v.to_dict() for v in self.verdicts]}


def indicator_probe(alpha: float, rho: float, t_list, grid=None) -> IndicatorReport:
    """Numerical FID verdict for each Boolean power ``b^{⊎tau}``."""
    from .convolutions import boolean_power

    base = boolean_stable_handle(StableLaw("boolean", alpha, rho))
    verdicts = []
    for tau in t_list:
        h = boolean_power(base, float(tau)).handle
        h.law = base.law
        verdicts.append(verify_fid_numeric(h, grid))
    return IndicatorReport(alpha, rho, [float(t) for t in t_list], verdicts)
