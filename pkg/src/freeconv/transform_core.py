"""Cauchy, reciprocal Cauchy, energy, psi and S transforms of probability measures.

Measures are handled primarily as analytic oracles for ``F = 1/G`` on the
closed upper half-plane (:class:`MeasureHandle`).  Densities on a grid
(:class:`GriddedDensity`) are a secondary representation produced on demand
by Stieltjes inversion.

Branch convention: ``z**p := exp(p * log z)`` with ``arg z`` in ``(-pi, pi]``;
a real argument is read as the limit from above.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy import integrate, optimize

from . import kernels
from .errors import (
    AtomicMeasureError,
    ConvergenceError,
    DomainError,
    InversionError,
    QuadratureError,
)

__all__ = [
    "Capabilities",
    "MeasureHandle",
    "PowerSumMeasure",
    "GriddedDensity",
    "plog",
    "cpow",
    "standard_grid",
    "cauchy_transform",
    "f_transform",
    "k_transform",
    "stieltjes_invert",
    "psi_transform",
    "psi_derivative",
    "s_transform",
    "dilate",
    "boolean_shift",
    "reciprocal_handle",
    "point_mass",
    "cauchy_law",
    "G_anywhere",
]


def plog(z):
    """Principal logarithm with ``-0.0`` imaginary parts read as ``+0.0``."""
    z = np.asarray(z, dtype=complex)
    return np.log(z.real + 1j * (z.imag + 0.0))


def cpow(z, p):
    return np.exp(p * plog(z))


def standard_grid(nx: int = 21, ny: int = 20, x_max: float = 10.0,
                  y_min: float = 1e-2, y_max: float = 1e2) -> np.ndarray:
    """Test grid ``{x + iy : |x| <= x_max, y_min <= y <= y_max}``.

    ``x`` is uniform and ``y`` log-spaced; rows share ``y``.  The default has
    420 points.
    """
    xs = np.linspace(-x_max, x_max, nx)
    ys = np.logspace(math.log10(y_min), math.log10(y_max), ny)
    return (xs[None, :] + 1j * ys[:, None]).ravel()


@dataclass(frozen=True)
class Capabilities:
    closed_K: bool = False
    closed_phi: bool = False
    closed_density: bool = False


class MeasureHandle:
    """A probability measure given by its reciprocal Cauchy transform.

    Parameters
    ----------
    F_oracle : callable
        Vectorised map of the closed upper half-plane (minus the support)
        into itself with ``Im F(z) >= Im z``.
    dF : callable, optional
        Derivative of ``F_oracle``; a five-point difference is used otherwise.
    capabilities : Capabilities
    support : (float, float)
        Interval known to contain the support.
    affine : (float, float)
        ``(a, b)`` when the handle is ``delta_a ⊎ D_b(base)``.
    density, phi : callable, optional
        Closed forms when available.
    law : object, optional
        The parametric law this handle was built from, if any.
    """

    def __init__(self, F_oracle: Callable, *, dF: Callable | None = None,
                 capabilities: Capabilities = Capabilities(),
                 support: tuple[float, float] = (-math.inf, math.inf),
                 affine: tuple[float, float] = (0.0, 1.0),
                 density: Callable | None = None, phi: Callable | None = None,
                 label: str = "measure", law=None):
        self.F_oracle = F_oracle
        self._dF = dF
        self.capabilities = capabilities
        self.support = (float(support[0]), float(support[1]))
        self.affine = (float(affine[0]), float(affine[1]))
        self._density = density
        self._phi = phi
        self.label = label
        self.law = law

    def __repr__(self):
        return f"<{type(self).__name__} {self.label}>"

    # transforms -----------------------------------------------------------
    def F(self, z):
        return self.F_oracle(np.asarray(z, dtype=complex))

    def G(self, z):
        return 1.0 / self.F(z)

    def K(self, z):
        z = np.asarray(z, dtype=complex)
        return z - self.F(z)

    def dF(self, z):
        z = np.asarray(z, dtype=complex)
        if self._dF is not None:
            return self._dF(z)
        return numeric_derivative(self.F, z)

    def phi(self, z):
        if self._phi is None:
            raise NotImplementedError(f"{self.label} has no closed-form Voiculescu transform")
        return self._phi(np.asarray(z, dtype=complex))

    def density(self, x):
        if self._density is None:
            raise NotImplementedError(f"{self.label} has no closed-form density")
        return self._density(np.asarray(x, dtype=float))

    @property
    def atom(self):
        """Location of the atom when the measure is a point mass, else None."""
        return None

    @property
    def positive(self) -> bool:
        return self.support[0] >= 0.0


def numeric_derivative(fn, z):
    """Five-point derivative along the real direction, step scaled to stay
    inside the half-plane neighbourhood of ``z``."""
    z = np.asarray(z, dtype=complex)
    az = np.abs(z)
    scale = np.where(z.imag > 0, np.minimum(az, z.imag), az)
    h = 1e-4 * np.maximum(scale, 1e-12)
    return (-fn(z + 2 * h) + 8 * fn(z + h) - 8 * fn(z - h) + fn(z - 2 * h)) / (12 * h)


class PowerSumMeasure(MeasureHandle):
    """Measure whose energy function is a finite sum of powers.

    ``K(z) = kappa0 + sum_k kappa_k z**p_k + log_coef * log z``.  Boolean
    stable laws, their affine images and Boolean powers, and continuous
    Boolean mixtures of positive Boolean stable laws are all of this form.
    ``F_log`` evaluates ``F`` in the logarithmic coordinate, which is what the
    compiled continuation kernel inverts.
    """

    def __init__(self, terms: Iterable[tuple[complex, float]] = (), kappa0: complex = 0.0,
                 log_coef: complex = 0.0, *, density_closed: bool = False,
                 support=(-math.inf, math.inf), affine=(0.0, 1.0),
                 label="power-sum", law=None):
        self.terms = _merge_terms(terms)
        self.kappa0 = complex(kappa0)
        self.log_coef = complex(log_coef)
        caps = Capabilities(closed_K=True, closed_density=density_closed)
        super().__init__(self._F_principal, dF=self._dF_principal, capabilities=caps,
                         support=support, affine=affine,
                         density=self._boundary_density if density_closed else None,
                         label=label, law=law)

    # arrays for the kernel: F(l) = c0 + logc*l + sum coefs*exp(powers*l)
    @property
    def kernel_args(self):
        coefs = [1.0 + 0j] + [-k for k, _ in self.terms]
        powers = [1.0] + [p for _, p in self.terms]
        return (np.array(coefs, dtype=complex), np.array(powers, dtype=float),
                -self.kappa0, -self.log_coef)

    def K_log(self, ell):
        ell = np.asarray(ell, dtype=complex)
        out = np.full(ell.shape, self.kappa0) + self.log_coef * ell
        for kappa, p in self.terms:
            out = out + kappa * np.exp(p * ell)
        return out

    def F_log(self, ell):
        ell = np.asarray(ell, dtype=complex)
        return np.exp(ell) - self.K_log(ell)

    def dF_log(self, ell):
        """``dF/dl``."""
        ell = np.asarray(ell, dtype=complex)
        out = np.exp(ell) - self.log_coef
        for kappa, p in self.terms:
            out = out - p * kappa * np.exp(p * ell)
        return out

    def _F_principal(self, z):
        return z - self.K_log(plog(z))

    def _dF_principal(self, z):
        ell = plog(z)
        out = np.ones(ell.shape, dtype=complex) - self.log_coef / z
        for kappa, p in self.terms:
            out = out - p * kappa * np.exp((p - 1.0) * ell)
        return out

    def _boundary_density(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = 1.0 / self._F_principal(x + 0j)
        return np.maximum(-g.imag / np.pi, 0.0)

    @property
    def atom(self):
        if not self.terms and self.log_coef == 0 and self.kappa0.imag == 0:
            return self.kappa0.real
        return None

    def with_K(self, terms, kappa0, log_coef, **kw):
        base = dict(density_closed=self.capabilities.closed_density, support=self.support,
                    affine=self.affine, label=self.label, law=None)
        base.update(kw)
        return PowerSumMeasure(terms, kappa0, log_coef, **base)


def _merge_terms(terms):
    out: dict[float, complex] = {}
    for kappa, p in terms:
        p = float(p)
        out[p] = out.get(p, 0j) + complex(kappa)
    return tuple((k, p) for p, k in sorted(out.items(), key=lambda kv: -kv[0]) if k != 0)


def point_mass(a: float = 0.0) -> PowerSumMeasure:
    """``delta_a``: ``F(z) = z - a``."""
    return PowerSumMeasure((), kappa0=a, support=(a, a), label=f"delta_{a:g}")


def cauchy_law() -> PowerSumMeasure:
    """Standard Cauchy law, ``F(z) = z + i``."""
    return PowerSumMeasure((), kappa0=-1j, density_closed=True, label="cauchy")


def _check_upper(z):
    z = np.asarray(z, dtype=complex)
    if np.any(~(z.imag > 0)):
        raise DomainError("transform requires Im z > 0")
    return z


def cauchy_transform(m, z):
    """``G(z) = int mu(dx) / (z - x)`` for ``Im z > 0``.

    Handles use ``1/F``; gridded densities are integrated exactly on the
    piecewise-linear interpolant with power-law tail closures.
    """
    z = _check_upper(z)
    if isinstance(m, GriddedDensity):
        return m.cauchy(z)
    return m.G(z)


def f_transform(m, z):
    z = _check_upper(z)
    if isinstance(m, GriddedDensity):
        return 1.0 / m.cauchy(z)
    return m.F(z)


def k_transform(m, z):
    z = _check_upper(z)
    return z - f_transform(m, z)


def G_anywhere(m: MeasureHandle, z):
    """Cauchy transform off the support, using ``G(conj z) = conj G(z)``."""
    z = np.asarray(z, dtype=complex)
    lower = z.imag < 0
    w = np.where(lower, np.conj(z), z)
    g = m.G(w)
    return np.where(lower, np.conj(g), g)


def dG_anywhere(m: MeasureHandle, z):
    z = np.asarray(z, dtype=complex)
    lower = z.imag < 0
    w = np.where(lower, np.conj(z), z)
    f = m.F(w)
    d = -m.dF(w) / f**2
    return np.where(lower, np.conj(d), d)


# -- affine operations --------------------------------------------------------

def dilate(m: MeasureHandle, b: float) -> MeasureHandle:
    """Push-forward by ``x -> b x``: ``F_{D_b m}(z) = b F_m(z / b)``."""
    if not b > 0:
        raise DomainError("dilation factor must be positive")
    b = float(b)
    a0, b0 = m.affine
    support = _scale_support(m.support, b)
    if isinstance(m, PowerSumMeasure):
        terms = [(b * kappa * b ** (-p), p) for kappa, p in m.terms]
        kappa0 = b * m.kappa0 - b * m.log_coef * math.log(b)
        log_coef = b * m.log_coef
        return m.with_K(terms, kappa0, log_coef, support=support, affine=(b * a0, b * b0),
                        label=f"D_{b:g}({m.label})")
    density = None
    if m.capabilities.closed_density:
        density = lambda x: m.density(x / b) / b  # noqa: E731
    return MeasureHandle(lambda z: b * m.F(z / b), dF=lambda z: m.dF(z / b),
                         capabilities=Capabilities(m.capabilities.closed_K, m.capabilities.closed_phi,
                                                   density is not None),
                         support=support, affine=(b * a0, b * b0), density=density,
                         phi=(lambda z: b * m.phi(z / b)) if m.capabilities.closed_phi else None,
                         label=f"D_{b:g}({m.label})")


def boolean_shift(m: MeasureHandle, a: float) -> MeasureHandle:
    """``delta_a ⊎ m``: ``K -> K + a``."""
    a = float(a)
    a0, b0 = m.affine
    lo, hi = m.support
    if isinstance(m, PowerSumMeasure):
        return m.with_K(m.terms, m.kappa0 + a, m.log_coef,
                        support=(-math.inf, math.inf) if a else m.support,
                        affine=(a0 + a, b0), label=f"delta_{a:g}+({m.label})")
    return MeasureHandle(lambda z: m.F(z) - a, dF=m.dF, capabilities=Capabilities(
        m.capabilities.closed_K), support=(-math.inf, math.inf) if a else m.support,
        affine=(a0 + a, b0), label=f"delta_{a:g}+({m.label})")


def _scale_support(support, b):
    lo, hi = support
    return (lo * b if math.isfinite(lo) else lo, hi * b if math.isfinite(hi) else hi)


def reciprocal_handle(m: MeasureHandle) -> MeasureHandle:
    """Push-forward of a measure on ``(0, inf)`` by ``x -> 1/x``.

    ``G_new(z) = (1/z) (1 - (1/z) G(1/z))`` where ``1/z`` lies in the lower
    half-plane and ``G`` is continued by reflection.
    """
    if not m.positive:
        raise DomainError("reciprocal push-forward needs support in [0, inf)")

    def G_new(z):
        u = 1.0 / z
        return u * (1.0 - u * G_anywhere(m, u))

    def F_new(z):
        return 1.0 / G_new(z)

    def dF_new(z):
        u = 1.0 / z
        g = G_anywhere(m, u)
        dg = dG_anywhere(m, u)
        # d/dz [u - u^2 g(u)] with du/dz = -u^2
        dG = (1.0 - 2 * u * g - u**2 * dg) * (-u**2)
        return -dG / G_new(z) ** 2

    density = None
    if m.capabilities.closed_density:
        def density(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(x > 0, m.density(1.0 / np.where(x > 0, x, 1.0)) / x**2, 0.0)
            return out

    return MeasureHandle(F_new, dF=dF_new,
                         capabilities=Capabilities(closed_density=density is not None),
                         support=(0.0, math.inf), density=density,
                         label=f"reciprocal({m.label})")


# -- gridded densities --------------------------------------------------------

@dataclass
class GriddedDensity:
    """Density sampled on sorted nodes, with optional power-law closures.

    ``tail_exponent`` ``e`` models the density beyond the outer node(s) as
    ``c |x|^e``; ``head_exponent`` ``h`` models it on ``(0, x_0)`` as
    ``c x^h`` when the grid is on the positive axis.
    """

    nodes: np.ndarray
    values: np.ndarray
    tail_exponent: float | None = None
    head_exponent: float | None = None
    residuals: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.nodes.ndim != 1 or self.nodes.shape != self.values.shape:
            raise ValueError("nodes and values must be 1-d arrays of equal length")
        if self.nodes.size < 2 or np.any(np.diff(self.nodes) <= 0):
            raise ValueError("nodes must be strictly increasing (at least two)")
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise ValueError("density values must be finite and nonnegative")

    # -- mass -----------------------------------------------------------------
    def mass(self) -> float:
        """Trapezoid mass plus analytic closures.

        On a positive grid the trapezoid rule runs in ``u = log x`` on
        ``x f(x)``; when the grid is uniform in ``u`` and both closures are
        set, the leading Euler-Maclaurin end correction is added, which makes
        the rule spectrally accurate for densities analytic in a strip.
        """
        x, f = self.nodes, self.values
        total = 0.0
        if x[0] > 0:
            u = np.log(x)
            g = x * f
            total += _trapezoid(g, u)
            h_e, t_e = self.head_exponent, self.tail_exponent
            if h_e is not None:
                if not h_e > -1:
                    raise ValueError("head exponent must exceed -1")
                total += f[0] * x[0] / (h_e + 1.0)
            if t_e is not None:
                if not t_e < -1:
                    raise ValueError("tail exponent must be below -1")
                total += f[-1] * x[-1] / (-t_e - 1.0)
            du = np.diff(u)
            if h_e is not None and t_e is not None and np.allclose(du, du.mean(), rtol=1e-6):
                hh = du.mean()
                dg_right = (t_e + 1.0) * g[-1]
                dg_left = (h_e + 1.0) * g[0]
                total -= hh**2 / 12.0 * (dg_right - dg_left)
            return float(total)
        total += _trapezoid(f, x)
        t_e = self.tail_exponent
        if t_e is not None:
            if not t_e < -1:
                raise ValueError("tail exponent must be below -1")
            if x[-1] > 0:
                total += f[-1] * x[-1] / (-t_e - 1.0)
            if x[0] < 0:
                total += f[0] * (-x[0]) / (-t_e - 1.0)
        return float(total)

    def __call__(self, x):
        """Linear interpolation, zero outside the grid."""
        return np.interp(np.asarray(x, dtype=float), self.nodes, self.values, left=0.0, right=0.0)

    # -- Cauchy transform -------------------------------------------------------
    def cauchy(self, z, tol: float = 1e-9):
        """``G(z)`` of the interpolated density plus its closures."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        x, f = self.nodes, self.values
        B = np.diff(f) / np.diff(x)
        A = f[:-1] - B * x[:-1]
        zz = z[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            dlog = np.log1p(-np.diff(x)[None, :] / (zz - x[None, :-1]))
        panel = -(A[None, :] + B[None, :] * zz) * dlog - B[None, :] * np.diff(x)[None, :]
        out = panel.sum(axis=1)
        closures = []
        if self.tail_exponent is not None:
            e = self.tail_exponent
            if x[-1] > 0:
                closures.append((x[-1], f[-1], e))
            if x[0] < 0:
                closures.append((x[0], f[0], e))
        if self.head_exponent is not None and x[0] > 0:
            closures.append((x[0], f[0], self.head_exponent))
        for x0, f0, e in closures:
            if f0 == 0:
                continue
            pw = 1.0 / (e + 1.0)
            weight = f0 * abs(x0) / abs(e + 1.0)
            for i, zi in enumerate(z):
                val, err = integrate.quad(
                    lambda t: 1.0 / (zi - x0 * t**pw), 0.0, 1.0, complex_func=True,
                    epsabs=tol / max(weight, 1e-300), limit=200)
                if abs(err) * weight > 100 * tol:
                    raise QuadratureError(f"tail closure quadrature error {err * weight:.2e}",
                                          estimate=err * weight)
                out[i] += weight * val
        return out if out.size > 1 else out[0]

    # -- serialisation ----------------------------------------------------------
    def to_json(self) -> str:
        return json.dumps({"nodes": self.nodes.tolist(), "values": self.values.tolist(),
                           "tail_exponent": self.tail_exponent,
                           "head_exponent": self.head_exponent})

    @classmethod
    def from_json(cls, text: str) -> "GriddedDensity":
        d = json.loads(text)
        return cls(np.array(d["nodes"]), np.array(d["values"]), d.get("tail_exponent"),
                   d.get("head_exponent"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "density"])
        for xi, fi in zip(self.nodes, self.values):
            w.writerow([repr(float(xi)), repr(float(fi))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, tail_exponent=None, head_exponent=None) -> "GriddedDensity":
        rows = list(csv.reader(io.StringIO(text)))
        if rows and rows[0] == ["x", "density"]:
            rows = rows[1:]
        arr = np.array([[float(a), float(b)] for a, b in rows])
        return cls(arr[:, 0], arr[:, 1], tail_exponent, head_exponent)


def _trapezoid(y, x):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


# -- Stieltjes inversion ------------------------------------------------------

DEFAULT_EPS = (1e-3, 5e-4, 2.5e-4)
CLAMP = 1e-10


def stieltjes_invert(m: MeasureHandle, x_grid, eps_schedule=DEFAULT_EPS, *,
                     relative: bool = True, tol: float = 1e-6, tail_exponent=None,
                     head_exponent=None) -> GriddedDensity:
    """Density ``-(1/pi) lim Im G(x + i eps)`` by Richardson extrapolation.

    With ``relative=True`` the levels are ``eps_k * |x|`` (``1e-12`` at ``x = 0``).  The
    extrapolated value is the polynomial fit through all levels evaluated at
    zero; the residual is its difference from the fit that drops the coarsest
    level.  Raises :class:`ConvergenceError` if more than 1% of nodes exceed
    ``tol`` (relative to ``max(|value|, 1)``).
    """
    if m.atom is not None:
        raise AtomicMeasureError(f"{m.label} is a point mass at {m.atom:g}; no density")
    eps = np.asarray(eps_schedule, dtype=float)
    if eps.size < 3 or np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise ValueError("eps_schedule needs at least three decreasing positive levels")
    x = np.asarray(x_grid, dtype=float)
    if np.any(np.diff(x) <= 0):
        raise ValueError("x_grid must be sorted increasing")
    scale = np.where(x != 0, np.abs(x), 1e-12) if relative else np.ones_like(x)
    levels = eps[:, None] * scale[None, :]
    z = x[None, :] + 1j * levels
    d = -m.G(z.ravel()).reshape(z.shape).imag / np.pi
    value = _extrapolate_zero(levels, d)
    coarse = _extrapolate_zero(levels[1:], d[1:])
    resid = np.abs(value - coarse)
    bad = resid > tol * np.maximum(np.abs(value), 1.0)
    if bad.mean() > 0.01:
        raise ConvergenceError(
            f"extrapolation residual above {tol:g} at {bad.sum()} of {x.size} nodes",
            residual=resid)
    neg = value < 0
    if np.any(value < -CLAMP):
        k = int(np.argmin(value))
        raise ConvergenceError(f"negative density {value[k]:.3e} at x={x[k]:g}", residual=resid)
    value = np.where(neg, 0.0, value)
    return GriddedDensity(x, value, tail_exponent, head_exponent, residuals=resid)


def _extrapolate_zero(levels, values):
    """Neville evaluation at 0 of the interpolant through (levels, values), per column."""
    p = [v.copy() for v in values]
    n = len(p)
    for k in range(1, n):
        for i in range(n - k):
            e_i, e_ik = levels[i], levels[i + k]
            p[i] = (e_ik * p[i] - e_i * p[i + 1]) / (e_ik - e_i)
    return p[0]


# -- psi and S ----------------------------------------------------------------

def _require_positive(m):
    if not m.positive:
        raise DomainError(f"{m.label}: support hint {m.support} includes negative values")


def psi_transform(m: MeasureHandle, z):
    """``psi(z) = (1/z) G(1/z) - 1`` for a measure on ``[0, inf)``."""
    _require_positive(m)
    z = np.asarray(z, dtype=complex)
    if np.any((z.imag == 0) & (z.real > 0)) or np.any(z == 0):
        raise DomainError("psi needs 1/z outside the support [0, inf)")
    u = 1.0 / z
    return u * G_anywhere(m, u) - 1.0


def psi_derivative(m: MeasureHandle, z):
    z = np.asarray(z, dtype=complex)
    u = 1.0 / z
    g = G_anywhere(m, u)
    dg = dG_anywhere(m, u)
    # d/dz [u g(u)] = (g + u g') * (-u^2)
    return -(g + u * dg) * u**2


def _chi_real(m, w, tol=1e-13, max_iter=100):
    """Solve ``psi(-e^t) = w`` for real ``w`` in ``(-1, 0)``; returns ``z = -e^t``.

    Newton in ``t`` seeded from the previous solution (targets are swept in
    order), with a bracketing safeguard that falls back to a secant/Brent
    step when Newton leaves the bracket.
    """
    w = np.asarray(w, dtype=float)
    order = np.argsort(-w)
    out = np.empty(w.size)

    def psi_t(t):
        return float(psi_transform(m, -math.exp(t)).real)

    def dpsi_t(t):
        z = -math.exp(t)
        return float((psi_derivative(m, z) * z).real)

    t = 0.0
    for k in order:
        target = float(w[k])
        if not -1.0 < target < 0.0:
            raise DomainError("real S-transform argument must lie in (-1, 0)")
        lo, hi = t - 1.0, t + 1.0
        while psi_t(lo) - target < 0:
            lo -= 2.0 * (hi - lo)
            if lo < -700:
                raise InversionError("psi inversion bracket failed", last=lo)
        while psi_t(hi) - target > 0:
            hi += 2.0 * (hi - lo)
            if hi > 700:
                raise InversionError("psi inversion bracket failed", last=hi)
        t = min(max(t, lo), hi)
        ok = False
        for _ in range(max_iter):
            r = psi_t(t) - target
            if abs(r) <= tol * max(1.0, abs(target)):
                ok = True
                break
            if r > 0:
                lo = t
            else:
                hi = t
            d = dpsi_t(t)
            t_new = t - r / d if d != 0 else math.nan
            if not (lo < t_new < hi):
                t_new = optimize.brentq(lambda s: psi_t(s) - target, lo, hi, xtol=1e-15)
                t = t_new
                ok = True
                break
            t = t_new
        if not ok:
            raise InversionError("psi inversion did not converge", last=-math.exp(t),
                                 residual=psi_t(t) - target)
        out[k] = -math.exp(t)
    return out


def s_transform(m: MeasureHandle, w):
    """``S(w) = ((1 + w) / w) psi^{-1}(w)``.

    Real ``w`` must lie in ``(-1, 0)``.  A complex ``w`` is reached from the
    real solution at ``Re w`` by continuation in the imaginary part.
    """
    _require_positive(m)
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    real = w.imag == 0
    chi = np.empty(w.size, dtype=complex)
    if real.any():
        chi[real] = _chi_real(m, w[real].real)
    for k in np.flatnonzero(~real):
        z = complex(_chi_real(m, np.array([w[k].real]))[0])
        for s in np.linspace(0.0, 1.0, 21)[1:]:
            target = w[k].real + 1j * s * w[k].imag
            for _ in range(MAX_PSI_NEWTON):
                r = complex(psi_transform(m, z)) - target
                if abs(r) < 1e-13:
                    break
                z = z - r / complex(psi_derivative(m, z))
            else:
                raise InversionError("complex psi inversion did not converge", last=z,
                                     residual=abs(r))
        chi[k] = z
    out = (1.0 + w) / w * chi
    return out if out.size > 1 else out[0]


MAX_PSI_NEWTON = 100
