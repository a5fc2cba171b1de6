"""Boolean, free and classical (positive) stable laws.

Boolean stable laws are given by their energy function ``K``, free stable laws
by their Voiculescu transform ``phi``, and positive classical stable laws by
their Laplace transform ``exp(-z**alpha)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .continuation import DIVERGED
from .errors import DomainError, InversionError, ParameterError
from .transform_core import (
    Capabilities,
    MeasureHandle,
    PowerSumMeasure,
    boolean_shift,
    cpow,
    dilate,
    plog,
)

__all__ = [
    "StableLaw",
    "boolean_K_terms",
    "boolean_stable_K",
    "boolean_stable_handle",
    "boolean_stable_density",
    "free_stable_F",
    "free_stable_handle",
    "classical_stable_laplace",
    "classical_stable_density",
    "talbot_invert",
]

FAMILIES = ("boolean", "free", "classical")


@dataclass(frozen=True)
class StableLaw:
    """A stable law with an affine wrapper.

    For the Boolean family ``(shift, scale) = (a, b)`` denotes
    ``delta_a ⊎ D_b(base)``.
    """

    family: str
    alpha: float
    rho: float = 1.0
    shift: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        check_params(self.family, self.alpha, self.rho)
        if not self.scale > 0:
            raise ParameterError("scale must be positive")
        if not math.isfinite(self.shift):
            raise ParameterError("shift must be finite")
        if self.family != "boolean" and (self.shift, self.scale) != (0.0, 1.0):
            raise ParameterError("affine wrapper is only defined for the Boolean family")

    @property
    def affine(self):
        return (self.shift, self.scale)

    def to_dict(self):
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d) -> "StableLaw":
        return cls(str(d["family"]), float(d["alpha"]), float(d.get("rho", 1.0)),
                   float(d.get("shift", 0.0)), float(d.get("scale", 1.0)))

    @classmethod
    def from_json(cls, text: str) -> "StableLaw":
        return cls.from_dict(json.loads(text))

    def handle(self) -> MeasureHandle:
        if self.family == "boolean":
            return boolean_stable_handle(self)
        if self.family == "free":
            return free_stable_handle(self.alpha, self.rho)
        raise ParameterError("classical laws have no F-oracle here; use classical_stable_density")


def check_params(family, alpha, rho):
    if family not in FAMILIES:
        raise ParameterError(f"unknown family {family!r}")
    if not (math.isfinite(alpha) and math.isfinite(rho)):
        raise ParameterError("alpha and rho must be finite")
    if family == "boolean":
        ok = 0 < alpha <= 2 and 0 <= rho <= 1
    elif family == "free":
        ok = 0 < alpha <= 1 and 0 <= rho <= 1
    else:
        ok = 0 < alpha < 1 and rho == 1
    if not ok:
        raise ParameterError(f"({alpha}, {rho}) outside the parameter range of the {family} family")


# -- Boolean ------------------------------------------------------------------

def boolean_K_terms(alpha: float, rho: float):
    """``(terms, kappa0, log_coef)`` of the energy function of ``b_alpha^rho``."""
    check_params("boolean", alpha, rho)
    if alpha < 1:
        return [(-np.exp(1j * np.pi * rho * alpha), 1.0 - alpha)], 0j, 0j
    if alpha == 1:
        return [], -2j * rho, 2.0 * (2.0 * rho - 1.0) / np.pi
    return [(np.exp(1j * (alpha - 2.0) * rho * np.pi), 1.0 - alpha)], 0j, 0j


def boolean_stable_K(alpha: float, rho: float, z):
    """Energy function ``K(z) = z - F(z)`` of ``b_alpha^rho`` on the upper half-plane."""
    z = np.asarray(z, dtype=complex)
    terms, kappa0, lam = boolean_K_terms(alpha, rho)
    if np.any(~(z.imag > 0)):
        raise DomainError("K is evaluated on Im z > 0")
    out = kappa0 + lam * plog(z)
    for kappa, p in terms:
        out = out + kappa * cpow(z, p)
    return out


def _boolean_support(alpha, rho):
    if alpha < 1 and rho == 1:
        return (0.0, math.inf)
    if alpha < 1 and rho == 0:
        return (-math.inf, 0.0)
    if alpha == 2:
        return (-1.0, 1.0)
    return (-math.inf, math.inf)


def boolean_stable_handle(law: StableLaw | None = None, *, alpha=None, rho=1.0) -> PowerSumMeasure:
    """F-oracle of ``delta_a ⊎ D_b(b_alpha^rho)``."""
    if law is None:
        law = StableLaw("boolean", alpha, rho)
    if law.family != "boolean":
        raise ParameterError("boolean_stable_handle needs a Boolean law")
    terms, kappa0, lam = boolean_K_terms(law.alpha, law.rho)
    base = PowerSumMeasure(terms, kappa0, lam, density_closed=law.alpha < 1,
                           support=_boolean_support(law.alpha, law.rho),
                           label=f"b({law.alpha:g},{law.rho:g})")
    m = base
    if law.scale != 1.0:
        m = dilate(m, law.scale)
    if law.shift != 0.0:
        m = boolean_shift(m, law.shift)
    m.law = law
    if law.affine != (0.0, 1.0):
        m.label = f"delta_{law.shift:g}+D_{law.scale:g}(b({law.alpha:g},{law.rho:g}))"
    return m


def boolean_stable_density(alpha: float, rho: float, x):
    """Closed-form density of ``b_alpha^rho`` for ``alpha`` in (0, 1).

    For ``rho = 1`` and ``x > 0`` this is the rational expression in
    ``x**alpha``; otherwise ``-Im G(x + i0) / pi`` with
    ``G = 1 / (x + e^{i pi rho alpha} x^{1-alpha})`` and the upper-half-plane
    branch of ``x^{1-alpha}``.
    """
    check_params("boolean", alpha, rho)
    if not alpha < 1:
        raise ParameterError("closed-form density needs alpha in (0, 1)")
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise DomainError("density is not evaluated at x = 0")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.zeros_like(x)
    pos = x > 0
    if rho == 1:
        xp = x[pos]
        a = alpha
        out[pos] = (np.sin(a * np.pi) * xp ** (a - 1)
                    / (xp ** (2 * a) + 2 * np.cos(a * np.pi) * xp**a + 1) / np.pi)
    else:
        ax = np.abs(x)
        arg = np.where(pos, 0.0, np.pi)
        zp = ax ** (1 - alpha) * np.exp(1j * (1 - alpha) * arg)
        g = 1.0 / (x + np.exp(1j * np.pi * rho * alpha) * zp)
        out = np.maximum(-g.imag / np.pi, 0.0)
    return out[0] if scalar else out


# -- free ---------------------------------------------------------------------

def _free_kernel_args(alpha, rho):
    theta = alpha * rho * np.pi
    return (np.array([1.0, -np.exp(1j * theta)]), np.array([1.0, 1.0 - alpha]), 0j, 0j)


def free_stable_F(alpha: float, rho: float, z, *, tol: float = 1e-12):
    """``F`` of the free stable law ``s_alpha^rho``.

    ``F`` is the inverse of ``H(w) = w - e^{i alpha rho pi} w^{1-alpha}``;
    it is computed by continuation down the vertical ray through each ``z``
    (in the logarithmic coordinate of ``w``).
    """
    check_params("free", alpha, rho)
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag < 0):
        raise DomainError("free_stable_F is evaluated on the closed upper half-plane")
    if alpha == 1:
        return z + np.exp(1j * rho * np.pi)
    coefs, powers, c0, logc = _free_kernel_args(alpha, rho)
    ell, status, _ = kernels.powersum_continue(z.ravel(), coefs, powers, c0, logc, tol=tol)
    bad = status == DIVERGED
    if bad.any():
        raise InversionError(f"free stable inversion failed at {int(bad.sum())} point(s)",
                             last=np.exp(ell[bad]), residual=None)
    return np.exp(ell).reshape(z.shape)


def free_stable_handle(alpha: float, rho: float = 1.0) -> MeasureHandle:
    check_params("free", alpha, rho)
    c = np.exp(1j * alpha * rho * np.pi)

    def F(z):
        return free_stable_F(alpha, rho, z)

    def dF(z):
        if alpha == 1:
            return np.ones_like(np.asarray(z, dtype=complex))
        w = F(z)
        return 1.0 / (1.0 - (1.0 - alpha) * c * cpow(w, -alpha))

    def phi(z):
        return -c * cpow(z, 1.0 - alpha)

    support = (0.0, math.inf) if (rho == 1 and alpha < 1) else (
        (-math.inf, 0.0) if (rho == 0 and alpha < 1) else (-math.inf, math.inf))
    return MeasureHandle(F, dF=dF, capabilities=Capabilities(closed_phi=True), support=support,
                         phi=phi, label=f"s({alpha:g},{rho:g})",
                         law=StableLaw("free", alpha, rho))


# -- classical positive ---------------------------------------------------------

def classical_stable_laplace(alpha: float, z):
    """``E exp(-z X) = exp(-z**alpha)`` for ``Re z > 0`` (limit at 0 allowed)."""
    check_params("classical", alpha, 1.0)
    z = np.asarray(z, dtype=complex)
    if np.any(z.real < 0):
        raise DomainError("Laplace transform needs Re z >= 0")
    return np.exp(-cpow(z, alpha))


TALBOT_NODES = 32


def talbot_invert(laplace, t, n_nodes: int = TALBOT_NODES):
    """Fixed-Talbot inverse Laplace transform at ``t > 0``.

    ``laplace`` must accept complex arrays.  Double precision limits useful
    ``n_nodes`` to roughly 20-36.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise DomainError("Talbot inversion needs t > 0")
    M = int(n_nodes)
    r = 2.0 * M / (5.0 * t)
    k = np.arange(1, M)
    theta = k * np.pi / M
    cot = 1.0 / np.tan(theta)
    delta = r[:, None] * theta[None, :] * (cot[None, :] + 1j)
    sigma = theta + (theta * cot - 1.0) * cot
    gamma = np.exp(delta * t[:, None]) * (1.0 + 1j * sigma[None, :])
    head = 0.5 * np.exp(r * t) * laplace(r + 0j).real
    body = (gamma * laplace(delta)).real.sum(axis=1)
    return r / M * (head + body)


def classical_stable_density(alpha: float, x, n_nodes: int = TALBOT_NODES):
    """Density of the positive stable law with Laplace transform ``exp(-z**alpha)``.

    ``alpha = 1/2`` uses the Levy closed form; other indices use fixed-Talbot
    inversion (best effort, a few digits less accurate in the far tails).
    """
    check_params("classical", alpha, 1.0)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("positive stable density is evaluated at x > 0")
    if alpha == 0.5:
        return np.exp(-0.25 / x) / (2.0 * math.sqrt(math.pi)) * x**-1.5
    out = talbot_invert(lambda s: np.exp(-cpow(s, alpha)), x.ravel(), n_nodes)
    return np.maximum(out, 0.0).reshape(x.shape)
