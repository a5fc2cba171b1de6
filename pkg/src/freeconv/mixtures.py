"""Continuous Boolean convolutions ``b(sigma)`` of positive Boolean stable laws.

For a finite measure ``sigma`` on ``(0, 1/2]``,
``F(z) = z + int e^{i alpha pi} z^{1 - alpha} sigma(d alpha)``.  A continuous
part of ``sigma`` is always replaced by midpoint-rule atoms, so every mixture
is a ``PowerSumMeasure``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .classical_id import CMFunction, CMReport, Jet, cm_check
from .divisibility import FIDVerdict, verify_fid_numeric
from .errors import DomainError, ParameterError
from .transform_core import PowerSumMeasure, standard_grid, stieltjes_invert

__all__ = [
    "MixtureSpec",
    "ContinuousPart",
    "mixture_handle",
    "mixture_density",
    "mixture_density_cm",
    "mixture_mass",
    "mixture_verify",
    "MixtureReport",
    "random_mixture",
    "refinement_gap",
    "DEFAULT_NODES",
]

DEFAULT_NODES = 40
CONTINUOUS_KINDS = ("uniform", "nodes")


@dataclass(frozen=True)
class ContinuousPart:
    """Continuous part of ``sigma``.

    ``kind = "uniform"`` is ``mass`` times the uniform law on ``(0, 1/2]``,
    discretised by ``nodes`` midpoint atoms.  ``kind = "nodes"`` is an
    explicit quadrature list ``points = ((alpha, weight), ...)``.
    """

    kind: str = "uniform"
    mass: float = 1.0
    nodes: int = DEFAULT_NODES
    points: tuple = ()

    def atoms(self):
        if self.kind == "uniform":
            h = 0.5 / self.nodes
            w = self.mass / self.nodes
            return [((k + 0.5) * h, w) for k in range(self.nodes)]
        return [(float(a), float(w)) for a, w in self.points]

    def to_dict(self):
        if self.kind == "uniform":
            return {"kind": "uniform", "mass": self.mass, "nodes": self.nodes}
        return {"kind": "nodes", "points": [{"alpha": a, "weight": w} for a, w in self.points]}

    @classmethod
    def from_dict(cls, d):
        kind = d.get("kind", "uniform")
        if kind == "uniform":
            return cls("uniform", float(d.get("mass", 1.0)), int(d.get("nodes", DEFAULT_NODES)))
        if kind == "nodes":
            pts = tuple((float(p["alpha"]), float(p["weight"])) for p in d["points"])
            return cls("nodes", points=pts)
        raise ParameterError(f"unknown continuous kind {kind!r}")


@dataclass(frozen=True)
class MixtureSpec:
    """Finite measure ``sigma`` on ``(0, 1/2]``: atoms ``(alpha, lambda)`` plus a continuous part."""

    atoms: tuple = ()
    continuous: ContinuousPart | None = None

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple((float(a), float(w)) for a, w in self.atoms))
        if self.continuous is not None:
            c = self.continuous
            if c.kind not in CONTINUOUS_KINDS:
                raise ParameterError(f"unknown continuous kind {c.kind!r}")
            if c.kind == "uniform" and not (c.mass > 0 and c.nodes >= 1):
                raise ParameterError("uniform part needs mass > 0 and nodes >= 1")
        for a, w in self.all_atoms():
            if not (0 < a <= 0.5):
                raise ParameterError(f"alpha = {a} outside (0, 1/2]")
            if not (w > 0 and math.isfinite(w)):
                raise ParameterError(f"weight {w} must be positive and finite")

    def all_atoms(self):
        out = list(self.atoms)
        if self.continuous is not None:
            out.extend(self.continuous.atoms())
        return out

    @property
    def total_mass(self):
        return sum(w for _, w in self.all_atoms())

    def scaled(self, t: float) -> "MixtureSpec":
        """``t * sigma``."""
        if not t > 0:
            raise ParameterError("scale factor must be positive")
        cont = self.continuous
        if cont is not None:
            if cont.kind == "uniform":
                cont = ContinuousPart("uniform", cont.mass * t, cont.nodes)
            else:
                cont = ContinuousPart("nodes", points=tuple((a, w * t) for a, w in cont.points))
        return MixtureSpec(tuple((a, w * t) for a, w in self.atoms), cont)

    def to_dict(self):
        return {"atoms": [{"alpha": a, "lambda": w} for a, w in self.atoms],
                "continuous": None if self.continuous is None else self.continuous.to_dict()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d) -> "MixtureSpec":
        atoms = tuple((float(a["alpha"]), float(a["lambda"])) for a in d.get("atoms", []))
        cont = d.get("continuous")
        return cls(atoms, None if cont is None else ContinuousPart.from_dict(cont))

    @classmethod
    def from_json(cls, text: str) -> "MixtureSpec":
        return cls.from_dict(json.loads(text))


def _terms(sigma: MixtureSpec):
    rho = 1.0
    return [(-w * np.exp(1j * np.pi * rho * a), 1.0 - a) for a, w in sigma.all_atoms()]


def mixture_handle(sigma: MixtureSpec) -> PowerSumMeasure:
    """F-oracle of ``b(sigma)``; the empty mixture is ``delta_0``."""
    atoms = sigma.all_atoms()
    if not atoms:
        return PowerSumMeasure([], 0.0, 0.0, support=(0.0, 0.0), label="delta_0")
    return PowerSumMeasure(_terms(sigma), 0j, 0j, density_closed=True,
                           support=(0.0, math.inf), label=f"b(sigma[{len(atoms)}])")


def _arrays(sigma):
    atoms = sigma.all_atoms()
    a = np.array([x for x, _ in atoms])
    w = np.array([y for _, y in atoms])
    return a, w


def mixture_density(sigma: MixtureSpec, x):
    """Density of ``b(sigma)`` at ``x > 0``.

    ``(1/pi) f / g`` with ``f = int sin(a pi) x^-a``,
    ``g = (x^(1/2) + int cos(a pi) x^(1/2-a))^2 + (int sin(a pi) x^(1/2-a))^2``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("mixture density is evaluated at x > 0")
    a, w = _arrays(sigma)
    if a.size == 0:
        raise DomainError("the empty mixture is a point mass")
    xe = x[..., None]
    s, c = np.sin(a * np.pi), np.cos(a * np.pi)
    f = np.sum(w * s * xe ** (-a), axis=-1)
    re = np.sqrt(x) + np.sum(w * c * xe ** (0.5 - a), axis=-1)
    im = np.sum(w * s * xe ** (0.5 - a), axis=-1)
    return f / (re**2 + im**2) / np.pi


def mixture_density_cm(sigma: MixtureSpec) -> CMFunction:
    """The density as a jet-capable function for ``cm_check``."""
    a, w = _arrays(sigma)
    if a.size == 0:
        raise DomainError("the empty mixture is a point mass")
    s, c = np.sin(a * np.pi), np.cos(a * np.pi)

    def jet(x, N):
        f = sum(Jet.power(x, -ak, N) * (wk * sk) for ak, wk, sk in zip(a, w, s))
        re = Jet.power(x, 0.5, N)
        im = Jet.const(0.0, x, N)
        for ak, wk, sk, ck in zip(a, w, s, c):
            p = Jet.power(x, 0.5 - ak, N)
            re = re + p * (wk * ck)
            im = im + p * (wk * sk)
        return f * (re * re + im * im).reciprocal() * (1.0 / np.pi)

    return CMFunction(f"b(sigma[{a.size}]) density", jet)


def mixture_mass(sigma: MixtureSpec) -> float:
    """Total mass of the density by quadrature on ``(0, 1]`` and ``[1, inf)``.

    The density behaves like ``x^(a_max - 1)`` at 0 and ``x^(-1 - a_min)`` at
    infinity; the substitutions ``v = x^a_max`` and ``v = x^-a_min`` turn both
    ends into bounded integrands.
    """
    a, _ = _arrays(sigma)
    amin, amax = float(a.min()), float(a.max())

    def head(v):
        x = v ** (1.0 / amax)
        return float(mixture_density(sigma, x)) * x ** (1.0 - amax) / amax

    def tail(v):
        x = v ** (-1.0 / amin)
        return float(mixture_density(sigma, x)) * x ** (1.0 + amin) / amin

    kw = dict(epsabs=1e-13, epsrel=1e-12, limit=400)
    m1, _ = integrate.quad(head, 0.0, 1.0, **kw)
    m2, _ = integrate.quad(tail, 0.0, 1.0, **kw)
    return m1 + m2


def refinement_gap(mass: float = 1.0, coarse: int = 20, fine: int = 40, grid=None) -> float:
    """Sup relative gap of ``F`` between two midpoint discretisations of ``mass * Uniform(0, 1/2]``."""
    z = standard_grid() if grid is None else np.asarray(grid, dtype=complex)
    F1 = mixture_handle(MixtureSpec((), ContinuousPart("uniform", mass, coarse))).F(z)
    F2 = mixture_handle(MixtureSpec((), ContinuousPart("uniform", mass, fine))).F(z)
    return float(np.max(np.abs(F1 - F2) / np.abs(F2)))


@dataclass
class MixtureReport:
    sigma: MixtureSpec
    fid: FIDVerdict
    cm: CMReport
    scaling_residual: float
    mass: float
    inversion_error: float | None = None
    tol: dict = field(default_factory=dict)

    @property
    def passed(self):
        ok = (self.fid.decision and self.cm.passed
              and self.scaling_residual <= self.tol.get("scaling", 1e-12)
              and abs(self.mass - 1.0) <= self.tol.get("mass", 1e-6))
        if self.inversion_error is not None:
            ok = ok and self.inversion_error <= self.tol.get("inversion", 1e-4)
        return ok

    def to_dict(self):
        return {"schema": 1, "sigma": self.sigma.to_dict(), "fid": self.fid.to_dict(),
                "cm": self.cm.to_dict(), "scaling_residual": self.scaling_residual,
                "mass": self.mass, "inversion_error": self.inversion_error,
                "passed": self.passed}

    def to_json(self):
        return json.dumps(self.to_dict())


def mixture_verify(sigma: MixtureSpec, *, orders: int = 8, t: float = 2.5,
                   invert: bool = False, x_grid=None) -> MixtureReport:
    """FID check, c.m. check and the Boolean scaling ``b(sigma)^{⊎t} = b(t sigma)``.

    With ``invert=True`` the density is also reconstructed by Stieltjes
    inversion and compared with the closed form on ``x_grid``.
    """
    from .convolutions import boolean_power

    m = mixture_handle(sigma)
    fid = verify_fid_numeric(m)
    cm = cm_check(mixture_density_cm(sigma), orders)
    z = standard_grid()
    K1 = boolean_power(m, t).handle.K(z)
    K2 = mixture_handle(sigma.scaled(t)).K(z)
    scaling = float(np.max(np.abs(K1 - K2) / np.maximum(np.abs(K2), 1e-300)))
    mass = mixture_mass(sigma)
    err = None
    if invert:
        x = np.logspace(-2, 2, 60) if x_grid is None else np.asarray(x_grid, dtype=float)
        g = stieltjes_invert(m, x)
        err = float(np.max(np.abs(g.values - mixture_density(sigma, x))))
    return MixtureReport(sigma, fid, cm, scaling, mass, err)


def random_mixture(rng: np.random.Generator, max_atoms: int = 3) -> MixtureSpec:
    """Atoms with ``alpha`` uniform in ``(0, 1/2]`` and weights uniform in ``(0, 2]``."""
    k = int(rng.integers(1, max_atoms + 1))
    alphas = 0.5 - 0.5 * rng.random(k)
    weights = 2.0 - 2.0 * rng.random(k)
    return MixtureSpec(tuple(zip(alphas, weights)))
