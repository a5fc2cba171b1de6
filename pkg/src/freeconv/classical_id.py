"""Complete monotonicity checks by exact Taylor-jet arithmetic.

A function is completely monotone (c.m.) on ``(0, inf)`` when
``(-1)^n f^(n)(x) >= 0`` for all ``n`` and ``x``; a c.m. density is
classically infinitely divisible.  Derivatives are never taken by finite
differences: the densities here are built from powers ``x^p``, exponentials,
sums, products, quotients and compositions, and each of those acts on
truncated Taylor series (jets) exactly.  Every jet carries a running bound on
its rounding error, propagated with absolute values, which gives the
per-order tolerance of the sign test.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from .errors import DomainError, ParameterError

__all__ = [
    "Jet",
    "CMFunction",
    "CMReport",
    "cm_check",
    "cm_calculus_check",
    "classical_id_verdict",
    "cm_exp",
    "cm_power",
    "cm_inverse_linear",
    "cm_x_exp",
    "cm_sin_modulated",
    "boolean_density_cm",
    "boolean_h",
    "boolean_h_prime",
    "cm_reciprocal",
    "default_cm_grid",
]

EPS = np.finfo(float).eps
MAX_ORDER = 12


def _conv(a, b):
    """Truncated Cauchy product along axis 0."""
    n = a.shape[0]
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
    for k in range(n):
        out[k] = np.sum(a[:k + 1] * b[k::-1], axis=0)
    return out


class Jet:
    """Taylor coefficients ``c[k] = f^(k)(x) / k!`` at an array of points.

    ``err[k]`` bounds the absolute rounding error of ``c[k]``.
    """

    def __init__(self, c, err):
        self.c = np.asarray(c)
        self.err = np.asarray(err, dtype=float)

    @property
    def order(self):
        return self.c.shape[0] - 1

    # constructors ---------------------------------------------------------------
    @classmethod
    def const(cls, v, x, N):
        c = np.zeros((N + 1,) + np.shape(x), dtype=np.result_type(v, float))
        c[0] = v
        return cls(c, EPS * np.abs(c))

    @classmethod
    def identity(cls, x, N):
        c = np.zeros((N + 1,) + np.shape(x))
        c[0] = x
        if N >= 1:
            c[1] = 1.0
        return cls(c, np.zeros_like(c))

    @classmethod
    def power(cls, x, p, N):
        """Jet of ``x^p``: ``c_k = binom(p, k) x^(p - k)``."""
        x = np.asarray(x, dtype=float)
        k = np.arange(N + 1).reshape((-1,) + (1,) * x.ndim)
        # generalized binomials by recurrence (scipy's binom is nan at negative integers)
        coef = np.cumprod(np.r_[1.0, [(p - j) / (j + 1) for j in range(N)]])
        c = coef.reshape(k.shape) * x ** (p - k)
        return cls(c, 4.0 * (k + 2) * EPS * np.abs(c))

    @classmethod
    def exp(cls, x, lam, N):
        """Jet of ``exp(lam x)`` (``lam`` may be complex)."""
        x = np.asarray(x, dtype=float)
        k = np.arange(N + 1).reshape((-1,) + (1,) * x.ndim)
        c = np.exp(lam * x) * lam**k / special.factorial(k)
        return cls(c, 4.0 * (k + 2) * EPS * np.abs(c))

    # arithmetic -----------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Jet):
            c = self.c.copy()
            c[0] = c[0] + other
            return Jet(c, self.err + EPS * np.abs(c))
        c = self.c + other.c
        return Jet(c, self.err + other.err + EPS * np.abs(c))

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.err)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = self.c * other
            return Jet(c, self.err * abs(other) + EPS * np.abs(c))
        a, b = np.abs(self.c), np.abs(other.c)
        c = _conv(self.c, other.c)
        k = np.arange(self.order + 1).reshape((-1,) + (1,) * (c.ndim - 1))
        err = (_conv(a, other.err) + _conv(self.err, b) + _conv(self.err, other.err)
               + (k + 1) * EPS * _conv(a, b))
        return Jet(c, err)

    __rmul__ = __mul__

    def reciprocal(self):
        a = self.c
        N = self.order
        r = np.zeros_like(a, dtype=np.result_type(a, float))
        r[0] = 1.0 / a[0]
        for k in range(1, N + 1):
            r[k] = -r[0] * np.sum(a[1:k + 1] * r[k - 1::-1], axis=0)
        ra, aa = np.abs(r), np.abs(a)
        k = np.arange(N + 1).reshape((-1,) + (1,) * (a.ndim - 1))
        rr = _conv(ra, ra)
        err = _conv(rr, self.err) + 2 * (k + 2) * EPS * _conv(ra, _conv(aa, ra))
        return Jet(r, err)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / other)
        return self * other.reciprocal()

    def compose_into(self, inner: "Jet"):
        """``self`` is the jet of ``f`` at ``y0 = inner.c[0]``; returns ``f(inner)``."""
        N = self.order
        P = inner.c.copy()
        P[0] = 0.0
        Pa = np.abs(P)
        out = np.zeros(np.broadcast_shapes(self.c.shape, P.shape), dtype=np.result_type(self.c, P))
        err = np.zeros(out.shape)
        power = np.zeros_like(out)
        power[0] = 1.0
        pa = np.zeros(out.shape)
        pa[0] = 1.0
        for k in range(N + 1):
            out = out + self.c[k] * power
            err = err + self.err[k] * pa
            if k < N:
                power = _conv(power, P)
                pa = _conv(pa, Pa)
        # sensitivity to the inner jet's errors: sum k |f_k| |P|^(k-1) * err_inner
        sens = np.zeros(out.shape)
        pa = np.zeros(out.shape)
        pa[0] = 1.0
        for k in range(1, N + 1):
            sens = sens + k * np.abs(self.c[k]) * pa
            pa = _conv(pa, Pa)
        idx = np.arange(N + 1).reshape((-1,) + (1,) * (out.ndim - 1))
        err = err + _conv(sens, inner.err) + (idx + 2) * N * EPS * np.abs(out)
        return Jet(out, err)

    def derivative_values(self):
        """``(f^(n)(x), bound)`` for ``n = 0..N``."""
        k = np.arange(self.order + 1).reshape((-1,) + (1,) * (self.c.ndim - 1))
        fact = special.factorial(k)
        return self.c * fact, self.err * fact

    def shift_derivative(self):
        """Jet of ``f'`` one order shorter."""
        k = np.arange(1, self.order + 1).reshape((-1,) + (1,) * (self.c.ndim - 1))
        return Jet(self.c[1:] * k, self.err[1:] * k)


@dataclass
class CMFunction:
    """A function on ``(0, inf)`` that can produce its jet at any points."""

    name: str
    jet: Callable[[np.ndarray, int], Jet]

    def __call__(self, x):
        return self.jet(np.asarray(x, dtype=float), 0).c[0].real


def cm_exp(lam: float = 1.0) -> CMFunction:
    return CMFunction(f"exp(-{lam:g}x)", lambda x, N: Jet.exp(x, -lam, N))


def cm_power(beta: float) -> CMFunction:
    return CMFunction(f"x^-{beta:g}", lambda x, N: Jet.power(x, -beta, N))


def cm_inverse_linear() -> CMFunction:
    return CMFunction("1/(1+x)", lambda x, N: (Jet.identity(x, N) + 1.0).reciprocal())


def cm_x_exp() -> CMFunction:
    return CMFunction("x exp(-x)", lambda x, N: Jet.identity(x, N) * Jet.exp(x, -1.0, N))


def cm_sin_modulated(omega: float = 3.0, amp: float = 0.9) -> CMFunction:
    """``exp(-x) (1 + amp sin(omega x))``; positive but oscillating."""

    def jet(x, N):
        z = Jet.exp(x, -1.0 + 1j * omega, N)
        s = Jet(z.c.imag, z.err)
        return Jet.exp(x, -1.0, N) + s * amp

    return CMFunction(f"exp(-x)(1+{amp:g} sin({omega:g}x))", jet)


def boolean_h(alpha: float) -> CMFunction:
    """``h(x) = x^(2 alpha) + 2 cos(alpha pi) x^alpha + 1``."""
    c = 2.0 * math.cos(alpha * math.pi)
    return CMFunction(f"h_{alpha:g}", lambda x, N: Jet.power(x, 2 * alpha, N)
                      + Jet.power(x, alpha, N) * c + 1.0)


def boolean_h_prime(alpha: float) -> CMFunction:
    h = boolean_h(alpha)
    return CMFunction(f"h'_{alpha:g}", lambda x, N: h.jet(x, N + 1).shift_derivative())


def cm_reciprocal() -> CMFunction:
    """``y -> 1/y`` (c.m. on ``(0, inf)``), the outer function of ``1/h``."""
    return CMFunction("1/y", lambda y, N: Jet.power(y, -1.0, N))


def boolean_density_cm(alpha: float) -> CMFunction:
    """Density of ``b_alpha^1``: ``sin(alpha pi) x^(alpha-1) / (pi h(x))``."""
    h = boolean_h(alpha)
    k = math.sin(alpha * math.pi) / math.pi

    def jet(x, N):
        return Jet.power(x, alpha - 1.0, N) * k / h.jet(x, N)

    return CMFunction(f"b_{alpha:g}^1 density", jet)


def default_cm_grid(n: int = 200, lo: float = 1e-2, hi: float = 1e2) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), n)


@dataclass
class CMReport:
    """Sign table of ``(-1)^n f^(n)`` on a grid.

    ``sign_table[n]`` is True when ``(-1)^n f^(n)(x) >= -tol_n(x)`` at every
    node, ``tol_n`` being the propagated rounding bound.  ``worst_margin[n]``
    is the smallest ``(-1)^n f^(n)(x)`` seen.  A pass is a strong numerical
    check on finitely many nodes and orders, not a proof.
    """

    name: str
    orders_checked: int
    grid: np.ndarray
    sign_table: list
    worst_margin: list
    max_rel_bound: float
    first_violation: tuple | None = None
    overflow_nodes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.first_violation is None and not self.overflow_nodes

    def first_failing_order(self):
        return None if self.first_violation is None else self.first_violation[0]

    def to_dict(self):
        fv = None
        if self.first_violation is not None:
            n, x, v = self.first_violation
            fv = {"order": int(n), "x": float(x), "value": float(v)}
        return {"schema": 1, "function": self.name, "orders_checked": self.orders_checked,
                "grid": {"min": float(self.grid.min()), "max": float(self.grid.max()),
                         "n": int(self.grid.size)},
                "sign_table": [bool(s) for s in self.sign_table],
                "worst_margin": [float(m) for m in self.worst_margin],
                "max_rel_bound": self.max_rel_bound, "first_violation": fv,
                "overflow_nodes": [float(x) for x in self.overflow_nodes],
                "passed": self.passed}

    def to_json(self):
        return json.dumps(self.to_dict())


def cm_check(f: CMFunction, orders: int = 10, x_grid=None) -> CMReport:
    """Check ``(-1)^n f^(n)(x) >= -tol_n`` for ``n = 0..orders`` on ``x_grid``."""
    if not 0 <= orders <= MAX_ORDER:
        raise ParameterError(f"orders must lie in [0, {MAX_ORDER}]")
    x = default_cm_grid() if x_grid is None else np.asarray(x_grid, dtype=float)
    if np.any(x <= 0):
        raise DomainError("complete monotonicity is checked on (0, inf)")
    with np.errstate(all="ignore"):
        jet = f.jet(x, orders)
        vals, bnd = jet.derivative_values()
    vals = np.real(vals)
    bad_nodes = ~np.all(np.isfinite(vals) & np.isfinite(bnd), axis=0)
    signs = (-1.0) ** np.arange(orders + 1)[:, None]
    signed = signs * vals
    ok = (signed >= -bnd) | bad_nodes[None, :]
    table = [bool(r) for r in ok.all(axis=1)]
    worst = [float(np.min(np.where(bad_nodes, np.inf, s))) for s in signed]
    rel = np.where(np.abs(vals) > 0, bnd / np.abs(vals), 0.0)
    max_rel = float(np.max(np.where(bad_nodes[None, :], 0.0, rel)))
    first = None
    for n in range(orders + 1):
        if not table[n]:
            j = int(np.flatnonzero(~ok[n])[0])
            first = (n, float(x[j]), float(vals[n, j]))
            break
    return CMReport(f.name, orders, x, table, worst, max_rel, first,
                    [float(v) for v in x[bad_nodes]])


@dataclass
class CalculusReport:
    operation: str
    f: CMReport
    g: CMReport
    result: CMReport

    @property
    def inputs_pass(self):
        return self.f.passed and self.g.passed

    @property
    def consistent(self):
        """The closure rule is respected: passing inputs give a passing result."""
        return (not self.inputs_pass) or self.result.passed

    def to_dict(self):
        return {"schema": 1, "operation": self.operation, "inputs_pass": self.inputs_pass,
                "result_pass": self.result.passed, "consistent": self.consistent,
                "f": self.f.to_dict(), "g": self.g.to_dict(), "result": self.result.to_dict()}


def cm_calculus_check(f: CMFunction, g: CMFunction, orders: int = 10, grid=None,
                      operation: str = "product") -> CalculusReport:
    """Check a closure rule of c.m. functions on the checker itself.

    ``product`` and ``sum`` combine ``f`` and ``g``.  For ``compose`` ``f`` is
    the c.m. outer function and ``g = h`` the inner one; the precondition
    tested is that ``h'`` is c.m., and the result is ``f(h(x))``.
    """
    x = default_cm_grid() if grid is None else np.asarray(grid, dtype=float)
    if operation == "product":
        res = CMFunction(f"({f.name})*({g.name})", lambda t, N: f.jet(t, N) * g.jet(t, N))
        return CalculusReport(operation, cm_check(f, orders, x), cm_check(g, orders, x),
                              cm_check(res, orders, x))
    if operation == "sum":
        res = CMFunction(f"({f.name})+({g.name})", lambda t, N: f.jet(t, N) + g.jet(t, N))
        return CalculusReport(operation, cm_check(f, orders, x), cm_check(g, orders, x),
                              cm_check(res, orders, x))
    if operation == "compose":
        hp = CMFunction(f"({g.name})'", lambda t, N: g.jet(t, N + 1).shift_derivative())

        def comp(t, N):
            inner = g.jet(t, N)
            return f.jet(np.real(inner.c[0]), N).compose_into(inner)

        res = CMFunction(f"({f.name})o({g.name})", comp)
        y = np.real(g.jet(x, 0).c[0])
        f_report = cm_check(f, orders, y[y > 0]) if np.all(y > 0) else cm_check(f, orders, x)
        return CalculusReport(operation, f_report, cm_check(hp, orders, x),
                              cm_check(res, orders, x))
    raise ValueError(f"unknown operation {operation!r}")


@dataclass
class ClassicalIDReport:
    alpha: float
    verdict: str
    cm: CMReport

    def to_dict(self):
        return {"schema": 1, "alpha": self.alpha, "rho": 1.0, "verdict": self.verdict,
                "cm": self.cm.to_dict()}


def classical_id_verdict(alpha: float, rho: float = 1.0, orders: int = 10,
                         grid=None) -> ClassicalIDReport:
    """Classical infinite divisibility of ``b_alpha^1`` via complete monotonicity.

    For ``alpha <= 1/2`` the density is c.m. and a passing check is reported
    as ``certified``; for ``alpha > 1/2`` nothing is concluded and the check
    is attached as information.
    """
    if rho != 1:
        raise ParameterError("the c.m. criterion is applied to rho = 1 only")
    if not 0 < alpha < 1:
        raise ParameterError("alpha must lie in (0, 1)")
    rep = cm_check(boolean_density_cm(alpha), orders, grid)
    if alpha <= 0.5:
        verdict = "ID(*) certified via CM" if rep.passed else "CM check failed"
    else:
        verdict = "no conclusion"
    return ClassicalIDReport(alpha, verdict, rep)
