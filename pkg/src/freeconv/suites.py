"""Acceptance suites: one function per criterion, grouped for the command line.

Every criterion returns a ``CriterionResult`` carrying the measured metric and
the tolerance it was held to, so that callers can print or serialise the
outcome without re-running anything.
"""
from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classical_id import classical_id_verdict, cm_check, cm_x_exp
from .config import RunConfig
from .convolutions import (
    boolean_convolve,
    classical_mult_convolve,
    free_mult_convolve,
    log_grid,
    reciprocal_pushforward,
    verify_boolean_reproducing,
)
from .divisibility import (
    belinschi_nica,
    classify_fid,
    distance_to_boundary,
    f0_diverges,
    indicator_probe,
    numeric_phi,
    ray_noninjectivity_witness,
    verify_fid_numeric,
)
from .mixtures import mixture_verify, random_mixture
from .stable_laws import (
    StableLaw,
    boolean_stable_density,
    boolean_stable_handle,
    classical_stable_density,
    free_stable_handle,
)
from .transform_core import (
    GriddedDensity,
    dilate,
    reciprocal_handle,
    stieltjes_invert,
)

__all__ = ["CriterionResult", "CRITERIA", "SUITES", "run_criterion", "run_suite"]


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    metric: float | None
    tol: float | None
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        m = "" if self.metric is None else f" metric={self.metric:.3e}"
        t = "" if self.tol is None else f" tol={self.tol:.0e}"
        return f"[{status}] criterion {self.number:2d} {self.name}:{m}{t} ({self.seconds:.1f}s)"

    def to_dict(self):
        return {"number": self.number, "name": self.name, "passed": bool(self.passed),
                "metric": self.metric, "tol": self.tol, "details": self.details,
                "seconds": round(self.seconds, 3)}


# -- 1 ----------------------------------------------------------------------------

TRUTH_TABLE = (
    (0.5, 0.0, "alpha_le_half"), (0.5, 0.37, "alpha_le_half"), (0.5, 1.0, "alpha_le_half"),
    (0.2, 0.9, "alpha_le_half"), (2.0 / 3.0, 0.5, "middle_band"), (2.0 / 3.0, 0.45, "none"),
    (0.55, 0.2, "middle_band"), (0.55, 0.1, "none"), (0.6, 2.0 / 3.0, "middle_band"),
    (0.6, 0.7, "none"), (1.0, 0.5, "cauchy"), (1.0, 0.49, "none"), (0.7, 0.5, "none"),
    (1.5, 0.2, "none"), (2.0, 0.5, "none"),
)


def criterion_truth_table(cfg: RunConfig):
    wrong = []
    for a, r, rule in TRUTH_TABLE:
        v = classify_fid(a, r)
        if v.rule != rule or v.decision != (rule != "none"):
            wrong.append({"alpha": a, "rho": r, "expected": rule, "got": v.rule})
    return len(wrong) == 0, float(len(wrong)), 0.0, {"cases": len(TRUTH_TABLE), "wrong": wrong}


# -- 2 ----------------------------------------------------------------------------

AGREEMENT_ALPHAS = (0.3, 0.55, 0.6, 0.7, 0.9)
AGREEMENT_RHOS = (0.0, 0.25, 0.5, 0.75, 1.0)


def _agreement_point(a, r, cfg):
    grid = cfg.upper_grid()
    law = StableLaw("boolean", a, r)
    m = boolean_stable_handle(law)
    expected = classify_fid(a, r).decision
    v = verify_fid_numeric(m, grid, cfg.tol("im_phi"))
    strong = True
    witness = v.witness
    if not v.decision and witness is not None and witness["kind"] == "f0_divergence":
        # the fast path is a shortcut; the criterion asks for a grid witness too
        v2 = verify_fid_numeric(m, grid, cfg.tol("im_phi"), fast_path=False)
        witness = v2.witness
    if not v.decision:
        strong = witness is not None and (
            (witness["kind"] == "im_phi" and witness["value"] > cfg.tol("witness_im_phi"))
            or (witness["kind"] == "jump" and witness["value"] > cfg.tol("jump")))
    return {"alpha": a, "rho": r, "expected": expected, "numeric": v.decision,
            "witness": None if witness is None else
            {"kind": witness["kind"], "value": float(witness["value"])},
            "witness_ok": strong, "distance": distance_to_boundary(a, r)}


def criterion_agreement(cfg: RunConfig, alphas=AGREEMENT_ALPHAS, rhos=AGREEMENT_RHOS):
    rows = [_agreement_point(a, r, cfg) for a in alphas for r in rhos]
    agree = sum(p["expected"] == p["numeric"] and p["witness_ok"] for p in rows)
    min_dist = min(p["distance"] for p in rows)
    ok = agree == len(rows) and min_dist >= 0.02
    return ok, float(len(rows) - agree), 0.0, {"points": rows, "min_distance": min_dist}


# -- 3 ----------------------------------------------------------------------------

DENSITY_ALPHAS = tuple(round(0.1 * k, 1) for k in range(1, 10))


def criterion_density(cfg: RunConfig):
    x = np.logspace(-2, 2, 200)
    wide = np.logspace(-40, 40, 4001)
    rows = []
    worst_err, worst_mass = 0.0, 0.0
    for a in DENSITY_ALPHAS:
        m = boolean_stable_handle(alpha=a, rho=1.0)
        d = stieltjes_invert(m, x)
        err = float(np.max(np.abs(d.values - boolean_stable_density(a, 1.0, x))))
        w = stieltjes_invert(m, wide, tail_exponent=-a - 1.0, head_exponent=a - 1.0)
        mass_err = abs(w.mass() - 1.0)
        rows.append({"alpha": a, "sup_err": err, "mass_err": mass_err})
        worst_err, worst_mass = max(worst_err, err), max(worst_mass, mass_err)
    ok = worst_err <= cfg.tol("density") and worst_mass <= cfg.tol("mass")
    return ok, worst_err, cfg.tol("density"), {"rows": rows, "worst_mass_err": worst_mass,
                                              "mass_tol": cfg.tol("mass")}


# -- 4 ----------------------------------------------------------------------------

STABILITY_PAIRS = ((0.2, 1.0), (0.3, 0.4), (0.5, 0.0), (0.5, 0.5), (0.7, 0.8),
                   (0.9, 0.1), (1.0, 0.5), (1.3, 0.6), (1.7, 0.3), (2.0, 0.5))


def criterion_stability(cfg: RunConfig):
    rng = np.random.default_rng(cfg.seed)
    z = rng.uniform(-10, 10, 100) + 1j * 10 ** rng.uniform(-2, 2, 100)
    worst = 0.0
    rows = []
    for a, r in STABILITY_PAIRS:
        b = boolean_stable_handle(alpha=a, rho=r)
        k1 = boolean_convolve(b, b).handle.K(z)
        k2 = dilate(b, 2.0 ** (1.0 / a)).K(z)
        err = float(np.max(np.abs(k1 - k2) / np.abs(k2)))
        rows.append({"alpha": a, "rho": r, "rel_err": err})
        worst = max(worst, err)
    return worst <= cfg.tol("stability"), worst, cfg.tol("stability"), {"rows": rows}


# -- 5 ----------------------------------------------------------------------------

def criterion_reproducing(cfg: RunConfig):
    tol = cfg.tol("reproducing")
    reports = [verify_boolean_reproducing(1.0, 1, 1, tol), verify_boolean_reproducing(1.0, 1, 2, tol),
               verify_boolean_reproducing(0.3, 1, 1, tol)]
    worst = max(r.sup_rel_err for r in reports)
    return all(r.passed for r in reports), worst, tol, {"reports": [r.to_dict() for r in reports]}


# -- 6 ----------------------------------------------------------------------------

def _half_identity(x):
    return x**-0.5 / (np.pi * (1.0 + x))


def criterion_identity(cfg: RunConfig):
    u = log_grid()
    n = GriddedDensity(u, classical_stable_density(0.5, u), -1.5, None)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = classical_mult_convolve(n, reciprocal_pushforward(n))
    sel = (res.nodes >= 0.05) & (res.nodes <= 20)
    err_c = float(np.max(np.abs(res.values[sel] - _half_identity(res.nodes[sel]))))
    s = free_stable_handle(0.5, 1.0)
    p = free_mult_convolve(s, reciprocal_handle(s), diagnose=False).handle
    xq = np.logspace(math.log10(0.05), math.log10(20), 60)
    err_f = float(np.max(np.abs(stieltjes_invert(p, xq).values - _half_identity(xq))))
    ok = err_c <= cfg.tol("identity_classical") and err_f <= cfg.tol("identity_free")
    return ok, err_c, cfg.tol("identity_classical"), {
        "classical_sup_err": err_c, "free_sup_err": err_f,
        "free_tol": cfg.tol("identity_free"), "mass_loss": float(res.mass_loss)}


# -- 7 ----------------------------------------------------------------------------

def criterion_bercovici_pata(cfg: RunConfig):
    rng = np.random.default_rng(cfg.seed + 7)
    z = rng.uniform(-5, 5, 10) + 1j * rng.uniform(1, 10, 10)
    m = belinschi_nica(boolean_stable_handle(alpha=0.5, rho=1.0), 1.0)
    phi = numeric_phi(m, z)
    ref = -np.exp(1j * np.pi / 2) * z**0.5
    err = float(np.max(np.abs(phi - ref) / np.abs(ref)))
    return err <= cfg.tol("bercovici_pata"), err, cfg.tol("bercovici_pata"), {"points": 10}


# -- 8 ----------------------------------------------------------------------------

def criterion_cm(cfg: RunConfig):
    rows = []
    for a in (0.1, 0.2, 0.3, 0.4, 0.5):
        rep = classical_id_verdict(a, 1.0, orders=10)
        rows.append({"alpha": a, "passed": rep.cm.passed, "verdict": rep.verdict})
    ctrl = cm_check(cm_x_exp(), 10)
    fails_at_1 = ctrl.first_failing_order() == 1
    ok = all(r["passed"] for r in rows) and fails_at_1
    return ok, None, None, {"rows": rows, "x_exp_first_failure": ctrl.first_failing_order()}


# -- 9 ----------------------------------------------------------------------------

def criterion_mixtures(cfg: RunConfig):
    rng = np.random.default_rng(cfg.seed + 9)
    rows = []
    worst = 0.0
    for _ in range(5):
        sigma = random_mixture(rng)
        rep = mixture_verify(sigma, orders=8, invert=True)
        rows.append({"sigma": sigma.to_dict(), "fid": rep.fid.decision, "cm": rep.cm.passed,
                     "inversion_error": rep.inversion_error, "mass_err": abs(rep.mass - 1.0),
                     "scaling_residual": rep.scaling_residual})
        worst = max(worst, rep.inversion_error)
    ok = all(r["fid"] and r["cm"] for r in rows) and worst <= cfg.tol("mixture_inversion")
    return ok, worst, cfg.tol("mixture_inversion"), {"rows": rows}


# -- 10 ---------------------------------------------------------------------------

def criterion_witness(cfg: RunConfig):
    w = ray_noninjectivity_witness(0.9, 0.1)
    fast = f0_diverges(boolean_stable_handle(alpha=1.0, rho=0.8))
    ok = w is not None and w.r1 < w.r2 and w.residual <= cfg.tol("witness_residual") and fast
    det = {"fast_path_fired": bool(fast)}
    if w is not None:
        det.update(r1=w.r1, r2=w.r2, theta=w.theta, residual=w.residual)
    return ok, None if w is None else float(w.residual), cfg.tol("witness_residual"), det


# -- 11 ---------------------------------------------------------------------------

def criterion_indicator(cfg: RunConfig):
    taus = (0.5, 1.0, 2.0, 8.0)
    fid = indicator_probe(0.5, 0.5, taus)
    non = indicator_probe(0.9, 1.0, taus)
    ok = fid.all_fid and non.none_fid
    return ok, None, None, {"half_half": fid.pattern, "nine_one": non.pattern}


CRITERIA = {
    1: ("truth_table", criterion_truth_table),
    2: ("classifier_verifier_agreement", criterion_agreement),
    3: ("density_correctness", criterion_density),
    4: ("boolean_strict_stability", criterion_stability),
    5: ("reproducing_property", criterion_reproducing),
    6: ("half_identity", criterion_identity),
    7: ("bercovici_pata", criterion_bercovici_pata),
    8: ("complete_monotonicity", criterion_cm),
    9: ("mixtures", criterion_mixtures),
    10: ("non_fid_diagnostics", criterion_witness),
    11: ("indicator_dichotomy", criterion_indicator),
}

SUITES = {
    "fid": (1, 2, 10, 11),
    "cm": (8,),
    "reproducing": (4, 5, 7),
    "mixtures": (9,),
    "identity": (6,),
    "density": (3,),
    "all": tuple(range(1, 12)),
}


def run_criterion(number: int, cfg: RunConfig | None = None) -> CriterionResult:
    cfg = cfg or RunConfig()
    name, fn = CRITERIA[number]
    t0 = time.perf_counter()
    ok, metric, tol, details = fn(cfg)
    return CriterionResult(number, name, bool(ok), metric, tol, details,
                           time.perf_counter() - t0)


def _run_one(args):
    number, cfg = args
    return run_criterion(number, cfg)


def run_suite(name: str, cfg: RunConfig | None = None) -> list[CriterionResult]:
    """Run a named suite; criteria run in worker processes when ``parallelism > 1``.

    Results are returned in criterion order either way.
    """
    cfg = cfg or RunConfig()
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    numbers = SUITES[name]
    if cfg.parallelism > 1 and len(numbers) > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
            return list(pool.map(_run_one, [(n, cfg) for n in numbers]))
    return [run_criterion(n, cfg) for n in numbers]
