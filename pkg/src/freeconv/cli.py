"""Command-line front end.

Exit codes: 0 success, 1 usage or parameter error, 2 classifier/verifier
disagreement, 3 verification-suite failure.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import re
import sys
import warnings

import click
import numpy as np

from .config import RunConfig, load_config
from .errors import ConvergenceError, FreeconvError
from .transform_core import GriddedDensity, stieltjes_invert

EXIT_OK, EXIT_USAGE, EXIT_DISAGREE, EXIT_SUITE = 0, 1, 2, 3

_SPEC = re.compile(r"^\s*(b|s|n|nr)\(\s*([^,)]+)\s*(?:,\s*([^)]+))?\)\s*$")


# -- helpers -----------------------------------------------------------------------

def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _table(x, y, fmt, meta, out):
    if fmt == "csv":
        _emit(_csv(["x", "density"], [(repr(float(a)), repr(float(b))) for a, b in zip(x, y)]), out)
        click.echo(json.dumps({"schema": 1, **meta}), err=True)
    else:
        _emit(json.dumps({"schema": 1, **meta, "x": [float(a) for a in x],
                          "density": [float(b) for b in y]}), out)


def _x_grid(x_range, n):
    lo, hi = x_range
    if not (lo < hi and n >= 2):
        raise click.BadParameter("need x-range lo < hi and n >= 2")
    if lo > 0:
        return np.logspace(math.log10(lo), math.log10(hi), n)
    return np.linspace(lo, hi, n)


def _mass_estimate(x, y, tail=None, head=None):
    """Mass of the table, with power-law closures when they are known."""
    if x[0] > 0:
        return GriddedDensity(x, y, tail, head).mass()
    return float(np.trapezoid(y, x)) if hasattr(np, "trapezoid") else float(np.trapz(y, x))


_EPS_LADDER = ((1e-3, 5e-4, 2.5e-4), (1e-4, 5e-5, 2.5e-5), (1e-5, 5e-6, 2.5e-6))


def _invert(h, x):
    """Density of ``h`` on ``x``: closed boundary form if known, else Stieltjes inversion.

    The inversion is retried on finer eps levels when extrapolation fails, which
    happens next to support edges.  Returns ``(values, residual, how)``.
    """
    if h.capabilities.closed_density and not np.any(x == 0):
        return h.density(x), 0.0, "closed_form"
    err = None
    for eps in _EPS_LADDER:
        try:
            g = stieltjes_invert(h, x, eps)
        except ConvergenceError as exc:
            err = exc
            continue
        return g.values, float(np.max(g.residuals)), f"stieltjes eps0={eps[0]:g}"
    raise err


def _config(ctx) -> RunConfig:
    return ctx.obj["config"]


def _parse_operand(text: str):
    """``b(alpha,rho)``, ``s(alpha,rho)``, ``n(alpha)``, ``nr(alpha)`` or a JSON file."""
    from .mixtures import MixtureSpec
    from .stable_laws import StableLaw

    m = _SPEC.match(text)
    if m:
        kind, a, r = m.group(1), float(m.group(2)), m.group(3)
        r = 1.0 if r is None else float(r)
        family = {"b": "boolean", "s": "free", "n": "classical", "nr": "classical"}[kind]
        return kind, StableLaw(family, a, r)
    if os.path.exists(text):
        with open(text) as fh:
            d = json.load(fh)
        if "atoms" in d:
            return "mixture", MixtureSpec.from_dict(d)
        law = StableLaw.from_dict(d)
        return {"boolean": "b", "free": "s", "classical": "n"}[law.family], law
    raise click.BadParameter(f"cannot parse operand {text!r}")


def _handle(kind, obj):
    from .mixtures import mixture_handle

    if kind == "mixture":
        return mixture_handle(obj)
    if kind in ("n", "nr"):
        raise click.BadParameter("classical laws only enter classmult")
    return obj.handle()


# -- command group -------------------------------------------------------------------

@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="RunConfig JSON (default: $FREECONV_CONFIG).")
@click.pass_context
def cli(ctx, config_path):
    """Free, Boolean and classical stable laws from the command line."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = load_config(config_path)


@cli.command()
@click.option("--alpha", type=float, required=True)
@click.option("--rho", type=float, required=True)
@click.option("--numeric", is_flag=True, help="Also run the grid verifier.")
@click.pass_context
def classify(ctx, alpha, rho, numeric):
    """Closed-form FID verdict for the Boolean stable law b(alpha, rho)."""
    from .divisibility import classify_fid, verify_fid_numeric
    from .stable_laws import boolean_stable_handle

    cfg = _config(ctx)
    verdict = classify_fid(alpha, rho)
    out = {"schema": 1, "verdict": verdict.to_dict()}
    rc = EXIT_OK
    if numeric:
        num = verify_fid_numeric(boolean_stable_handle(alpha=alpha, rho=rho),
                                 cfg.upper_grid(), cfg.tol("im_phi"))
        out["numeric"] = num.to_dict()
        out["agree"] = num.decision == verdict.decision
        if not out["agree"]:
            rc = EXIT_DISAGREE
    click.echo(json.dumps(out))
    return rc


@cli.command()
@click.option("--family", type=click.Choice(["boolean", "mixture", "classical"]), required=True)
@click.option("--alpha", type=float, default=None)
@click.option("--rho", type=float, default=1.0, show_default=True)
@click.option("--sigma-file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="MixtureSpec JSON for --family mixture.")
@click.option("--x-range", nargs=2, type=float, default=(0.01, 100.0), show_default=True)
@click.option("--n", "n", type=int, default=500, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def density(ctx, family, alpha, rho, sigma_file, x_range, n, fmt, out):
    """Density table of a Boolean stable law, a mixture or a positive classical stable law."""
    from .mixtures import MixtureSpec, mixture_density
    from .stable_laws import StableLaw, boolean_stable_density, boolean_stable_handle, \
        classical_stable_density

    fmt = fmt or _config(ctx).output_format
    x = _x_grid(x_range, n)
    tail = head = None
    if family == "mixture":
        if sigma_file is None:
            raise click.BadParameter("--family mixture needs --sigma-file")
        with open(sigma_file) as fh:
            sigma = MixtureSpec.from_dict(json.load(fh))
        if x[0] <= 0:
            raise click.BadParameter("mixture densities live on x > 0")
        y = mixture_density(sigma, x)
        a = [p for p, _ in sigma.all_atoms()]
        tail, head = -1.0 - min(a), max(a) - 1.0
        meta = {"family": "mixture", "sigma": sigma.to_dict()}
    else:
        if alpha is None:
            raise click.BadParameter("--alpha is required")
        if family == "boolean":
            law = StableLaw("boolean", alpha, rho)
            if alpha < 1:
                y = boolean_stable_density(alpha, rho, x)
                if rho == 1:
                    tail, head = -alpha - 1.0, alpha - 1.0
            else:
                y = _invert(boolean_stable_handle(law), x)[0]
        else:
            law = StableLaw("classical", alpha, rho)
            if x[0] <= 0:
                raise click.BadParameter("classical positive stable densities live on x > 0")
            y = classical_stable_density(alpha, x)
            tail = -alpha - 1.0
        meta = {"family": family, "alpha": alpha, "rho": rho}
    meta["normalization"] = {"mass_estimate": _mass_estimate(x, y, tail, head),
                             "closures": {"tail": tail, "head": head}}
    _table(x, y, fmt, meta, out)
    return EXIT_OK


@cli.command()
@click.option("--op", type=click.Choice(["boolean", "free", "freemult", "classmult"]), required=True)
@click.option("--lhs", required=True, help="b(a,r), s(a,r), n(a), nr(a) or a JSON file.")
@click.option("--rhs", default=None, help="Second operand (omit with --power).")
@click.option("--power", "power", type=float, default=None, help="Convolution power of lhs.")
@click.option("--x-range", nargs=2, type=float, default=(0.05, 20.0), show_default=True)
@click.option("--n", "n", type=int, default=100, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def convolve(ctx, op, lhs, rhs, power, x_range, n, fmt, out):
    """Convolve two laws (or take a power of one) and print the density table."""
    from .convolutions import (boolean_convolve, boolean_power, classical_mult_convolve,
                               free_convolve, free_mult_convolve, free_power, log_grid,
                               reciprocal_pushforward)
    from .stable_laws import classical_stable_density

    fmt = fmt or _config(ctx).output_format
    if (rhs is None) == (power is None):
        raise click.BadParameter("give exactly one of --rhs and --power")
    x = _x_grid(x_range, n)
    k1, o1 = _parse_operand(lhs)
    if op == "classmult":
        if power is not None:
            raise click.BadParameter("classmult has no power form")
        k2, o2 = _parse_operand(rhs)
        if k1 not in ("n", "nr") or k2 not in ("n", "nr"):
            raise click.BadParameter("classmult takes n(alpha) or nr(alpha) operands")
        u = log_grid()
        dens = []
        for k, o in ((k1, o1), (k2, o2)):
            d = GriddedDensity(u, classical_stable_density(o.alpha, u), -o.alpha - 1.0, None)
            dens.append(reciprocal_pushforward(d) if k == "nr" else d)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RuntimeWarning)
            res = classical_mult_convolve(*dens)
        if x[0] <= 0:
            raise click.BadParameter("classmult densities live on x > 0")
        meta = {"op": op, "method": "log_mellin", "mass_loss": float(res.mass_loss),
                "warnings": [str(w.message) for w in caught]}
        _table(x, res(x), fmt, meta, out)
        return EXIT_OK
    m1 = _handle(k1, o1)
    if power is not None:
        if op == "boolean":
            r = boolean_power(m1, power)
        elif op == "free":
            r = free_power(m1, power)
        else:
            raise click.BadParameter(f"{op} has no power form")
    else:
        m2 = _handle(*_parse_operand(rhs))
        r = {"boolean": boolean_convolve, "free": free_convolve,
             "freemult": free_mult_convolve}[op](m1, m2)
    values, resid, how = _invert(r.handle, x)
    meta = {"op": op, "method": r.method, "max_residual": r.max_residual,
            "grid_size": r.grid_size, "density_from": how, "inversion_residual": resid}
    _table(x, values, fmt, meta, out)
    return EXIT_OK


@cli.command()
@click.option("--suite", type=click.Choice(["all", "fid", "cm", "reproducing", "mixtures",
                                            "identity", "density"]), default="all",
              show_default=True)
@click.option("--seed", type=int, default=None, help="Override the seed of randomised points.")
@click.option("--parallelism", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def verify(ctx, suite, seed, parallelism, fmt, out):
    """Run an acceptance suite; exit 3 when any criterion fails."""
    from .suites import run_suite

    cfg = _config(ctx)
    if seed is not None:
        cfg.seed = seed
    if parallelism is not None:
        cfg.parallelism = max(1, parallelism)
    fmt = fmt or cfg.output_format
    results = run_suite(suite, cfg)
    passed = all(r.passed for r in results)
    if fmt == "csv":
        rows = [(r.number, r.name, r.passed, r.metric, r.tol, round(r.seconds, 3)) for r in results]
        _emit(_csv(["criterion", "name", "passed", "metric", "tol", "seconds"], rows), out)
    else:
        _emit(json.dumps({"schema": 1, "suite": suite, "seed": cfg.seed, "passed": passed,
                          "results": [r.to_dict() for r in results]}, default=_jsonable), out)
    return EXIT_OK if passed else EXIT_SUITE


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serialisable: {type(o).__name__}")


def main(argv=None) -> int:
    """Entry point; returns the process exit code."""
    try:
        rc = cli.main(args=argv, prog_name="freeconv", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except FreeconvError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return EXIT_USAGE
    return int(rc or 0)


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
