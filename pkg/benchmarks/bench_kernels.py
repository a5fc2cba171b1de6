"""Time the compiled and numpy power-sum kernels on the same inputs.

Usage: python3 benchmarks/bench_kernels.py [--points N] [--repeat R]
"""
import argparse
import time

import numpy as np

from freeconv import _kernels_py
from freeconv.stable_laws import boolean_stable_handle

try:
    from freeconv import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None


def _time(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    z = rng.uniform(-10, 10, args.points) + 1j * 10 ** rng.uniform(-2, 2, args.points)
    ell = np.log(z)
    backends = [("python", _kernels_py)]
    if _kernels_c is not None:
        backends.append(("cython", _kernels_c))
    else:
        print("compiled kernel not built; timing the numpy fallback only")
    for alpha, rho in ((0.3, 1.0), (0.6, 0.5), (1.5, 0.4)):
        args_k = boolean_stable_handle(alpha=alpha, rho=rho).kernel_args
        print(f"b({alpha},{rho}), {args.points} points")
        ref = None
        for name, mod in backends:
            t_eval, _ = _time(lambda: mod.powersum_eval(ell, *args_k), args.repeat)
            t_cont, res = _time(lambda: mod.powersum_continue(z, *args_k), args.repeat)
            ok = res[1] == 0
            diff = 0.0 if ref is None else float(np.max(np.abs(np.exp(res[0][ok]) - ref[ok])))
            if ref is None:
                ref = np.exp(res[0])
            print(f"  {name:7s} eval {t_eval * 1e3:8.2f} ms   continue {t_cont * 1e3:9.2f} ms"
                  f"   max |w - w_python| {diff:.1e}")


if __name__ == "__main__":
    main()
