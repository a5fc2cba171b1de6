import json
import os
import subprocess
import sys

import numpy as np
import pytest

from freeconv import _kernels_py, kernels
from freeconv.stable_laws import boolean_stable_handle
from freeconv.transform_core import standard_grid

try:
    from freeconv import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")

CASES = [(0.3, 1.0), (0.6, 0.5), (1.0, 0.3), (1.5, 0.5)]


@needs_compiled
@pytest.mark.parametrize("alpha,rho", CASES)
def test_eval_agrees(alpha, rho):
    args = boolean_stable_handle(alpha=alpha, rho=rho).kernel_args
    ell = np.log(standard_grid())
    a, da = compiled.powersum_eval(ell, *args)
    b, db = _kernels_py.powersum_eval(ell, *args)
    assert np.max(np.abs(a - b) / np.maximum(np.abs(b), 1.0)) < 1e-13
    assert np.max(np.abs(da - db) / np.maximum(np.abs(db), 1.0)) < 1e-13


@needs_compiled
@pytest.mark.parametrize("alpha,rho", CASES)
def test_continue_agrees(alpha, rho):
    args = boolean_stable_handle(alpha=alpha, rho=rho).kernel_args
    z = standard_grid()
    la, sa, _ = compiled.powersum_continue(z, *args)
    lb, sb, _ = _kernels_py.powersum_continue(z, *args)
    assert np.array_equal(sa, sb)
    ok = sa == 0
    assert np.max(np.abs(np.exp(la[ok]) - np.exp(lb[ok])) / np.abs(np.exp(lb[ok]))) < 1e-10


def test_backend_names():
    assert _kernels_py.BACKEND == "python"
    assert kernels.BACKEND in ("python", "cython")


def test_env_var_forces_pure_python():
    code = ("import json, freeconv; from freeconv.divisibility import classify_fid, verify_fid_numeric;"
            "from freeconv.stable_laws import boolean_stable_handle as b;"
            "print(json.dumps([freeconv.BACKEND, verify_fid_numeric(b(alpha=0.3, rho=0.5)).decision]))")
    env = dict(os.environ, FREECONV_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    backend, decision = json.loads(out.stdout)
    assert backend == "python" and decision is True
