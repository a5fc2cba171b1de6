"""Run configuration shared by the command line and the verification suites."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ParameterError

__all__ = ["RunConfig", "DEFAULT_TOLERANCES", "DEFAULT_SEED", "load_config", "CONFIG_ENV"]

CONFIG_ENV = "FREECONV_CONFIG"
DEFAULT_SEED = 20231107

DEFAULT_TOLERANCES = {
    "im_phi": 1e-9,
    "witness_im_phi": 1e-6,
    "jump": 1e-3,
    "density": 1e-4,
    "mass": 1e-6,
    "stability": 1e-12,
    "reproducing": 1e-3,
    "identity_classical": 1e-4,
    "identity_free": 1e-3,
    "bercovici_pata": 1e-4,
    "mixture_inversion": 1e-4,
    "witness_residual": 1e-10,
}


@dataclass
class RunConfig:
    """Tolerances, evaluation grid, output format and parallelism.

    ``grid`` holds ``x_range``, ``y_range`` and ``counts = (nx, ny)`` for the
    upper-half-plane test grid.
    """

    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    grid: dict = field(default_factory=lambda: {"x_range": [-10.0, 10.0],
                                                "y_range": [1e-2, 1e2], "counts": [21, 20]})
    output_format: str = "json"
    parallelism: int = 1
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        tol = dict(DEFAULT_TOLERANCES)
        tol.update({str(k): float(v) for k, v in self.tolerances.items()})
        self.tolerances = tol
        if any(not v > 0 for v in tol.values()):
            raise ParameterError("tolerances must be positive")
        if self.output_format not in ("json", "csv"):
            raise ParameterError("output_format must be json or csv")
        if int(self.parallelism) < 1:
            raise ParameterError("parallelism must be a positive integer")
        self.parallelism = int(self.parallelism)
        counts = self.grid.get("counts", [21, 20])
        if len(counts) != 2 or min(counts) < 2:
            raise ParameterError("grid counts must be two integers >= 2")
        y0, y1 = self.grid.get("y_range", [1e-2, 1e2])
        if not 0 < y0 < y1:
            raise ParameterError("y_range must satisfy 0 < y_min < y_max")
        x0, x1 = self.grid.get("x_range", [-10.0, 10.0])
        if not x0 < x1:
            raise ParameterError("x_range must be increasing")

    def upper_grid(self):
        """The test grid as an ``(ny, nx)`` array; rows share ``Im z``."""
        nx, ny = self.grid.get("counts", [21, 20])
        x0, x1 = self.grid.get("x_range", [-10.0, 10.0])
        y0, y1 = self.grid.get("y_range", [1e-2, 1e2])
        xs = np.linspace(x0, x1, int(nx))
        ys = np.logspace(np.log10(y0), np.log10(y1), int(ny))
        return xs[None, :] + 1j * ys[:, None]

    def tol(self, name: str) -> float:
        return self.tolerances[name]

    def to_dict(self):
        return {"schema": 1, **asdict(self)}

    @classmethod
    def from_dict(cls, d) -> "RunConfig":
        d = {k: v for k, v in d.items() if k != "schema"}
        unknown = set(d) - {"tolerances", "grid", "output_format", "parallelism", "seed"}
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def load_config(path: str | None = None) -> RunConfig:
    """Read a RunConfig from ``path`` or from ``$FREECONV_CONFIG``; defaults otherwise."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return RunConfig()
    try:
        with open(path) as fh:
            return RunConfig.from_dict(json.load(fh))
    except (OSError, ValueError, TypeError) as exc:
        raise ParameterError(f"cannot read config {path}: {exc}") from exc
