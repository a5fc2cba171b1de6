"""Free, Boolean and classical stable laws: transforms, convolutions and divisibility tests."""
from .classical_id import (
    CMReport,
    classical_id_verdict,
    cm_calculus_check,
    cm_check,
)
from .config import RunConfig, load_config
from .convolutions import (
    ConvolutionResult,
    boolean_convolve,
    boolean_power,
    classical_mult_convolve,
    free_convolve,
    free_mult_convolve,
    free_power,
    reciprocal_pushforward,
    verify_boolean_reproducing,
)
from .divisibility import (
    FIDVerdict,
    belinschi_nica,
    branch_angles,
    classify_fid,
    indicator_probe,
    ray_noninjectivity_witness,
    ui_boundary_diagnostic,
    verify_fid_numeric,
)
from .errors import (
    AtomicMeasureError,
    ConvergenceError,
    DomainError,
    FreeconvError,
    InversionError,
    ParameterError,
    PreconditionError,
    QuadratureError,
)
from .kernels import BACKEND
from .mixtures import MixtureSpec, mixture_density, mixture_handle, mixture_verify
from .stable_laws import (
    StableLaw,
    boolean_stable_density,
    boolean_stable_handle,
    classical_stable_density,
    free_stable_handle,
)
from .transform_core import (
    GriddedDensity,
    MeasureHandle,
    PowerSumMeasure,
    cauchy_transform,
    f_transform,
    k_transform,
    s_transform,
    stieltjes_invert,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AtomicMeasureError",
    "CMReport",
    "ConvergenceError",
    "ConvolutionResult",
    "DomainError",
    "FIDVerdict",
    "FreeconvError",
    "GriddedDensity",
    "InversionError",
    "MeasureHandle",
    "MixtureSpec",
    "ParameterError",
    "PowerSumMeasure",
    "PreconditionError",
    "QuadratureError",
    "RunConfig",
    "StableLaw",
    "belinschi_nica",
    "boolean_convolve",
    "boolean_power",
    "boolean_stable_density",
    "boolean_stable_handle",
    "branch_angles",
    "cauchy_transform",
    "classical_id_verdict",
    "classical_mult_convolve",
    "classical_stable_density",
    "classify_fid",
    "cm_calculus_check",
    "cm_check",
    "f_transform",
    "free_convolve",
    "free_mult_convolve",
    "free_power",
    "free_stable_handle",
    "indicator_probe",
    "k_transform",
    "load_config",
    "mixture_density",
    "mixture_handle",
    "mixture_verify",
    "ray_noninjectivity_witness",
    "reciprocal_pushforward",
    "s_transform",
    "stieltjes_invert",
    "ui_boundary_diagnostic",
    "verify_boolean_reproducing",
    "verify_fid_numeric",
]
