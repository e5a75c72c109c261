"""Public package exports for ``dunkl_lab``."""

from .abstract_semigroup import (
    AdmissibleFunction,
    ContourPath,
    MatrixGenerator,
    contour_calculus,
    generator_test_set,
    subordinate_at,
)
from .base import (
    BranchError,
    ConfigError,
    DunklLabError,
    HyperplaneSingularityError,
    IntegrationError,
    ParameterError,
    PathError,
    SpectrumError,
    TruncationError,
    UnsupportedOrderError,
)
from .config import ExperimentConfig
from .corpus import build_corpus
from .dunkl_kernel import FunctionHandle, SpectralMode, dunkl_kernel_E
from .heat_poisson import KernelEvaluator, KernelMode, TimeGrid, heat_kernel, poisson_kernel
from .lipschitz_norms import SpaceGrid, equivalence_report
from .root_system import RootSystem, make_product_z2
from .suites import Check, SuiteReport, run_suite

__all__ = [
    "AdmissibleFunction",
    "BranchError",
    "Check",
    "ConfigError",
    "ContourPath",
    "DunklLabError",
    "ExperimentConfig",
    "FunctionHandle",
    "HyperplaneSingularityError",
    "IntegrationError",
    "KernelEvaluator",
    "KernelMode",
    "MatrixGenerator",
    "ParameterError",
    "PathError",
    "RootSystem",
    "SpaceGrid",
    "SpectralMode",
    "SpectrumError",
    "SuiteReport",
    "TimeGrid",
    "TruncationError",
    "UnsupportedOrderError",
    "build_corpus",
    "contour_calculus",
    "dunkl_kernel_E",
    "equivalence_report",
    "generator_test_set",
    "heat_kernel",
    "make_product_z2",
    "poisson_kernel",
    "run_suite",
    "subordinate_at",
]

try:
    from dunkl_lab._version import __version__
except ImportError:
    __version__ = "0.0.0+unknown"
