"""Variable-interaction decomposition for large-scale black-box optimization.

The main entry points are :func:`svg_decompose` (surrogate-assisted
variable grouping), the baselines :func:`dg_decompose` and
:func:`rdg_decompose`, :func:`decc_optimize` for cooperative coevolution and
:func:`build_problem` for the 21 benchmark functions.
"""

from ._validation import ConfigurationError, DomainError
from .baselines import BaselineConfig, DGDecomposer, RDGDecomposer, dg_decompose, rdg_decompose
from .cc import DECCOptimizer, OptimizerConfig, decc_optimize, de_generation, evaluate_subsolution
from .detection import (
    DetectionConfig,
    criterion1_separable,
    criterion2_separable,
    delta_fitness,
    detect_sep,
)
from .grouping import Decomposition, SVGDecomposer, dbtg, svg_decompose
from .metrics import confusion_matrix, dis, nmi, rho_split
from .problems import (
    BenchmarkProblem,
    BudgetExhausted,
    CountingObjective,
    FunctionProblem,
    build_problem,
    eval_base,
    evaluate,
    ground_truth,
    load_problem,
    make_rotation,
    save_problem,
)
from .surrogate import FitError, PolyModel, TlprResult, fit_poly, local_refine, poly_minimum, tlpr

__version__ = "0.1.0"

__all__ = [
    "BaselineConfig",
    "BenchmarkProblem",
    "BudgetExhausted",
    "ConfigurationError",
    "CountingObjective",
    "DECCOptimizer",
    "DGDecomposer",
    "Decomposition",
    "DetectionConfig",
    "DomainError",
    "FitError",
    "FunctionProblem",
    "OptimizerConfig",
    "PolyModel",
    "RDGDecomposer",
    "SVGDecomposer",
    "TlprResult",
    "build_problem",
    "confusion_matrix",
    "criterion1_separable",
    "criterion2_separable",
    "dbtg",
    "de_generation",
    "decc_optimize",
    "delta_fitness",
    "detect_sep",
    "dg_decompose",
    "dis",
    "eval_base",
    "evaluate",
    "evaluate_subsolution",
    "fit_poly",
    "ground_truth",
    "load_problem",
    "local_refine",
    "make_rotation",
    "nmi",
    "poly_minimum",
    "rdg_decompose",
    "rho_split",
    "save_problem",
    "svg_decompose",
    "tlpr",
]
