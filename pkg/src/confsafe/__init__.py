"""Scalable kernel classifiers with conformal safety regions.

Train an SVM, SVDD or kernel logistic regression whose predictor scales
with a scalar parameter rho, calibrate it on held-out data, and read off
set-valued predictions with finite-sample marginal coverage plus an
analytic input region on which the false-positive mass is bounded by the
chosen error level.
"""

from .conformal import (
    CalibrationProfile,
    ConformalSet,
    calibrate,
    conformal_set,
    in_safe_region,
    in_sigma,
    load_profile,
    profile_from_dict,
    quantile,
    rho_eps,
    score,
)
from .datasets import (
    Dataset,
    DnsSurrogateSpec,
    GaussianSpec,
    SplitSpec,
    gen_dns_surrogate,
    gen_two_gaussians,
    load_csv,
    sample_moments,
    save_csv,
    split,
)
from .evaluation import (
    CoverageReport,
    RegionGrid,
    evaluate,
    grid_to_csv,
    region_grid,
    reports_to_csv,
    reports_to_json,
    sweep,
)
from .exceptions import ConvergenceError, InputError
from .kernels import (
    GaussianKernel,
    LinearKernel,
    PolynomialKernel,
    default_gamma,
    gram_matrix,
    kernel_eval,
    kernel_from_dict,
    median_heuristic_gamma,
)
from .models import (
    LRModel,
    ScalableModel,
    SVDDModel,
    SVMModel,
    load_model,
    model_from_dict,
    rho_bar_bisection,
)
from .training import TrainConfig, kkt_violation, train_lr, train_model, train_svdd, train_svm

__version__ = "0.1.0"

__all__ = [
    "CalibrationProfile", "ConformalSet", "ConvergenceError", "CoverageReport",
    "Dataset", "DnsSurrogateSpec", "GaussianKernel", "GaussianSpec", "InputError",
    "LRModel", "LinearKernel", "PolynomialKernel", "RegionGrid", "SVDDModel",
    "SVMModel", "ScalableModel", "SplitSpec", "TrainConfig", "calibrate",
    "conformal_set", "default_gamma", "evaluate", "gen_dns_surrogate",
    "gen_two_gaussians", "gram_matrix", "grid_to_csv", "in_safe_region",
    "in_sigma", "kernel_eval", "kernel_from_dict", "kkt_violation", "load_csv",
    "load_model", "load_profile", "median_heuristic_gamma", "model_from_dict",
    "profile_from_dict", "quantile", "region_grid", "reports_to_csv",
    "reports_to_json", "rho_bar_bisection", "rho_eps", "sample_moments",
    "save_csv", "score", "split", "sweep", "train_lr", "train_model",
    "train_svdd", "train_svm",
]
