"""Robust nonlinear SVM training on data with bounded feature uncertainty."""

__version__ = "0.1.0"

from ._accel import get_backend, set_backend
from .core import (
    Dataset,
    NormPair,
    UncertaintyModel,
    derive_seed,
    dual_exponent,
    gaussian_kernel,
    gaussian_kernel_matrix,
    sample_uncertainty,
)
from .data import parse_csv, parse_libsvm
from .model_io import ModelFile, load_model, save_model
from .nystrom import NystromMap, nystrom_bound, nystrom_fit, nystrom_transform, select_landmarks
from .objective import (
    IdentityMap,
    RobustClassifier,
    SolverProblem,
    full_objective,
    linear_robust_loss,
    predict,
    prox_ridge,
    robust_hinge,
    robust_hinge_subgrad,
)
from .pipeline import build_problem, feature_bounds, fit
from .rff import FeatureBound, LinearFactor, RffMap, RotationBlocks, rff_bound, rff_sample, rff_sigma_min, rff_transform
from .solver import SolverConfig, TrainingTrace, step_size, train
from .verify import (
    BandwidthCutReport,
    BoundReport,
    bandwidth_cut_check,
    grad_check,
    kernel_approx_error,
    robust_error,
    standard_error,
    verify_bound_mc,
)
