"""Differentially private post-processing for statistical-parity fair
regression: private histogram estimates of per-group score distributions,
a KS-ball-relaxed Wasserstein-barycenter LP, and randomized optimal
transports applied as post-processing maps."""

__version__ = "0.1.0"

from .barycenter_lp import BarycenterSolution, LpInstance, build_lp, fixed_target_cost, solve
from .data_io import (AffineTransform, DatasetSchema, GroupedSamples, load_csv,
                      split_train_test)
from .dp_estimation import (PrivacyParams, PrivateGroupDists, empirical_joint,
                            estimate_private_dists, group_weights, privatize_joint,
                            renormalize_cdf, sample_laplace)
from .errors import ConfigError, DataError, SolverFailure, UnknownGroupError
from .grid import Grid, discretize, discretize_many, make_grid
from .metrics import (ks_distance, l1_distance, linf_distance, monotone_coupling, mse,
                      statistical_parity_gap, w2sq_monotone)
from .pipeline import FairPostprocessor, fit, load
from .sweep import SweepConfig, SweepRow, lower_envelope, run_sweep
from .transport import TransportKernels, apply_sample, extract_kernels, push_forward

__all__ = [
    "__version__",
    "AffineTransform", "BarycenterSolution", "ConfigError", "DataError",
    "DatasetSchema", "FairPostprocessor", "Grid", "GroupedSamples", "LpInstance",
    "PrivacyParams", "PrivateGroupDists", "SolverFailure", "SweepConfig", "SweepRow",
    "TransportKernels", "UnknownGroupError",
    "apply_sample", "build_lp", "discretize", "discretize_many", "empirical_joint",
    "estimate_private_dists", "extract_kernels", "fit", "fixed_target_cost",
    "group_weights", "ks_distance", "l1_distance", "linf_distance", "load",
    "load_csv", "lower_envelope", "make_grid", "monotone_coupling", "mse",
    "privatize_joint", "push_forward", "renormalize_cdf", "run_sweep",
    "sample_laplace", "solve", "split_train_test", "statistical_parity_gap",
    "w2sq_monotone",
]
