"""Fair linear and kernel SVMs that stay fair across all decision thresholds.

Two constraints are available on top of the usual hinge-loss SVM: a bound on
the difference of group mean scores, and a penalty on the difference of
group score variances. The latter is nonconvex and is handled by a spectral
convex-concave procedure.
"""

from .ccp import CcpConfig
from .data import (
    Dataset,
    SyntheticConfig,
    kfold,
    load_csv,
    load_recipe,
    split,
    standardize,
    synthesize,
)
from .estimators import FairKernelSVC, FairLinearSVC
from .exceptions import (
    DegenerateGroupError,
    DegenerateLabelError,
    FairSVMError,
    InputError,
    LoadError,
    TrainingError,
)
from .kernel import Kernel, KernelModel, kernel_decision_values, train_fair_ksvm, train_ksvm
from .linear import LinearModel, decision_values, train_lsvm, train_ssvm, train_zsvm
from .metrics import auc, dp_delta, eo_delta, fairness_report, roc

__version__ = "0.1.0"

__all__ = [
    "CcpConfig",
    "Dataset",
    "SyntheticConfig",
    "kfold",
    "load_csv",
    "load_recipe",
    "split",
    "standardize",
    "synthesize",
    "FairKernelSVC",
    "FairLinearSVC",
    "DegenerateGroupError",
    "DegenerateLabelError",
    "FairSVMError",
    "InputError",
    "LoadError",
    "TrainingError",
    "Kernel",
    "KernelModel",
    "kernel_decision_values",
    "train_fair_ksvm",
    "train_ksvm",
    "LinearModel",
    "decision_values",
    "train_lsvm",
    "train_ssvm",
    "train_zsvm",
    "auc",
    "dp_delta",
    "eo_delta",
    "fairness_report",
    "roc",
]
