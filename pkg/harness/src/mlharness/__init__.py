"""mlharness: random-forest experiments over diagram feature matrices."""

from .specfile import ExperimentSpec, load_spec
from .cv import CvResult, make_folds, run_cv_experiment, write_cv_report
from .importance import (
    ImportanceReport,
    feature_importance_experiment,
    reshape_by_layout,
    two_class_permutation_test,
    write_importance_report,
)
from .plots import emit_plots

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
