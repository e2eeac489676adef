"""Interpretable linear regression by boosting over a dendrogram of variable clusters.

Variables are grouped by ascendant hierarchical clustering around latent
components; an L2-boosting loop then picks, at every iteration, the largest
unidimensional cluster whose component best tracks the current residuals.
"""

from .errors import DataError, DegenerateError, DimensionMismatch, NumericalError
from .preprocess import (
    Dataset,
    FoldAssignment,
    PreprocessParams,
    ScalingMode,
    apply_preprocess,
    fit_preprocess,
    load_csv,
    make_folds,
)
from .numerics import cholesky, group_criterion, pearson_cor, sym_top2_eig
from .clv import ClusterNode, Dendrogram, build_hierarchy, kg_threshold, kg_unidimensional, partition_at
from .boost import BoostStep, GroupImportance, LmClvModel, base_learner, coefficients, fit, group_importance, predict
from .simulate import SimulatedData, SimulationConfig, simulate, standard_normals
from .evaluation import (
    BaselineResult,
    CvCurve,
    cross_validate_baseline,
    cross_validate_lmclv,
    pcr_fit,
    pls1_fit,
    rmse,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineResult",
    "BoostStep",
    "ClusterNode",
    "CvCurve",
    "DataError",
    "Dataset",
    "DegenerateError",
    "Dendrogram",
    "DimensionMismatch",
    "FoldAssignment",
    "GroupImportance",
    "LmClvModel",
    "NumericalError",
    "PreprocessParams",
    "ScalingMode",
    "SimulatedData",
    "SimulationConfig",
    "apply_preprocess",
    "base_learner",
    "build_hierarchy",
    "cholesky",
    "coefficients",
    "cross_validate_baseline",
    "cross_validate_lmclv",
    "fit",
    "fit_preprocess",
    "group_criterion",
    "group_importance",
    "kg_threshold",
    "kg_unidimensional",
    "load_csv",
    "make_folds",
    "partition_at",
    "pcr_fit",
    "pearson_cor",
    "pls1_fit",
    "predict",
    "rmse",
    "simulate",
    "standard_normals",
    "sym_top2_eig",
]
