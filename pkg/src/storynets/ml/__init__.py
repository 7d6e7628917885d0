"""Tree-family classifiers and cross-validation."""

from .gbt import (
    GbtModel,
    GbtParams,
    TreeNode,
    load_model,
    log_loss,
    predict_margin,
    predict_proba,
    save_model,
    train_gbt,
)
from .baselines import (
    DecisionTreeModel,
    ForestParams,
    RandomForestModel,
    TreeParams,
    train_baseline,
)
from .validate import (
    CvReport,
    MetricSummary,
    ModelSpec,
    confusion_matrix,
    cross_validate,
    roc_auc_ovr,
    stratified_folds,
    train_model,
)

__all__ = [
    "GbtModel", "GbtParams", "TreeNode", "train_gbt", "predict_proba",
    "predict_margin", "log_loss", "save_model", "load_model",
    "DecisionTreeModel", "RandomForestModel", "TreeParams", "ForestParams",
    "train_baseline",
    "ModelSpec", "CvReport", "MetricSummary", "cross_validate",
    "confusion_matrix", "roc_auc_ovr", "stratified_folds", "train_model",
]
