"""From-scratch weighted gradient-boosted regression trees."""

from .trees import TreeNode, FlatTree
from .training import TrainConfig, TreeEnsemble, predict, predict_batch, rmse, train
from .tuning import CvReport, default_grid, expand_grid, grid_search, kfold_indices
from .serialize import load_model, save_model

__all__ = [
    "TreeNode",
    "FlatTree",
    "TrainConfig",
    "TreeEnsemble",
    "train",
    "predict",
    "predict_batch",
    "rmse",
    "CvReport",
    "grid_search",
    "default_grid",
    "expand_grid",
    "kfold_indices",
    "save_model",
    "load_model",
]
