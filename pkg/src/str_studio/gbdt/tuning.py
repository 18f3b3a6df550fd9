"""K-fold cross-validated grid search over TrainConfig axes."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import TrainingError
from ..ingest.types import Dataset
from .training import TrainConfig, rmse, train

#: Small default grid covering the common regimes.
DEFAULT_GRID_AXES = {
    "max_depth": [3, 4, 6],
    "n_rounds": [50, 100, 200],
    "learning_rate": [0.05, 0.1, 0.3],
    "l2_leaf_reg": [0.0, 1.0],
    "min_split_gain": [0.0],
}


def default_grid(seed: int = 0) -> list[TrainConfig]:
    return expand_grid(DEFAULT_GRID_AXES, seed=seed)


def expand_grid(axes: dict, seed: int = 0) -> list[TrainConfig]:
    """Cartesian product of axis values, in listed axis order."""
    keys = list(axes.keys())
    configs = []
    for combo in itertools.product(*(axes[k] for k in keys)):
        configs.append(replace(TrainConfig(seed=seed), **dict(zip(keys, combo))))
    return configs


def kfold_indices(n: int, k_folds: int, seed: int) -> list[np.ndarray]:
    """Deterministic shuffled fold assignment; every fold needs >= 2 rows."""
    if k_folds < 2:
        raise TrainingError("k_folds must be >= 2")
    perm = np.random.default_rng(seed).permutation(n)
    folds = np.array_split(perm, k_folds)
    for i, fold in enumerate(folds):
        if len(fold) < 2:
            raise TrainingError(f"fold {i} has {len(fold)} rows (< 2); more data or fewer folds needed")
    return [np.sort(f) for f in folds]


@dataclass
class CvEntry:
    config: TrainConfig
    fold_rmse: list[float]
    mean_rmse: float
    std_rmse: float


@dataclass
class CvReport:
    entries: list[CvEntry]
    chosen_index: int
    k_folds: int
    seed: int

    @property
    def chosen(self) -> TrainConfig:
        return self.entries[self.chosen_index].config

    def to_dict(self) -> dict:
        return {
            "k_folds": self.k_folds,
            "seed": self.seed,
            "chosen_index": self.chosen_index,
            "chosen_config": self.chosen.to_dict(),
            "entries": [
                {
                    "config": e.config.to_dict(),
                    "fold_rmse": e.fold_rmse,
                    "mean_rmse": e.mean_rmse,
                    "std_rmse": e.std_rmse,
                }
                for e in self.entries
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def grid_search(dataset: Dataset, grid=None, k_folds: int = 3, seed: int = 0) -> CvReport:
    """Evaluate every grid point with k-fold CV RMSE; pick the minimum.

    Fold assignment is fixed once from `seed` and shared by all grid
    points, so scores are comparable; ties go to the earliest point.
    """
    if grid is None:
        grid = default_grid(seed=seed)
    elif isinstance(grid, dict):
        grid = expand_grid(grid, seed=seed)
    if not grid:
        raise TrainingError("grid must be non-empty")

    folds = kfold_indices(len(dataset), k_folds, seed)
    all_indices = np.arange(len(dataset))
    entries = []
    for config in grid:
        scores = []
        for fold in folds:
            hold = np.zeros(len(dataset), dtype=bool)
            hold[fold] = True
            model = train(dataset.subset(all_indices[~hold]), config)
            scores.append(rmse(model, dataset.subset(fold)))
        entries.append(
            CvEntry(
                config=config,
                fold_rmse=scores,
                mean_rmse=float(np.mean(scores)),
                std_rmse=float(np.std(scores)),
            )
        )
    chosen = int(np.argmin([e.mean_rmse for e in entries]))
    return CvReport(entries=entries, chosen_index=chosen, k_folds=k_folds, seed=seed)
