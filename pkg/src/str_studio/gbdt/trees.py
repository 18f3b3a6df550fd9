"""Regression tree nodes and their flat array form for batch traversal.

Routing rule everywhere: value < threshold goes left, value >= threshold
goes right, MISSING (NaN) follows the split's default direction learned
during training.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class TreeNode:
    """Either a leaf (value set) or a split (feature/threshold/children).

    `gain` and `cover` are training metadata: gain is the split's loss
    reduction, cover the total instance weight that reached the node.
    Explanations require cover; gain importance requires gain.
    """

    value: Optional[float] = None
    feature_index: Optional[int] = None
    threshold: Optional[float] = None
    default_left: bool = True
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None
    gain: Optional[float] = None
    cover: Optional[float] = None

    @property
    def is_leaf(self) -> bool:
        return self.value is not None

    def evaluate(self, x: np.ndarray) -> float:
        node = self
        while not node.is_leaf:
            v = x[node.feature_index]
            if np.isnan(v):
                node = node.left if node.default_left else node.right
            else:
                node = node.left if v < node.threshold else node.right
        return node.value

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def n_nodes(self) -> int:
        if self.is_leaf:
            return 1
        return 1 + self.left.n_nodes() + self.right.n_nodes()


class FlatTree:
    """Array form of a tree for vectorized batch prediction.

    Node 0 is the root; leaves carry feature = -1.
    """

    def __init__(self, root: TreeNode):
        n = root.n_nodes()
        self.feature = np.full(n, -1, dtype=np.int64)
        self.threshold = np.zeros(n, dtype=float)
        self.default_left = np.zeros(n, dtype=bool)
        self.left = np.zeros(n, dtype=np.int64)
        self.right = np.zeros(n, dtype=np.int64)
        self.value = np.zeros(n, dtype=float)
        self.max_depth = root.depth()
        self._fill(root, 0)

    def _fill(self, node: TreeNode, idx: int) -> int:
        """Depth-first layout; returns the next free slot."""
        if node.is_leaf:
            self.value[idx] = node.value
            return idx + 1
        self.feature[idx] = node.feature_index
        self.threshold[idx] = node.threshold
        self.default_left[idx] = node.default_left
        self.left[idx] = idx + 1
        nxt = self._fill(node.left, idx + 1)
        self.right[idx] = nxt
        return self._fill(node.right, nxt)

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        n = X.shape[0]
        cur = np.zeros(n, dtype=np.int64)
        for _ in range(self.max_depth):
            feat = self.feature[cur]
            active = feat >= 0
            if not active.any():
                break
            rows = np.nonzero(active)[0]
            vals = X[rows, feat[rows]]
            thr = self.threshold[cur[rows]]
            go_left = vals < thr
            miss = np.isnan(vals)
            go_left = np.where(miss, self.default_left[cur[rows]], go_left)
            cur[rows] = np.where(go_left, self.left[cur[rows]], self.right[cur[rows]])
        return self.value[cur]
