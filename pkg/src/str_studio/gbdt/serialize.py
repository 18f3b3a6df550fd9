"""Versioned JSON model files with a CRC-32 checksum footer.

Layout: line 1 is the model document (compact JSON, floats as shortest
round-trip decimals, so load(save(m)) predicts bit-identically); line 2
is a footer {"crc32": "xxxxxxxx"} over the document bytes.
"""

from __future__ import annotations

import json
import zlib
from pathlib import Path

from ..errors import ModelFormatError
from .training import TrainConfig, TreeEnsemble
from .trees import TreeNode

MODEL_VERSION = 1


def _node_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"v": node.value, "cover": node.cover}
    return {
        "f": node.feature_index,
        "t": node.threshold,
        "default": "left" if node.default_left else "right",
        "gain": node.gain,
        "cover": node.cover,
        "l": _node_to_dict(node.left),
        "r": _node_to_dict(node.right),
    }


def _node_from_dict(data: dict) -> TreeNode:
    if "v" in data:
        return TreeNode(value=float(data["v"]), cover=data.get("cover"))
    return TreeNode(
        feature_index=int(data["f"]),
        threshold=float(data["t"]),
        default_left=data["default"] == "left",
        gain=data.get("gain"),
        cover=data.get("cover"),
        left=_node_from_dict(data["l"]),
        right=_node_from_dict(data["r"]),
    )


def ensemble_to_document(ensemble: TreeEnsemble) -> dict:
    return {
        "version": MODEL_VERSION,
        "schema_fingerprint": ensemble.schema_fingerprint,
        "n_features": ensemble.n_features,
        "base_score": ensemble.base_score,
        "learning_rate": ensemble.learning_rate,
        "train_config": ensemble.train_config.to_dict() if ensemble.train_config else None,
        "training_rmse": ensemble.training_rmse,
        "trees": [_node_to_dict(t) for t in ensemble.trees],
    }


def save_model(ensemble: TreeEnsemble, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = json.dumps(ensemble_to_document(ensemble), separators=(",", ":"))
    crc = zlib.crc32(doc.encode("utf-8")) & 0xFFFFFFFF
    footer = json.dumps({"crc32": f"{crc:08x}"})
    path.write_text(doc + "\n" + footer + "\n", encoding="utf-8")


def load_model(path) -> TreeEnsemble:
    path = Path(path)
    try:
        doc_line, footer_line = path.read_text(encoding="utf-8").splitlines()[:2]
    except (OSError, ValueError) as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    try:
        footer = json.loads(footer_line)
        expected = footer["crc32"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ModelFormatError(f"{path}: missing or malformed checksum footer") from exc
    actual = f"{zlib.crc32(doc_line.encode('utf-8')) & 0xFFFFFFFF:08x}"
    if actual != expected:
        raise ModelFormatError(f"{path}: checksum mismatch (file corrupt?)")
    try:
        doc = json.loads(doc_line)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: malformed model document") from exc
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"{path}: unsupported model version {doc.get('version')!r}")
    config = TrainConfig(**doc["train_config"]) if doc.get("train_config") else None
    return TreeEnsemble(
        base_score=float(doc["base_score"]),
        trees=[_node_from_dict(t) for t in doc["trees"]],
        learning_rate=float(doc["learning_rate"]),
        n_features=int(doc["n_features"]),
        schema_fingerprint=doc.get("schema_fingerprint", ""),
        train_config=config,
        training_rmse=[float(x) for x in doc.get("training_rmse", [])],
    )
