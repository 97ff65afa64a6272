"""Writer for the neutral JSON graph container (format_version 1).

The schema is the exchange contract with the training library: each graph
carries num_nodes, a directed flag (always false; edges are undirected and
stored once per pair), an edge list, dense row-major float features, labels
(single class ids or multi-label 0/1 rows), and train/val/test index lists.
Floats rely on JSON's shortest round-trip repr, so the byte stream is a
deterministic function of the data: re-running a conversion reproduces the
file exactly.
"""

from __future__ import annotations

import json

import numpy as np

CONTAINER_FORMAT_VERSION = 1


def graph_record(
    num_nodes: int,
    edges: np.ndarray,
    features: np.ndarray,
    labels: np.ndarray,
    label_mode: str,
    train_idx: np.ndarray,
    val_idx: np.ndarray,
    test_idx: np.ndarray,
) -> dict:
    if label_mode not in ("single", "multi"):
        raise ValueError(f"label_mode must be 'single' or 'multi', got {label_mode!r}")
    if features.shape[0] != num_nodes:
        raise ValueError(
            f"features have {features.shape[0]} rows for {num_nodes} nodes"
        )
    return {
        "num_nodes": int(num_nodes),
        "directed": False,
        "edges": np.asarray(edges, dtype=np.int64).reshape(-1, 2).tolist(),
        "features": {
            "rows": int(features.shape[0]),
            "cols": int(features.shape[1]),
            "values": np.asarray(features, dtype=np.float64).reshape(-1).tolist(),
        },
        "labels": {
            "mode": label_mode,
            "values": np.asarray(labels).tolist(),
        },
        "masks": {
            "train": sorted(int(i) for i in train_idx),
            "val": sorted(int(i) for i in val_idx),
            "test": sorted(int(i) for i in test_idx),
        },
    }


def write_container(records: list[dict], path) -> None:
    doc = {"format_version": CONTAINER_FORMAT_VERSION, "graphs": records}
    with open(path, "w") as fh:
        json.dump(doc, fh)
