"""Reader for the preprocessed protein-protein interaction multigraph.

The artifact stores all graphs in one node-link document: ``ppi-G.json``
(nodes carry ``id``, ``val``, ``test`` flags; links carry ``source`` and
``target`` ids), ``ppi-feats.npy`` (one feature row per node),
``ppi-class_map.json`` (node id -> 121-way 0/1 label vector), and
``ppi-id_map.json`` (node id -> feature row). The individual graphs are the
connected components; each component is entirely train, validation, or
test, and becomes one graph in the emitted container.
"""

from __future__ import annotations

import json
from collections import deque
from pathlib import Path

import numpy as np

from .errors import ConversionError

PPI_FILES = ("ppi-G.json", "ppi-feats.npy", "ppi-class_map.json", "ppi-id_map.json")


def load_ppi(src_dir) -> dict:
    src_dir = Path(src_dir)
    parts = {}
    for name in PPI_FILES:
        path = src_dir / name
        if not path.exists():
            raise ConversionError(f"missing source file: {name}")
        if name.endswith(".npy"):
            parts[name] = np.load(path)
        else:
            with open(path) as fh:
                parts[name] = json.load(fh)
    return parts


def _components(node_ids: list[int], adjacency: dict[int, set]) -> list[list[int]]:
    seen = set()
    components = []
    for start in sorted(node_ids):
        if start in seen:
            continue
        queue = deque([start])
        seen.add(start)
        group = []
        while queue:
            node = queue.popleft()
            group.append(node)
            for other in adjacency.get(node, ()):
                if other not in seen:
                    seen.add(other)
                    queue.append(other)
        components.append(sorted(group))
    return components


def assemble_ppi(parts: dict) -> list[dict]:
    """Node-link document -> one assembled record per connected component."""
    doc = parts["ppi-G.json"]
    feats = np.asarray(parts["ppi-feats.npy"], dtype=np.float64)
    class_map = parts["ppi-class_map.json"]
    id_map = parts["ppi-id_map.json"]

    nodes = doc["nodes"]
    is_val = {n["id"]: bool(n["val"]) for n in nodes}
    is_test = {n["id"]: bool(n["test"]) for n in nodes}
    node_ids = [n["id"] for n in nodes]
    if len(node_ids) != len(set(node_ids)):
        raise ConversionError("node-link document repeats a node id")

    adjacency: dict[int, set] = {i: set() for i in node_ids}
    for link in doc["links"]:
        a, b = link["source"], link["target"]
        if a not in adjacency or b not in adjacency:
            raise ConversionError(f"link {a}-{b} names an unknown node id")
        if a != b:
            adjacency[a].add(b)
            adjacency[b].add(a)

    label_width = {len(v) for v in class_map.values()}
    if len(label_width) != 1:
        raise ConversionError(f"label vectors disagree on width: {sorted(label_width)}")
    n_classes = label_width.pop()

    records = []
    for group in _components(node_ids, adjacency):
        roles = {("val" if is_val[i] else "test" if is_test[i] else "train") for i in group}
        if len(roles) != 1:
            raise ConversionError(
                f"component containing node {group[0]} mixes splits: {sorted(roles)}"
            )
        role = roles.pop()
        local = {node: k for k, node in enumerate(group)}
        try:
            rows = [id_map[str(i)] for i in group]
            labels = np.array([class_map[str(i)] for i in group], dtype=np.int64)
        except KeyError as missing:
            raise ConversionError(f"node {missing} missing from id or class map") from None
        edges = sorted(
            (local[a], local[b])
            for a in group
            for b in adjacency[a]
            if local[a] < local[b]
        )
        n = len(group)
        all_idx = np.arange(n)
        none = np.array([], dtype=np.int64)
        records.append(
            {
                "num_nodes": n,
                "edges": np.array(edges, dtype=np.int64).reshape(-1, 2),
                "features": feats[rows],
                "labels": labels,
                "num_features": feats.shape[1],
                "num_classes": n_classes,
                "train_idx": all_idx if role == "train" else none,
                "val_idx": all_idx if role == "val" else none,
                "test_idx": all_idx if role == "test" else none,
            }
        )
    return records
