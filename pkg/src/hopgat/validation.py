"""Input validation helpers shared by the estimator and the CLI."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from hopgat.graphs import Graph

SPLITS = ("train", "val", "test")
MODES = ("auto", "transductive", "inductive")


def as_graph_list(X) -> list[Graph]:
    """Accept a Graph or a sequence of Graphs; reject anything else."""
    if isinstance(X, Graph):
        return [X]
    if isinstance(X, Sequence) and X and all(isinstance(g, Graph) for g in X):
        return list(X)
    raise TypeError(
        "expected a Graph or a non-empty sequence of Graphs, "
        f"got {type(X).__name__}"
    )


def resolve_mode(graphs: list[Graph], mode: str) -> str:
    """Pick and validate transductive vs inductive for these graphs.

    Transductive: exactly one single-label graph, all splits inside it.
    Inductive: one or more multi-label graphs (splits may live on separate
    graphs). ``auto`` infers from the label mode.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    label_modes = {g.label_mode for g in graphs}
    if len(label_modes) != 1:
        raise ValueError("all graphs must share one label mode")
    label_mode = label_modes.pop()
    if mode == "auto":
        mode = "transductive" if label_mode == "single" else "inductive"
    if mode == "transductive":
        if len(graphs) != 1:
            raise ValueError("transductive mode expects exactly one graph")
        if label_mode != "single":
            raise ValueError("transductive mode expects single-label data")
    else:
        if label_mode != "multi":
            raise ValueError("inductive mode expects multi-label data")
    return mode


def infer_num_classes(graphs: list[Graph]) -> int:
    g0 = graphs[0]
    if g0.label_mode == "single":
        return max(int(g.labels.max()) for g in graphs) + 1
    widths = {g.labels.shape[1] for g in graphs}
    if len(widths) != 1:
        raise ValueError(f"graphs disagree on label width: {sorted(widths)}")
    return widths.pop()


def infer_num_features(graphs: list[Graph]) -> int:
    widths = {g.num_features for g in graphs}
    if len(widths) != 1:
        raise ValueError(f"graphs disagree on feature width: {sorted(widths)}")
    return widths.pop()


def check_split(split: str) -> str:
    if split not in SPLITS:
        raise ValueError(f"split must be one of {SPLITS}, got {split!r}")
    return split


def split_mask(graph: Graph, split: str) -> np.ndarray:
    return {"train": graph.train_mask, "val": graph.val_mask, "test": graph.test_mask}[split]
