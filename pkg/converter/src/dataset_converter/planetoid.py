"""Reader for the Planetoid citation-network artifact family.

A dataset named ``foo`` ships eight files: ``ind.foo.{x,y,tx,ty,allx,ally}``
(pickled feature/label blocks; feature matrices may be scipy sparse),
``ind.foo.graph`` (pickled adjacency dict), and ``ind.foo.test.index``
(plain-text global indices of the test block, one per line, possibly
shuffled and possibly with gaps).

Row layout of the assembled node table: the ``allx`` block occupies global
indices ``0 .. allx_rows-1``; the test block occupies the index span named
by ``test.index``. Row ``k`` of ``tx``/``ty`` lands at global index
``test.index[k]``. Indices inside the test span that ``test.index`` skips
are isolated placeholder rows ("ghost" nodes): they get zero features, are
assigned class 0, and join no split, so they never contribute labels.
"""

from __future__ import annotations

import pickle
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import ConversionError

PLANETOID_PARTS = ("x", "y", "tx", "ty", "allx", "ally", "graph", "test.index")

# validation and test sets follow the standard transductive protocol
VAL_SIZE = 500
TEST_SIZE = 1000


def planetoid_files(name: str) -> list[str]:
    return [f"ind.{name}.{part}" for part in PLANETOID_PARTS]


def _dense(block) -> np.ndarray:
    if sp.issparse(block):
        return np.asarray(block.todense(), dtype=np.float64)
    return np.asarray(block, dtype=np.float64)


def load_planetoid(src_dir, name: str) -> dict:
    src_dir = Path(src_dir)
    parts = {}
    for part in PLANETOID_PARTS:
        path = src_dir / f"ind.{name}.{part}"
        if not path.exists():
            raise ConversionError(f"missing source file: {path.name}")
        if part == "test.index":
            text = path.read_text().split()
            parts[part] = np.array([int(v) for v in text], dtype=np.int64)
        else:
            with open(path, "rb") as fh:
                parts[part] = pickle.load(fh, encoding="latin1")
    return parts


def _check_consistency(parts: dict) -> None:
    x, y = parts["x"], np.asarray(parts["y"])
    tx, ty = parts["tx"], np.asarray(parts["ty"])
    allx, ally = parts["allx"], np.asarray(parts["ally"])
    test_idx = parts["test.index"]
    if x.shape[0] != y.shape[0]:
        raise ConversionError(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
    if tx.shape[0] != ty.shape[0] or tx.shape[0] != test_idx.size:
        raise ConversionError(
            f"test block sizes disagree: tx {tx.shape[0]}, ty {ty.shape[0]}, "
            f"test.index {test_idx.size}"
        )
    widths = {x.shape[1], tx.shape[1], allx.shape[1]}
    if len(widths) != 1:
        raise ConversionError(f"feature blocks disagree on width: {sorted(widths)}")
    classes = {y.shape[1], ty.shape[1], ally.shape[1]}
    if len(classes) != 1:
        raise ConversionError(f"label blocks disagree on class count: {sorted(classes)}")
    if test_idx.size != np.unique(test_idx).size:
        raise ConversionError("test.index contains duplicate indices")
    if int(test_idx.min()) != allx.shape[0]:
        raise ConversionError(
            f"test span must start right after the allx block "
            f"({allx.shape[0]}), got {int(test_idx.min())}"
        )


def assemble_planetoid(parts: dict, val_size: int = VAL_SIZE) -> dict:
    """Raw blocks -> node table, edge list, splits, and count summary.

    ``val_size`` defaults to the published 500-node validation split and is
    overridable only so that small synthetic inputs remain testable.
    """
    _check_consistency(parts)
    allx = _dense(parts["allx"])
    tx = _dense(parts["tx"])
    ally = np.asarray(parts["ally"], dtype=np.float64)
    ty = np.asarray(parts["ty"], dtype=np.float64)
    test_idx = parts["test.index"]

    n_known = allx.shape[0]
    lo, hi = int(test_idx.min()), int(test_idx.max())
    num_nodes = n_known + (hi - lo + 1)
    n_feat = allx.shape[1]
    n_classes = ally.shape[1]

    features = np.zeros((num_nodes, n_feat))
    features[:n_known] = allx
    features[test_idx] = tx
    onehot = np.zeros((num_nodes, n_classes))
    onehot[:n_known] = ally
    onehot[test_idx] = ty
    labels = onehot.argmax(axis=1).astype(np.int64)

    ghost = np.setdiff1d(np.arange(lo, hi + 1), test_idx)

    adjacency = parts["graph"]
    pairs = set()
    for node, neighbors in adjacency.items():
        if not 0 <= node < num_nodes:
            raise ConversionError(f"adjacency names node {node} outside 0..{num_nodes - 1}")
        for other in neighbors:
            if not 0 <= other < num_nodes:
                raise ConversionError(
                    f"adjacency names node {other} outside 0..{num_nodes - 1}"
                )
            if node != other:
                pairs.add((min(node, other), max(node, other)))
    edges = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)

    n_labeled = np.asarray(parts["y"]).shape[0]
    if n_labeled + val_size > n_known:
        raise ConversionError(
            f"not enough known rows for a {val_size}-node validation split"
        )
    val_idx = np.arange(n_labeled, n_labeled + val_size)
    test_sorted = np.sort(test_idx)
    in_split = np.zeros(num_nodes, dtype=bool)
    in_split[val_idx] = True
    in_split[test_sorted] = True
    in_split[ghost] = True  # ghosts join no split and carry no visible label
    train_idx = np.flatnonzero(~in_split)

    return {
        "num_nodes": num_nodes,
        "edges": edges,
        "features": features,
        "labels": labels,
        "num_features": n_feat,
        "num_classes": n_classes,
        "train_idx": train_idx,
        "val_idx": val_idx,
        "test_idx": test_sorted,
        "ghost_idx": ghost,
    }
