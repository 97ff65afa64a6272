"""Synthetic source artifacts in the upstream on-disk layouts.

Each builder writes a directory that is byte-level faithful to the real
distribution format (pickled scipy-sparse blocks + plain-text test index for
the citation networks; node-link JSON + .npy features + label/id maps for the
protein multigraph) and returns the ground truth it used, so tests can check
reassembly against known values instead of against the code under test.

The session-scoped ``source_roots``/``converted`` fixtures replicate the
published dimensions of all four datasets; unit tests build smaller shapes.
"""

from __future__ import annotations

import json
import pickle
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

from dataset_converter import convert, default_manifest_path

# published sizes of the four supported datasets
PLANETOID_SHAPES = {
    "cora": dict(
        num_nodes=2708, num_features=1433, num_classes=7, n_labeled=140, n_ghosts=0
    ),
    "citeseer": dict(
        num_nodes=3327, num_features=3703, num_classes=6, n_labeled=120, n_ghosts=15
    ),
    "pubmed": dict(
        num_nodes=19717, num_features=500, num_classes=3, n_labeled=60, n_ghosts=0
    ),
}
# 20 train + 2 validation + 2 test components, 56944 nodes total
PPI_COMPONENT_SIZES = ([2245] * 14 + [2246] * 6, [3257, 3257], [2762, 2762])
PPI_NUM_FEATURES = 50
PPI_NUM_CLASSES = 121


def feature_cells(g: int, n_feat: int) -> list[tuple[int, float]]:
    """Deterministic nonzero feature cells for global node id ``g``.

    Every node gets one or two nonzeros whose positions and values are a
    function of the node id alone, so any test can recompute the exact row a
    node must end up with, wherever the source format scattered it.
    """
    c1 = g % n_feat
    c2 = (31 * g + 7) % n_feat
    cells = [(c1, 1.0 + (g % 5) * 0.5)]
    if c2 != c1:
        cells.append((c2, 0.25 + (g % 3) * 0.125))
    return cells


def expected_feature_matrix(global_ids, n_feat: int) -> np.ndarray:
    out = np.zeros((len(global_ids), n_feat))
    for row, g in enumerate(global_ids):
        for col, val in feature_cells(int(g), n_feat):
            out[row, col] = val
    return out


def _csr_block(global_ids, n_feat: int) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for row, g in enumerate(global_ids):
        for col, val in feature_cells(int(g), n_feat):
            rows.append(row)
            cols.append(col)
            vals.append(val)
    return sp.csr_matrix((vals, (rows, cols)), shape=(len(global_ids), n_feat))


def _onehot(global_ids, n_classes: int) -> np.ndarray:
    ids = np.asarray(global_ids, dtype=np.int64)
    out = np.zeros((ids.size, n_classes), dtype=np.int64)
    out[np.arange(ids.size), ids % n_classes] = 1
    return out


def make_planetoid(
    dst,
    name: str,
    *,
    num_nodes: int,
    num_features: int,
    num_classes: int,
    n_labeled: int,
    n_ghosts: int = 0,
    test_size: int = 1000,
    seed: int = 0,
    n_chords: int | None = None,
) -> dict:
    """Write the eight ``ind.<name>.*`` files; return the ground truth.

    Node ``g`` carries features ``feature_cells(g)`` and class ``g % C``.
    The test block's file order is shuffled, and ``n_ghosts`` indices inside
    the test span are omitted from ``test.index`` (isolated placeholder rows,
    as in the real citeseer distribution).
    """
    dst = Path(dst)
    dst.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    span = test_size + n_ghosts
    allx_rows = num_nodes - span
    span_ids = np.arange(allx_rows, allx_rows + span)
    if n_ghosts:
        # the span's first index must stay a real test node: the reader
        # anchors the span on min(test.index)
        ghost_ids = np.sort(rng.choice(span_ids[1:], size=n_ghosts, replace=False))
    else:
        ghost_ids = np.array([], dtype=np.int64)
    test_ids = np.setdiff1d(span_ids, ghost_ids)
    test_order = rng.permutation(test_ids)

    known_ids = np.arange(allx_rows)
    blocks = {
        "x": _csr_block(np.arange(n_labeled), num_features),
        "y": _onehot(np.arange(n_labeled), num_classes),
        "allx": _csr_block(known_ids, num_features),
        "ally": _onehot(known_ids, num_classes),
        "tx": _csr_block(test_order, num_features),
        "ty": _onehot(test_order, num_classes),
    }

    real_ids = np.setdiff1d(np.arange(num_nodes), ghost_ids)
    adjacency: dict[int, list[int]] = {int(i): [] for i in range(num_nodes)}
    pairs: set[tuple[int, int]] = set()

    def connect(a: int, b: int) -> None:
        a, b = int(a), int(b)
        if a == b or (min(a, b), max(a, b)) in pairs:
            return
        pairs.add((min(a, b), max(a, b)))
        adjacency[a].append(b)
        adjacency[b].append(a)

    for k in range(len(real_ids)):  # a ring over the real nodes, plus chords
        connect(real_ids[k], real_ids[(k + 1) % len(real_ids)])
    if n_chords is None:
        n_chords = min(num_nodes, 500)
    for a, b in rng.integers(0, len(real_ids), size=(n_chords, 2)):
        connect(real_ids[a], real_ids[b])

    blocks["graph"] = adjacency
    for part, obj in blocks.items():
        with open(dst / f"ind.{name}.{part}", "wb") as fh:
            pickle.dump(obj, fh)
    (dst / f"ind.{name}.test.index").write_text(
        "\n".join(str(int(i)) for i in test_order) + "\n"
    )

    return {
        "num_nodes": num_nodes,
        "num_features": num_features,
        "num_classes": num_classes,
        "n_labeled": n_labeled,
        "allx_rows": allx_rows,
        "ghost_ids": ghost_ids,
        "test_ids": np.sort(test_ids),
        "test_order": test_order,
        "edge_pairs": pairs,
    }


def make_ppi(
    dst,
    *,
    component_sizes=None,
    num_features: int = PPI_NUM_FEATURES,
    num_classes: int = PPI_NUM_CLASSES,
    seed: int = 0,
    chords_per_component: int = 5,
    permute_id_map: bool = False,
) -> dict:
    """Write the four ``ppi-*`` files; return the ground truth.

    Components are laid out with consecutive node ids (train components
    first, then validation, then test). Each component is a path plus a few
    chords, so it stays connected. With ``permute_id_map`` the feature-row
    indirection is a random permutation instead of the identity.
    """
    dst = Path(dst)
    dst.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    train, val, test = (
        component_sizes if component_sizes is not None else PPI_COMPONENT_SIZES
    )
    roles = (
        [("train", s) for s in train]
        + [("val", s) for s in val]
        + [("test", s) for s in test]
    )

    nodes, links, components = [], [], []
    next_id = 0
    for role, size in roles:
        ids = list(range(next_id, next_id + size))
        next_id += size
        components.append((role, ids))
        for i in ids:
            nodes.append({"id": i, "val": role == "val", "test": role == "test"})
        for k in range(size - 1):
            links.append({"source": ids[k], "target": ids[k + 1]})
        for a, b in rng.integers(0, size, size=(chords_per_component, 2)):
            if a != b:
                links.append({"source": ids[int(a)], "target": ids[int(b)]})

    num_nodes = next_id
    perm = rng.permutation(num_nodes) if permute_id_map else np.arange(num_nodes)
    logical = rng.standard_normal((num_nodes, num_features))
    feats = np.empty_like(logical)
    feats[perm] = logical  # feature row perm[i] holds node i's features
    labels = rng.integers(0, 2, size=(num_nodes, num_classes))

    with open(dst / "ppi-G.json", "w") as fh:
        json.dump({"directed": False, "nodes": nodes, "links": links}, fh)
    np.save(dst / "ppi-feats.npy", feats)
    with open(dst / "ppi-class_map.json", "w") as fh:
        json.dump({str(i): labels[i].tolist() for i in range(num_nodes)}, fh)
    with open(dst / "ppi-id_map.json", "w") as fh:
        json.dump({str(i): int(perm[i]) for i in range(num_nodes)}, fh)

    return {
        "num_nodes": num_nodes,
        "num_features": num_features,
        "num_classes": num_classes,
        "components": components,
        "features": logical,  # row i = features of node id i
        "labels": labels,
    }


@pytest.fixture(scope="session")
def source_roots(tmp_path_factory):
    """One directory per dataset, at the published dimensions."""
    root = tmp_path_factory.mktemp("sources")
    truths = {}
    for seed, (name, shape) in enumerate(PLANETOID_SHAPES.items(), start=11):
        truths[name] = make_planetoid(root / name, name, **shape, seed=seed)
    truths["ppi"] = make_ppi(root / "ppi", seed=14)
    return root, truths


@pytest.fixture(scope="session")
def converted(source_roots, tmp_path_factory):
    """Each dataset converted once: name -> paths, manifest, ground truth."""
    root, truths = source_roots
    out_dir = tmp_path_factory.mktemp("containers")
    results = {}
    for name in ("cora", "citeseer", "pubmed", "ppi"):
        out = out_dir / f"{name}.json"
        manifest = convert(root / name, name, out)
        results[name] = {
            "manifest": manifest,
            "container": out,
            "manifest_path": default_manifest_path(out),
            "truth": truths[name],
            "src": root / name,
        }
    return results
