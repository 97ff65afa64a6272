"""Graph containers, hop-distance matrices, label subsampling, and the
neutral JSON interchange format.

Graphs are undirected: edges are stored once per pair and symmetrized when
building adjacency. Hop distances saturate at a sentinel equal to ``max_hv``,
so a stored value of ``max_hv`` means "at least max_hv hops or unreachable".
"""

from __future__ import annotations

import dataclasses
import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

CONTAINER_FORMAT_VERSION = 1


@dataclass
class Graph:
    """One graph with features, labels, and split masks.

    ``labels`` is an int vector (single-label) or a 0/1 matrix of shape
    (num_nodes, num_classes) (multi-label). ``label_visible`` marks the
    training nodes whose labels the classification loss may read; it is
    always a subset of ``train_mask``. Treat instances as read-only after
    construction.
    """

    num_nodes: int
    edges: np.ndarray
    features: np.ndarray
    labels: np.ndarray
    label_mode: str
    train_mask: np.ndarray
    val_mask: np.ndarray
    test_mask: np.ndarray
    label_visible: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.features = np.asarray(self.features, dtype=np.float64)
        self.train_mask = np.asarray(self.train_mask, dtype=bool)
        self.val_mask = np.asarray(self.val_mask, dtype=bool)
        self.test_mask = np.asarray(self.test_mask, dtype=bool)
        if self.label_mode not in ("single", "multi"):
            raise ValueError(f"label_mode must be 'single' or 'multi', got {self.label_mode!r}")
        if self.label_mode == "single":
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.ndim != 1:
                raise ValueError("single-label graphs need a 1-D label vector")
        else:
            self.labels = np.asarray(self.labels, dtype=np.float64)
            if self.labels.ndim != 2:
                raise ValueError("multi-label graphs need a (num_nodes, num_classes) 0/1 matrix")
            if not np.isin(self.labels, (0.0, 1.0)).all():
                raise ValueError("multi-label values must be 0 or 1")
        if self.label_visible is None:
            self.label_visible = self.train_mask.copy()
        self.label_visible = np.asarray(self.label_visible, dtype=bool)

        n = self.num_nodes
        if self.features.ndim != 2 or self.features.shape[0] != n:
            raise ValueError(f"features must be (num_nodes, F), got {self.features.shape}")
        if self.labels.shape[0] != n:
            raise ValueError("labels length must equal num_nodes")
        for name in ("train_mask", "val_mask", "test_mask", "label_visible"):
            m = getattr(self, name)
            if m.shape != (n,):
                raise ValueError(f"{name} must have shape ({n},)")
        if self.edges.size:
            if self.edges.min() < 0 or self.edges.max() >= n:
                raise ValueError("edge endpoint out of range")
        if np.any(self.train_mask & self.val_mask) or np.any(self.train_mask & self.test_mask) or np.any(self.val_mask & self.test_mask):
            raise ValueError("train/val/test masks must be disjoint")
        if np.any(self.label_visible & ~self.train_mask):
            raise ValueError("label_visible must be a subset of train_mask")

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    @property
    def num_classes(self) -> int:
        if self.label_mode == "single":
            return int(self.labels.max()) + 1 if self.labels.size else 0
        return self.labels.shape[1]

    def adjacency_lists(self) -> list[np.ndarray]:
        """Symmetrized neighbor lists (no self loops added)."""
        neighbors: list[list[int]] = [[] for _ in range(self.num_nodes)]
        for a, b in self.edges:
            if a != b:
                neighbors[a].append(int(b))
                neighbors[b].append(int(a))
        return [np.array(sorted(set(ns)), dtype=np.int64) for ns in neighbors]


@dataclass(frozen=True)
class HopMatrix:
    """All-pairs hop distances saturated at ``max_hv``.

    values[i, j] is the BFS distance when < max_hv, else exactly max_hv
    (covering both distant and unreachable pairs). values[i, i] == 0.
    """

    values: np.ndarray = field(repr=False)
    max_hv: int

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def num_nodes(self) -> int:
        return self.values.shape[0]

    def neighborhood_mask(self, cutoff: int) -> np.ndarray:
        """Boolean (N, N) mask of pairs with hop value <= cutoff."""
        return self.values <= cutoff


def compute_hop_matrix(graph: Graph, max_hv: int) -> HopMatrix:
    """Breadth-first hop distances from every node, saturated at ``max_hv``.

    BFS stops expanding at depth max_hv - 1 because anything further is
    saturated anyway, so small cutoffs stay cheap on large graphs.
    """
    if max_hv < 2:
        raise ValueError(f"max_hv must be >= 2, got {max_hv}")
    n = graph.num_nodes
    neighbors = graph.adjacency_lists()
    values = np.full((n, n), max_hv, dtype=np.int64)
    for src in range(n):
        row = values[src]
        row[src] = 0
        frontier = deque([src])
        depth = 0
        while frontier and depth < max_hv - 1:
            depth += 1
            for _ in range(len(frontier)):
                node = frontier.popleft()
                for nb in neighbors[node]:
                    if row[nb] > depth:
                        row[nb] = depth
                        frontier.append(nb)
    return HopMatrix(values=values, max_hv=max_hv)


def subsample_labels(
    graphs: Graph | list[Graph], rate: float, seed: int
) -> Graph | list[Graph]:
    """Keep a ceiling(rate * pool) subset of training labels visible.

    The pool is all training nodes across the given graphs; sampling is
    without replacement and deterministic under ``seed``. Labels outside the
    sample are masked from the classification loss but the nodes stay in the
    graph (message passing still sees their features).
    """
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"label rate must be in (0, 1], got {rate}")
    single = isinstance(graphs, Graph)
    graph_list = [graphs] if single else list(graphs)
    pools = [np.flatnonzero(g.train_mask) for g in graph_list]
    offsets = np.cumsum([0] + [g.num_nodes for g in graph_list])
    pool = np.concatenate(
        [ids + off for ids, off in zip(pools, offsets[:-1])]
    ) if pools else np.array([], dtype=np.int64)
    if pool.size == 0:
        raise ValueError("no training nodes to subsample")
    # ceil reproduces the published per-rate counts; the epsilon guards
    # against float artifacts on products that are exact integers
    count = math.ceil(rate * pool.size - 1e-9)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(pool, size=count, replace=False)
    chosen_set = np.zeros(offsets[-1], dtype=bool)
    chosen_set[chosen] = True
    out = []
    for g, off in zip(graph_list, offsets[:-1]):
        visible = chosen_set[off : off + g.num_nodes]
        out.append(dataclasses.replace(g, label_visible=visible))
    return out[0] if single else out


def label_consistency_by_hop(graph: Graph, hops: HopMatrix) -> list[tuple[int, float]]:
    """Fraction of same-label pairs per hop bucket (single-label graphs).

    Buckets are hop values 1 .. max_hv - 1 plus the saturated bucket
    (value max_hv, meaning >= max_hv). Buckets with no pairs are skipped.
    """
    if graph.label_mode != "single":
        raise ValueError("label consistency is defined for single-label graphs only")
    iu = np.triu_indices(graph.num_nodes, k=1)
    hv = hops.values[iu]
    same = graph.labels[iu[0]] == graph.labels[iu[1]]
    out = []
    for bucket in range(1, hops.max_hv + 1):
        in_bucket = hv == bucket
        if in_bucket.any():
            out.append((bucket, float(same[in_bucket].mean())))
    return out


def generate_sbm(
    num_blocks: int,
    nodes_per_block: int,
    p_in: float,
    p_out: float,
    feature_noise: float,
    seed: int,
    split: tuple[float, float, float] = (0.6, 0.2, 0.2),
) -> Graph:
    """Stochastic block model fixture with noisy one-hot block features.

    Nodes in the same block connect with probability p_in, across blocks
    with p_out (p_in > p_out required: communities must be assortative for
    the fixture to be meaningful). Features are the one-hot block vector
    plus iid N(0, feature_noise^2); labels are the block ids. The split is
    stratified per block and deterministic under ``seed``.
    """
    if num_blocks < 2 or nodes_per_block < 2:
        raise ValueError("need at least 2 blocks of at least 2 nodes")
    if not (0.0 <= p_out < p_in <= 1.0):
        raise ValueError(f"need 0 <= p_out < p_in <= 1, got p_in={p_in}, p_out={p_out}")
    if feature_noise < 0:
        raise ValueError("feature_noise must be >= 0")
    if len(split) != 3 or abs(sum(split) - 1.0) > 1e-9 or min(split) <= 0:
        raise ValueError("split must be three positive fractions summing to 1")
    rng = np.random.default_rng(seed)
    n = num_blocks * nodes_per_block
    blocks = np.repeat(np.arange(num_blocks), nodes_per_block)

    iu = np.triu_indices(n, k=1)
    same_block = blocks[iu[0]] == blocks[iu[1]]
    prob = np.where(same_block, p_in, p_out)
    keep = rng.random(prob.size) < prob
    edges = np.stack([iu[0][keep], iu[1][keep]], axis=1)

    features = np.eye(num_blocks)[blocks] + feature_noise * rng.standard_normal((n, num_blocks))
    train = np.zeros(n, dtype=bool)
    val = np.zeros(n, dtype=bool)
    test = np.zeros(n, dtype=bool)
    for b in range(num_blocks):
        ids = rng.permutation(np.flatnonzero(blocks == b))
        n_train = int(round(split[0] * ids.size))
        n_val = int(round(split[1] * ids.size))
        train[ids[:n_train]] = True
        val[ids[n_train : n_train + n_val]] = True
        test[ids[n_train + n_val :]] = True
    return Graph(
        num_nodes=n,
        edges=edges,
        features=features,
        labels=blocks,
        label_mode="single",
        train_mask=train,
        val_mask=val,
        test_mask=test,
    )


def _graph_to_record(g: Graph) -> dict:
    return {
        "num_nodes": g.num_nodes,
        "directed": False,
        "edges": g.edges.tolist(),
        "features": {
            "rows": g.features.shape[0],
            "cols": g.features.shape[1],
            "values": g.features.reshape(-1).tolist(),
        },
        "labels": {
            "mode": g.label_mode,
            "values": g.labels.tolist(),
        },
        "masks": {
            "train": np.flatnonzero(g.train_mask).tolist(),
            "val": np.flatnonzero(g.val_mask).tolist(),
            "test": np.flatnonzero(g.test_mask).tolist(),
        },
    }


def _graph_from_record(rec: dict) -> Graph:
    n = int(rec["num_nodes"])
    feats = rec["features"]
    features = np.array(feats["values"], dtype=np.float64).reshape(
        int(feats["rows"]), int(feats["cols"])
    )
    masks = {}
    for name in ("train", "val", "test"):
        m = np.zeros(n, dtype=bool)
        m[np.array(rec["masks"][name], dtype=np.int64)] = True
        masks[name] = m
    return Graph(
        num_nodes=n,
        edges=np.array(rec["edges"], dtype=np.int64).reshape(-1, 2),
        features=features,
        labels=np.array(rec["labels"]["values"]),
        label_mode=rec["labels"]["mode"],
        train_mask=masks["train"],
        val_mask=masks["val"],
        test_mask=masks["test"],
    )


def save_container(graphs: Graph | list[Graph], path) -> None:
    """Write graphs to the neutral JSON container format.

    Floats are serialized with Python's shortest round-trip repr, so a
    save/load cycle reproduces every float64 bit-exactly.
    """
    graph_list = [graphs] if isinstance(graphs, Graph) else list(graphs)
    doc = {
        "format_version": CONTAINER_FORMAT_VERSION,
        "graphs": [_graph_to_record(g) for g in graph_list],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_container(path) -> list[Graph]:
    """Read graphs from the neutral JSON container format."""
    with open(path) as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != CONTAINER_FORMAT_VERSION:
        raise ValueError(
            f"unsupported container format_version {version!r}; "
            f"this build reads version {CONTAINER_FORMAT_VERSION}"
        )
    return [_graph_from_record(rec) for rec in doc["graphs"]]
