"""Training-loop support: classification losses, evaluation metrics,
dual-signal early stopping, schedule traces, attention-logit snapshots, and
hop-structure analysis helpers."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass

import numpy as np

from hopgat.autodiff import Tensor, exp, log, reduce_sum, softplus, take
from hopgat.graphs import Graph, HopMatrix, label_consistency_by_hop
from hopgat.layers import AttentionField


def classification_loss(scores: Tensor, labels: np.ndarray, visible: np.ndarray, mode: str) -> Tensor:
    """Mean cross-entropy over the nodes whose labels are visible.

    Single-label: softmax cross-entropy, averaged over visible nodes.
    Multi-label: sigmoid binary cross-entropy, averaged over visible nodes
    and classes. Raises when no labels are visible (nothing to learn from).
    """
    idx = np.flatnonzero(np.asarray(visible, dtype=bool))
    if idx.size == 0:
        raise ValueError("classification loss needs at least one visible label")
    picked = take(scores, idx)
    if mode == "single":
        n_classes = scores.shape[1]
        onehot = np.zeros((idx.size, n_classes))
        onehot[np.arange(idx.size), np.asarray(labels)[idx]] = 1.0
        shift = picked.data.max(axis=1, keepdims=True)  # constant under the gradient
        z = picked - Tensor(shift)
        log_norm = log(reduce_sum(exp(z), axis=1, keepdims=True))
        log_probs = z - log_norm
        return -(log_probs * Tensor(onehot)).sum() * (1.0 / idx.size)
    if mode == "multi":
        y = Tensor(np.asarray(labels, dtype=np.float64)[idx])
        per_entry = softplus(picked) - picked * y
        return per_entry.sum() * (1.0 / picked.size)
    raise ValueError(f"mode must be 'single' or 'multi', got {mode!r}")


def accuracy(scores: np.ndarray, labels: np.ndarray, mask: np.ndarray) -> float:
    """Argmax accuracy over the masked nodes (single-label)."""
    idx = np.flatnonzero(np.asarray(mask, dtype=bool))
    if idx.size == 0:
        raise ValueError("accuracy over an empty node set is undefined")
    pred = scores[idx].argmax(axis=1)
    return float((pred == np.asarray(labels)[idx]).mean())


def micro_f1(scores: np.ndarray, labels: np.ndarray, mask: np.ndarray, threshold: float = 0.5) -> float:
    """Micro-averaged F1 for multi-label scores (sigmoid then threshold).

    If there are no positives at all (no predictions and no true labels),
    the score is defined as 1.0 and a warning is emitted: the prediction is
    vacuously perfect, and silently returning 0 would punish it.
    """
    idx = np.flatnonzero(np.asarray(mask, dtype=bool))
    if idx.size == 0:
        raise ValueError("micro-F1 over an empty node set is undefined")
    z = scores[idx]
    prob = np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))
    pred = prob >= threshold
    truth = np.asarray(labels)[idx] > 0.5
    tp = float(np.count_nonzero(pred & truth))
    fp = float(np.count_nonzero(pred & ~truth))
    fn = float(np.count_nonzero(~pred & truth))
    denom = 2 * tp + fp + fn
    if denom == 0:
        warnings.warn("micro-F1: no predicted or true positives; returning 1.0")
        return 1.0
    return 2 * tp / denom


class EarlyStopping:
    """Stops when neither validation loss nor validation metric has improved
    (strictly) for ``patience`` consecutive epochs. Separately flags the
    best checkpoint: highest metric, ties broken by lower loss."""

    def __init__(self, patience: int):
        if patience < 1:
            raise ValueError(f"patience must be >= 1, got {patience}")
        self.patience = patience
        self.best_loss = np.inf
        self.best_metric = -np.inf
        self.stale = 0
        self._ckpt_metric = -np.inf
        self._ckpt_loss = np.inf

    def update(self, loss: float, metric: float) -> tuple[bool, bool]:
        """Returns (should_stop, is_new_best_checkpoint)."""
        improved = loss < self.best_loss or metric > self.best_metric
        self.best_loss = min(self.best_loss, loss)
        self.best_metric = max(self.best_metric, metric)
        self.stale = 0 if improved else self.stale + 1

        is_best = metric > self._ckpt_metric or (
            metric == self._ckpt_metric and loss < self._ckpt_loss
        )
        if is_best:
            self._ckpt_metric = metric
            self._ckpt_loss = loss
        return self.stale >= self.patience, is_best


@dataclass(frozen=True)
class TraceRow:
    epoch: int
    temperature: float
    gamma: float
    classification_loss: float
    attention_loss: float | None


TRACE_COLUMNS = ("epoch", "temperature", "gamma", "classification_loss", "attention_loss")


def write_trace(path, history: list[TraceRow]) -> None:
    """Per-epoch schedule trace as CSV with a fixed header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for row in history:
            writer.writerow(
                [
                    row.epoch,
                    repr(row.temperature),
                    repr(row.gamma),
                    repr(row.classification_loss),
                    "" if row.attention_loss is None else repr(row.attention_loss),
                ]
            )


def read_trace(path) -> list[TraceRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header {header}")
        rows = []
        for rec in reader:
            rows.append(
                TraceRow(
                    epoch=int(rec[0]),
                    temperature=float(rec[1]),
                    gamma=float(rec[2]),
                    classification_loss=float(rec[3]),
                    attention_loss=None if rec[4] == "" else float(rec[4]),
                )
            )
        return rows


def attention_bucket_stats(fields: list[AttentionField], hops: HopMatrix, bins: int = 20) -> list[dict]:
    """Raw-logit summary per field, grouped by hop bucket.

    Buckets are the exact hop values 0 .. max_hv - 1 plus the saturated
    bucket (stored value max_hv, meaning >= max_hv). Histogram edges are
    shared across buckets within one field so the counts are comparable.
    """
    out = []
    hv = hops.values
    for f in fields:
        logits = f.logits.data
        lo, hi = float(logits.min()), float(logits.max())
        if lo == hi:
            hi = lo + 1.0
        edges = np.linspace(lo, hi, bins + 1)
        buckets = []
        for v in range(hops.max_hv + 1):
            sel = logits[hv == v]
            if sel.size == 0:
                continue
            counts, _ = np.histogram(sel, bins=edges)
            buckets.append(
                {
                    "hop": v,
                    "saturated": v == hops.max_hv,
                    "count": int(sel.size),
                    "mean": float(sel.mean()),
                    "hist_counts": counts.tolist(),
                }
            )
        out.append(
            {
                "layer": f.layer,
                "head": f.head,
                "hist_edges": edges.tolist(),
                "buckets": buckets,
            }
        )
    return out


def write_snapshots(path, snapshots: list[dict]) -> None:
    with open(path, "w") as fh:
        json.dump({"format_version": 1, "snapshots": snapshots}, fh)


def load_snapshots(path) -> list[dict]:
    with open(path) as fh:
        doc = json.load(fh)
    return doc["snapshots"]


def export_attention_hist(snapshots: list[dict], layer: int, head: int, out_dir) -> list[dict]:
    """Write the per-epoch logit-by-hop-bucket series for one field.

    Produces ``attention_hist_L{layer}_H{head}.csv`` (epoch, bucket, count,
    mean rows) and a matching PNG (bucket means over epochs, plus the final
    epoch's histogram). Raises if the requested field was never recorded,
    which happens when training ran without snapshotting enabled.
    """
    from pathlib import Path

    series = []
    for snap in snapshots:
        for fld in snap["fields"]:
            if fld["layer"] == layer and fld["head"] == head:
                series.append({"epoch": snap["epoch"], **fld})
    if not series:
        raise RuntimeError(
            f"no recorded snapshots for layer {layer} head {head}; "
            "train with snapshotting enabled first"
        )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"attention_hist_L{layer}_H{head}"
    csv_path = out_dir / f"{stem}.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "hop_bucket", "saturated", "count", "mean"])
        for rec in series:
            for b in rec["buckets"]:
                writer.writerow([rec["epoch"], b["hop"], int(b["saturated"]), b["count"], repr(b["mean"])])

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
    hops_present = sorted({b["hop"] for rec in series for b in rec["buckets"]})
    for v in hops_present:
        xs = [rec["epoch"] for rec in series if any(b["hop"] == v for b in rec["buckets"])]
        ys = [b["mean"] for rec in series for b in rec["buckets"] if b["hop"] == v]
        label = f">= hop {v}" if series[0]["buckets"][-1]["hop"] == v and any(
            b["hop"] == v and b["saturated"] for rec in series for b in rec["buckets"]
        ) else f"hop {v}"
        ax1.plot(xs, ys, marker="o", markersize=3, label=label)
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("mean raw logit")
    ax1.set_title(f"layer {layer} head {head}: logit means by hop bucket")
    ax1.legend()
    last = series[-1]
    edges = np.asarray(last["hist_edges"])
    centers = (edges[:-1] + edges[1:]) / 2
    for b in last["buckets"]:
        ax2.step(centers, b["hist_counts"], where="mid", label=f"hop {b['hop']}")
    ax2.set_xlabel("raw logit")
    ax2.set_ylabel("pair count")
    ax2.set_title(f"final snapshot (epoch {last['epoch']})")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(out_dir / f"{stem}.png", dpi=120)
    plt.close(fig)
    return series


def analyze_hops(graphs: list[Graph], max_hv: int) -> list[dict]:
    """Label-consistency-by-hop rows for each single-label graph."""
    from hopgat.graphs import compute_hop_matrix

    rows = []
    for gi, g in enumerate(graphs):
        hops = compute_hop_matrix(g, max_hv)
        hv = hops.values[np.triu_indices(g.num_nodes, k=1)]
        for bucket, rate in label_consistency_by_hop(g, hops):
            rows.append(
                {
                    "graph": gi,
                    "hop_bucket": bucket,
                    "saturated": bucket == max_hv,
                    "pair_count": int((hv == bucket).sum()),
                    "label_consistency": rate,
                }
            )
    return rows


def write_hop_analysis(rows: list[dict], out_dir) -> None:
    """CSV table plus a consistency-vs-hop plot."""
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "hop_consistency.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["graph", "hop_bucket", "saturated", "pair_count", "label_consistency"])
        for r in rows:
            writer.writerow(
                [r["graph"], r["hop_bucket"], int(r["saturated"]), r["pair_count"], repr(r["label_consistency"])]
            )

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for gi in sorted({r["graph"] for r in rows}):
        sub = [r for r in rows if r["graph"] == gi]
        ax.plot(
            [r["hop_bucket"] for r in sub],
            [r["label_consistency"] for r in sub],
            marker="o",
            label=f"graph {gi}",
        )
    ax.set_xlabel("hop bucket (last bucket saturated)")
    ax.set_ylabel("same-label pair fraction")
    ax.set_ylim(0, 1.05)
    ax.set_title("label consistency by hop distance")
    if len({r["graph"] for r in rows}) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(out_dir / "hop_consistency.png", dpi=120)
    plt.close(fig)
