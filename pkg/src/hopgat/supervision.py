"""Ground-truth attention targets and the supervised attention loss.

Raw attention logits (pre-softmax) are pushed toward a piecewise target
derived from hop distance: 1 for a node attending to itself, decreasing
linearly to 0 at the neighborhood edge, and a flat negative value for
saturated (far) pairs. Near pairs are few and all supervised; far pairs are
abundant, so only a small resampled fraction joins each batch, keeping the
two populations balanced in the loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from hopgat.autodiff import Tensor, reshape, take
from hopgat.graphs import HopMatrix


def ground_truth(hv, max_hv: int):
    """Target logit for hop value(s) ``hv``: 1 at 0, 1 - hv below max_hv,
    1 - max_hv at or beyond max_hv. Accepts scalars or arrays."""
    if max_hv < 2:
        raise ValueError(f"max_hv must be >= 2, got {max_hv}")
    hv_arr = np.asarray(hv)
    out = np.where(
        hv_arr == 0,
        1.0,
        np.where(hv_arr < max_hv, 1.0 - hv_arr, 1.0 - max_hv),
    ).astype(np.float64)
    if np.isscalar(hv) or hv_arr.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class PairSample:
    """Flat (row-major) pair indices entering one batch's attention loss.

    ``near`` is every ordered pair below the saturation cutoff, self pairs
    included; it is the same for every batch. ``far`` is the per-batch
    random subset of saturated pairs.
    """

    near: np.ndarray = field(repr=False)
    far: np.ndarray = field(repr=False)

    @property
    def indices(self) -> np.ndarray:
        return np.concatenate([self.near, self.far])

    @property
    def count(self) -> int:
        return self.near.size + self.far.size


def near_pair_indices(hops: HopMatrix) -> np.ndarray:
    """Flat indices of all pairs with hop value < max_hv (precomputable)."""
    return np.flatnonzero(hops.values.reshape(-1) < hops.max_hv)


def sample_pairs(hops: HopMatrix, ratio: float, rng: np.random.Generator) -> PairSample:
    """All near pairs plus round(ratio * |far pool|) far pairs w/o replacement.

    Call once per batch: the far subset is meant to be redrawn every time so
    supervision eventually touches the whole far population.
    """
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"far-pair sample ratio must be in [0, 1], got {ratio}")
    flat = hops.values.reshape(-1)
    near = np.flatnonzero(flat < hops.max_hv)
    far_pool = np.flatnonzero(flat == hops.max_hv)
    k = int(round(ratio * far_pool.size))
    far = rng.choice(far_pool, size=k, replace=False) if k else far_pool[:0]
    return PairSample(near=near, far=far)


def attention_loss(logit_fields: list[Tensor], hops: HopMatrix, sample: PairSample) -> Tensor:
    """Mean squared error between raw logits and hop targets over the sample.

    Averaged over every supervised field (layer-head pair) and every sampled
    pair: the divisor is len(fields) * sample.count, so the gradient at one
    logit is 2 * (e - target) / (fields * pairs).
    """
    if not logit_fields:
        raise ValueError("attention loss needs at least one logit field")
    if sample.count == 0:
        raise ValueError("attention loss needs a non-empty pair sample")
    n = hops.num_nodes
    idx = sample.indices
    targets = Tensor(ground_truth(hops.values.reshape(-1)[idx], hops.max_hv))
    total = None
    for logits in logit_fields:
        if logits.shape != (n, n):
            raise ValueError(f"logit field shape {logits.shape} != ({n}, {n})")
        diff = take(reshape(logits, (n * n,)), idx) - targets
        term = (diff * diff).sum()
        total = term if total is None else total + term
    return total * (1.0 / (len(logit_fields) * sample.count))
