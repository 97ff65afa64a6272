"""Multi-head graph attention layers with hop-conditioned scoring.

Three scoring kinds share one skeleton (transform, score pairs, masked
softmax over the hop neighborhood, aggregate):

- ``baseline``: LeakyReLU(s_c(i) + s_n(j)), the classic concat scorer split
  into its center and neighbor halves; neighborhood is hop <= 1.
- ``product``: s_c(i) * (s_n(j) + s_he(hop(i, j))), no outer activation.
- ``addition``: LeakyReLU(s_he(hop(i, j)) * (s_c(i) + s_n(j))), the hop
  score acting as a multiplicative gate.

s_c, s_n are single-output feedforward scorers (weight vector plus bias) on
the transformed features; s_he is the same on the hop-encoding row of the
pair's hop value. Hop kinds aggregate over hop <= max_hv - 1. Hidden layers
apply ELU per head and concatenate; the final layer averages heads under an
identity activation. With more than two layers, every intermediate layer
gets a skip connection from its input (a learned linear projection when the
widths differ).

Raw logit matrices are returned per head so the supervision loss can reach
them; they cover every ordered pair even though only the neighborhood
enters the softmax.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from hopgat.autodiff import (
    Tensor,
    as_tensor,
    concat,
    dropout,
    elu,
    leaky_relu,
    masked_softmax,
    reshape,
    take,
)
from hopgat.graphs import HopMatrix
from hopgat.hop_encoding import HopEncodingTable, build_table

CHECKPOINT_FORMAT_VERSION = 1

ATTENTION_KINDS = ("baseline", "product", "addition")


@dataclass(frozen=True)
class LayerConfig:
    in_dim: int
    out_dim: int
    heads: int
    attention_kind: str = "addition"
    final_layer: bool = False
    dp1: float = 0.0
    dp2: float = 0.0
    dp3: float = 0.0
    leaky_slope: float = 0.2

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ValueError(f"layer dims must be >= 1, got in={self.in_dim} out={self.out_dim}")
        if self.heads < 1:
            raise ValueError(f"heads must be >= 1, got {self.heads}")
        if self.attention_kind not in ATTENTION_KINDS:
            raise ValueError(
                f"attention_kind must be one of {ATTENTION_KINDS}, got {self.attention_kind!r}"
            )
        for name in ("dp1", "dp2", "dp3"):
            rate = getattr(self, name)
            if not 0.0 <= rate < 1.0:
                raise ValueError(f"{name} must be in [0, 1), got {rate}")

    @property
    def out_width(self) -> int:
        """Output width: heads concatenate on hidden layers, average on the last."""
        return self.out_dim if self.final_layer else self.out_dim * self.heads


def table_dim_for(out_dim: int) -> int:
    """Hop tables need an even width; odd layer widths round up by one."""
    return out_dim if out_dim % 2 == 0 else out_dim + 1


@dataclass
class HeadParams:
    W: Tensor
    w_c: Tensor
    b_c: Tensor
    w_n: Tensor
    b_n: Tensor
    w_he: Tensor | None = None
    b_he: Tensor | None = None

    def named_tensors(self) -> list[tuple[str, Tensor]]:
        out = [("W", self.W), ("w_c", self.w_c), ("b_c", self.b_c), ("w_n", self.w_n), ("b_n", self.b_n)]
        if self.w_he is not None:
            out += [("w_he", self.w_he), ("b_he", self.b_he)]
        return out


@dataclass
class LayerParams:
    heads: list[HeadParams]


@dataclass
class SkipProjection:
    W: Tensor
    b: Tensor


@dataclass
class ModelParams:
    """All learnable tensors plus the per-layer (constant) hop tables.

    ``skips`` maps a layer index to its skip connection: ``None`` means an
    identity shortcut (widths already match), a ``SkipProjection`` is a
    learned linear map. Layers absent from the dict have no skip.
    """

    layers: list[LayerParams]
    skips: dict[int, SkipProjection | None] = field(default_factory=dict)
    tables: list[HopEncodingTable | None] = field(default_factory=list)

    def parameters(self) -> list[Tensor]:
        out: list[Tensor] = []
        for lp in self.layers:
            for hp in lp.heads:
                out.extend(t for _, t in hp.named_tensors())
        for i in sorted(self.skips):
            sp = self.skips[i]
            if sp is not None:
                out.extend([sp.W, sp.b])
        return out

    def weights(self) -> list[Tensor]:
        """Weight tensors only (transforms, scorers, skip maps): the set that
        L2 regularization applies to. Biases are excluded."""
        out: list[Tensor] = []
        for lp in self.layers:
            for hp in lp.heads:
                out.extend(t for name, t in hp.named_tensors() if not name.startswith("b"))
        for i in sorted(self.skips):
            sp = self.skips[i]
            if sp is not None:
                out.append(sp.W)
        return out


@dataclass(frozen=True)
class AttentionField:
    """One head's raw logits and normalized coefficients for one layer."""

    layer: int
    head: int
    logits: Tensor
    alpha: Tensor


def validate_configs(configs: list[LayerConfig]) -> None:
    if not configs:
        raise ValueError("need at least one layer")
    for i, cfg in enumerate(configs[:-1]):
        if cfg.final_layer:
            raise ValueError(f"layer {i} marked final but is not last")
        if configs[i + 1].in_dim != cfg.out_width:
            raise ValueError(
                f"layer {i + 1} expects in_dim {configs[i + 1].in_dim} "
                f"but layer {i} produces width {cfg.out_width}"
            )
    if not configs[-1].final_layer:
        raise ValueError("last layer must have final_layer=True")


def _glorot(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int) -> Tensor:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-limit, limit, size=shape), requires_grad=True)


def init_model_params(
    configs: list[LayerConfig], max_hv: int, rng: np.random.Generator
) -> ModelParams:
    """Glorot-uniform initialization in a fixed traversal order (layer, then
    head, then role), so a given generator state yields one exact model."""
    validate_configs(configs)
    layers = []
    tables: list[HopEncodingTable | None] = []
    for cfg in configs:
        if cfg.attention_kind == "baseline":
            table = None
        else:
            table = build_table(table_dim_for(cfg.out_dim), max_hv)
        tables.append(table)
        heads = []
        for _ in range(cfg.heads):
            hp = HeadParams(
                W=_glorot(rng, (cfg.in_dim, cfg.out_dim), cfg.in_dim, cfg.out_dim),
                w_c=_glorot(rng, (cfg.out_dim, 1), cfg.out_dim, 1),
                b_c=Tensor(np.zeros(1), requires_grad=True),
                w_n=_glorot(rng, (cfg.out_dim, 1), cfg.out_dim, 1),
                b_n=Tensor(np.zeros(1), requires_grad=True),
            )
            if table is not None:
                hp.w_he = _glorot(rng, (table.dim, 1), table.dim, 1)
                hp.b_he = Tensor(np.zeros(1), requires_grad=True)
            heads.append(hp)
        layers.append(LayerParams(heads=heads))

    skips: dict[int, SkipProjection | None] = {}
    if len(configs) > 2:
        for i in range(1, len(configs) - 1):
            cfg = configs[i]
            if cfg.in_dim == cfg.out_width:
                skips[i] = None
            else:
                skips[i] = SkipProjection(
                    W=_glorot(rng, (cfg.in_dim, cfg.out_width), cfg.in_dim, cfg.out_width),
                    b=Tensor(np.zeros(cfg.out_width), requires_grad=True),
                )
    return ModelParams(layers=layers, skips=skips, tables=tables)


def _head_logits(
    xd: Tensor,
    hp: HeadParams,
    cfg: LayerConfig,
    hops: HopMatrix,
    table: HopEncodingTable | None,
) -> tuple[Tensor, Tensor]:
    """Transformed features and the full (N, N) raw logit matrix."""
    n = xd.shape[0]
    ht = xd @ hp.W
    s_c = ht @ hp.w_c + hp.b_c
    s_n = reshape(ht @ hp.w_n + hp.b_n, (1, n))
    if cfg.attention_kind == "baseline":
        return ht, leaky_relu(s_c + s_n, cfg.leaky_slope)
    s_he = reshape(as_tensor(table.rows) @ hp.w_he + hp.b_he, (table.max_hv + 1,))
    hop_gate = take(s_he, hops.values)
    if cfg.attention_kind == "product":
        return ht, s_c * (s_n + hop_gate)
    return ht, leaky_relu(hop_gate * (s_c + s_n), cfg.leaky_slope)


def layer_forward(
    x: Tensor,
    hops: HopMatrix,
    cfg: LayerConfig,
    lp: LayerParams,
    table: HopEncodingTable | None,
    layer_index: int,
    training: bool,
    rng: np.random.Generator | None,
) -> tuple[Tensor, list[AttentionField]]:
    """One attention layer: returns the output features and one field per head."""
    if x.shape[1] != cfg.in_dim:
        raise ValueError(f"layer {layer_index} expected {cfg.in_dim} input features, got {x.shape[1]}")
    if x.shape[0] != hops.num_nodes:
        raise ValueError("feature row count does not match the hop matrix")
    if cfg.attention_kind != "baseline":
        if table is None:
            raise ValueError(f"attention kind {cfg.attention_kind!r} needs a hop table")
        if table.max_hv != hops.max_hv:
            raise ValueError("hop table and hop matrix disagree on max_hv")
    cutoff = 1 if cfg.attention_kind == "baseline" else hops.max_hv - 1
    neigh = hops.neighborhood_mask(cutoff)
    fields = []
    head_outs = []
    for k, hp in enumerate(lp.heads):
        xd = dropout(x, cfg.dp1, rng, training)
        ht, logits = _head_logits(xd, hp, cfg, hops, table)
        alpha = masked_softmax(logits, neigh)
        a_drop = dropout(alpha, cfg.dp2, rng, training)
        h_drop = dropout(ht, cfg.dp3, rng, training)
        head_outs.append(a_drop @ h_drop)
        fields.append(AttentionField(layer=layer_index, head=k, logits=logits, alpha=alpha))
    if cfg.final_layer:
        total = head_outs[0]
        for h in head_outs[1:]:
            total = total + h
        out = total * (1.0 / len(head_outs))
    else:
        out = concat([elu(h) for h in head_outs], axis=1)
    return out, fields


def model_forward(
    features,
    hops: HopMatrix,
    configs: list[LayerConfig],
    params: ModelParams,
    training: bool,
    rng: np.random.Generator | None = None,
) -> tuple[Tensor, list[AttentionField]]:
    """Full stack forward pass; collects every head's attention field."""
    validate_configs(configs)
    x = as_tensor(features)
    if x.shape[1] != configs[0].in_dim:
        raise ValueError(
            f"model expects {configs[0].in_dim} input features, got {x.shape[1]}"
        )
    fields: list[AttentionField] = []
    for i, (cfg, lp) in enumerate(zip(configs, params.layers)):
        y, layer_fields = layer_forward(
            x, hops, cfg, lp, params.tables[i], i, training, rng
        )
        if i in params.skips:
            sp = params.skips[i]
            y = y + (x if sp is None else x @ sp.W + sp.b)
        fields.extend(layer_fields)
        x = y
    return x, fields


def config_to_dict(cfg: LayerConfig) -> dict:
    return {
        "in_dim": cfg.in_dim,
        "out_dim": cfg.out_dim,
        "heads": cfg.heads,
        "attention_kind": cfg.attention_kind,
        "final_layer": cfg.final_layer,
        "dp1": cfg.dp1,
        "dp2": cfg.dp2,
        "dp3": cfg.dp3,
        "leaky_slope": cfg.leaky_slope,
    }


def config_from_dict(d: dict) -> LayerConfig:
    return LayerConfig(**d)


def _tensor_record(t: Tensor) -> dict:
    return {"shape": list(t.data.shape), "values": t.data.reshape(-1).tolist()}


def _tensor_from_record(rec: dict) -> Tensor:
    data = np.array(rec["values"], dtype=np.float64).reshape(rec["shape"])
    return Tensor(data, requires_grad=True)


def save_checkpoint(
    path,
    params: ModelParams,
    configs: list[LayerConfig],
    max_hv: int,
    extra_meta: dict | None = None,
) -> None:
    """Persist every parameter tensor keyed by layer/head/role plus config.

    Floats go through Python's shortest round-trip repr, so loading gives
    back bit-identical float64 values.
    """
    tensors: dict[str, dict] = {}
    for i, lp in enumerate(params.layers):
        for k, hp in enumerate(lp.heads):
            for role, t in hp.named_tensors():
                tensors[f"layers/{i}/heads/{k}/{role}"] = _tensor_record(t)
    skip_kinds = {}
    for i, sp in params.skips.items():
        skip_kinds[str(i)] = "identity" if sp is None else "projection"
        if sp is not None:
            tensors[f"skips/{i}/W"] = _tensor_record(sp.W)
            tensors[f"skips/{i}/b"] = _tensor_record(sp.b)
    doc = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "meta": {
            "layers": [config_to_dict(c) for c in configs],
            "max_hv": max_hv,
            "skips": skip_kinds,
            **(extra_meta or {}),
        },
        "tensors": tensors,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_checkpoint(path) -> tuple[ModelParams, list[LayerConfig], int, dict]:
    """Inverse of save_checkpoint: (params, configs, max_hv, meta)."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise ValueError(
            f"unsupported checkpoint format_version {doc.get('format_version')!r}"
        )
    meta = doc["meta"]
    configs = [config_from_dict(d) for d in meta["layers"]]
    max_hv = int(meta["max_hv"])
    tensors = doc["tensors"]
    layers = []
    tables: list[HopEncodingTable | None] = []
    for i, cfg in enumerate(configs):
        tables.append(
            None if cfg.attention_kind == "baseline" else build_table(table_dim_for(cfg.out_dim), max_hv)
        )
        heads = []
        for k in range(cfg.heads):
            base = f"layers/{i}/heads/{k}"
            hp = HeadParams(
                W=_tensor_from_record(tensors[f"{base}/W"]),
                w_c=_tensor_from_record(tensors[f"{base}/w_c"]),
                b_c=_tensor_from_record(tensors[f"{base}/b_c"]),
                w_n=_tensor_from_record(tensors[f"{base}/w_n"]),
                b_n=_tensor_from_record(tensors[f"{base}/b_n"]),
            )
            if cfg.attention_kind != "baseline":
                hp.w_he = _tensor_from_record(tensors[f"{base}/w_he"])
                hp.b_he = _tensor_from_record(tensors[f"{base}/b_he"])
            heads.append(hp)
        layers.append(LayerParams(heads=heads))
    skips: dict[int, SkipProjection | None] = {}
    for key, kind in meta.get("skips", {}).items():
        i = int(key)
        if kind == "identity":
            skips[i] = None
        else:
            skips[i] = SkipProjection(
                W=_tensor_from_record(tensors[f"skips/{i}/W"]),
                b=_tensor_from_record(tensors[f"skips/{i}/b"]),
            )
    params = ModelParams(layers=layers, skips=skips, tables=tables)
    return params, configs, max_hv, meta
