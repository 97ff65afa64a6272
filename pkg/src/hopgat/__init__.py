"""Hop-aware supervised graph attention networks."""

from hopgat.autodiff import Adam, GradientTape, Tensor
from hopgat.estimator import HopGATClassifier
from hopgat.graphs import (
    Graph,
    HopMatrix,
    compute_hop_matrix,
    generate_sbm,
    label_consistency_by_hop,
    load_container,
    save_container,
    subsample_labels,
)
from hopgat.hop_encoding import HopEncodingTable, build_table
from hopgat.layers import LayerConfig, load_checkpoint, model_forward, save_checkpoint
from hopgat.presets import PRESETS, get_preset

__all__ = [
    "Adam",
    "GradientTape",
    "Tensor",
    "HopGATClassifier",
    "Graph",
    "HopMatrix",
    "compute_hop_matrix",
    "generate_sbm",
    "label_consistency_by_hop",
    "load_container",
    "save_container",
    "subsample_labels",
    "HopEncodingTable",
    "build_table",
    "LayerConfig",
    "load_checkpoint",
    "model_forward",
    "save_checkpoint",
    "PRESETS",
    "get_preset",
]

__version__ = "0.1.0"
