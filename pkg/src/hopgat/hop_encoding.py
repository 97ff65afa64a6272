"""Sinusoidal encodings of hop distances.

Each hop value v in 0..max_hv maps to a fixed d-dimensional vector: the
first d/2 entries are sin(v * inv_i) and the last d/2 are cos(v * inv_i)
over a shared geometric frequency ladder inv_i. Frequencies run from 1 down
to 1/max_hv, so nearby hop values get distinguishable rows while the whole
range stays within one period of the slowest frequency.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class HopEncodingTable:
    """Immutable lookup table: row v encodes hop value v, for v in 0..max_hv."""

    dim: int
    max_hv: int
    rows: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.rows.setflags(write=False)


def frequency_ladder(dim: int, max_hv: int) -> np.ndarray:
    """The d/2 shared frequencies inv_i = exp(i * -ln(max_hv) / max(d/2 - 1, 1))."""
    half = dim // 2
    scale = -np.log(float(max_hv)) / max(half - 1, 1)
    return np.exp(np.arange(half) * scale)


def build_table(dim: int, max_hv: int) -> HopEncodingTable:
    """Build the encoding table for hop values 0..max_hv inclusive.

    ``dim`` must be even (the sin and cos halves pair up) and at least 2;
    ``max_hv`` at least 2.
    """
    if dim < 2 or dim % 2 != 0:
        raise ValueError(f"encoding dim must be an even integer >= 2, got {dim}")
    if max_hv < 2:
        raise ValueError(f"max_hv must be >= 2, got {max_hv}")
    inv = frequency_ladder(dim, max_hv)
    v = np.arange(max_hv + 1, dtype=np.float64)[:, None]
    phases = v * inv[None, :]
    rows = np.concatenate([np.sin(phases), np.cos(phases)], axis=1)
    return HopEncodingTable(dim=dim, max_hv=max_hv, rows=rows)


def lookup(table: HopEncodingTable, hv: int) -> np.ndarray:
    """Row for hop value ``hv``; raw out-of-range values are a usage error."""
    if not 0 <= hv <= table.max_hv:
        raise ValueError(
            f"hop value {hv} outside table range 0..{table.max_hv}; "
            "saturate hop values before lookup"
        )
    return table.rows[hv].copy()
