"""Simulated-annealing schedule mixing attention and classification losses.

The temperature decays geometrically to a floor; the mixing weight
gamma = exp(-1 / (L_att * temperature)) starts near 1 (attention dominates
while its loss is high and the system is hot) and falls toward 0 as the
attention loss shrinks and the temperature cools. Once the floor is reached
gamma is kept at or above a strengthening constant so attention supervision
never vanishes entirely. gamma is always treated as a constant by the
backward pass: the losses are differentiated, the schedule is not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from hopgat.autodiff import Tensor


@dataclass(frozen=True)
class ScheduleConfig:
    temp_ini: float = 100.0
    temp_fin: float = 1.0
    decay: float = 0.85
    gamma_str: float = 0.25

    def __post_init__(self):
        if self.temp_fin <= 0:
            raise ValueError(f"temp_fin must be > 0, got {self.temp_fin}")
        if self.temp_ini < self.temp_fin:
            raise ValueError("temp_ini must be >= temp_fin")
        if not 0.0 < self.decay < 1.0:
            raise ValueError(f"decay must be in (0, 1), got {self.decay}")
        if not 0.0 < self.gamma_str <= 1.0:
            raise ValueError(f"gamma_str must be in (0, 1], got {self.gamma_str}")


@dataclass(frozen=True)
class ScheduleState:
    temperature: float
    saturated: bool = False


def initial_state(config: ScheduleConfig) -> ScheduleState:
    return ScheduleState(temperature=config.temp_ini, saturated=False)


def step_temperature(state: ScheduleState, config: ScheduleConfig) -> ScheduleState:
    """One geometric decay step, clamped at the floor (applied once per epoch)."""
    raw = state.temperature * config.decay
    if raw <= config.temp_fin:
        return ScheduleState(temperature=config.temp_fin, saturated=True)
    return replace(state, temperature=raw)


def compute_gamma(l_att: float, state: ScheduleState, config: ScheduleConfig) -> float:
    """Mixing weight for the current attention loss value.

    Exactly 0 when l_att == 0 (no attention signal left); otherwise
    exp(-1 / (l_att * temperature)), raised to at least gamma_str once the
    temperature has saturated.
    """
    if l_att < 0:
        raise ValueError(f"attention loss must be >= 0, got {l_att}")
    if l_att == 0.0:
        return 0.0
    gamma = math.exp(-1.0 / (l_att * state.temperature))
    if state.saturated:
        gamma = max(gamma, config.gamma_str)
    return gamma


def total_loss(l_cls: Tensor, l_att: Tensor | None, gamma: float) -> Tensor:
    """(1 - gamma) * classification + gamma * attention, gamma held constant.

    gamma enters as a plain float, so no gradient flows through the
    schedule; with gamma == 0 the result is bit-identical to l_cls plus an
    exactly-zero attention contribution.
    """
    if l_att is None:
        if gamma != 0.0:
            raise ValueError("gamma must be 0 when there is no attention loss")
        return l_cls
    return (1.0 - gamma) * l_cls + gamma * l_att
