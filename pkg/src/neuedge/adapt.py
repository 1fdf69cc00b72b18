"""Runtime threshold adaptation from observed layer activity.

The adapted threshold is

    clamp(v_th_base * (1 + gamma * (a_target - A[t])), th_min, th_max)

which *raises* the threshold while activity sits below target (an
energy-saving dynamic: quiet input is suppressed further) and lowers it
during bursts. A sign-flipped "homeostatic" mode that regulates activity
toward the target is available behind `mode="homeostatic"`; the standard
mode is the default. Adaptation is per layer with a one-step delay: A[t]
is measured on a layer's own output and applied at t+1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SimulationError
from .snn import NetworkTopology, SimState, SpikeTrain, init_state, layer_step

ADAPT_MODES = ("standard", "homeostatic")


@dataclass(frozen=True)
class AdaptConfig:
    a_target: float = 0.05
    gamma: float = 0.1
    th_min: float | None = None  # default 0.5 * v_th_base, resolved per layer
    th_max: float | None = None  # default 2.0 * v_th_base
    window: int = 1  # trailing moving-average length for A[t]
    mode: str = "standard"

    def __post_init__(self):
        if not (0.0 < self.a_target < 1.0):
            raise SimulationError(f"a_target must be in (0, 1), got {self.a_target}")
        if self.gamma < 0.0:
            raise SimulationError(f"gamma must be >= 0, got {self.gamma}")
        if self.th_min is not None and self.th_max is not None:
            if not (0.0 < self.th_min < self.th_max):
                raise SimulationError("need 0 < th_min < th_max")
        if self.window < 1:
            raise SimulationError(f"window must be >= 1, got {self.window}")
        if self.mode not in ADAPT_MODES:
            raise SimulationError(f"mode must be one of {ADAPT_MODES}")


@dataclass(frozen=True)
class ActivityStat:
    a_t: float
    window: int | None = None

    def __post_init__(self):
        if not (0.0 <= self.a_t <= 1.0):
            raise SimulationError(f"a_t must be in [0, 1], got {self.a_t}")


def _bounds(base: float, cfg: AdaptConfig) -> tuple[float, float]:
    lo = cfg.th_min if cfg.th_min is not None else 0.5 * base
    hi = cfg.th_max if cfg.th_max is not None else 2.0 * base
    return lo, hi


def adapt_threshold(base: float, activity: ActivityStat, cfg: AdaptConfig) -> float:
    if not np.isfinite(base) or base <= 0:
        raise SimulationError(f"base threshold must be finite and > 0, got {base}")
    delta = cfg.gamma * (cfg.a_target - activity.a_t)
    if cfg.mode == "homeostatic":
        delta = -delta
    lo, hi = _bounds(base, cfg)
    return float(np.clip(base * (1.0 + delta), lo, hi))


@dataclass
class AdaptiveRunInfo:
    """Activity trajectory rows (t, layer, a_t, v_th) plus the final state."""

    trajectory: list[tuple[int, int, float, float]] = field(default_factory=list)
    state: SimState = None


def run_adaptive(
    net: NetworkTopology,
    input_train: SpikeTrain,
    cfg: AdaptConfig,
) -> tuple[SpikeTrain, AdaptiveRunInfo]:
    """Simulate with per-layer threshold adaptation. gamma=0 reproduces the
    static network bit for bit."""
    if input_train.n_neurons != net.n_in:
        raise SimulationError(
            f"input train has {input_train.n_neurons} neurons, network expects {net.n_in}"
        )
    if input_train.n_timesteps != net.n_timesteps:
        raise SimulationError(
            f"input train has T={input_train.n_timesteps}, network expects T={net.n_timesteps}"
        )

    state = init_state(net)
    thresholds = [
        layer.params.v_th_base if layer.params is not None else None
        for layer in net.layers
    ]
    history: list[list[float]] = [[] for _ in net.layers]
    info = AdaptiveRunInfo(state=state)
    out_events = np.zeros((net.n_timesteps, net.n_out), dtype=np.uint8)

    for t in range(net.n_timesteps):
        spikes = input_train.events[t]
        state.input_spike_counts += spikes
        for k, layer in enumerate(net.layers):
            spikes, state.v[k], sops = layer_step(layer, state.v[k], spikes, v_th=thresholds[k])
            state.sop_count += sops
            state.layer_spike_counts[k] += spikes
            if layer.kind == "pool2x2":
                continue
            state.n_updates += layer.n_out
            a_t = float(spikes.mean())
            history[k].append(a_t)
            smoothed = float(np.mean(history[k][-cfg.window:]))
            thresholds[k] = adapt_threshold(
                layer.params.v_th_base, ActivityStat(smoothed, cfg.window), cfg
            )
            info.trajectory.append((t, k, a_t, thresholds[k]))
        out_events[t] = spikes
    return SpikeTrain(out_events), info
