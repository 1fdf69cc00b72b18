"""Discrete-time leaky integrate-and-fire network simulation.

The membrane update per timestep is

    v[t+1] = beta * v[t] + sum_j w_j * s_j[t]

followed by a spike wherever v crosses the threshold, with either
subtract-reset (v -= v_th, the default) or hard reset (v = v_reset).
Synaptic operations are counted event-driven: each presynaptic spike
charges one SOP per postsynaptic target.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, SimulationError

RESET_MODES = ("subtract", "hard")
LAYER_KINDS = ("dense", "conv2d", "pool2x2")


@dataclass(frozen=True)
class NeuronParams:
    beta: float = 0.9
    v_th_base: float = 1.0
    v_reset: float = 0.0
    reset_mode: str = "subtract"

    def __post_init__(self):
        if not (0.0 < self.beta <= 1.0):
            raise SimulationError(f"beta must be in (0, 1], got {self.beta}")
        if self.v_th_base <= 0.0:
            raise SimulationError(f"v_th_base must be > 0, got {self.v_th_base}")
        if self.reset_mode not in RESET_MODES:
            raise SimulationError(f"reset_mode must be one of {RESET_MODES}")


@dataclass
class LayerSpec:
    """One simulated layer.

    conv2d layers are lowered to an equivalent dense matrix at build time
    (see `conv2d_layer`), so `weights` is always (n_out, n_in) for weighted
    kinds. pool2x2 layers carry no weights and no neuron params: an output
    unit spikes iff any unit of its 2x2 input block spiked.
    """

    kind: str
    n_in: int
    n_out: int
    weights: np.ndarray | None = None
    params: NeuronParams | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise SimulationError(f"unknown layer kind {self.kind!r}")
        if self.kind == "pool2x2":
            if self.weights is not None or self.params is not None:
                raise SimulationError("pool2x2 layers carry no weights or params")
        else:
            if self.weights is None or self.params is None:
                raise SimulationError(f"{self.kind} layer requires weights and params")
            w = np.asarray(self.weights, dtype=np.float64)
            if w.shape != (self.n_out, self.n_in):
                raise DimensionError(
                    f"weight shape {w.shape} does not match (n_out={self.n_out}, n_in={self.n_in})"
                )
            self.weights = w


def dense_layer(weights: np.ndarray, params: NeuronParams) -> LayerSpec:
    w = np.asarray(weights, dtype=np.float64)
    return LayerSpec(kind="dense", n_in=w.shape[1], n_out=w.shape[0], weights=w, params=params)


def conv2d_layer(
    kernels: np.ndarray,
    in_shape: tuple[int, int, int],
    params: NeuronParams,
) -> LayerSpec:
    """Lower a valid-padding stride-1 convolution to a dense LayerSpec.

    kernels: (c_out, c_in, k, k); in_shape: (c_in, h, w).
    """
    kernels = np.asarray(kernels, dtype=np.float64)
    c_out, c_in, k, _ = kernels.shape
    ci, h, w = in_shape
    if ci != c_in:
        raise DimensionError(f"kernel expects {c_in} input channels, input has {ci}")
    oh, ow = h - k + 1, w - k + 1
    if oh < 1 or ow < 1:
        raise DimensionError(f"kernel size {k} too large for input {h}x{w}")
    n_in = c_in * h * w
    n_out = c_out * oh * ow
    dense = np.zeros((n_out, n_in))
    for co in range(c_out):
        for oy in range(oh):
            for ox in range(ow):
                row = (co * oh + oy) * ow + ox
                for ci_ in range(c_in):
                    for ky in range(k):
                        base = (ci_ * h + oy + ky) * w + ox
                        dense[row, base : base + k] = kernels[co, ci_, ky]
    return LayerSpec(
        kind="conv2d",
        n_in=n_in,
        n_out=n_out,
        weights=dense,
        params=params,
        meta={"in_shape": (c_in, h, w), "out_shape": (c_out, oh, ow), "kernel_size": k},
    )


def pool2x2_layer(in_shape: tuple[int, int, int]) -> LayerSpec:
    c, h, w = in_shape
    if h % 2 or w % 2:
        raise DimensionError(f"pool2x2 needs even spatial dims, got {h}x{w}")
    return LayerSpec(
        kind="pool2x2",
        n_in=c * h * w,
        n_out=c * (h // 2) * (w // 2),
        meta={"in_shape": (c, h, w), "out_shape": (c, h // 2, w // 2)},
    )


@dataclass
class NetworkTopology:
    layers: list[LayerSpec]
    n_timesteps: int

    def __post_init__(self):
        if self.n_timesteps < 1:
            raise SimulationError(f"n_timesteps must be >= 1, got {self.n_timesteps}")
        if not self.layers:
            raise SimulationError("network needs at least one layer")
        for k in range(1, len(self.layers)):
            prev, cur = self.layers[k - 1], self.layers[k]
            if prev.n_out != cur.n_in:
                raise DimensionError(
                    f"layer {k - 1} out-size {prev.n_out} != layer {k} in-size {cur.n_in}"
                )

    @property
    def n_in(self) -> int:
        return self.layers[0].n_in

    @property
    def n_out(self) -> int:
        return self.layers[-1].n_out

    def weighted_layers(self) -> list[int]:
        return [k for k, l in enumerate(self.layers) if l.weights is not None]


@dataclass
class SpikeTrain:
    """Time-major binary event record: events[t, i] == 1 iff neuron i fired at t."""

    events: np.ndarray  # (n_timesteps, n_neurons), uint8

    def __post_init__(self):
        ev = np.asarray(self.events)
        if ev.ndim != 2:
            raise DimensionError(f"events must be 2-D (T, N), got shape {ev.shape}")
        if not np.isin(ev, (0, 1)).all():
            raise SimulationError("spike train events must be 0/1")
        self.events = ev.astype(np.uint8)

    @property
    def n_timesteps(self) -> int:
        return self.events.shape[0]

    @property
    def n_neurons(self) -> int:
        return self.events.shape[1]

    @property
    def total_spikes(self) -> int:
        return int(self.events.sum())

    def counts(self) -> np.ndarray:
        """Per-neuron total spike count."""
        return self.events.sum(axis=0).astype(np.int64)


@dataclass
class SimState:
    """Accumulated simulation state: potentials, spike counts, SOP count."""

    v: list[np.ndarray]
    layer_spike_counts: list[np.ndarray]
    input_spike_counts: np.ndarray
    sop_count: int = 0
    n_updates: int = 0  # neuron-timestep membrane updates (optional energy term)

    @property
    def total_spikes(self) -> int:
        return int(self.input_spike_counts.sum()) + sum(
            int(c.sum()) for c in self.layer_spike_counts
        )

    @property
    def neuron_spike_counts(self) -> np.ndarray:
        """Spike counts for every neuron in global order (inputs first)."""
        return np.concatenate([self.input_spike_counts] + list(self.layer_spike_counts))


def init_state(net: NetworkTopology) -> SimState:
    return SimState(
        v=[np.zeros(l.n_out) for l in net.layers],
        layer_spike_counts=[np.zeros(l.n_out, dtype=np.int64) for l in net.layers],
        input_spike_counts=np.zeros(net.n_in, dtype=np.int64),
    )


def layer_step(
    layer: LayerSpec,
    v: np.ndarray,
    in_spikes: np.ndarray,
    v_th: float | None = None,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Advance one layer one timestep. Returns (out_spikes, v_next, sops).

    `v_th` overrides the layer's base threshold (used by runtime adaptation).
    Pool layers are stateless: v is passed through untouched.
    """
    if in_spikes.shape != (layer.n_in,):
        raise DimensionError(
            f"layer expects {layer.n_in} inputs, got {in_spikes.shape}"
        )
    if layer.kind == "pool2x2":
        c, h, w = layer.meta["in_shape"]
        blocks = in_spikes.reshape(c, h // 2, 2, w // 2, 2)
        out = (blocks.sum(axis=(2, 4)) >= 1).astype(np.uint8).reshape(-1)
        return out, v, 0

    p = layer.params
    th = p.v_th_base if v_th is None else v_th
    n_in_spikes = int(in_spikes.sum())
    if n_in_spikes:
        current = layer.weights @ in_spikes.astype(np.float64)
    else:
        current = 0.0
    v_new = p.beta * v + current
    out = (v_new >= th).astype(np.uint8)
    if p.reset_mode == "subtract":
        v_new = v_new - th * out
    else:
        v_new = np.where(out, p.v_reset, v_new)
    return out, v_new, n_in_spikes * layer.n_out


def run_network(net: NetworkTopology, input_train: SpikeTrain) -> tuple[SpikeTrain, SimState]:
    """Simulate the whole network over the input train's horizon."""
    if input_train.n_neurons != net.n_in:
        raise DimensionError(
            f"input train has {input_train.n_neurons} neurons, network expects {net.n_in}"
        )
    if input_train.n_timesteps != net.n_timesteps:
        raise DimensionError(
            f"input train has T={input_train.n_timesteps}, network expects T={net.n_timesteps}"
        )
    for k, layer in enumerate(net.layers):
        if layer.weights is not None and not np.isfinite(layer.weights).all():
            raise SimulationError(f"layer {k} weights contain NaN/inf")

    state = init_state(net)
    out_events = np.zeros((net.n_timesteps, net.n_out), dtype=np.uint8)
    for t in range(net.n_timesteps):
        spikes = input_train.events[t]
        state.input_spike_counts += spikes
        for k, layer in enumerate(net.layers):
            spikes, state.v[k], sops = layer_step(layer, state.v[k], spikes)
            state.sop_count += sops
            state.layer_spike_counts[k] += spikes
            if layer.kind != "pool2x2":
                state.n_updates += layer.n_out
        out_events[t] = spikes
    return SpikeTrain(out_events), state


def classify(output: SpikeTrain) -> int:
    """Argmax of per-neuron spike counts; ties break to the lowest index."""
    if output.n_neurons == 0:
        raise DimensionError("empty output train")
    return int(np.argmax(output.counts()))


def is_confident(output: SpikeTrain) -> bool:
    """False when no output neuron fired (classify falls back to index 0)."""
    return output.total_spikes > 0
