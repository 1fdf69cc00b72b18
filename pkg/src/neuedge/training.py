"""Surrogate-gradient BPTT training with a hardware-utilization penalty.

The total loss is task cross-entropy (softmax over output spike counts)
plus lambda_hw times the current mapping's hardware loss. The hardware term
depends on the placement, not on the weights, so it contributes a constant
during backprop; placement is refreshed by the mapper after every epoch
(alternating optimization).

In hard_forward mode spikes are binary and the spike derivative is replaced
by a boxcar surrogate: ds/dv = 1/(2w) for |v - v_th| <= w, else 0. In
smooth_forward mode spikes are sigmoidal with slope matched to the boxcar
height at threshold, making the whole graph differentiable so gradients can
be checked against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, SimulationError
from .mapping import (
    ChipModel,
    Mapping,
    MapperConfig,
    build_graph,
    check_feasibility,
    hw_loss,
    map_greedy,
    map_optimize,
)
from .snn import NetworkTopology, SpikeTrain, classify, run_network

GRAD_MODES = ("hard_forward", "smooth_forward")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    batch_size: int = 16
    learning_rate: float = 0.01
    lambda_hw: float = 0.0
    surrogate_width: float = 1.0
    grad_mode: str = "hard_forward"
    grad_clip: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise SimulationError("epochs and batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise SimulationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.lambda_hw < 0:
            raise SimulationError(f"lambda_hw must be >= 0, got {self.lambda_hw}")
        if self.surrogate_width <= 0:
            raise SimulationError(f"surrogate_width must be > 0, got {self.surrogate_width}")
        if self.grad_mode not in GRAD_MODES:
            raise SimulationError(f"grad_mode must be one of {GRAD_MODES}")
        if self.grad_clip < 0:
            raise SimulationError(f"grad_clip must be >= 0, got {self.grad_clip}")


@dataclass(frozen=True)
class LossBreakdown:
    task_loss: float
    hw_loss: float
    lambda_hw: float

    @property
    def total(self) -> float:
        return self.task_loss + self.lambda_hw * self.hw_loss


@dataclass
class Trace:
    """Per-timestep record sufficient for BPTT over the unrolled network."""

    net: NetworkTopology
    grad_mode: str
    surrogate_width: float
    s_in: np.ndarray  # (T, n_in) input spikes
    a: list[np.ndarray]  # per layer: (T, n_out) pre-reset potentials
    s: list[np.ndarray]  # per layer: (T, n_out) spike outputs (real in smooth mode)
    counts: np.ndarray  # output-layer spike counts (real in smooth mode)
    total_spikes: float


def _check_trainable(net: NetworkTopology) -> None:
    for k, layer in enumerate(net.layers):
        if layer.kind == "pool2x2":
            raise SimulationError(
                f"layer {k}: training through pool2x2 layers is not supported"
            )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def forward_with_trace(
    net: NetworkTopology, input_train: SpikeTrain, cfg: TrainConfig
) -> tuple[SpikeTrain, Trace]:
    """Forward pass recording potentials and spikes for BPTT.

    hard_forward output is bit-identical to `snn.run_network`.
    """
    _check_trainable(net)
    if input_train.n_neurons != net.n_in:
        raise DimensionError(
            f"input train has {input_train.n_neurons} neurons, network expects {net.n_in}"
        )
    if input_train.n_timesteps != net.n_timesteps:
        raise DimensionError(
            f"input train has T={input_train.n_timesteps}, network expects T={net.n_timesteps}"
        )
    T = net.n_timesteps
    smooth = cfg.grad_mode == "smooth_forward"
    steepness = 2.0 / cfg.surrogate_width  # sigmoid slope at v_th matches boxcar height

    s_in = input_train.events.astype(np.float64)
    a_rec = [np.zeros((T, l.n_out)) for l in net.layers]
    s_rec = [np.zeros((T, l.n_out)) for l in net.layers]
    u = [np.zeros(l.n_out) for l in net.layers]

    for t in range(T):
        x = s_in[t]
        for k, layer in enumerate(net.layers):
            p = layer.params
            a = p.beta * u[k] + layer.weights @ x
            if smooth:
                s = _sigmoid(steepness * (a - p.v_th_base))
            else:
                s = (a >= p.v_th_base).astype(np.float64)
            if p.reset_mode == "subtract":
                u[k] = a - p.v_th_base * s
            else:
                u[k] = a * (1.0 - s) + p.v_reset * s
            a_rec[k][t] = a
            s_rec[k][t] = s
            x = s

    counts = s_rec[-1].sum(axis=0)
    total_spikes = float(input_train.total_spikes + sum(r.sum() for r in s_rec))
    out_events = (s_rec[-1] >= 0.5).astype(np.uint8) if smooth else s_rec[-1].astype(np.uint8)
    trace = Trace(
        net=net,
        grad_mode=cfg.grad_mode,
        surrogate_width=cfg.surrogate_width,
        s_in=s_in,
        a=a_rec,
        s=s_rec,
        counts=counts,
        total_spikes=total_spikes,
    )
    return SpikeTrain(out_events), trace


def task_loss_from_counts(counts: np.ndarray, target: int) -> float:
    """Cross-entropy of softmax over output spike counts."""
    z = counts - counts.max()
    logsumexp = np.log(np.exp(z).sum())
    return float(logsumexp - z[target])


def backward(trace: Trace, target: int, cfg: TrainConfig) -> list[np.ndarray]:
    """Exact BPTT gradient of the surrogate-relaxed graph w.r.t. each layer's
    weight matrix. Returns one gradient per layer, in layer order."""
    net = trace.net
    if not (0 <= target < net.n_out):
        raise DimensionError(
            f"target {target} out of range for {net.n_out} output neurons"
        )
    T = net.n_timesteps
    smooth = cfg.grad_mode == "smooth_forward"
    steepness = 2.0 / cfg.surrogate_width
    half_width = cfg.surrogate_width

    z = trace.counts - trace.counts.max()
    softmax = np.exp(z) / np.exp(z).sum()
    dcounts = softmax.copy()
    dcounts[target] -= 1.0

    grads = [np.zeros_like(l.weights) for l in net.layers]
    # ds[t]: gradient w.r.t. the current layer's spike output at time t
    ds = np.tile(dcounts, (T, 1))
    for k in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[k]
        p = layer.params
        a, s = trace.a[k], trace.s[k]
        if smooth:
            fp = steepness * s * (1.0 - s)
        else:
            fp = (np.abs(a - p.v_th_base) <= half_width) / (2.0 * half_width)
        if p.reset_mode == "subtract":
            duda = 1.0 - p.v_th_base * fp
        else:
            duda = (1.0 - s) + (p.v_reset - a) * fp

        da = np.zeros_like(a)
        du_next = np.zeros(layer.n_out)
        for t in range(T - 1, -1, -1):
            da[t] = ds[t] * fp[t] + du_next * duda[t]
            du_next = p.beta * da[t]
        prev_s = trace.s[k - 1] if k > 0 else trace.s_in
        grads[k] = da.T @ prev_s
        ds = da @ layer.weights
    return grads


def loss_breakdown(
    trace: Trace, target: int, cfg: TrainConfig, hw_value: float
) -> LossBreakdown:
    return LossBreakdown(
        task_loss=task_loss_from_counts(trace.counts, target),
        hw_loss=hw_value,
        lambda_hw=cfg.lambda_hw,
    )


def init_weights(net: NetworkTopology, seed: int) -> None:
    """Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], in place."""
    rng = np.random.default_rng(seed)
    for layer in net.layers:
        if layer.weights is not None:
            bound = 1.0 / np.sqrt(layer.n_in)
            layer.weights[:] = rng.uniform(-bound, bound, size=layer.weights.shape)


def evaluate(net: NetworkTopology, data: list[tuple[SpikeTrain, int]]) -> float:
    """Hard-forward accuracy via the simulation core."""
    correct = 0
    for train_in, label in data:
        out, _ = run_network(net, train_in)
        correct += classify(out) == label
    return correct / len(data)


def train(
    net: NetworkTopology,
    data: list[tuple[SpikeTrain, int]],
    chip: ChipModel,
    cfg: TrainConfig,
    mapper_cfg: MapperConfig | None = None,
    val_data: list[tuple[SpikeTrain, int]] | None = None,
) -> tuple[NetworkTopology, Mapping, list[dict]]:
    """Minibatch SGD on task loss + lambda_hw * hardware loss, with a mapper
    refresh of the placement after every epoch. Weights update in place."""
    if not data:
        raise SimulationError("dataset is empty")
    _check_trainable(net)
    mapper_cfg = mapper_cfg or MapperConfig()
    graph = build_graph(net)
    check_feasibility(graph, chip)

    mapping = map_optimize(net, chip, mapper_cfg, map_greedy(net, chip, mapper_cfg))
    hw_value = hw_loss(mapping, chip, mapper_cfg)

    rng = np.random.default_rng(cfg.seed)
    history: list[dict] = []
    n = len(data)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        epoch_correct = 0
        epoch_spikes = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            grads = None
            for idx in batch:
                train_in, label = data[idx]
                _, trace = forward_with_trace(net, train_in, cfg)
                g = backward(trace, label, cfg)
                grads = g if grads is None else [ga + gb for ga, gb in zip(grads, g)]
                epoch_loss += task_loss_from_counts(trace.counts, label)
                epoch_correct += int(np.argmax(trace.counts)) == label
                epoch_spikes += trace.total_spikes
            for layer, g in zip(net.layers, grads):
                step = g / len(batch)
                if cfg.grad_clip > 0:
                    # one oversized batch step can silence every unit, after
                    # which presynaptic gradients vanish and recovery stalls
                    step = np.clip(step, -cfg.grad_clip, cfg.grad_clip)
                layer.weights -= cfg.learning_rate * step
        mapping = map_optimize(net, chip, mapper_cfg, mapping)
        hw_value = hw_loss(mapping, chip, mapper_cfg)
        task = epoch_loss / n
        row = {
            "epoch": epoch,
            "task_loss": task,
            "hw_loss": hw_value,
            "total": task + cfg.lambda_hw * hw_value,
            "train_acc": epoch_correct / n,
            "val_acc": evaluate(net, val_data) if val_data else float("nan"),
            "spikes_per_inference": epoch_spikes / n,
        }
        history.append(row)
    return net, mapping, history
