"""Shared test oracles: an independent scalar LIF simulator, a vectorized
exhaustive mapping optimizer, finite-difference gradients, and random
instance generators. Everything here is written against the math, not the
package internals, so the tests cross-check two implementations."""

import numpy as np

from neuedge.mapping import ChipModel, ConnectivityGraph, MapperConfig
from neuedge.snn import (
    NetworkTopology,
    NeuronParams,
    SpikeTrain,
    dense_layer,
)
from neuedge.training import TrainConfig, forward_with_trace, task_loss_from_counts


def reference_run(net: NetworkTopology, events: np.ndarray):
    """Straight-line scalar reimplementation of the layer dynamics.

    Pure Python loops, no shared code with the simulator. Returns
    (output events as a list of lists, total sop count, per-layer counts).
    """
    T = net.n_timesteps
    layers = net.layers
    v = [[0.0] * l.n_out for l in layers]
    counts = [[0] * l.n_out for l in layers]
    out_events = []
    sops = 0
    for t in range(T):
        x = [int(b) for b in events[t]]
        for k, layer in enumerate(layers):
            p = layer.params
            n_in_spikes = sum(x)
            sops += n_in_spikes * layer.n_out
            y = []
            for i in range(layer.n_out):
                current = 0.0
                for j in range(layer.n_in):
                    if x[j]:
                        current += layer.weights[i][j]
                vi = p.beta * v[k][i] + current
                if vi >= p.v_th_base:
                    y.append(1)
                    counts[k][i] += 1
                    if p.reset_mode == "subtract":
                        vi -= p.v_th_base
                    else:
                        vi = p.v_reset
                else:
                    y.append(0)
                v[k][i] = vi
            x = y
        out_events.append(x)
    return out_events, sops, counts


def random_dense_net(rng: np.random.Generator, max_neurons=32, max_layers=3,
                     max_t=20, sparsity=0.0):
    """Random dense chain with random neuron params and an input train."""
    n_layers = int(rng.integers(1, max_layers + 1))
    sizes = [int(rng.integers(1, 9))]
    for _ in range(n_layers):
        sizes.append(int(rng.integers(1, 9)))
    while sum(sizes) > max_neurons:
        sizes = [max(1, s // 2) for s in sizes]
    T = int(rng.integers(1, max_t + 1))
    layers = []
    for k in range(n_layers):
        params = NeuronParams(
            beta=float(rng.uniform(0.2, 1.0)),
            v_th_base=float(rng.uniform(0.3, 1.5)),
            v_reset=float(rng.uniform(-0.2, 0.2)),
            reset_mode=str(rng.choice(["subtract", "hard"])),
        )
        w = rng.uniform(-1.0, 1.0, size=(sizes[k + 1], sizes[k]))
        if sparsity:
            w[rng.random(w.shape) < sparsity] = 0.0
        layers.append(dense_layer(w, params))
    net = NetworkTopology(layers=layers, n_timesteps=T)
    events = (rng.random((T, sizes[0])) < rng.uniform(0.1, 0.7)).astype(np.uint8)
    return net, SpikeTrain(events)


def brute_force_optimum(graph: ConnectivityGraph, chip: ChipModel,
                        cfg: MapperConfig) -> float:
    """Exhaustive minimum hardware loss over every feasible assignment,
    computed with an independent vectorized formula."""
    n, C = graph.n_neurons, chip.n_cores
    total = C ** n
    codes = np.arange(total)[:, None] // (C ** np.arange(n)[None, :])
    assign = (codes % C).astype(np.int64)
    loads = np.stack([(assign == c).sum(axis=1) for c in range(C)], axis=1)
    syn = np.stack(
        [((assign == c) * graph.in_degree).sum(axis=1) for c in range(C)], axis=1
    )
    feasible = (loads <= chip.neurons_per_core).all(axis=1)
    feasible &= (syn <= chip.synapses_per_core).all(axis=1)
    if not feasible.any():
        raise ValueError("no feasible assignment")
    assign = assign[feasible]
    cores_used = (loads[feasible] > 0).sum(axis=1)
    if graph.edges.size:
        cut = (assign[:, graph.edges[:, 0]] != assign[:, graph.edges[:, 1]]).sum(axis=1)
        traffic = cut / graph.n_synapses
    else:
        traffic = np.zeros(assign.shape[0])
    loss = (
        cfg.beta1 * cores_used / C
        + cfg.beta2 * traffic
        + cfg.beta3 * graph.n_synapses / chip.max_synapses
    )
    return float(loss.min())


def smooth_loss(net: NetworkTopology, train_in: SpikeTrain, target: int,
                cfg: TrainConfig) -> float:
    _, trace = forward_with_trace(net, train_in, cfg)
    return task_loss_from_counts(trace.counts, target)


def fd_gradient(net: NetworkTopology, train_in: SpikeTrain, target: int,
                cfg: TrainConfig, eps: float = 1e-5):
    """Central finite differences of the smooth-forward task loss w.r.t.
    every weight, one gradient array per layer."""
    grads = []
    for layer in net.layers:
        g = np.zeros_like(layer.weights)
        it = np.nditer(layer.weights, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = layer.weights[idx]
            layer.weights[idx] = orig + eps
            up = smooth_loss(net, train_in, target, cfg)
            layer.weights[idx] = orig - eps
            down = smooth_loss(net, train_in, target, cfg)
            layer.weights[idx] = orig
            g[idx] = (up - down) / (2 * eps)
            it.iternext()
        grads.append(g)
    return grads
