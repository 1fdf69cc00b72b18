"""Abstract multi-core chip model and neuron-to-core placement.

The hardware loss is

    beta1 * N_cores/N_total + beta2 * C_inter/C_total + beta3 * M_syn/M_max

with C_total the network's total synapse count (mapping-independent) so the
traffic term is a cut fraction. Synaptic memory is charged to the
postsynaptic neuron's core. Placement starts from a greedy BFS fill and is
refined by Kernighan-Lin style local search (single moves + pairwise swaps,
first strictly improving move in deterministic scan order, multi-restart).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CapacityError, MappingError
from .snn import NetworkTopology


@dataclass(frozen=True)
class ChipModel:
    name: str = "generic"
    n_cores: int = 16
    neurons_per_core: int = 64
    synapses_per_core: int = 4096
    e_sop: float = 2e-12  # J per synaptic operation
    e_spike: float = 20e-12  # J per spike event
    inter_core_cost: float = 2.0  # relative cost of a cross-core spike
    e_update: float = 0.0  # optional J per neuron-timestep membrane update
    e_route: float = 0.0  # optional J per cross-core spike (routing overhead)

    def __post_init__(self):
        if self.n_cores < 1 or self.neurons_per_core < 1 or self.synapses_per_core < 1:
            raise CapacityError("chip capacities must be strictly positive")
        if self.e_sop <= 0 or self.e_spike <= 0:
            raise CapacityError("chip energy constants must be strictly positive")

    @property
    def max_neurons(self) -> int:
        return self.n_cores * self.neurons_per_core

    @property
    def max_synapses(self) -> int:
        return self.n_cores * self.synapses_per_core


CHIP_PRESETS = {
    "loihi2-like": ChipModel(
        name="loihi2-like",
        n_cores=128,
        neurons_per_core=8192,
        synapses_per_core=937_500,
    ),
    "truenorth-like": ChipModel(
        name="truenorth-like",
        n_cores=4096,
        neurons_per_core=256,
        synapses_per_core=65_536,
    ),
    "desk16": ChipModel(
        name="desk16",
        n_cores=16,
        neurons_per_core=64,
        synapses_per_core=8192,
    ),
}


@dataclass(frozen=True)
class MapperConfig:
    beta1: float = 1.0
    beta2: float = 1.0
    beta3: float = 1.0
    max_iters: int = 20_000
    n_restarts: int = 16
    seed: int = 0

    def __post_init__(self):
        betas = (self.beta1, self.beta2, self.beta3)
        if any(b < 0 or not np.isfinite(b) for b in betas):
            raise MappingError("beta weights must be finite and >= 0")
        if all(b == 0 for b in betas):
            raise MappingError("beta weights must not all be zero")


@dataclass
class ConnectivityGraph:
    """Synapse graph over global neuron ids: input units first, then each
    layer's output units in order. Pool fan-in links count as synapses (one
    routing entry each) alongside weighted connections."""

    n_neurons: int
    edges: np.ndarray  # (E, 2) int64, pre -> post
    in_degree: np.ndarray  # (n_neurons,)

    @property
    def n_synapses(self) -> int:
        return int(self.edges.shape[0])


def build_graph(net: NetworkTopology) -> ConnectivityGraph:
    offsets = [0]
    for layer in net.layers:
        offsets.append(offsets[-1] + layer.n_out)
    offsets = [net.n_in + o for o in offsets]
    n_neurons = offsets[-1]
    pres, posts = [], []
    in_base = 0
    for k, layer in enumerate(net.layers):
        out_base = offsets[k]
        if layer.kind == "pool2x2":
            c, h, w = layer.meta["in_shape"]
            oh, ow = h // 2, w // 2
            for ci in range(c):
                for oy in range(oh):
                    for ox in range(ow):
                        post = out_base + (ci * oh + oy) * ow + ox
                        for dy in range(2):
                            for dx in range(2):
                                pre = in_base + (ci * h + 2 * oy + dy) * w + 2 * ox + dx
                                pres.append(pre)
                                posts.append(post)
        else:
            rows, cols = np.nonzero(layer.weights)
            pres.extend((in_base + cols).tolist())
            posts.extend((out_base + rows).tolist())
        in_base = out_base
    edges = np.array([pres, posts], dtype=np.int64).T.reshape(-1, 2)
    in_degree = np.zeros(n_neurons, dtype=np.int64)
    if edges.size:
        np.add.at(in_degree, edges[:, 1], 1)
    return ConnectivityGraph(n_neurons=n_neurons, edges=edges, in_degree=in_degree)


@dataclass
class MappingStats:
    n_cores_used: int
    inter_core_synapses: int
    total_synapses: int
    synaptic_memory_used: int


@dataclass
class Mapping:
    assignment: np.ndarray  # neuron index -> core index
    stats: MappingStats = field(default=None)  # recomputed by compute_stats


def compute_stats(assignment: np.ndarray, graph: ConnectivityGraph) -> MappingStats:
    cores = np.unique(assignment)
    if graph.edges.size:
        inter = int(
            (assignment[graph.edges[:, 0]] != assignment[graph.edges[:, 1]]).sum()
        )
    else:
        inter = 0
    return MappingStats(
        n_cores_used=int(cores.size),
        inter_core_synapses=inter,
        total_synapses=graph.n_synapses,
        synaptic_memory_used=graph.n_synapses,
    )


def validate_mapping(mapping: Mapping, graph: ConnectivityGraph, chip: ChipModel) -> None:
    a = np.asarray(mapping.assignment)
    if a.shape != (graph.n_neurons,):
        raise MappingError(
            f"assignment covers {a.shape[0]} neurons, network has {graph.n_neurons}"
        )
    if a.min(initial=0) < 0 or a.max(initial=0) >= chip.n_cores:
        raise MappingError("assignment references a core outside the chip")
    neuron_load = np.bincount(a, minlength=chip.n_cores)
    if neuron_load.max(initial=0) > chip.neurons_per_core:
        raise CapacityError(
            f"core neuron capacity exceeded: {neuron_load.max()} > {chip.neurons_per_core}"
        )
    syn_load = np.bincount(a, weights=graph.in_degree, minlength=chip.n_cores)
    if syn_load.max(initial=0) > chip.synapses_per_core:
        raise CapacityError(
            f"core synapse capacity exceeded: {int(syn_load.max())} > {chip.synapses_per_core}"
        )
    stats = compute_stats(a, graph)
    if mapping.stats is not None and stats != mapping.stats:
        raise MappingError("mapping stats do not match recomputation from assignment")


def hw_loss(mapping: Mapping, chip: ChipModel, cfg: MapperConfig,
            graph: ConnectivityGraph | None = None) -> float:
    if graph is not None:
        validate_mapping(mapping, graph, chip)
        stats = compute_stats(mapping.assignment, graph)
    else:
        stats = mapping.stats
        if stats is None:
            raise MappingError("mapping has no stats and no graph was given")
    core_term = stats.n_cores_used / chip.n_cores
    traffic_term = (
        stats.inter_core_synapses / stats.total_synapses if stats.total_synapses else 0.0
    )
    memory_term = stats.synaptic_memory_used / chip.max_synapses
    return cfg.beta1 * core_term + cfg.beta2 * traffic_term + cfg.beta3 * memory_term


def _loss_from_arrays(assignment, graph, chip, cfg) -> float:
    s = compute_stats(assignment, graph)
    traffic = s.inter_core_synapses / s.total_synapses if s.total_synapses else 0.0
    return (
        cfg.beta1 * s.n_cores_used / chip.n_cores
        + cfg.beta2 * traffic
        + cfg.beta3 * s.synaptic_memory_used / chip.max_synapses
    )


def check_feasibility(graph: ConnectivityGraph, chip: ChipModel) -> None:
    if graph.n_neurons > chip.max_neurons:
        raise CapacityError(
            f"network has {graph.n_neurons} neurons, chip holds {chip.max_neurons}"
        )
    if graph.n_synapses > chip.max_synapses:
        raise CapacityError(
            f"network has {graph.n_synapses} synapses, chip holds {chip.max_synapses}"
        )
    worst = int(graph.in_degree.max(initial=0))
    if worst > chip.synapses_per_core:
        raise CapacityError(
            f"a neuron has in-degree {worst}, above per-core synapse capacity "
            f"{chip.synapses_per_core}"
        )


def _bfs_order(graph: ConnectivityGraph) -> list[int]:
    adj: list[list[int]] = [[] for _ in range(graph.n_neurons)]
    for pre, post in graph.edges:
        adj[int(pre)].append(int(post))
        adj[int(post)].append(int(pre))
    seen = np.zeros(graph.n_neurons, dtype=bool)
    order: list[int] = []
    for root in range(graph.n_neurons):
        if seen[root]:
            continue
        queue = [root]
        seen[root] = True
        while queue:
            node = queue.pop(0)
            order.append(node)
            for nb in sorted(set(adj[node])):
                if not seen[nb]:
                    seen[nb] = True
                    queue.append(nb)
    return order


def map_greedy(net: NetworkTopology, chip: ChipModel, cfg: MapperConfig) -> Mapping:
    """Fill cores in BFS order over the synapse graph, opening a new core
    whenever a neuron or synapse capacity would bind."""
    graph = build_graph(net)
    check_feasibility(graph, chip)
    assignment = np.full(graph.n_neurons, -1, dtype=np.int64)
    core = 0
    neurons_here = 0
    synapses_here = 0
    for node in _bfs_order(graph):
        need = int(graph.in_degree[node])
        if neurons_here + 1 > chip.neurons_per_core or synapses_here + need > chip.synapses_per_core:
            core += 1
            neurons_here = 0
            synapses_here = 0
            if core >= chip.n_cores:
                raise CapacityError(
                    f"greedy fill needs more than {chip.n_cores} cores"
                )
        assignment[node] = core
        neurons_here += 1
        synapses_here += need
    mapping = Mapping(assignment=assignment, stats=compute_stats(assignment, graph))
    validate_mapping(mapping, graph, chip)
    return mapping


def random_valid_mapping(
    graph: ConnectivityGraph, chip: ChipModel, rng: np.random.Generator,
    attempts: int = 8,
) -> Mapping:
    """Random assignment respecting capacities (shuffled first-fit over a
    random core preference order per neuron; retried since tight synapse
    budgets make single passes a bin-packing gamble)."""
    check_feasibility(graph, chip)
    for _ in range(attempts):
        assignment = np.full(graph.n_neurons, -1, dtype=np.int64)
        neuron_load = np.zeros(chip.n_cores, dtype=np.int64)
        syn_load = np.zeros(chip.n_cores, dtype=np.int64)
        ok = True
        for node in rng.permutation(graph.n_neurons):
            need = int(graph.in_degree[node])
            for core in rng.permutation(chip.n_cores):
                if (
                    neuron_load[core] < chip.neurons_per_core
                    and syn_load[core] + need <= chip.synapses_per_core
                ):
                    assignment[node] = core
                    neuron_load[core] += 1
                    syn_load[core] += need
                    break
            else:
                ok = False
                break
        if ok:
            return Mapping(assignment=assignment, stats=compute_stats(assignment, graph))
    raise CapacityError("random placement failed to fit the network")


class _SearchState:
    """Incremental bookkeeping for move/swap deltas: per-node neighbor
    multisets, per-core loads, and per-(node, core) neighbor counts."""

    def __init__(self, assignment, graph, chip, cfg):
        self.a = assignment.copy()
        self.graph = graph
        self.chip = chip
        self.cfg = cfg
        n = graph.n_neurons
        self.neighbors: list[list[int]] = [[] for _ in range(n)]
        self.shared: list[dict[int, int]] = [{} for _ in range(n)]
        for pre, post in graph.edges:
            pre, post = int(pre), int(post)
            self.neighbors[pre].append(post)
            self.neighbors[post].append(pre)
            self.shared[pre][post] = self.shared[pre].get(post, 0) + 1
            self.shared[post][pre] = self.shared[post].get(pre, 0) + 1
        self.neuron_load = np.bincount(self.a, minlength=chip.n_cores)
        self.syn_load = np.bincount(
            self.a, weights=graph.in_degree, minlength=chip.n_cores
        ).astype(np.int64)
        # nb_core[i, c]: number of edge endpoints of node i living on core c
        self.nb_core = np.zeros((n, chip.n_cores), dtype=np.int64)
        for i in range(n):
            for nb in self.neighbors[i]:
                self.nb_core[i, self.a[nb]] += 1
        self.cut = int((self.a[graph.edges[:, 0]] != self.a[graph.edges[:, 1]]).sum()) \
            if graph.edges.size else 0

    def loss(self) -> float:
        cfg, chip, graph = self.cfg, self.chip, self.graph
        cores = int((self.neuron_load > 0).sum())
        traffic = self.cut / graph.n_synapses if graph.n_synapses else 0.0
        return (
            cfg.beta1 * cores / chip.n_cores
            + cfg.beta2 * traffic
            + cfg.beta3 * graph.n_synapses / chip.max_synapses
        )

    def move_deltas(self, node: int) -> np.ndarray:
        """Loss delta of moving `node` to every core; +inf where infeasible."""
        src = self.a[node]
        cfg, chip = self.cfg, self.chip
        d_cut = self.nb_core[node, src] - self.nb_core[node]
        d_cores = (self.neuron_load == 0).astype(np.float64)
        if self.neuron_load[src] == 1:
            d_cores -= 1.0
        deltas = cfg.beta1 * d_cores / chip.n_cores
        if self.graph.n_synapses:
            deltas = deltas + cfg.beta2 * d_cut / self.graph.n_synapses
        need = int(self.graph.in_degree[node])
        infeasible = (
            (self.neuron_load + 1 > chip.neurons_per_core)
            | (self.syn_load + need > chip.synapses_per_core)
        )
        deltas[infeasible] = np.inf
        deltas[src] = np.inf
        return deltas

    def apply_move(self, node: int, dst: int) -> None:
        src = self.a[node]
        need = int(self.graph.in_degree[node])
        self.cut += self.nb_core[node, src] - self.nb_core[node, dst]
        self.a[node] = dst
        self.neuron_load[src] -= 1
        self.neuron_load[dst] += 1
        self.syn_load[src] -= need
        self.syn_load[dst] += need
        for nb in self.neighbors[node]:
            self.nb_core[nb, src] -= 1
            self.nb_core[nb, dst] += 1

    def swap_deltas(self, i: int) -> np.ndarray:
        """Cut delta of swapping i with every other node; +inf where
        infeasible or on the same core. Swaps never change core counts."""
        a = self.a
        n = self.graph.n_neurons
        ci = a[i]
        nb = self.nb_core
        d_cut = (
            nb[i, ci]
            - nb[i, a]
            + nb[np.arange(n), a]
            - nb[:, ci]
        ).astype(np.float64)
        # edges between i and j look intra from both sides after the swap but
        # remain crossing: correct by 2 per shared edge
        for j, count in self.shared[i].items():
            d_cut[j] += 2 * count
        deltas = (
            self.cfg.beta2 * d_cut / self.graph.n_synapses
            if self.graph.n_synapses
            else np.zeros(n)
        )
        di = int(self.graph.in_degree[i])
        dj = self.graph.in_degree
        cap = self.chip.synapses_per_core
        infeasible = (
            (a == ci)
            | (self.syn_load[ci] - di + dj > cap)
            | (self.syn_load[a] - dj + di > cap)
        )
        deltas[infeasible] = np.inf
        return deltas

    def apply_swap(self, i: int, j: int) -> None:
        ci, cj = self.a[i], self.a[j]
        self.apply_move(i, cj)
        self.apply_move(j, ci)


def _local_search(assignment, graph, chip, cfg, budget: int) -> tuple[np.ndarray, int]:
    """Kernighan-Lin style descent: passes of best-improvement single moves,
    then pairwise swaps once moves stall; `budget` counts accepted changes."""
    st = _SearchState(assignment, graph, chip, cfg)
    used = budget
    improved = True
    while improved and used > 0:
        improved = False
        for node in range(graph.n_neurons):
            deltas = st.move_deltas(node)
            dst = int(np.argmin(deltas))
            if deltas[dst] < -1e-12:
                st.apply_move(node, dst)
                improved = True
                used -= 1
                if used <= 0:
                    return st.a, used
        if improved:
            continue
        # swap sweep: escapes capacity deadlocks single moves cannot
        for i in range(graph.n_neurons):
            deltas = st.swap_deltas(i)
            j = int(np.argmin(deltas))
            if deltas[j] < -1e-12:
                st.apply_swap(i, j)
                improved = True
                used -= 1
                if used <= 0:
                    return st.a, used
    return st.a, used


def map_optimize(
    net: NetworkTopology,
    chip: ChipModel,
    cfg: MapperConfig,
    init: Mapping,
) -> Mapping:
    """Refine a mapping by local search; never returns a worse mapping than
    `init`. Multi-restart from seeded random placements, best result wins."""
    graph = build_graph(net)
    validate_mapping(init, graph, chip)
    budget = cfg.max_iters
    best, budget = _local_search(init.assignment.astype(np.int64), graph, chip, cfg, budget)
    best_loss = _loss_from_arrays(best, graph, chip, cfg)
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.n_restarts):
        if budget <= 0:
            break
        try:
            start = random_valid_mapping(graph, chip, rng).assignment
        except CapacityError:
            continue  # capacities too tight for this shuffle; keep going
        cand, budget = _local_search(start, graph, chip, cfg, budget)
        cand_loss = _loss_from_arrays(cand, graph, chip, cfg)
        if cand_loss < best_loss - 1e-12:
            best, best_loss = cand, cand_loss
    init_loss = _loss_from_arrays(init.assignment, graph, chip, cfg)
    if best_loss > init_loss:
        best = init.assignment.astype(np.int64)
    mapping = Mapping(assignment=best, stats=compute_stats(best, graph))
    validate_mapping(mapping, graph, chip)
    return mapping


def utilization_report(mapping: Mapping, chip: ChipModel) -> dict:
    """Core, synaptic-memory, and inter-core-traffic utilization percentages."""
    s = mapping.stats
    if s is None:
        raise MappingError("mapping has no stats")
    degenerate = s.total_synapses == 0 and mapping.assignment.size == 0
    return {
        "core_utilization_pct": 100.0 * s.n_cores_used / chip.n_cores if not degenerate else 0.0,
        "memory_utilization_pct": (
            100.0 * s.synaptic_memory_used / chip.max_synapses if not degenerate else 0.0
        ),
        "inter_core_traffic_pct": (
            100.0 * s.inter_core_synapses / s.total_synapses if s.total_synapses else 0.0
        ),
        "cores_used": s.n_cores_used,
        "degenerate": degenerate,
    }


def cross_core_mask(graph: ConnectivityGraph, mapping: Mapping) -> np.ndarray:
    """Per-neuron flag: True where any outgoing synapse crosses cores, so every
    spike of that neuron must be routed off-core."""
    a = mapping.assignment
    mask = np.zeros(graph.n_neurons, dtype=bool)
    if graph.edges.size:
        crossing = a[graph.edges[:, 0]] != a[graph.edges[:, 1]]
        mask[graph.edges[crossing, 0]] = True
    return mask
