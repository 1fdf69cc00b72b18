"""Event-driven energy and latency accounting.

Total energy is linear in event counts:

    E_total = e_sop * N_SOP + e_spike * N_spikes

With a mapping supplied, spikes of neurons whose fan-out crosses cores are
charged e_spike * inter_core_cost instead of e_spike. Optional neuron-update
and routing terms (default 0) extend the breakdown; without them the two-term
identity above holds exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NeuEdgeError
from .mapping import ChipModel, ConnectivityGraph, Mapping, cross_core_mask
from .snn import SimState

# GOp/s/W accounting counts 2 ops per SOP (accumulate + threshold compare);
# stated in every rendered report header.
OPS_PER_SOP = 2


@dataclass
class EnergyReport:
    n_sop: int
    n_spikes: int
    e_total: float  # joules
    breakdown: dict = field(default_factory=dict)  # component -> joules
    efficiency_gops_w: float | None = None
    latency_stages: dict = field(default_factory=dict)  # stage -> seconds


def account(
    sim: SimState,
    chip: ChipModel,
    timings: dict | None = None,
    mapping: Mapping | None = None,
    graph: ConnectivityGraph | None = None,
) -> EnergyReport:
    """Apply the linear event-energy model to a finished simulation."""
    n_sop = int(sim.sop_count)
    n_spikes = sim.total_spikes
    e_syn = chip.e_sop * n_sop

    if mapping is not None:
        if graph is None:
            raise NeuEdgeError("cross-core accounting needs the connectivity graph")
        counts = sim.neuron_spike_counts
        if counts.shape[0] != graph.n_neurons:
            raise NeuEdgeError(
                f"sim covers {counts.shape[0]} neurons, graph has {graph.n_neurons}"
            )
        inter = int(counts[cross_core_mask(graph, mapping)].sum())
        intra = n_spikes - inter
        e_comm = chip.e_spike * (intra + chip.inter_core_cost * inter)
        e_route = chip.e_route * inter
    else:
        e_comm = chip.e_spike * n_spikes
        e_route = 0.0

    breakdown = {"synaptic_ops": e_syn, "spike_communication": e_comm}
    if chip.e_update:
        breakdown["neuron_updates"] = chip.e_update * sim.n_updates
    if e_route:
        breakdown["routing_overhead"] = e_route
    e_total = float(sum(breakdown.values()))

    latency = dict(timings) if timings else {}
    efficiency = None
    wall = sum(latency.values())
    if wall > 0 and e_total > 0:
        # implied_power = e_total / wall; efficiency = 2*n_sop / (wall * implied_power)
        efficiency = (OPS_PER_SOP * n_sop) / e_total / 1e9  # GOp/s/W == GOp/J

    return EnergyReport(
        n_sop=n_sop,
        n_spikes=n_spikes,
        e_total=e_total,
        breakdown=breakdown,
        efficiency_gops_w=efficiency,
        latency_stages=latency,
    )


def _ratio(ref: float, val: float) -> str:
    if val == 0:
        return "undefined"
    return f"{ref / val:.2f}x"


def compare(reports: list[EnergyReport], labels: list[str]) -> str:
    """Markdown table of reports with reduction ratios relative to the first."""
    if len(reports) < 2:
        raise NeuEdgeError("compare needs at least 2 reports")
    if len(reports) != len(labels):
        raise NeuEdgeError("labels must match reports one-to-one")
    ref = reports[0]
    lines = [
        f"GOp/s/W counts {OPS_PER_SOP} ops per SOP (accumulate + compare).",
        "",
        "| config | SOPs | spikes | energy (J) | spike ratio | energy ratio |",
        "|---|---|---|---|---|---|",
    ]
    for rep, label in zip(reports, labels):
        lines.append(
            f"| {label} | {rep.n_sop} | {rep.n_spikes} | {rep.e_total:.6e} "
            f"| {_ratio(ref.n_spikes, rep.n_spikes)} | {_ratio(ref.e_total, rep.e_total)} |"
        )
    return "\n".join(lines)


class StageTimer:
    """Accumulates wall-clock durations per pipeline stage."""

    def __init__(self):
        self.stages: dict[str, float] = {}

    def add(self, stage: str, seconds: float) -> None:
        self.stages[stage] = self.stages.get(stage, 0.0) + seconds

    def timed(self, stage: str):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.add(stage, time.perf_counter() - self.t0)
                return False

        return _Ctx()
