"""Shared inference pipeline: encode a dataset, simulate, classify, account.

Used by the CLI run command and the ablation driver. Wall-clock stage
timings are collected but kept out of deterministic artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .adapt import AdaptConfig, run_adaptive
from .datasets import DatasetManifest
from .encoding import EncoderConfig, encode
from .energy import EnergyReport, StageTimer, account
from .errors import DimensionError, NeuEdgeError
from .mapping import ChipModel, Mapping, build_graph
from .snn import NetworkTopology, SimState, SpikeTrain, classify, is_confident, run_network


@dataclass
class RunReport:
    accuracy: float
    n_samples: int
    spikes_per_inference: float
    sops_per_inference: float
    energy_per_inference: float
    low_confidence: int
    latency_stages: dict = field(default_factory=dict)


def encode_dataset(
    manifest: DatasetManifest, cfg: EncoderConfig
) -> list[tuple[SpikeTrain, int]]:
    """Encode every sample; the rate coder's seed is offset per sample so
    noise patterns differ while staying reproducible."""
    out = []
    for idx, (x, label) in enumerate(zip(manifest.features, manifest.labels)):
        sample_cfg = replace(cfg, seed=cfg.seed + idx)
        out.append((encode(x, sample_cfg), int(label)))
    return out


def run_inference(
    net: NetworkTopology,
    manifest: DatasetManifest,
    enc_cfg: EncoderConfig,
    chip: ChipModel,
    mapping: Mapping | None = None,
    adapt_cfg: AdaptConfig | None = None,
) -> tuple[RunReport, EnergyReport, list]:
    """Encode + simulate + classify every sample; returns the run report, an
    aggregate energy report, and (if adaptive) the activity trajectory."""
    if manifest.features.shape[0] == 0:
        raise NeuEdgeError("empty test set")
    if manifest.n_features != net.n_in:
        raise DimensionError(
            f"dataset has {manifest.n_features} features, network expects {net.n_in}"
        )
    timer = StageTimer()
    graph = build_graph(net) if mapping is not None else None

    n = manifest.features.shape[0]
    correct = 0
    low_confidence = 0
    total_sop = 0
    total_updates = 0
    input_counts = np.zeros(net.n_in, dtype=np.int64)
    layer_counts = [np.zeros(l.n_out, dtype=np.int64) for l in net.layers]
    trajectory: list = []

    for idx in range(n):
        x, label = manifest.features[idx], int(manifest.labels[idx])
        with timer.timed("encode"):
            train_in = encode(x, replace(enc_cfg, seed=enc_cfg.seed + idx))
        with timer.timed("network"):
            if adapt_cfg is not None:
                out, info = run_adaptive(net, train_in, adapt_cfg)
                state = info.state
                trajectory.extend(info.trajectory)
            else:
                out, state = run_network(net, train_in)
        with timer.timed("decode"):
            pred = classify(out)
        correct += pred == label
        low_confidence += not is_confident(out)
        total_sop += state.sop_count
        total_updates += state.n_updates
        input_counts += state.input_spike_counts
        for k in range(len(net.layers)):
            layer_counts[k] += state.layer_spike_counts[k]

    combined = SimState(
        v=[],
        layer_spike_counts=layer_counts,
        input_spike_counts=input_counts,
        sop_count=total_sop,
        n_updates=total_updates,
    )
    energy = account(combined, chip, timings=timer.stages, mapping=mapping, graph=graph)
    report = RunReport(
        accuracy=correct / n,
        n_samples=n,
        spikes_per_inference=energy.n_spikes / n,
        sops_per_inference=energy.n_sop / n,
        energy_per_inference=energy.e_total / n,
        low_confidence=low_confidence,
        latency_stages=dict(timer.stages),
    )
    return report, energy, trajectory
