"""Four-configuration ablation on the desk-scale task.

Rows: rate-coding baseline -> hybrid encoding -> + optimized mapping ->
+ adaptive thresholds. Each row reports accuracy, spikes per inference, and
energy per inference; the pipeline stages are cumulative.
"""

from __future__ import annotations

from dataclasses import dataclass

from .adapt import AdaptConfig
from .datasets import build_desk_mlp, make_blobs
from .encoding import EncoderConfig
from .mapping import CHIP_PRESETS, ChipModel, MapperConfig, map_greedy, map_optimize
from .runner import encode_dataset, run_inference
from .training import TrainConfig, train


@dataclass
class AblationRow:
    config: str
    accuracy: float
    spikes_per_inference: float
    energy_per_inference: float


def _split(manifest, fraction=0.25):
    n = manifest.features.shape[0]
    cut = int(n * (1 - fraction))
    from .datasets import DatasetManifest

    return (
        DatasetManifest(manifest.features[:cut], manifest.labels[:cut], manifest.n_classes),
        DatasetManifest(manifest.features[cut:], manifest.labels[cut:], manifest.n_classes),
    )


def run_ablation(
    seed: int = 42,
    chip: ChipModel | None = None,
    n_samples: int = 160,
    epochs: int = 15,
    rate_timesteps: int = 80,
    hybrid_timesteps: int = 20,
) -> list[AblationRow]:
    chip = chip or CHIP_PRESETS["desk16"]
    data = make_blobs(n_samples=n_samples, n_features=16, n_classes=2, seed=seed)
    train_set, test_set = _split(data)
    mapper_cfg = MapperConfig(seed=seed)
    train_cfg = TrainConfig(epochs=epochs, seed=seed)
    adapt_cfg = AdaptConfig(a_target=0.5, gamma=1.0)

    rate_cfg = EncoderConfig(scheme="rate", n_timesteps=rate_timesteps, seed=seed)
    hybrid_cfg = EncoderConfig(
        scheme="hybrid", n_timesteps=hybrid_timesteps, alpha=0.25, seed=seed
    )

    rows: list[AblationRow] = []

    # Row 1: rate baseline, greedy mapping, fixed thresholds.
    net_rate = build_desk_mlp(n_timesteps=rate_timesteps, seed=seed)
    train(net_rate, encode_dataset(train_set, rate_cfg), chip, train_cfg,
          mapper_cfg=mapper_cfg)
    greedy_rate = map_greedy(net_rate, chip, mapper_cfg)
    rep, _, _ = run_inference(net_rate, test_set, rate_cfg, chip, mapping=greedy_rate)
    rows.append(AblationRow("rate baseline", rep.accuracy,
                            rep.spikes_per_inference, rep.energy_per_inference))

    # Row 2: + hybrid encoding (fewer timesteps at matched decode fidelity).
    net_hybrid = build_desk_mlp(n_timesteps=hybrid_timesteps, seed=seed)
    train(net_hybrid, encode_dataset(train_set, hybrid_cfg), chip, train_cfg,
          mapper_cfg=mapper_cfg)
    greedy_hybrid = map_greedy(net_hybrid, chip, mapper_cfg)
    rep, _, _ = run_inference(net_hybrid, test_set, hybrid_cfg, chip,
                              mapping=greedy_hybrid)
    rows.append(AblationRow("+ hybrid encoding", rep.accuracy,
                            rep.spikes_per_inference, rep.energy_per_inference))

    # Row 3: + optimized mapping (same net; cheaper cross-core traffic).
    optimized = map_optimize(net_hybrid, chip, mapper_cfg, greedy_hybrid)
    rep, _, _ = run_inference(net_hybrid, test_set, hybrid_cfg, chip, mapping=optimized)
    rows.append(AblationRow("+ hw-aware mapping", rep.accuracy,
                            rep.spikes_per_inference, rep.energy_per_inference))

    # Row 4: + adaptive thresholds.
    rep, _, _ = run_inference(net_hybrid, test_set, hybrid_cfg, chip,
                              mapping=optimized, adapt_cfg=adapt_cfg)
    rows.append(AblationRow("+ adaptive threshold", rep.accuracy,
                            rep.spikes_per_inference, rep.energy_per_inference))
    return rows


def render_ablation_table(rows: list[AblationRow]) -> str:
    lines = [
        "| configuration | accuracy (%) | spikes/inf | energy/inf (J) |",
        "|---|---|---|---|",
    ]
    for row in rows:
        lines.append(
            f"| {row.config} | {100 * row.accuracy:.1f} | "
            f"{row.spikes_per_inference:.1f} | {row.energy_per_inference:.4e} |"
        )
    return "\n".join(lines)
