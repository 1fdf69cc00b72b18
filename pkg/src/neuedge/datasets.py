"""Bundled synthetic dataset generators and desk-scale network presets.

The generators stand in for the full-scale vision/audio pipelines: separable
Gaussian blobs for classifier training, and a noisy-glyph generator (random
fixed prototypes + noise) as a downscaled digit-style image source.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .snn import (
    NetworkTopology,
    NeuronParams,
    conv2d_layer,
    dense_layer,
    pool2x2_layer,
)
from .training import init_weights


@dataclass
class DatasetManifest:
    features: np.ndarray  # (n_samples, n_features) in [0, 1]
    labels: np.ndarray  # (n_samples,) in [0, n_classes)
    n_classes: int

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def make_blobs(
    n_samples: int = 200,
    n_features: int = 16,
    n_classes: int = 2,
    spread: float = 0.08,
    seed: int = 0,
) -> DatasetManifest:
    """Well-separated Gaussian blobs, one per class, clipped to [0, 1]."""
    rng = np.random.default_rng(seed)
    lo, hi = 0.25, 0.75
    centers = np.zeros((n_classes, n_features))
    for c in range(n_classes):
        base = lo + (hi - lo) * c / max(n_classes - 1, 1)
        centers[c] = np.clip(base + rng.uniform(-0.08, 0.08, n_features), 0.05, 0.95)
    labels = rng.integers(0, n_classes, size=n_samples)
    features = np.clip(
        centers[labels] + rng.normal(0.0, spread, size=(n_samples, n_features)), 0.0, 1.0
    )
    return DatasetManifest(features=features, labels=labels, n_classes=n_classes)


def make_glyphs(
    n_samples: int = 200,
    n_classes: int = 10,
    shape: tuple[int, int] = (8, 8),
    noise: float = 0.08,
    seed: int = 0,
) -> DatasetManifest:
    """Digit-style images: fixed random prototypes per class plus pixel noise."""
    rng = np.random.default_rng(seed)
    n_pix = shape[0] * shape[1]
    prototypes = np.where(rng.random((n_classes, n_pix)) > 0.55, 0.85, 0.1)
    labels = rng.integers(0, n_classes, size=n_samples)
    features = np.clip(
        prototypes[labels] + rng.normal(0.0, noise, size=(n_samples, n_pix)), 0.0, 1.0
    )
    return DatasetManifest(features=features, labels=labels, n_classes=n_classes)


def build_desk_mlp(
    n_features: int = 16,
    n_classes: int = 2,
    hidden: int = 16,
    n_timesteps: int = 20,
    seed: int = 0,
) -> NetworkTopology:
    """Small fully-connected network (FC stack scaled down from the large
    vision/audio configurations). The 0.5 threshold keeps units active under
    the zero-mean weight init so surrogate gradients flow from the start."""
    params = NeuronParams(beta=0.9, v_th_base=0.5)
    layers = [
        dense_layer(np.zeros((hidden, n_features)), params),
        dense_layer(np.zeros((n_classes, hidden)), params),
    ]
    net = NetworkTopology(layers=layers, n_timesteps=n_timesteps)
    init_weights(net, seed)
    return net


def _uniform_init(rng: np.random.Generator, shape: tuple, fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def build_desk_cnn(
    in_shape: tuple[int, int, int] = (1, 8, 8),
    n_channels: int = 8,
    n_classes: int = 10,
    hidden: int = 64,
    n_timesteps: int = 20,
    seed: int = 0,
) -> NetworkTopology:
    """conv 8@3x3 -> pool 2x2 -> dense 64 -> output, at desk width."""
    params = NeuronParams(beta=0.9, v_th_base=1.0)
    rng = np.random.default_rng(seed)
    c, h, w = in_shape
    k = 3
    oh, ow = h - k + 1, w - k + 1
    if oh % 2 or ow % 2:
        raise ConfigError(f"conv output {oh}x{ow} must be even for 2x2 pooling")
    kernels = _uniform_init(rng, (n_channels, c, k, k), fan_in=c * k * k)
    conv = conv2d_layer(kernels, in_shape, params)
    pool = pool2x2_layer((n_channels, oh, ow))
    layers = [
        conv,
        pool,
        dense_layer(_uniform_init(rng, (hidden, pool.n_out), pool.n_out), params),
        dense_layer(_uniform_init(rng, (n_classes, hidden), hidden), params),
    ]
    return NetworkTopology(layers=layers, n_timesteps=n_timesteps)


def build_preset_network(
    name: str, n_features: int, n_classes: int, n_timesteps: int, seed: int
) -> NetworkTopology:
    if name == "desk-mlp":
        return build_desk_mlp(
            n_features=n_features, n_classes=n_classes, n_timesteps=n_timesteps, seed=seed
        )
    if name == "desk-cnn":
        side = int(round(np.sqrt(n_features)))
        if side * side != n_features:
            raise ConfigError(
                f"desk-cnn needs a square feature count, got {n_features}"
            )
        return build_desk_cnn(
            in_shape=(1, side, side), n_classes=n_classes,
            n_timesteps=n_timesteps, seed=seed,
        )
    raise ConfigError(f"unknown network preset {name!r} (try desk-mlp or desk-cnn)")
