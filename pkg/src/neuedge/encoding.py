"""Spike encoders: rate, latency, and hybrid threshold-modulated coding.

The hybrid scheme drives a per-channel integrator with a constant current
proportional to the input while lowering that channel's threshold as

    v_th_i = v_th_base * (1 - alpha * x_i)

so larger inputs fire earlier (temporal code) and more often (rate code).
Spike efficiency is mutual information per spike, estimated with a plug-in
histogram estimator over (discretized input, per-channel spike count) pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EncodingError
from .snn import SpikeTrain

SCHEMES = ("rate", "latency", "hybrid")


@dataclass(frozen=True)
class EncoderConfig:
    scheme: str = "hybrid"
    n_timesteps: int = 20
    alpha: float = 0.25
    v_th_base: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise EncodingError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.n_timesteps < 1:
            raise EncodingError(f"n_timesteps must be >= 1, got {self.n_timesteps}")
        if not (0.0 <= self.alpha < 1.0):
            raise EncodingError(f"alpha must be in [0, 1), got {self.alpha}")
        if self.v_th_base <= 0.0:
            raise EncodingError(f"v_th_base must be > 0, got {self.v_th_base}")


@dataclass(frozen=True)
class EfficiencyReport:
    mutual_info_bits: float
    n_spikes: int
    eta: float  # bits per spike


def _validate_input(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    bad = np.flatnonzero((x < 0.0) | (x > 1.0) | ~np.isfinite(x))
    if bad.size:
        raise EncodingError(f"inputs outside [0, 1] at indices {bad[:10].tolist()}")
    return x


def encode_rate(x: np.ndarray, cfg: EncoderConfig) -> SpikeTrain:
    """Bernoulli(x_i) spikes per channel per timestep, seeded."""
    x = _validate_input(x)
    rng = np.random.default_rng(cfg.seed)
    events = (rng.random((cfg.n_timesteps, x.size)) < x).astype(np.uint8)
    return SpikeTrain(events)


def encode_latency(x: np.ndarray, cfg: EncoderConfig) -> SpikeTrain:
    """Single spike per channel at t = ceil(T*(1-x)), clamped; x=0 never fires."""
    x = _validate_input(x)
    T = cfg.n_timesteps
    events = np.zeros((T, x.size), dtype=np.uint8)
    for i, xi in enumerate(x):
        if xi > 0.0:
            t = min(int(np.ceil(T * (1.0 - xi))), T - 1)
            events[t, i] = 1
    return SpikeTrain(events)


def hybrid_thresholds(x: np.ndarray, cfg: EncoderConfig) -> np.ndarray:
    th = cfg.v_th_base * (1.0 - cfg.alpha * x)
    if np.any(th <= 0.0):
        raise EncodingError(
            f"modulated threshold <= 0 (alpha={cfg.alpha} too large for this input)"
        )
    return th


def hybrid_first_crossing_time(x: float, cfg: EncoderConfig) -> float:
    """Continuous-time first threshold crossing of the hybrid integrator, in steps.

    Strictly decreasing in x over (0, 1]; the discrete first-spike time is
    its ceiling and therefore only weakly decreasing.
    """
    if x <= 0.0:
        return float("inf")
    return (1.0 - cfg.alpha * x) / x


def encode_hybrid(x: np.ndarray, cfg: EncoderConfig) -> SpikeTrain:
    x = _validate_input(x)
    th = hybrid_thresholds(x, cfg)
    drive = cfg.v_th_base * x  # gain chosen so x=1 crosses an unmodulated threshold in one step
    v = np.zeros_like(x)
    events = np.zeros((cfg.n_timesteps, x.size), dtype=np.uint8)
    for t in range(cfg.n_timesteps):
        v += drive
        fired = v >= th
        events[t] = fired
        v -= th * fired
    return SpikeTrain(events)


def encode(x: np.ndarray, cfg: EncoderConfig) -> SpikeTrain:
    if cfg.scheme == "rate":
        return encode_rate(x, cfg)
    if cfg.scheme == "latency":
        return encode_latency(x, cfg)
    return encode_hybrid(x, cfg)


def decode_rate(train: SpikeTrain) -> np.ndarray:
    """Per-channel spike count / T."""
    return train.counts() / float(train.n_timesteps)


def decode_hybrid(train: SpikeTrain, cfg: EncoderConfig) -> np.ndarray:
    """Invert the hybrid integrator's spike rate r = x / (1 - alpha*x)."""
    r = decode_rate(train)
    return r / (1.0 + cfg.alpha * r)


def decode_latency(train: SpikeTrain) -> np.ndarray:
    T = train.n_timesteps
    out = np.zeros(train.n_neurons)
    for i in range(train.n_neurons):
        ts = np.flatnonzero(train.events[:, i])
        if ts.size:
            out[i] = 1.0 - ts[0] / T
    return out


def decode(train: SpikeTrain, cfg: EncoderConfig) -> np.ndarray:
    if cfg.scheme == "rate":
        return decode_rate(train)
    if cfg.scheme == "latency":
        return decode_latency(train)
    return decode_hybrid(train, cfg)


def _plugin_mi_bits(xs: np.ndarray, ys: np.ndarray) -> float:
    """Plug-in mutual information (bits) between two discrete samples."""
    xv, xi = np.unique(xs, return_inverse=True)
    yv, yi = np.unique(ys, return_inverse=True)
    joint = np.zeros((xv.size, yv.size))
    np.add.at(joint, (xi, yi), 1.0)
    joint /= joint.sum()
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    nz = joint > 0
    return float(np.sum(joint[nz] * np.log2(joint[nz] / (px @ py)[nz])))


def spike_efficiency(
    inputs: np.ndarray,
    trains: list[SpikeTrain],
    bins: int,
) -> EfficiencyReport:
    """Bits per spike: per-channel plug-in MI between binned inputs and spike
    counts, averaged over channels, divided by the total spike count."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    if inputs.shape[0] == 0 or not trains:
        raise EncodingError("empty sample")
    if inputs.shape[0] != len(trains):
        raise EncodingError(
            f"{inputs.shape[0]} inputs vs {len(trains)} trains: must align one-to-one"
        )
    if bins < 2:
        raise EncodingError(f"bins must be >= 2, got {bins}")
    n_channels = inputs.shape[1]
    counts = np.stack([tr.counts() for tr in trains])  # (n_samples, n_channels)
    # bin edges over [0, 1]; right edge inclusive
    binned = np.minimum((inputs * bins).astype(np.int64), bins - 1)
    mi = np.mean([_plugin_mi_bits(binned[:, c], counts[:, c]) for c in range(n_channels)])
    n_spikes = int(counts.sum())
    eta = mi / n_spikes if n_spikes > 0 else 0.0
    return EfficiencyReport(mutual_info_bits=float(mi), n_spikes=n_spikes, eta=float(eta))
