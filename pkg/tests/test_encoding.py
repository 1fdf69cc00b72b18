"""Encoders and decoders: statistics, monotonicity, inversion, efficiency."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neuedge.encoding import (
    EncoderConfig,
    decode,
    decode_hybrid,
    decode_latency,
    decode_rate,
    encode,
    encode_hybrid,
    encode_latency,
    encode_rate,
    hybrid_first_crossing_time,
    hybrid_thresholds,
    spike_efficiency,
)
from neuedge.errors import EncodingError


def test_rate_counts_within_binomial_bounds():
    # Binomial(T, x) mean with 5-sigma slack; seeded so the draw is fixed
    cfg = EncoderConfig(scheme="rate", n_timesteps=2000, seed=0)
    x = np.array([0.1, 0.5, 0.9])
    counts = encode_rate(x, cfg).counts()
    for xi, c in zip(x, counts):
        sigma = np.sqrt(cfg.n_timesteps * xi * (1 - xi))
        assert abs(c - cfg.n_timesteps * xi) <= 5 * sigma


def test_rate_is_seed_deterministic():
    cfg = EncoderConfig(scheme="rate", n_timesteps=50, seed=9)
    x = np.array([0.3, 0.7])
    assert np.array_equal(encode_rate(x, cfg).events, encode_rate(x, cfg).events)


def test_rate_extremes():
    cfg = EncoderConfig(scheme="rate", n_timesteps=30, seed=1)
    tr = encode_rate(np.array([0.0, 1.0]), cfg)
    assert tr.counts()[0] == 0
    assert tr.counts()[1] == 30


def test_latency_spike_position():
    cfg = EncoderConfig(scheme="latency", n_timesteps=10)
    tr = encode_latency(np.array([0.0, 0.25, 1.0]), cfg)
    assert tr.counts()[0] == 0  # zero input never fires
    assert tr.counts()[1] == 1 and tr.events[8, 1] == 1  # ceil(10 * 0.75)
    assert tr.counts()[2] == 1 and tr.events[0, 2] == 1  # max input fires first


def test_latency_round_trip_monotone():
    cfg = EncoderConfig(scheme="latency", n_timesteps=40)
    xs = np.linspace(0.05, 1.0, 12)
    decoded = decode_latency(encode_latency(xs, cfg))
    assert (np.diff(decoded) >= 0).all()
    assert np.allclose(decoded, xs, atol=1.0 / cfg.n_timesteps)


def test_hybrid_threshold_modulation():
    cfg = EncoderConfig(alpha=0.25, v_th_base=1.0)
    th = hybrid_thresholds(np.array([0.0, 0.4, 1.0]), cfg)
    assert np.allclose(th, [1.0, 0.9, 0.75])


def test_hybrid_continuous_first_spike_strictly_decreasing():
    cfg = EncoderConfig(alpha=0.25)
    xs = np.linspace(0.05, 1.0, 50)
    times = [hybrid_first_crossing_time(float(x), cfg) for x in xs]
    assert all(a > b for a, b in zip(times, times[1:]))
    assert hybrid_first_crossing_time(0.0, cfg) == float("inf")


def test_hybrid_discrete_first_spike_weakly_decreasing():
    cfg = EncoderConfig(alpha=0.25, n_timesteps=64)
    xs = np.linspace(0.05, 1.0, 30)
    first = []
    for x in xs:
        tr = encode_hybrid(np.array([x]), cfg)
        ts = np.flatnonzero(tr.events[:, 0])
        first.append(ts[0])
    assert all(a >= b for a, b in zip(first, first[1:]))


def test_hybrid_decode_inverts_rate():
    # below the saturation point x < 1/(1+alpha) the decode error is O(1/T)
    cfg = EncoderConfig(alpha=0.25, n_timesteps=400)
    xs = np.linspace(0.05, 0.75, 15)
    decoded = decode_hybrid(encode_hybrid(xs, cfg), cfg)
    assert np.max(np.abs(decoded - xs)) <= 2.0 / cfg.n_timesteps / (1 - cfg.alpha)


def test_hybrid_uses_fewer_spikes_than_rate_at_matched_fidelity():
    rng = np.random.default_rng(0)
    xs = rng.uniform(0.1, 0.7, size=16)
    rate_cfg = EncoderConfig(scheme="rate", n_timesteps=800, seed=4)
    hyb_cfg = EncoderConfig(scheme="hybrid", n_timesteps=20, alpha=0.25)
    tr_rate = encode(xs, rate_cfg)
    tr_hyb = encode(xs, hyb_cfg)
    assert np.max(np.abs(decode(tr_rate, rate_cfg) - xs)) <= 0.1
    assert np.max(np.abs(decode(tr_hyb, hyb_cfg) - xs)) <= 0.1
    assert tr_rate.total_spikes >= 2 * tr_hyb.total_spikes


def test_encode_rejects_out_of_range():
    cfg = EncoderConfig()
    with pytest.raises(EncodingError):
        encode(np.array([1.2]), cfg)
    with pytest.raises(EncodingError):
        encode(np.array([-0.1]), cfg)
    with pytest.raises(EncodingError):
        encode(np.array([np.nan]), cfg)


def test_config_validation():
    with pytest.raises(EncodingError):
        EncoderConfig(scheme="morse")
    with pytest.raises(EncodingError):
        EncoderConfig(n_timesteps=0)
    with pytest.raises(EncodingError):
        EncoderConfig(alpha=1.0)


def test_mi_exact_one_bit():
    # two equiprobable input levels with disjoint count alphabets: exactly 1 bit
    cfg = EncoderConfig(scheme="hybrid", n_timesteps=20, alpha=0.25)
    inputs = np.array([[0.1]] * 8 + [[0.7]] * 8)
    trains = [encode(x, cfg) for x in inputs]
    rep = spike_efficiency(inputs, trains, bins=2)
    assert np.isclose(rep.mutual_info_bits, 1.0)
    assert rep.eta == pytest.approx(1.0 / rep.n_spikes)


def test_mi_bounded_by_log_bins():
    rng = np.random.default_rng(2)
    inputs = rng.uniform(0, 1, size=(40, 3))
    cfg = EncoderConfig(scheme="hybrid", n_timesteps=16)
    trains = [encode(x, cfg) for x in inputs]
    for bins in (2, 4, 8):
        rep = spike_efficiency(inputs, trains, bins=bins)
        assert 0.0 <= rep.mutual_info_bits <= np.log2(bins) + 1e-9


def test_efficiency_rejects_misaligned_or_empty():
    cfg = EncoderConfig(n_timesteps=4)
    tr = encode(np.array([0.5]), cfg)
    with pytest.raises(EncodingError):
        spike_efficiency(np.zeros((0, 1)), [], bins=4)
    with pytest.raises(EncodingError):
        spike_efficiency(np.array([[0.5], [0.6]]), [tr], bins=4)
    with pytest.raises(EncodingError):
        spike_efficiency(np.array([[0.5]]), [tr], bins=1)


@given(st.floats(0.0, 0.8), st.integers(1, 64))
@settings(max_examples=40, deadline=None)
def test_hybrid_rate_tracks_input(x, T):
    # below x = 1/(1+alpha) the coder is unsaturated (under 1 spike/step) and
    # fires at continuous rate x / (1 - alpha x); the count tracks within 1
    cfg = EncoderConfig(alpha=0.25, n_timesteps=T)
    tr = encode_hybrid(np.array([x]), cfg)
    expected = T * x / (1 - cfg.alpha * x)
    assert abs(int(tr.counts()[0]) - expected) <= 1.0


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8), st.integers(1, 30))
@settings(max_examples=40, deadline=None)
def test_decode_rate_bounded(xs, T):
    cfg = EncoderConfig(scheme="rate", n_timesteps=T, seed=0)
    decoded = decode_rate(encode_rate(np.array(xs), cfg))
    assert ((decoded >= 0) & (decoded <= 1)).all()
