"""File formats: networks, spike trains, mappings, datasets, CSV reports.

All writes are atomic (temp file + rename) so interrupted runs never leave
truncated artifacts. Text formats are line-oriented and diffable; floats are
serialized with repr() so load -> save round-trips byte-identically.
"""

from __future__ import annotations

import csv
import io
import os
import struct
import tempfile

import numpy as np

from .errors import ConfigError
from .mapping import Mapping, compute_stats, ConnectivityGraph
from .snn import LayerSpec, NetworkTopology, NeuronParams, SpikeTrain

NETWORK_MAGIC = "# neuedge network v1"
DATASET_MAGIC = "# neuedge dataset v1"
DATASET_BIN_MAGIC = b"NEDGDS1\x00"
SPIKES_MAGIC_PREFIX = "# neurons="


def atomic_write(path: str, data: str | bytes) -> None:
    mode = "wb" if isinstance(data, bytes) else "w"
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------- spike trains


def save_spike_train(train: SpikeTrain, path: str) -> None:
    lines = [f"# neurons={train.n_neurons} timesteps={train.n_timesteps}"]
    ts, ns = np.nonzero(train.events)
    lines.extend(f"{t} {n}" for t, n in zip(ts, ns))
    atomic_write(path, "\n".join(lines) + "\n")


def load_spike_train(path: str) -> SpikeTrain:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith(SPIKES_MAGIC_PREFIX):
            raise ConfigError(f"{path}:1: expected spike-train header, got {header!r}")
        try:
            n = int(header.split("neurons=")[1].split()[0])
            t = int(header.split("timesteps=")[1].split()[0])
        except (IndexError, ValueError) as exc:
            raise ConfigError(f"{path}:1: malformed header: {header!r}") from exc
        events = np.zeros((t, n), dtype=np.uint8)
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                ti, ni = (int(v) for v in line.split())
                events[ti, ni] = 1
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"{path}:{lineno}: bad event line {line!r}") from exc
    return SpikeTrain(events)


# ------------------------------------------------------------------- networks


def save_network(net: NetworkTopology, path: str) -> None:
    out = [NETWORK_MAGIC, "[meta]", "version = 1",
           f"n_layers = {len(net.layers)}", f"n_timesteps = {net.n_timesteps}"]
    for k, layer in enumerate(net.layers):
        out.append(f"[layer {k}]")
        out.append(f"kind = {layer.kind}")
        out.append(f"n_in = {layer.n_in}")
        out.append(f"n_out = {layer.n_out}")
        for key in ("in_shape", "out_shape"):
            if key in layer.meta:
                out.append(f"{key} = {','.join(str(v) for v in layer.meta[key])}")
        if "kernel_size" in layer.meta:
            out.append(f"kernel_size = {layer.meta['kernel_size']}")
        if layer.params is not None:
            p = layer.params
            out.append(f"beta = {_fmt(p.beta)}")
            out.append(f"v_th_base = {_fmt(p.v_th_base)}")
            out.append(f"v_reset = {_fmt(p.v_reset)}")
            out.append(f"reset_mode = {p.reset_mode}")
        if layer.weights is not None:
            out.append(f"[weights {k}]")
            for row in layer.weights:
                out.append(" ".join(_fmt(v) for v in row))
    atomic_write(path, "\n".join(out) + "\n")


def load_network(net_path: str) -> NetworkTopology:
    with open(net_path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != NETWORK_MAGIC:
        raise ConfigError(f"{net_path}:1: not a neuedge network file")

    sections: list[tuple[str, int, list[str]]] = []
    current: list[str] | None = None
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        if line.startswith("["):
            current = []
            sections.append((line.strip("[]"), lineno, current))
        elif current is not None:
            current.append(line)
        else:
            raise ConfigError(f"{net_path}:{lineno}: content before first section")

    def parse_kv(name, lineno, body):
        kv = {}
        for ln in body:
            if "=" not in ln:
                raise ConfigError(f"{net_path}: section [{name}]: bad line {ln!r}")
            key, _, val = ln.partition("=")
            kv[key.strip()] = val.strip()
        return kv

    meta = None
    layer_kv: dict[int, dict] = {}
    weight_rows: dict[int, list[str]] = {}
    for name, lineno, body in sections:
        if name == "meta":
            meta = parse_kv(name, lineno, body)
        elif name.startswith("layer "):
            layer_kv[int(name.split()[1])] = parse_kv(name, lineno, body)
        elif name.startswith("weights "):
            weight_rows[int(name.split()[1])] = body
        else:
            raise ConfigError(f"{net_path}:{lineno}: unknown section [{name}]")
    if meta is None:
        raise ConfigError(f"{net_path}: missing [meta] section")

    try:
        n_layers = int(meta["n_layers"])
        n_timesteps = int(meta["n_timesteps"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{net_path}: section [meta]: {exc}") from exc

    layers = []
    for k in range(n_layers):
        if k not in layer_kv:
            raise ConfigError(f"{net_path}: missing section [layer {k}]")
        kv = layer_kv[k]
        try:
            kind = kv["kind"]
            n_in, n_out = int(kv["n_in"]), int(kv["n_out"])
            meta_d = {}
            for key in ("in_shape", "out_shape"):
                if key in kv:
                    meta_d[key] = tuple(int(v) for v in kv[key].split(","))
            if "kernel_size" in kv:
                meta_d["kernel_size"] = int(kv["kernel_size"])
            if kind == "pool2x2":
                layers.append(LayerSpec(kind=kind, n_in=n_in, n_out=n_out, meta=meta_d))
                continue
            params = NeuronParams(
                beta=float(kv["beta"]),
                v_th_base=float(kv["v_th_base"]),
                v_reset=float(kv["v_reset"]),
                reset_mode=kv["reset_mode"],
            )
            rows = weight_rows.get(k)
            if rows is None:
                raise ConfigError(f"{net_path}: missing section [weights {k}]")
            weights = np.array([[float(v) for v in row.split()] for row in rows])
            layers.append(
                LayerSpec(kind=kind, n_in=n_in, n_out=n_out, weights=weights,
                          params=params, meta=meta_d)
            )
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"{net_path}: section [layer {k}]: {exc}") from exc
    return NetworkTopology(layers=layers, n_timesteps=n_timesteps)


# ------------------------------------------------------------------- mappings


def save_mapping(mapping: Mapping, path: str) -> None:
    lines = [f"{i} {int(c)}" for i, c in enumerate(mapping.assignment)]
    atomic_write(path, "\n".join(lines) + "\n")


def load_mapping(path: str, graph: ConnectivityGraph | None = None) -> Mapping:
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                nid, core = (int(v) for v in line.split())
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad mapping line {line!r}") from exc
            pairs.append((nid, core))
    if not pairs:
        raise ConfigError(f"{path}: empty mapping file")
    n = max(nid for nid, _ in pairs) + 1
    assignment = np.full(n, -1, dtype=np.int64)
    for nid, core in pairs:
        assignment[nid] = core
    if (assignment < 0).any():
        raise ConfigError(f"{path}: mapping does not cover every neuron 0..{n - 1}")
    stats = compute_stats(assignment, graph) if graph is not None else None
    return Mapping(assignment=assignment, stats=stats)


# ------------------------------------------------------------------- datasets


def save_dataset_text(features: np.ndarray, labels: np.ndarray, n_classes: int,
                      path: str) -> None:
    n, f = features.shape
    lines = [DATASET_MAGIC, f"# n_features={f} n_classes={n_classes} range=0,1"]
    for label, row in zip(labels, features):
        lines.append(",".join([str(int(label))] + [_fmt(v) for v in row]))
    atomic_write(path, "\n".join(lines) + "\n")


def save_dataset_binary(features: np.ndarray, labels: np.ndarray, n_classes: int,
                        path: str) -> None:
    n, f = features.shape
    buf = io.BytesIO()
    buf.write(DATASET_BIN_MAGIC)
    buf.write(struct.pack("<III", n, f, n_classes))
    for label, row in zip(labels, features):
        buf.write(struct.pack("<I", int(label)))
        buf.write(struct.pack(f"<{f}d", *row))
    atomic_write(path, buf.getvalue())


def load_dataset(path: str) -> tuple[np.ndarray, np.ndarray, int]:
    """Returns (features, labels, n_classes); dispatches on file magic."""
    with open(path, "rb") as fh:
        head = fh.read(len(DATASET_BIN_MAGIC))
    if head == DATASET_BIN_MAGIC:
        return _load_dataset_binary(path)
    return _load_dataset_text(path)


def _load_dataset_binary(path: str):
    with open(path, "rb") as fh:
        fh.read(len(DATASET_BIN_MAGIC))
        n, f, n_classes = struct.unpack("<III", fh.read(12))
        features = np.zeros((n, f))
        labels = np.zeros(n, dtype=np.int64)
        for i in range(n):
            (labels[i],) = struct.unpack("<I", fh.read(4))
            features[i] = struct.unpack(f"<{f}d", fh.read(8 * f))
    _validate_dataset(features, labels, n_classes, path)
    return features, labels, n_classes


def _load_dataset_text(path: str):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != DATASET_MAGIC:
        raise ConfigError(f"{path}:1: not a neuedge dataset file")
    try:
        meta = lines[1]
        f = int(meta.split("n_features=")[1].split()[0])
        n_classes = int(meta.split("n_classes=")[1].split()[0])
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"{path}:2: malformed dataset metadata") from exc
    labels, rows = [], []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != f + 1:
            raise ConfigError(
                f"{path}:{lineno}: expected {f + 1} comma-separated fields, got {len(parts)}"
            )
        try:
            labels.append(int(parts[0]))
            rows.append([float(v) for v in parts[1:]])
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value: {exc}") from exc
    features = np.array(rows) if rows else np.zeros((0, f))
    labels = np.array(labels, dtype=np.int64)
    _validate_dataset(features, labels, n_classes, path)
    return features, labels, n_classes


def _validate_dataset(features, labels, n_classes, path):
    if features.size and (features.min() < 0.0 or features.max() > 1.0):
        raise ConfigError(f"{path}: features outside declared range [0, 1]")
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ConfigError(f"{path}: labels outside [0, {n_classes})")


# --------------------------------------------------------------------- tables


def save_history_csv(history: list[dict], path: str) -> None:
    cols = ["epoch", "task_loss", "hw_loss", "total", "train_acc", "val_acc",
            "spikes_per_inference"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in history:
        writer.writerow([row[c] for c in cols])
    atomic_write(path, buf.getvalue())


def save_kv_csv(rows: dict, path: str) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key, value in rows.items():
        writer.writerow([key, value])
    atomic_write(path, buf.getvalue())


def load_kv_csv(path: str) -> dict:
    out = {}
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["key", "value"]:
            raise ConfigError(f"{path}: not a key,value report file")
        for row in reader:
            if len(row) == 2:
                out[row[0]] = row[1]
    return out
