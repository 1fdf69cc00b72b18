"""Command-line front end: train / map / run / report / show-config.

Exit codes: 0 success, 1 usage or config error, 2 computation error.
Artifacts written under --out are deterministic for a fixed seed; wall-clock
stage timings and implied GOp/s/W are printed to stdout only, since they
vary run to run.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import netio
from .ablation import render_ablation_table
from .config import RunConfig, derive_seed
from .datasets import DatasetManifest, build_preset_network
from .errors import ConfigError, NeuEdgeError
from .mapping import (
    build_graph,
    hw_loss,
    map_greedy,
    map_optimize,
    utilization_report,
)
from .runner import encode_dataset, run_inference
from .training import evaluate, train


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors -> exit code 1
        raise ConfigError(message)


def _add_common(sub):
    sub.add_argument("--config", default=None, help="config file path")
    sub.add_argument("--seed", default=None, help="global seed override")
    sub.add_argument("--chip", default=None, help="chip preset name or chip file")
    sub.add_argument("--out", default=None, help="output directory")
    sub.add_argument("--adaptive", default=None, choices=["on", "off"])
    sub.add_argument("--dataset", default=None, help="dataset file path")
    sub.add_argument("--network", default=None, help="network preset or file")
    sub.add_argument("--mapping", default=None, help="mapping file path")


def _load_runconfig(args) -> RunConfig:
    overrides = {
        "seed": args.seed,
        "chip": args.chip,
        "out": args.out,
        "adaptive": args.adaptive,
        "dataset": args.dataset,
        "network": args.network,
        "mapping": args.mapping,
    }
    return RunConfig.load(args.config, overrides)


def _load_manifest(cfg: RunConfig) -> DatasetManifest:
    path = cfg.values["dataset"]
    if not path:
        raise ConfigError("no dataset configured: set `dataset = PATH` or pass --dataset")
    if not os.path.exists(path):
        raise ConfigError(f"dataset file not found: {path}")
    features, labels, n_classes = netio.load_dataset(path)
    if features.shape[0] == 0:
        raise NeuEdgeError(f"dataset {path} contains no samples")
    return DatasetManifest(features=features, labels=labels, n_classes=n_classes)


def _resolve_network(cfg: RunConfig, manifest: DatasetManifest | None):
    name = cfg.values["network"]
    if os.path.exists(name):
        return netio.load_network(name)
    n_features = manifest.n_features if manifest else 16
    n_classes = manifest.n_classes if manifest else 2
    enc = cfg.encoder_config()
    return build_preset_network(
        name, n_features, n_classes, enc.n_timesteps, derive_seed(cfg.seed, "trainer")
    )


def _split(manifest: DatasetManifest, fraction: float, seed: int):
    rng = np.random.default_rng(seed)
    order = rng.permutation(manifest.features.shape[0])
    cut = int(len(order) * (1 - fraction))
    tr, va = order[:cut], order[cut:]
    return (
        DatasetManifest(manifest.features[tr], manifest.labels[tr], manifest.n_classes),
        DatasetManifest(manifest.features[va], manifest.labels[va], manifest.n_classes),
    )


def cmd_train(args) -> int:
    cfg = _load_runconfig(args)
    manifest = _load_manifest(cfg)
    chip = cfg.chip()
    net = _resolve_network(cfg, manifest)
    enc_cfg = cfg.encoder_config()
    train_set, val_set = _split(manifest, float(cfg.values["val_fraction"]),
                                derive_seed(cfg.seed, "split"))
    encoded_train = encode_dataset(train_set, enc_cfg)
    encoded_val = encode_dataset(val_set, enc_cfg)

    net, mapping, history = train(
        net, encoded_train, chip, cfg.train_config(),
        mapper_cfg=cfg.mapper_config(), val_data=encoded_val,
    )

    out = cfg.out_dir
    netio.save_network(net, os.path.join(out, "network.txt"))
    netio.save_mapping(mapping, os.path.join(out, "mapping.txt"))
    netio.save_history_csv(history, os.path.join(out, "history.csv"))

    rep, _, _ = run_inference(net, val_set, enc_cfg, chip, mapping=mapping)
    from .ablation import AblationRow

    row = AblationRow(f"{enc_cfg.scheme} (trained)", rep.accuracy,
                      rep.spikes_per_inference, rep.energy_per_inference)
    netio.atomic_write(os.path.join(out, "summary.md"),
                       render_ablation_table([row]) + "\n")
    print(f"trained {cfg.values['network']} for {len(history)} epochs; "
          f"val accuracy {rep.accuracy:.3f}; artifacts in {out}/")
    return 0


def cmd_map(args) -> int:
    cfg = _load_runconfig(args)
    chip = cfg.chip()
    name = cfg.values["network"]
    if not os.path.exists(name) and name not in ("desk-mlp", "desk-cnn"):
        raise ConfigError(f"network file not found: {name}")
    net = _resolve_network(cfg, None)
    mapper_cfg = cfg.mapper_config()
    mapping = map_optimize(net, chip, mapper_cfg, map_greedy(net, chip, mapper_cfg))

    out = cfg.out_dir
    netio.save_mapping(mapping, os.path.join(out, "mapping.txt"))
    util = utilization_report(mapping, chip)
    util["hw_loss"] = hw_loss(mapping, chip, mapper_cfg)
    netio.save_kv_csv(util, os.path.join(out, "utilization.csv"))
    print(f"mapped {mapping.assignment.size} neurons onto "
          f"{util['cores_used']} cores; core utilization "
          f"{util['core_utilization_pct']:.2f}%, inter-core traffic "
          f"{util['inter_core_traffic_pct']:.2f}%")
    return 0


def cmd_run(args) -> int:
    cfg = _load_runconfig(args)
    manifest = _load_manifest(cfg)
    chip = cfg.chip()
    net = _resolve_network(cfg, manifest)
    enc_cfg = cfg.encoder_config()

    mapping = None
    if cfg.values["mapping"]:
        mapping = netio.load_mapping(cfg.values["mapping"], build_graph(net))
    adapt_cfg = cfg.adapt_config() if cfg.adaptive else None

    report, energy, trajectory = run_inference(
        net, manifest, enc_cfg, chip, mapping=mapping, adapt_cfg=adapt_cfg
    )

    out = cfg.out_dir
    run_rows = {
        "dataset": cfg.values["dataset"],
        "network": cfg.values["network"],
        "chip": chip.name,
        "encoder_scheme": enc_cfg.scheme,
        "adaptive": "on" if adapt_cfg else "off",
        "n_samples": report.n_samples,
        "accuracy": report.accuracy,
        "spikes_per_inference": report.spikes_per_inference,
        "sops_per_inference": report.sops_per_inference,
        "energy_per_inference_j": report.energy_per_inference,
        "low_confidence": report.low_confidence,
    }
    if mapping is not None:
        util = utilization_report(mapping, chip)
        run_rows.update(
            core_utilization_pct=util["core_utilization_pct"],
            memory_utilization_pct=util["memory_utilization_pct"],
            inter_core_traffic_pct=util["inter_core_traffic_pct"],
        )
    netio.save_kv_csv(run_rows, os.path.join(out, "run_report.csv"))

    energy_rows = {"n_sop": energy.n_sop, "n_spikes": energy.n_spikes,
                   "e_total_j": energy.e_total}
    for comp, joules in energy.breakdown.items():
        energy_rows[f"e_{comp}_j"] = joules
    netio.save_kv_csv(energy_rows, os.path.join(out, "energy_report.csv"))

    if adapt_cfg is not None:
        lines = ["t,layer,a_t,v_th_adapted"]
        lines += [f"{t},{k},{a},{th}" for t, k, a, th in trajectory]
        netio.atomic_write(os.path.join(out, "activity.csv"), "\n".join(lines) + "\n")

    print(f"accuracy {report.accuracy:.3f} over {report.n_samples} samples; "
          f"{report.spikes_per_inference:.1f} spikes/inference; "
          f"{report.energy_per_inference:.3e} J/inference")
    stages = " ".join(f"{k}={v * 1e3:.2f}ms" for k, v in report.latency_stages.items())
    print(f"latency stages (wall clock, not persisted): {stages}")
    if energy.efficiency_gops_w is not None:
        print(f"implied efficiency {energy.efficiency_gops_w:.1f} GOp/s/W "
              f"(2 ops per SOP)")
    return 0


def cmd_report(args) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    reports = []
    for path in args.reports:
        try:
            reports.append((os.path.basename(os.path.dirname(path)) or path,
                            netio.load_kv_csv(path)))
        except (OSError, ConfigError) as exc:
            print(f"warning: skipping {path}: {exc}", file=sys.stderr)
    if not reports:
        raise NeuEdgeError("no readable report files")

    out = args.out or "report_out"
    os.makedirs(out, exist_ok=True)
    lines = []
    datasets = {kv.get("dataset", "") for _, kv in reports}
    if len(datasets) > 1:
        lines.append("> **warning: reports cover different datasets; "
                      "comparisons may be meaningless**")
        lines.append("")

    header = "| run | accuracy | spikes/inf | energy/inf (J) |"
    sep = "|---|---|---|---|"
    if len(reports) >= 2:
        header += " spike ratio | energy ratio |"
        sep += "---|---|"
    lines += [header, sep]
    ref = reports[0][1]

    def fget(kv, key):
        try:
            return float(kv.get(key, "nan"))
        except ValueError:
            return float("nan")

    for label, kv in reports:
        row = (f"| {label} | {fget(kv, 'accuracy'):.3f} "
               f"| {fget(kv, 'spikes_per_inference'):.1f} "
               f"| {fget(kv, 'energy_per_inference_j'):.4e} |")
        if len(reports) >= 2:
            for key in ("spikes_per_inference", "energy_per_inference_j"):
                denom = fget(kv, key)
                row += (" undefined |" if denom == 0
                        else f" {fget(ref, key) / denom:.2f}x |")
        lines.append(row)
    netio.atomic_write(os.path.join(out, "report.md"), "\n".join(lines) + "\n")

    labels = [label for label, _ in reports]
    # spike-count comparison
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(labels, [fget(kv, "spikes_per_inference") for _, kv in reports])
    ax.set_ylabel("spikes per inference")
    fig.tight_layout()
    fig.savefig(os.path.join(out, "spikes.png"))
    plt.close(fig)

    # energy per inference
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(labels, [fget(kv, "energy_per_inference_j") for _, kv in reports])
    ax.set_ylabel("energy per inference (J)")
    fig.tight_layout()
    fig.savefig(os.path.join(out, "energy.png"))
    plt.close(fig)

    util_keys = ("core_utilization_pct", "memory_utilization_pct",
                 "inter_core_traffic_pct")
    if any(k in kv for _, kv in reports for k in util_keys):
        fig, ax = plt.subplots(figsize=(6, 4))
        width = 0.25
        xs = np.arange(len(reports))
        for i, key in enumerate(util_keys):
            ax.bar(xs + (i - 1) * width,
                   [fget(kv, key) for _, kv in reports], width,
                   label=key.replace("_pct", ""))
        ax.set_xticks(xs, labels)
        ax.set_ylabel("percent")
        ax.legend()
        fig.tight_layout()
        fig.savefig(os.path.join(out, "utilization.png"))
        plt.close(fig)

    print(f"report written to {out}/report.md")
    return 0


def cmd_show_config(args) -> int:
    cfg = _load_runconfig(args)
    sys.stdout.write(cfg.render())
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="neuedge", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("train", cmd_train), ("map", cmd_map), ("run", cmd_run),
                     ("show-config", cmd_show_config)):
        sub = subs.add_parser(name)
        _add_common(sub)
        sub.set_defaults(fn=fn)
    rep = subs.add_parser("report")
    rep.add_argument("reports", nargs="+", help="run_report.csv paths")
    rep.add_argument("--out", default=None)
    rep.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NeuEdgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
