"""Command-line interface for training, evaluation, and analysis.

Subcommands: ``train``, ``eval``, ``analyze-hops``, ``export-attention-hist``,
``sweep-label-rates``. Runs are configured from an optional named preset, an
optional JSON config file, and repeatable ``--set key=value`` overrides, in
that order of increasing precedence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .estimator import HopGATClassifier
from .graphs import generate_sbm, load_container, subsample_labels
from .presets import PRESETS, get_preset
from .training import (
    analyze_hops,
    export_attention_hist,
    load_snapshots,
    write_hop_analysis,
    write_snapshots,
    write_trace,
)

# built-in synthetic fixture used when no dataset file is given
SBM_FIXTURE = dict(num_blocks=2, nodes_per_block=150, p_in=0.05, p_out=0.002, feature_noise=1.0)

_TUPLE_KEYS = ("hidden_dims", "heads")


def load_dataset(spec: str, sbm_seed: int = 0):
    """Load graphs from a container file, or build the synthetic fixture."""
    if spec == "sbm":
        return [generate_sbm(seed=sbm_seed, **SBM_FIXTURE)]
    path = Path(spec)
    if not path.exists():
        raise SystemExit(f"dataset not found: {spec} (use a container file or 'sbm')")
    return load_container(path)


def _coerce(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def build_params(args) -> dict:
    """Merge preset, config file, and --set overrides into estimator kwargs."""
    params: dict = {}
    if getattr(args, "preset", None):
        params.update(get_preset(args.preset))
    if getattr(args, "config", None):
        with open(args.config) as fh:
            params.update(json.load(fh))
    for item in getattr(args, "set", None) or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise SystemExit(f"--set expects key=value, got {item!r}")
        params[key] = _coerce(raw)
    for key in _TUPLE_KEYS:
        if key in params and isinstance(params[key], list):
            params[key] = tuple(params[key])
    if getattr(args, "seed", None) is not None:
        params["seed"] = args.seed
    if getattr(args, "label_rate", None) is not None:
        params["label_rate"] = args.label_rate
    valid = set(HopGATClassifier().get_params())
    unknown = sorted(set(params) - valid)
    if unknown:
        raise SystemExit(f"unknown config keys: {', '.join(unknown)}")
    return params


def _report(est: HopGATClassifier, graphs, params: dict) -> dict:
    report = {
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in params.items()},
        "mode": est.mode_,
        "label_mode": est.label_mode_,
        "n_epochs": est.n_epochs_,
        "best_epoch": est.best_epoch_,
        "best_val_loss": est.best_val_loss_,
        "best_val_metric": est.best_val_metric_,
        "stopped_early": est.stopped_early_,
    }
    metric = "accuracy" if est.label_mode_ == "single" else "micro_f1"
    for split in ("val", "test"):
        try:
            report[f"{split}_{metric}"] = est.score(graphs, split=split)
        except ValueError:
            report[f"{split}_{metric}"] = None
    return report


def cmd_train(args) -> int:
    params = build_params(args)
    graphs = load_dataset(args.dataset, args.dataset_seed)
    est = HopGATClassifier(**params).fit(graphs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    est.save_checkpoint(out / "checkpoint.json")
    write_trace(out / "trace.csv", est.history_)
    if est.snapshots_:
        write_snapshots(out / "snapshots.json", est.snapshots_)
    report = _report(est, graphs, params)
    with open(out / "metrics.json", "w") as fh:
        json.dump(report, fh, indent=2)
    print(json.dumps(report, indent=2))
    return 0


def cmd_eval(args) -> int:
    est = HopGATClassifier.from_checkpoint(args.checkpoint)
    graphs = load_dataset(args.dataset, args.dataset_seed)
    metric = "accuracy" if est.label_mode_ == "single" else "micro_f1"
    report = {"split": args.split, metric: est.score(graphs, split=args.split)}
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2)
    print(json.dumps(report, indent=2))
    return 0


def cmd_analyze_hops(args) -> int:
    graphs = load_dataset(args.dataset, args.dataset_seed)
    rows = analyze_hops(graphs, args.max_hv)
    out = Path(args.out)
    write_hop_analysis(rows, out)
    print(json.dumps(rows, indent=2))
    return 0


def cmd_export_hist(args) -> int:
    snapshots = load_snapshots(args.snapshots)
    rows = export_attention_hist(snapshots, args.layer, args.head, args.out)
    print(f"wrote {len(rows)} epochs for layer {args.layer} head {args.head} to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    params = build_params(args)
    graphs = load_dataset(args.dataset, args.dataset_seed)
    rates = [float(r) for r in args.rates.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for rate in rates:
        for seed in seeds:
            run = dict(params, label_rate=rate, seed=seed)
            est = HopGATClassifier(**run).fit(graphs)
            metric = "accuracy" if est.label_mode_ == "single" else "micro_f1"
            rows.append(
                {"label_rate": rate, "seed": seed, "metric": metric,
                 "score": est.score(graphs, split="test"),
                 "best_epoch": est.best_epoch_, "n_epochs": est.n_epochs_}
            )

    with open(out / "sweep.csv", "w", newline="") as fh:
        import csv

        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)

    summary = []
    for rate in rates:
        scores = [r["score"] for r in rows if r["label_rate"] == rate]
        summary.append(
            {"label_rate": rate, "mean": float(np.mean(scores)),
             "std": float(np.std(scores)), "n_seeds": len(scores)}
        )
    with open(out / "sweep_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    means = [s["mean"] for s in summary]
    stds = [s["std"] for s in summary]
    ax.errorbar([s["label_rate"] for s in summary], means, yerr=stds, marker="o")
    ax.set_xlabel("label rate")
    ax.set_ylabel(rows[0]["metric"])
    ax.set_title("test score vs label rate")
    fig.tight_layout()
    fig.savefig(out / "sweep.png", dpi=120)
    plt.close(fig)

    print(json.dumps(summary, indent=2))
    return 0


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", default="sbm",
                   help="graph container JSON path, or 'sbm' for the built-in fixture")
    p.add_argument("--dataset-seed", type=int, default=0,
                   help="seed for the built-in sbm fixture")


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS), default=None,
                   help="named hyperparameter preset")
    p.add_argument("--config", default=None, help="JSON file of estimator parameters")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a single parameter (repeatable; JSON values)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--label-rate", type=float, default=None, dest="label_rate")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hopgat",
        description="hop-aware supervised graph attention: train, evaluate, analyze",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train a model and write checkpoint/trace/metrics")
    _add_dataset_args(train)
    _add_config_args(train)
    train.add_argument("--out", default="runs/latest", help="output directory")
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", help="score a saved checkpoint on a dataset split")
    ev.add_argument("--checkpoint", required=True)
    _add_dataset_args(ev)
    ev.add_argument("--split", choices=("train", "val", "test"), default="test")
    ev.add_argument("--out", default=None, help="optional metrics JSON path")
    ev.set_defaults(func=cmd_eval)

    an = sub.add_parser("analyze-hops", help="label consistency by hop value (CSV + plot)")
    _add_dataset_args(an)
    an.add_argument("--max-hv", type=int, default=5, dest="max_hv")
    an.add_argument("--out", default="runs/hops", help="output directory")
    an.set_defaults(func=cmd_analyze_hops)

    ex = sub.add_parser("export-attention-hist",
                        help="attention-logit histograms by hop bucket (CSV + plot)")
    ex.add_argument("--snapshots", required=True,
                    help="snapshots.json written by train with snapshot_every > 0")
    ex.add_argument("--layer", type=int, required=True)
    ex.add_argument("--head", type=int, required=True)
    ex.add_argument("--out", default="runs/hist", help="output directory")
    ex.set_defaults(func=cmd_export_hist)

    sw = sub.add_parser("sweep-label-rates", help="train across label rates and seeds")
    _add_dataset_args(sw)
    _add_config_args(sw)
    sw.add_argument("--rates", default="0.2,0.4,0.6,0.8,1.0",
                    help="comma-separated label rates")
    sw.add_argument("--seeds", default="0,1,2,3,4", help="comma-separated seeds")
    sw.add_argument("--out", default="runs/sweep", help="output directory")
    sw.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
