"""Command-line interface.

Subcommands: ``train`` (one run), ``compare`` (full schedule matrix with
RED tables and figures), ``distances`` (pairwise summary distances from
CSV files), ``bootstrap`` (percentile CI from a values file), and
``composite`` (ranking score from a metrics table). Failures exit nonzero
after printing one machine-readable JSON error line to stderr.
"""

import argparse
import json
import sys
from pathlib import Path

from .config import PRESETS, build_config
from .errors import CgalrError
from .metrics import (
    DistanceKind,
    bottleneck_distance,
    heat_distance,
    sliced_wasserstein_distance,
    top_distance,
    wasserstein_distance,
)
from .stats import bootstrap_median_ci, composite_score
from .topology import load_diagram_csv, load_vector_csv


def _add_config_flags(parser):
    parser.add_argument("--config", type=Path, default=None, help="flat key = value config file")
    parser.add_argument("--preset", choices=sorted(PRESETS), default="image")
    parser.add_argument("--schedule", default=None, help="comma-separated schedule tags")
    parser.add_argument("--distance", default=None, help="comma-separated distance tags")
    parser.add_argument("--seeds", default=None, help="comma-separated seeds")
    parser.add_argument("--eta-star", dest="eta_star", default=None, help="comma-separated initial rates")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--no-plots", action="store_true", help="skip figure rendering")


def _config_from_args(args):
    text = args.config.read_text(encoding="utf-8") if args.config else None
    overrides = {
        "schedule": args.schedule,
        "distance": args.distance,
        "seeds": args.seeds,
        "eta_star": args.eta_star,
    }
    return build_config(preset=args.preset, file_text=text, overrides=overrides)


def _cmd_train(args) -> int:
    from .harness import run_single, write_runlog_csv

    cfg = _config_from_args(args)
    schedule = cfg.schedule[0]
    distance = cfg.distance[0] if schedule == "cg_alr" else ""
    seed = cfg.seeds[0]
    eta = None if schedule == "dog" else cfg.eta_star[0]
    log = run_single(cfg, schedule, distance, seed, eta)
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / f"{log.run_id}.csv"
    write_runlog_csv(log, csv_path)
    outputs = {"run": str(csv_path)}
    if not args.no_plots:
        from .plotting import render_run_figure

        outputs["figure"] = render_run_figure(log, args.out / f"{log.run_id}.png")
    timing = {"time_to_best_val": log.time_to_best_val, "total_seconds": float(sum(log.epoch_seconds))}
    (args.out / f"{log.run_id}_timing.json").write_text(json.dumps(timing, indent=2), encoding="utf-8")
    print(json.dumps({
        "run_id": log.run_id,
        "best_val_acc": log.best_val_acc,
        "test_acc_at_best_val": log.test_acc_at_best_val,
        "final_train_loss": log.final_train_loss,
        "outputs": outputs,
    }, indent=2, sort_keys=True))
    return 0


def _cmd_compare(args) -> int:
    from .harness import run_experiment

    cfg = _config_from_args(args)
    paths = run_experiment(cfg, args.out, render_plots=not args.no_plots)
    print(json.dumps({"out": str(args.out), "files": paths}, indent=2, sort_keys=True))
    return 0


def _cmd_distances(args) -> int:
    kind = DistanceKind(tag=args.kind, p=args.p, sigma=args.sigma, n_dirs=args.dirs, swk_p=args.swk_p)
    if kind.tag == "top":
        u = load_vector_csv(args.file_a)
        v = load_vector_csv(args.file_b)
        value = top_distance(u, v)
    else:
        d1 = load_diagram_csv(args.file_a)
        d2 = load_diagram_csv(args.file_b)
        if kind.tag == "wd":
            value = wasserstein_distance(d1, d2, p=kind.p)
        elif kind.tag == "bd":
            value = bottleneck_distance(d1, d2)
        elif kind.tag == "hk":
            value = heat_distance(d1, d2, sigma=kind.sigma)
        else:
            value = sliced_wasserstein_distance(d1, d2, n_dirs=kind.n_dirs, p=kind.swk_p)
    print(repr(value))
    return 0


def _cmd_bootstrap(args) -> int:
    values = []
    for line in Path(args.values).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            values.append(float(line))
    result = bootstrap_median_ci(values, resamples=args.resamples, level=args.level, seed=args.seed)
    print(json.dumps({
        "median": result.median_red,
        "ci_low": result.ci_low,
        "ci_high": result.ci_high,
        "n": result.n_seeds,
        "resamples": result.resamples,
    }, indent=2, sort_keys=True))
    return 0


def _cmd_composite(args) -> int:
    # Long-format CSV: variant,metric,group,value (header optional).
    metrics: dict = {}
    groups: dict = {}
    for line in Path(args.table).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if parts[0].lower() == "variant":
            continue
        if len(parts) != 4:
            raise CgalrError(f"expected 'variant,metric,group,value', got {line!r}")
        variant, metric, group, value = parts
        metrics.setdefault(variant, {})[metric] = float(value)
        groups[metric] = group.upper()
    scores = composite_score(metrics, groups)
    print(json.dumps(scores, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgalr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run one schedule on the desk-scale trainer")
    _add_config_flags(p_train)
    p_train.set_defaults(func=_cmd_train)

    p_cmp = sub.add_parser("compare", help="run the full schedule matrix and summarize")
    _add_config_flags(p_cmp)
    p_cmp.set_defaults(func=_cmd_compare)

    p_dist = sub.add_parser("distances", help="distance between two summary CSV files")
    p_dist.add_argument("--kind", choices=("top", "wd", "bd", "hk", "swk"), required=True)
    p_dist.add_argument("file_a", type=Path)
    p_dist.add_argument("file_b", type=Path)
    p_dist.add_argument("--p", type=float, default=2.0, help="Wasserstein order for wd")
    p_dist.add_argument("--sigma", type=float, default=0.1, help="heat-kernel bandwidth")
    p_dist.add_argument("--dirs", type=int, default=50, help="sliced Wasserstein directions")
    p_dist.add_argument("--swk-p", dest="swk_p", type=float, default=1.0)
    p_dist.set_defaults(func=_cmd_distances)

    p_boot = sub.add_parser("bootstrap", help="percentile bootstrap CI of the median")
    p_boot.add_argument("values", type=Path, help="file with one value per line")
    p_boot.add_argument("--resamples", type=int, default=1000)
    p_boot.add_argument("--level", type=float, default=0.95)
    p_boot.add_argument("--seed", type=int, default=0)
    p_boot.set_defaults(func=_cmd_bootstrap)

    p_comp = sub.add_parser("composite", help="composite score from a variant,metric,group,value table")
    p_comp.add_argument("table", type=Path)
    p_comp.set_defaults(func=_cmd_composite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CgalrError, OSError, ValueError) as exc:
        sys.stderr.write(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
