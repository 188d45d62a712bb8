"""Experiment orchestration: run the schedule matrix, log CSVs, and build
the RED summary tables.

Every run is reproducible from (config, seed): the dataset, split,
initialization and batch order all derive from the seed through numpy's
PCG64 with fixed spawn keys. Wall-clock timings are real and therefore
live in a JSON sidecar, never in the CSV logs.
"""

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, config_hash
from .connectome import build_probe_set, correlation_connectome, drop_constant_signals
from .controller import ControllerConfig
from .data import make_dataset, train_val_test_split
from .errors import InvalidArgument
from .metrics import DistanceKind, epoch_distance, summarize
from .schedules import ControllerRateSource, DogRateSource, SchedulePolicy, ScheduleRateSource
from .stats import bootstrap_median_ci, red
from .topology import EMPTY_DIAGRAM, EMPTY_VECTOR
from .toposignal import TopoSignalState, push_distance
from .trainer import Mlp, MlpSpec, SgdConfig, capture_activations, evaluate, train_epoch

RUNLOG_SCHEMA = "cgalr.runlog.v1"
SUMMARY_SCHEMA = "cgalr.summary.v1"
RED_SCHEMA = "cgalr.red.v1"
BOOTSTRAP_RESAMPLES = 1000
BOOTSTRAP_SEED = 0

EPOCH_COLUMNS = (
    "epoch", "eta_batch0", "psi", "u", "cooldown_left", "consecutive_over",
    "delta", "delta_smooth", "z", "epsilon", "train_loss", "val_loss", "val_acc",
)

SUMMARY_COLUMNS = (
    "schedule", "distance", "seed", "eta_star",
    "final_train_loss", "final_train_acc", "final_val_loss", "final_val_acc",
    "best_val_acc", "best_val_epoch", "test_acc_at_best_val", "test_acc_final",
    "config",
)


@dataclass
class RunLog:
    schedule: str
    distance: str  # "" for baselines
    seed: int
    eta_star: float | None  # None for the parameter-free baseline
    config_hash: str
    rows: list = field(default_factory=list)
    epoch_seconds: list = field(default_factory=list)
    best_val_acc: float = 0.0
    best_val_epoch: int = 0
    test_acc_at_best_val: float = 0.0
    test_acc_final: float = 0.0
    final_train_acc: float = 0.0
    final_train_loss: float = 0.0
    final_val_loss: float = 0.0
    final_val_acc: float = 0.0

    @property
    def method(self) -> str:
        return f"{self.schedule}({self.distance})" if self.distance else self.schedule

    @property
    def run_id(self) -> str:
        parts = [self.schedule]
        if self.distance:
            parts.append(self.distance)
        parts.append(f"seed{self.seed}")
        if self.eta_star is not None:
            parts.append(f"eta{self.eta_star!r}")
        return "_".join(parts)

    @property
    def time_to_best_val(self) -> float:
        return float(sum(self.epoch_seconds[: self.best_val_epoch]))

    def column(self, name: str) -> list:
        return [row[name] for row in self.rows]


def _spawned_rng(seed: int, key: int):
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(key,)))


def _make_rate_source(cfg: ExperimentConfig, schedule: str, eta_star, batches: int, model: Mlp):
    if schedule == "cg_alr":
        return ControllerRateSource(ControllerConfig(
            eta_star=eta_star, epochs=cfg.epochs, batches_per_epoch=batches,
            t0=cfg.t0, alpha=cfg.alpha,
            gamma_down=cfg.gamma_down, gamma_up=cfg.gamma_up, gamma_late=cfg.gamma_late,
            psi_min=cfg.psi_min, psi_max=cfg.psi_max,
            k_warm=cfg.K_warm, n_trigger=cfg.n_trigger, cooldown=cfg.cooldown,
            n_late_ratio=cfg.N_ratio,
        ))
    if schedule == "dog":
        policy = SchedulePolicy("dog", eta_star=1.0, r_epsilon=cfg.dog_r_eps, epsilon=cfg.dog_eps)
        return DogRateSource(policy, model.params())
    policy = SchedulePolicy(
        schedule, eta_star=eta_star, t_max=cfg.t_max,
        period=cfg.step_period, factor=cfg.step_factor, gamma=cfg.exp_gamma,
        patience=cfg.plateau_patience, plateau_factor=cfg.plateau_factor,
        plateau_threshold=cfg.plateau_threshold,
    )
    return ScheduleRateSource(policy)


def run_single(cfg: ExperimentConfig, schedule: str, distance: str, seed: int, eta_star) -> RunLog:
    """Train one run of the matrix and collect its epoch log."""
    x, y = make_dataset(cfg.dataset, cfg.n_samples, noise=cfg.noise, n_classes=cfg.n_classes,
                        seed=np.random.SeedSequence(entropy=seed, spawn_key=(1,)))
    (x_tr, y_tr), (x_va, y_va), (x_te, y_te) = train_val_test_split(
        x, y, seed=np.random.SeedSequence(entropy=seed, spawn_key=(2,)))

    n_classes = int(y.max()) + 1
    tap = None if cfg.tap_layer < 0 else cfg.tap_layer
    spec = MlpSpec((x.shape[1], *cfg.hidden_sizes, n_classes), tap_layer=tap)
    model = Mlp(spec, seed=seed)
    sgd = SgdConfig(momentum=cfg.momentum, weight_decay=cfg.weight_decay,
                    batch_size=cfg.batch_size, seed=seed)
    batches = math.ceil(x_tr.shape[0] / cfg.batch_size)
    source = _make_rate_source(cfg, schedule, eta_star, batches, model)
    order_rng = _spawned_rng(seed, 4)

    is_cg = schedule == "cg_alr"
    if is_cg:
        kind = DistanceKind(tag=distance, p=cfg.wd_p, sigma=cfg.hk_sigma,
                            n_dirs=cfg.swk_dirs, swk_p=cfg.swk_p)
        probe = build_probe_set(y_tr, cfg.probe_P, seed)
        sig = TopoSignalState(ema_lambda=cfg.beta, tau=cfg.tau, window=cfg.window)
        prev_summary = None
        empty = EMPTY_VECTOR if distance == "top" else EMPTY_DIAGRAM

    log = RunLog(schedule=schedule, distance=distance if is_cg else "", seed=seed,
                 eta_star=None if schedule == "dog" else eta_star, config_hash=config_hash(cfg))
    val_accs, test_accs = [], []
    for t in range(1, cfg.epochs + 1):
        tic = time.perf_counter()
        epoch_stats = train_epoch(model, x_tr, y_tr, source, sgd, order_rng, t)
        row = {name: None for name in EPOCH_COLUMNS}
        row["epoch"] = t
        row["eta_batch0"] = epoch_stats["eta_batch0"]
        row["train_loss"] = epoch_stats["train_loss"]

        if is_cg:
            acts = drop_constant_signals(capture_activations(model, x_tr, probe))
            summary = empty if acts is None else summarize(kind, correlation_connectome(acts))
            delta = epoch_distance(kind, prev_summary, summary)
            z = push_distance(sig, delta)
            epsilon = sig.threshold(cfg.mad_k)
            u = source.apply_signal(z, epsilon)
            prev_summary = summary
            row.update(psi=source.state.psi, u=u, cooldown_left=source.state.cooldown_left,
                       consecutive_over=source.state.consecutive_over,
                       delta=delta, delta_smooth=sig.smoothed[-1], z=z, epsilon=epsilon)

        val_loss, val_acc = evaluate(model, x_va, y_va)
        _, test_acc = evaluate(model, x_te, y_te)
        source.end_epoch(val_loss)
        row["val_loss"] = val_loss
        row["val_acc"] = val_acc
        log.rows.append(row)
        log.epoch_seconds.append(time.perf_counter() - tic)
        val_accs.append(val_acc)
        test_accs.append(test_acc)

    best = int(np.argmax(val_accs))
    log.best_val_epoch = best + 1
    log.best_val_acc = val_accs[best]
    log.test_acc_at_best_val = test_accs[best]
    log.test_acc_final = test_accs[-1]
    train_loss_final, train_acc_final = evaluate(model, x_tr, y_tr)
    log.final_train_loss = train_loss_final
    log.final_train_acc = train_acc_final
    log.final_val_loss = log.rows[-1]["val_loss"]
    log.final_val_acc = log.rows[-1]["val_acc"]
    return log


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_runlog_csv(log: RunLog, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# schema={RUNLOG_SCHEMA}\n")
        fh.write(f"# schedule={log.schedule}\n")
        fh.write(f"# distance={log.distance}\n")
        fh.write(f"# seed={log.seed}\n")
        fh.write(f"# eta_star={'' if log.eta_star is None else repr(float(log.eta_star))}\n")
        fh.write(f"# config={log.config_hash}\n")
        fh.write(",".join(EPOCH_COLUMNS) + "\n")
        for row in log.rows:
            fh.write(",".join(_fmt(row[name]) for name in EPOCH_COLUMNS) + "\n")


def _summary_row(log: RunLog) -> dict:
    return {
        "schedule": log.schedule,
        "distance": log.distance,
        "seed": log.seed,
        "eta_star": log.eta_star,
        "final_train_loss": log.final_train_loss,
        "final_train_acc": log.final_train_acc,
        "final_val_loss": log.final_val_loss,
        "final_val_acc": log.final_val_acc,
        "best_val_acc": log.best_val_acc,
        "best_val_epoch": log.best_val_epoch,
        "test_acc_at_best_val": log.test_acc_at_best_val,
        "test_acc_final": log.test_acc_final,
        "config": log.config_hash,
    }


def best_eta_star(logs: list) -> float | None:
    """The eta with the highest mean best-epoch validation accuracy.

    Ties keep the first eta in run order.
    """
    by_eta: dict = {}
    for log in logs:
        by_eta.setdefault(log.eta_star, []).append(log.best_val_acc)
    best_eta, best_score = None, -np.inf
    for eta, accs in by_eta.items():
        score = float(np.mean(accs))
        if score > best_score:
            best_eta, best_score = eta, score
    return best_eta


def red_table(logs: list) -> list:
    """Per (controller variant, baseline) rows of median RED with CIs.

    Errors are 1 - test accuracy at the best-validation epoch, taken at
    each method's best eta; seeds where the controller error is exactly 0
    cannot form the ratio and are skipped.
    """
    cg_methods: dict = {}
    baselines: dict = {}
    for log in logs:
        bucket = cg_methods if log.schedule == "cg_alr" else baselines
        bucket.setdefault(log.method, []).append(log)

    rows = []
    for method in sorted(cg_methods):
        cg_logs = cg_methods[method]
        eta_cg = best_eta_star(cg_logs)
        cg_by_seed = {l.seed: l for l in cg_logs if l.eta_star == eta_cg}
        for base in sorted(baselines):
            base_logs = baselines[base]
            eta_base = best_eta_star(base_logs)
            base_by_seed = {l.seed: l for l in base_logs if l.eta_star == eta_base}
            reds = []
            for seed in sorted(set(cg_by_seed) & set(base_by_seed)):
                err_cg = 1.0 - cg_by_seed[seed].test_acc_at_best_val
                err_base = 1.0 - base_by_seed[seed].test_acc_at_best_val
                if err_cg > 0.0:
                    reds.append(red(err_base, err_cg))
            row = {"cg_method": method, "baseline": base,
                   "eta_cg": eta_cg, "eta_baseline": eta_base, "n_seeds": len(reds)}
            if reds:
                result = bootstrap_median_ci(reds, resamples=BOOTSTRAP_RESAMPLES, seed=BOOTSTRAP_SEED)
                row.update(median_red=result.median_red, ci_low=result.ci_low, ci_high=result.ci_high)
            else:
                row.update(median_red=None, ci_low=None, ci_high=None)
            rows.append(row)
    return rows


def run_matrix(cfg: ExperimentConfig):
    """All (schedule, distance, seed, eta) runs in deterministic order."""
    logs = []
    for schedule in cfg.schedule:
        distances = cfg.distance if schedule == "cg_alr" else ("",)
        etas = (None,) if schedule == "dog" else cfg.eta_star
        for distance in distances:
            for seed in cfg.seeds:
                for eta in etas:
                    logs.append(run_single(cfg, schedule, distance, seed, eta))
    return logs


def run_experiment(cfg: ExperimentConfig, out_dir, render_plots: bool = True) -> dict:
    """Run the full matrix; write per-run CSVs, summaries, and figures.

    Returns the paths of everything written. CSV outputs are byte-stable
    for a fixed config; timing lives in timings.json.
    """
    out = Path(out_dir)
    runs_dir = out / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)
    logs = run_matrix(cfg)

    paths = {"runs": []}
    for log in logs:
        path = runs_dir / f"{log.run_id}.csv"
        write_runlog_csv(log, path)
        paths["runs"].append(str(path))

    summary_path = out / "summary.csv"
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write(f"# schema={SUMMARY_SCHEMA}\n")
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for log in logs:
            row = _summary_row(log)
            rendered = []
            for name in SUMMARY_COLUMNS:
                value = row[name]
                if isinstance(value, str):
                    rendered.append(value)
                else:
                    rendered.append(_fmt(value))
            fh.write(",".join(rendered) + "\n")
    paths["summary"] = str(summary_path)

    red_rows = red_table(logs)
    red_path = out / "red_summary.csv"
    with open(red_path, "w", encoding="utf-8") as fh:
        fh.write(f"# schema={RED_SCHEMA}\n")
        fh.write(f"# resamples={BOOTSTRAP_RESAMPLES}\n")
        fh.write(f"# bootstrap_seed={BOOTSTRAP_SEED}\n")
        fh.write("cg_method,baseline,eta_cg,eta_baseline,n_seeds,median_red,ci_low,ci_high\n")
        for row in red_rows:
            fh.write(",".join([
                row["cg_method"], row["baseline"],
                _fmt(row["eta_cg"]), _fmt(row["eta_baseline"]), str(row["n_seeds"]),
                _fmt(row["median_red"]), _fmt(row["ci_low"]), _fmt(row["ci_high"]),
            ]) + "\n")
    paths["red_summary"] = str(red_path)

    timings = {
        log.run_id: {
            "epoch_seconds": log.epoch_seconds,
            "time_to_best_val": log.time_to_best_val,
            "total_seconds": float(sum(log.epoch_seconds)),
        }
        for log in logs
    }
    timings_path = out / "timings.json"
    timings_path.write_text(json.dumps(timings, indent=2, sort_keys=True), encoding="utf-8")
    paths["timings"] = str(timings_path)

    summary_json = {
        "schema": SUMMARY_SCHEMA,
        "config_hash": config_hash(cfg),
        "runs": [_summary_row(log) for log in logs],
        "red_table": red_rows,
    }
    json_path = out / "summary.json"
    json_path.write_text(json.dumps(summary_json, indent=2, sort_keys=True), encoding="utf-8")
    paths["summary_json"] = str(json_path)

    if render_plots:
        from .plotting import render_compare_figures

        paths["figures"] = render_compare_figures(logs, out / "figures")
    return paths
