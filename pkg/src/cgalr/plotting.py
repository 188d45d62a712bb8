"""Report figures rendered next to the CSV outputs.

All figures are static PNG files built from in-memory run logs: the
learning-rate trajectories, best/worst loss curves, and the controller
trace of a representative topology-driven run.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import RunLog, best_eta_star


def _group_by_method(logs):
    groups = {}
    for log in logs:
        groups.setdefault(log.method, []).append(log)
    return groups


def _mean_curve(logs, column):
    rows = np.array([[v if v is not None else np.nan for v in log.column(column)] for log in logs])
    return rows.mean(axis=0), rows.min(axis=0), rows.max(axis=0)


def render_run_figure(log: RunLog, path) -> str:
    """One run: loss/accuracy, the emitted rate, and the controller trace."""
    is_cg = bool(log.distance)
    n_panels = 3 if is_cg else 2
    fig, axes = plt.subplots(n_panels, 1, figsize=(7, 2.6 * n_panels), sharex=True)
    epochs = log.column("epoch")

    axes[0].plot(epochs, log.column("train_loss"), label="train loss")
    axes[0].plot(epochs, log.column("val_loss"), label="val loss")
    axes[0].set_ylabel("loss")
    axes[0].legend(frameon=False)
    axes[0].set_title(log.run_id)

    axes[1].plot(epochs, log.column("eta_batch0"), color="tab:green")
    axes[1].set_yscale("log")
    axes[1].set_ylabel("rate (batch 0)")

    if is_cg:
        ax = axes[2]
        ax.plot(epochs, log.column("psi"), color="tab:purple", label="psi")
        ax.set_ylabel("psi")
        twin = ax.twinx()
        twin.plot(epochs, log.column("z"), color="tab:orange", alpha=0.8, label="z")
        twin.plot(epochs, log.column("epsilon"), color="tab:gray", ls="--", alpha=0.8, label="threshold")
        twin.set_ylabel("signal")
        handles, labels = ax.get_legend_handles_labels()
        h2, l2 = twin.get_legend_handles_labels()
        ax.legend(handles + h2, labels + l2, frameon=False)
    axes[-1].set_xlabel("epoch")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def render_compare_figures(logs, out_dir) -> list:
    """Matrix-level figures: rate trajectories and best/worst loss curves."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    groups = _group_by_method(logs)

    fig, ax = plt.subplots(figsize=(7, 4.2))
    for method in sorted(groups):
        members = groups[method]
        eta = best_eta_star(members)
        chosen = [l for l in members if l.eta_star == eta]
        mean, _, _ = _mean_curve(chosen, "eta_batch0")
        ax.plot(chosen[0].column("epoch"), mean, label=method)
    ax.set_yscale("log")
    ax.set_xlabel("epoch")
    ax.set_ylabel("learning rate at batch 0")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    path = out / "lr_trajectories.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(str(path))

    fig, axes = plt.subplots(1, 2, figsize=(11, 4.2), sharex=True)
    for method in sorted(groups):
        members = groups[method]
        etas = {l.eta_star for l in members}
        best = best_eta_star(members)
        worst = None
        if len(etas) > 1:
            scores = {e: np.mean([l.best_val_acc for l in members if l.eta_star == e]) for e in etas}
            worst = min(scores, key=lambda e: (scores[e], str(e)))
        for col, ax in zip(("train_loss", "val_loss"), axes):
            chosen = [l for l in members if l.eta_star == best]
            mean, lo, hi = _mean_curve(chosen, col)
            line = ax.plot(chosen[0].column("epoch"), mean, label=method)[0]
            ax.fill_between(chosen[0].column("epoch"), lo, hi, color=line.get_color(), alpha=0.12)
            if worst is not None and worst != best:
                wmean, _, _ = _mean_curve([l for l in members if l.eta_star == worst], col)
                ax.plot(chosen[0].column("epoch"), wmean, ls="--", color=line.get_color(), alpha=0.6)
    axes[0].set_ylabel("train loss")
    axes[1].set_ylabel("val loss")
    for ax in axes:
        ax.set_xlabel("epoch")
        ax.set_yscale("log")
    axes[0].legend(frameon=False, fontsize=8)
    fig.tight_layout()
    path = out / "loss_curves.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(str(path))

    cg_logs = [l for l in logs if l.distance]
    if cg_logs:
        representative = max(cg_logs, key=lambda l: l.best_val_acc)
        written.append(render_run_figure(representative, out / "controller_trace.png"))
    return written
