"""Evaluation statistics: relative error difference, bootstrap CIs, and
the composite ranking score.

All resampling uses numpy's PCG64 generator (np.random.default_rng) with
the documented draw pattern, so the numbers can be reproduced outside
this package.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, UndefinedRatio

COMPOSITE_GROUPS = ("P", "G", "C")


@dataclass(frozen=True)
class RedResult:
    median_red: float
    ci_low: float
    ci_high: float
    n_seeds: int
    resamples: int

    def __post_init__(self):
        if self.ci_low > self.ci_high:
            raise InvalidArgument("bootstrap endpoints are inverted")


def red(err_baseline: float, err_cgalr: float) -> float:
    """(err_cgalr - err_baseline) / err_cgalr; negative favors the controller."""
    if err_cgalr == 0.0:
        raise UndefinedRatio("relative error difference is undefined when the reference error is 0")
    return (err_cgalr - err_baseline) / err_cgalr


def bootstrap_median_ci(values, resamples: int = 1000, level: float = 0.95, seed: int = 0) -> RedResult:
    """Percentile bootstrap of the median over seed-level values.

    Each resample draws ``len(values)`` indices with replacement via
    ``rng.integers(0, n, n)`` and records the median; the interval is the
    (alpha/2, 1 - alpha/2) linear-interpolation percentile pair of those
    medians.
    """
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise InvalidArgument("bootstrap needs at least one value")
    if resamples < 1:
        raise InvalidArgument("resamples must be >= 1")
    if not 0.0 < level < 1.0:
        raise InvalidArgument("confidence level must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    meds = np.empty(resamples)
    for r in range(resamples):
        idx = rng.integers(0, arr.size, arr.size)
        meds[r] = np.median(arr[idx])
    alpha = (1.0 - level) / 2.0
    lo, hi = np.percentile(meds, [100.0 * alpha, 100.0 * (1.0 - alpha)])
    return RedResult(
        median_red=float(np.median(arr)),
        ci_low=float(lo),
        ci_high=float(hi),
        n_seeds=int(arr.size),
        resamples=int(resamples),
    )


def composite_score(metrics: dict, groups: dict) -> dict:
    """Signed sum of z-standardized metric means per variant.

    ``metrics`` maps variant -> {metric: mean value}; ``groups`` maps each
    metric to "P" (performance, counted +), "G" (generalization gaps,
    counted -) or "C" (convergence cost, counted -). Standardization uses
    the population standard deviation across variants; a zero-variance
    metric contributes 0 everywhere.
    """
    variants = list(metrics.keys())
    if len(variants) < 2:
        raise InvalidArgument("composite score needs at least two variants")
    metric_names = list(groups.keys())
    if not metric_names:
        raise InvalidArgument("no metrics given")
    for name, group in groups.items():
        if group not in COMPOSITE_GROUPS:
            raise InvalidArgument(f"metric {name!r} has group {group!r}, expected one of {COMPOSITE_GROUPS}")
    for variant in variants:
        missing = [m for m in metric_names if m not in metrics[variant]]
        if missing:
            raise InvalidArgument(f"variant {variant!r} is missing metrics {missing}")

    scores = {v: 0.0 for v in variants}
    for name in metric_names:
        column = np.array([float(metrics[v][name]) for v in variants])
        std = float(np.sqrt(np.mean((column - column.mean()) ** 2)))
        if std == 0.0:
            continue
        z = (column - column.mean()) / std
        sign = 1.0 if groups[name] == "P" else -1.0
        for v, zv in zip(variants, z):
            scores[v] += sign * float(zv)
    return scores
