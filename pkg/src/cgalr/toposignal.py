"""Normalized topological change signal and its adaptive threshold.

The raw epoch-to-epoch distances are smoothed with an exponential moving
average and normalized by a rolling median/MAD, which gives a scale-free
signal z_t. The trigger threshold is the median of the z history plus a
multiple of its MAD.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, InvalidState


def rolling_median_mad(values, window=None) -> tuple:
    """Median and (unscaled) median absolute deviation of the trailing window.

    ``window=None`` uses the full history. The MAD carries no consistency
    factor.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise InvalidState("median/MAD need at least one observation")
    if window is not None:
        if window < 1:
            raise InvalidArgument("window must be >= 1 (or None for unbounded)")
        arr = arr[-window:]
    med = float(np.median(arr))
    mad = float(np.median(np.abs(arr - med)))
    return med, mad


@dataclass
class TopoSignalState:
    """Running state of the distance series and its normalization.

    ``ema_lambda`` weights the previous smoothed value; ``tau`` keeps the
    denominator positive when the MAD collapses; ``window`` bounds the
    median/MAD statistics (None reproduces the cumulative form over all
    epochs observed so far).
    """

    ema_lambda: float = 0.96
    tau: float = 0.002
    window: int | None = 13
    raw: list = field(default_factory=list)
    smoothed: list = field(default_factory=list)
    z_history: list = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 <= self.ema_lambda < 1.0:
            raise InvalidArgument("EMA factor must lie in [0, 1)")
        if self.tau <= 0.0:
            raise InvalidArgument("stability constant tau must be > 0")
        if self.window is not None and self.window < 1:
            raise InvalidArgument("window must be >= 1 (or None for unbounded)")

    def threshold(self, k_mad: float) -> float:
        return adaptive_threshold(self.z_history, k_mad, window=self.window)


def push_distance(state: TopoSignalState, delta: float) -> float:
    """Absorb one raw distance and return the normalized signal z_t."""
    delta = float(delta)
    if not np.isfinite(delta) or delta < 0.0:
        raise InvalidArgument(f"distance must be finite and >= 0, got {delta}")
    state.raw.append(delta)
    if state.smoothed:
        smooth = (1.0 - state.ema_lambda) * delta + state.ema_lambda * state.smoothed[-1]
    else:
        smooth = delta
    state.smoothed.append(smooth)
    med, mad = rolling_median_mad(state.smoothed, state.window)
    z = (smooth - med) / (mad + state.tau)
    state.z_history.append(z)
    return z


def adaptive_threshold(z_history, k_mad: float, window=None) -> float:
    """median(z) + k_mad * MAD(z) over the same window policy as the signal."""
    if k_mad <= 0.0:
        raise InvalidArgument("k_mad must be > 0")
    if len(z_history) == 0:
        raise InvalidState("threshold needs a nonempty z history")
    med, mad = rolling_median_mad(z_history, window)
    return med + k_mad * mad
