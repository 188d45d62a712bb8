"""Online learning-rate controller over a Robbins-Monro envelope.

The baseline rate decays per batch as eta0 / (s + t0)^alpha with
alpha in (1/2, 1], which keeps the classical step-size conditions. A
bounded multiplier psi rescales it once per epoch, driven by the
normalized topological signal: sustained spikes above the adaptive
threshold downscale psi (with hysteresis), quiet epochs upscale it until
the late phase, where a mild decay takes over. Every non-unity update is
followed by a cooldown during which psi is frozen.
"""

import math
from dataclasses import dataclass

from .errors import InvalidArgument, InvalidState


@dataclass(frozen=True)
class ControllerConfig:
    eta_star: float
    epochs: int
    batches_per_epoch: int
    t0: float = 1600.0
    alpha: float = 0.52
    gamma_down: float = 0.85
    gamma_up: float = 1.20
    gamma_late: float = 0.985
    psi_min: float = 0.65
    psi_max: float = 6.0
    k_warm: int = 4
    n_trigger: int = 6
    cooldown: int = 4
    n_late_ratio: float = 0.88

    def __post_init__(self):
        if self.eta_star <= 0.0:
            raise InvalidArgument("eta_star must be > 0")
        if self.epochs < 1 or self.batches_per_epoch < 1:
            raise InvalidArgument("epochs and batches_per_epoch must be >= 1")
        if self.t0 < 1.0:
            raise InvalidArgument("RM offset t0 must be >= 1")
        if not 0.5 < self.alpha <= 1.0:
            raise InvalidArgument("RM exponent alpha must lie in (1/2, 1]")
        if not self.gamma_down < 1.0:
            raise InvalidArgument("gamma_down must be < 1")
        if not self.gamma_up > 1.0:
            raise InvalidArgument("gamma_up must be > 1")
        if not self.gamma_down < self.gamma_late < 1.0:
            raise InvalidArgument("gamma_late must lie in (gamma_down, 1)")
        if self.psi_min <= 0.0 or self.psi_max < self.psi_min:
            raise InvalidArgument("need 0 < psi_min <= psi_max")
        if self.k_warm < 0 or self.n_trigger < 1 or self.cooldown < 0:
            raise InvalidArgument("k_warm >= 0, n_trigger >= 1, cooldown >= 0 required")
        if not 0.0 < self.n_late_ratio <= 1.0:
            raise InvalidArgument("n_late_ratio must lie in (0, 1]")

    @property
    def eta0(self) -> float:
        # Calibrated so the very first batch rate equals eta_star.
        return self.eta_star * self.t0**self.alpha

    @property
    def n_late(self) -> int:
        return math.floor(self.n_late_ratio * self.epochs)


@dataclass
class ControllerState:
    psi: float = 1.0
    s: int = 0
    epoch: int = 0
    consecutive_over: int = 0
    cooldown_left: int = 0
    _s_at_epoch_end: int = 0

    def envelope_bounds(self, config: ControllerConfig, s: int) -> tuple:
        base = config.eta0 / (s + config.t0) ** config.alpha
        return base * config.psi_min, base * config.psi_max


def batch_rate(state: ControllerState, config: ControllerConfig) -> float:
    """Rate for the next batch: RM envelope at step s times the multiplier."""
    if not config.psi_min <= state.psi <= config.psi_max:
        raise InvalidState(f"psi={state.psi} escaped [{config.psi_min}, {config.psi_max}]")
    eta = (config.eta0 / (state.s + config.t0) ** config.alpha) * state.psi
    state.s += 1
    return eta


def end_of_epoch(state: ControllerState, config: ControllerConfig, z: float, epsilon: float) -> float:
    """Advance the epoch-level state machine; returns the applied multiplier.

    Branches in priority order: warm-up holds, cooldown holds, a spike
    sustained for n_trigger epochs downscales, otherwise quiet epochs
    upscale (or decay mildly past the late split). Any non-unity
    multiplier starts a cooldown.
    """
    if state.s > 0 and state.s == state._s_at_epoch_end:
        raise InvalidState("end_of_epoch called twice for the same epoch (no batches in between)")
    t = state.epoch + 1

    if t <= config.k_warm:
        u = 1.0
    elif state.cooldown_left > 0:
        state.cooldown_left -= 1
        u = 1.0
    elif z > epsilon:
        state.consecutive_over += 1
        if state.consecutive_over >= config.n_trigger:
            u = config.gamma_down
            state.cooldown_left = config.cooldown
            state.consecutive_over = 0
        else:
            u = 1.0
    else:
        state.consecutive_over = 0
        u = config.gamma_up if t <= config.n_late else config.gamma_late
        state.cooldown_left = config.cooldown

    state.psi = min(config.psi_max, max(config.psi_min, state.psi * u))
    state.epoch = t
    state._s_at_epoch_end = state.s
    return u
