"""Baseline learning-rate policies and the per-batch rate sources.

All policies share the controller's consumer-side interface: the trainer
asks a rate source for one rate per batch (after gradients are known, so
the parameter-free policy can see them) and reports the validation loss
once per epoch.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import controller as ctl
from .errors import InvalidArgument

SCHEDULE_TAGS = ("constant", "cosine", "step", "exp", "plateau", "dog", "cg_alr")


@dataclass
class SchedulePolicy:
    """One schedule tag plus its parameters.

    cosine uses ``t_max``; step uses ``period`` and ``factor``; exp uses
    ``gamma``; plateau uses ``patience``, ``plateau_factor`` and the
    relative improvement threshold; dog uses ``r_epsilon``/``epsilon``.
    """

    tag: str
    eta_star: float = 0.01
    t_max: int = 50
    period: int = 30
    factor: float = 0.1
    gamma: float = 0.97
    patience: int = 10
    plateau_factor: float = 0.1
    plateau_threshold: float = 1e-4
    r_epsilon: float = 1e-6
    epsilon: float = 1e-8
    # plateau bookkeeping (per-run state)
    _scale: float = field(default=1.0, repr=False)
    _best: float = field(default=math.inf, repr=False)
    _bad_epochs: int = field(default=0, repr=False)
    _seen_epoch: int = field(default=-1, repr=False)

    def __post_init__(self):
        if self.tag not in SCHEDULE_TAGS:
            raise InvalidArgument(f"unknown schedule tag {self.tag!r}, expected one of {SCHEDULE_TAGS}")
        if self.eta_star <= 0.0:
            raise InvalidArgument("eta_star must be > 0")
        if self.t_max < 1 or self.period < 1 or self.patience < 1:
            raise InvalidArgument("t_max, period and patience must be >= 1")
        if min(self.factor, self.gamma, self.plateau_factor) <= 0.0:
            raise InvalidArgument("all decay factors must be > 0")
        if self.r_epsilon <= 0.0 or self.epsilon <= 0.0:
            raise InvalidArgument("dog constants must be > 0")


@dataclass
class DogTrace:
    """Distilled parameter-and-gradient history for the parameter-free rate.

    ``x0_norm`` is fixed at initialization; ``dist_from_init`` and
    ``grad_sq_sum`` describe the current step (the running gradient sum
    already includes the step about to be taken); ``rbar`` is the running
    maximum displacement, seeded on first use.
    """

    x0_norm: float
    dist_from_init: float = 0.0
    grad_sq_sum: float = 0.0
    rbar: float | None = None


def dog_rate(trace: DogTrace, r_epsilon: float = 1e-6, epsilon: float = 1e-8) -> float:
    """Running-max displacement over the root of accumulated gradient norms."""
    if trace.rbar is None:
        trace.rbar = r_epsilon * (1.0 + trace.x0_norm)
    trace.rbar = max(trace.rbar, trace.dist_from_init)
    return trace.rbar / math.sqrt(trace.grad_sq_sum + epsilon)


def schedule_rate(policy: SchedulePolicy, epoch: int, batch: int = 0, observed_val_loss=None, optimizer_trace=None) -> float:
    """Rate for the given 0-based epoch under the policy.

    Plateau consumes ``observed_val_loss`` (the most recent completed
    epoch's validation loss) at most once per epoch; dog dispatches to the
    trace-driven rate and ignores the epoch clock.
    """
    if epoch < 0:
        raise InvalidArgument("epoch must be >= 0")
    tag = policy.tag
    if tag == "constant":
        return policy.eta_star
    if tag == "cosine":
        return policy.eta_star * (1.0 + math.cos(math.pi * epoch / policy.t_max)) / 2.0
    if tag == "step":
        return policy.eta_star * policy.factor ** (epoch // policy.period)
    if tag == "exp":
        return policy.eta_star * policy.gamma**epoch
    if tag == "plateau":
        if observed_val_loss is not None and epoch > policy._seen_epoch:
            policy._seen_epoch = epoch
            if observed_val_loss < policy._best * (1.0 - policy.plateau_threshold):
                policy._best = observed_val_loss
                policy._bad_epochs = 0
            else:
                policy._bad_epochs += 1
                if policy._bad_epochs >= policy.patience:
                    policy._scale *= policy.plateau_factor
                    policy._bad_epochs = 0
        return policy.eta_star * policy._scale
    if tag == "dog":
        if optimizer_trace is None:
            raise InvalidArgument("dog needs an optimizer trace")
        return dog_rate(optimizer_trace, policy.r_epsilon, policy.epsilon)
    raise InvalidArgument("cg_alr rates come from the controller, not schedule_rate")


# ---------------------------------------------------------------------------
# Rate sources: the per-batch interface the trainer consumes.


@dataclass
class BatchContext:
    """What a rate source may inspect when asked for a batch rate."""

    epoch: int  # 1-based training epoch
    batch: int
    params: list
    grads: list


class ScheduleRateSource:
    """Wraps the time/loss-driven policies (constant..plateau)."""

    def __init__(self, policy: SchedulePolicy):
        if policy.tag in ("dog", "cg_alr"):
            raise InvalidArgument(f"{policy.tag!r} has its own rate source")
        self.policy = policy
        self._last_val_loss = None

    def batch_rate(self, ctx: BatchContext) -> float:
        return schedule_rate(self.policy, ctx.epoch - 1, ctx.batch, observed_val_loss=self._last_val_loss)

    def end_epoch(self, val_loss: float) -> None:
        self._last_val_loss = val_loss


class DogRateSource:
    """Parameter-free rate from displacement and accumulated gradients."""

    def __init__(self, policy: SchedulePolicy, params: list):
        self.policy = policy
        self._x0 = [np.array(p, dtype=np.float64, copy=True) for p in params]
        x0_norm = math.sqrt(sum(float((p**2).sum()) for p in self._x0))
        self.trace = DogTrace(x0_norm=x0_norm)

    def batch_rate(self, ctx: BatchContext) -> float:
        self.trace.grad_sq_sum += sum(float((g**2).sum()) for g in ctx.grads)
        self.trace.dist_from_init = math.sqrt(
            sum(float(((p - q) ** 2).sum()) for p, q in zip(ctx.params, self._x0))
        )
        return dog_rate(self.trace, self.policy.r_epsilon, self.policy.epsilon)

    def end_epoch(self, val_loss: float) -> None:
        pass


class ControllerRateSource:
    """Topology-driven rate: RM envelope per batch, multiplier per epoch.

    The epoch-level update is owned by whoever computes the topological
    signal; this wrapper only exposes the per-batch envelope and keeps the
    (s, eta, psi) trail for envelope audits.
    """

    def __init__(self, config: ctl.ControllerConfig):
        self.config = config
        self.state = ctl.ControllerState()
        self.emitted: list = []  # (s, eta, psi) per batch

    def batch_rate(self, ctx: BatchContext) -> float:
        s_before = self.state.s
        eta = ctl.batch_rate(self.state, self.config)
        self.emitted.append((s_before, eta, self.state.psi))
        return eta

    def end_epoch(self, val_loss: float) -> None:
        pass

    def apply_signal(self, z: float, epsilon: float) -> float:
        return ctl.end_of_epoch(self.state, self.config, z, epsilon)
