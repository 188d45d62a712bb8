"""Experiment configuration: flat key = value files plus two presets.

Keys follow the training-configuration tables of the image-like and
graph-like regimes (t0, alpha, gamma_up, ...); artifact keys select the
dataset, schedules, distance kinds, seeds and eta_star grid. A config
file overrides the chosen preset; CLI flags override the file.
"""

import hashlib
from dataclasses import dataclass, fields, replace

from .errors import InvalidArgument

# Controller / signal / optimizer keys, named exactly as in the presets.
TABLE_KEYS = (
    "epochs", "exp_gamma", "weight_decay", "momentum",
    "t0", "alpha", "gamma_up", "gamma_down", "gamma_late",
    "cooldown", "n_trigger", "N_ratio", "probe_P",
    "psi_min", "psi_max", "beta", "tau", "robust_w", "mad_k", "K_warm",
)

IMAGE_PRESET = {
    "epochs": 50, "exp_gamma": 0.97, "weight_decay": 5e-4, "momentum": 0.9,
    "t0": 1600.0, "alpha": 0.52, "gamma_up": 1.20, "gamma_down": 0.85,
    "gamma_late": 0.985, "cooldown": 4, "n_trigger": 6, "N_ratio": 0.88,
    "probe_P": 1024, "psi_min": 0.65, "psi_max": 6.0, "beta": 0.96,
    "tau": 0.002, "robust_w": 13, "mad_k": 3.6, "K_warm": 4,
}

GRAPH_PRESET = {
    "epochs": 500, "exp_gamma": 0.97, "weight_decay": 5e-4, "momentum": 0.9,
    "t0": 1300.0, "alpha": 0.56, "gamma_up": 1.08, "gamma_down": 0.84,
    "gamma_late": 0.96, "cooldown": 4, "n_trigger": 4, "N_ratio": 0.80,
    "probe_P": 1024, "psi_min": 0.60, "psi_max": 1.8, "beta": 0.95,
    "tau": 0.002, "robust_w": 16, "mad_k": 3.2, "K_warm": 16,
}

PRESETS = {"image": IMAGE_PRESET, "graph": GRAPH_PRESET}


@dataclass(frozen=True)
class ExperimentConfig:
    # table keys (image preset defaults)
    epochs: int = 50
    exp_gamma: float = 0.97
    weight_decay: float = 5e-4
    momentum: float = 0.9
    t0: float = 1600.0
    alpha: float = 0.52
    gamma_up: float = 1.20
    gamma_down: float = 0.85
    gamma_late: float = 0.985
    cooldown: int = 4
    n_trigger: int = 6
    N_ratio: float = 0.88
    probe_P: int = 1024
    psi_min: float = 0.65
    psi_max: float = 6.0
    beta: float = 0.96
    tau: float = 0.002
    robust_w: int = 13  # 0 = unbounded (cumulative statistics)
    mad_k: float = 3.6
    K_warm: int = 4
    # experiment matrix
    schedule: tuple = ("cg_alr", "constant", "cosine", "step", "exp", "plateau", "dog")
    distance: tuple = ("top",)
    seeds: tuple = (0, 1, 2)
    eta_star: tuple = (0.1, 0.01, 0.001)
    # dataset / model; sized so a 50-epoch run sees a few thousand batches,
    # which is the step-count regime the RM offset t0 was tuned for
    dataset: str = "two_moons"
    n_samples: int = 6000
    noise: float = 0.3
    n_classes: int = 3
    batch_size: int = 32
    hidden_sizes: tuple = (16, 16)
    tap_layer: int = -1  # -1 = auto (second hidden layer when present)
    # per-schedule extras
    step_period: int = 30
    step_factor: float = 0.1
    plateau_patience: int = 10
    plateau_factor: float = 0.1
    plateau_threshold: float = 1e-4
    cosine_t_max: int = 0  # 0 = epochs
    wd_p: float = 2.0
    hk_sigma: float = 0.1
    swk_dirs: int = 50
    swk_p: float = 1.0
    dog_r_eps: float = 1e-6
    dog_eps: float = 1e-8

    @property
    def window(self):
        return None if self.robust_w == 0 else self.robust_w

    @property
    def t_max(self) -> int:
        return self.epochs if self.cosine_t_max == 0 else self.cosine_t_max


_LIST_KEYS = {"schedule", "distance", "seeds", "eta_star", "hidden_sizes"}
_DEFAULTS = ExperimentConfig()
_KNOWN_KEYS = {f.name for f in fields(ExperimentConfig)}


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment; lists use commas."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgument(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def _coerce(key: str, value):
    if key not in _KNOWN_KEYS:
        raise InvalidArgument(f"unknown config key {key!r}")
    if key in _LIST_KEYS:
        if isinstance(value, str):
            items = [v.strip() for v in value.split(",") if v.strip()]
        else:
            items = list(value)
        if key in ("schedule", "distance"):
            return tuple(str(v) for v in items)
        if key in ("seeds", "hidden_sizes"):
            return tuple(int(v) for v in items)
        return tuple(float(v) for v in items)
    default = getattr(_DEFAULTS, key)
    if isinstance(default, bool):
        return str(value).lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return str(value)


def build_config(preset: str = "image", file_text: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Preset, then config file, then explicit overrides."""
    if preset not in PRESETS:
        raise InvalidArgument(f"unknown preset {preset!r}, expected one of {tuple(PRESETS)}")
    cfg = ExperimentConfig(**{k: v for k, v in PRESETS[preset].items()})
    merged = {}
    if file_text is not None:
        merged.update(parse_config_text(file_text))
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})
    coerced = {key: _coerce(key, value) for key, value in merged.items()}
    cfg = replace(cfg, **coerced)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    from .data import DATASETS
    from .metrics import DISTANCE_TAGS
    from .schedules import SCHEDULE_TAGS

    problems = []
    if cfg.epochs < 1:
        problems.append("epochs must be >= 1")
    if cfg.dataset not in DATASETS:
        problems.append(f"dataset must be one of {DATASETS}")
    for tag in cfg.schedule:
        if tag not in SCHEDULE_TAGS:
            problems.append(f"unknown schedule {tag!r}")
    for tag in cfg.distance:
        if tag not in DISTANCE_TAGS:
            problems.append(f"unknown distance {tag!r}")
    if not cfg.seeds:
        problems.append("need at least one seed")
    if not cfg.eta_star or any(e <= 0 for e in cfg.eta_star):
        problems.append("eta_star values must be > 0")
    if cfg.probe_P < 2:
        problems.append("probe_P must be >= 2")
    if cfg.robust_w < 0:
        problems.append("robust_w must be >= 0 (0 = unbounded)")
    if len(cfg.hidden_sizes) < 1 or any(h < 2 for h in cfg.hidden_sizes):
        problems.append("hidden_sizes needs widths >= 2")
    if problems:
        raise InvalidArgument("invalid config: " + "; ".join(problems))


def canonical_text(cfg: ExperimentConfig) -> str:
    lines = []
    for f in sorted(fields(ExperimentConfig), key=lambda f: f.name):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            rendered = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, float):
            rendered = repr(value)
        else:
            rendered = str(value)
        lines.append(f"{f.name} = {rendered}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(canonical_text(cfg).encode("utf-8")).hexdigest()[:12]
