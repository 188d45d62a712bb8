"""Connectome-guided adaptive learning rates.

Builds functional connectomes from network activations, tracks their
topological reconfiguration with persistence-based distances, and drives
an online learning-rate controller alongside the usual baseline
schedules, a desk-scale trainer, and an experiment harness.
"""

from .connectome import (
    ActivationMatrix,
    Connectome,
    ProbeSet,
    build_probe_set,
    correlation_connectome,
    reduce_feature_maps,
)
from .controller import ControllerConfig, ControllerState, batch_rate, end_of_epoch
from .errors import (
    CgalrError,
    DisconnectedGraph,
    InvalidArgument,
    InvalidData,
    InvalidState,
    UndefinedRatio,
)
from .metrics import (
    DistanceKind,
    bottleneck_distance,
    epoch_distance,
    heat_distance,
    heat_kernel,
    sliced_wasserstein_distance,
    top_distance,
    wasserstein_distance,
)
from .schedules import DogTrace, SchedulePolicy, dog_rate, schedule_rate
from .stats import RedResult, bootstrap_median_ci, composite_score, red
from .topology import (
    PersistenceDiagram,
    PersistenceVector,
    pgh_persistence_vector,
    rips_h1_diagram,
    vr_h1_diagram,
)
from .toposignal import TopoSignalState, adaptive_threshold, push_distance
from .trainer import Mlp, MlpSpec, SgdConfig, backprop_gradients, capture_activations, train_epoch

__version__ = "0.1.0"

__all__ = [
    "ActivationMatrix", "Connectome", "ProbeSet",
    "build_probe_set", "correlation_connectome", "reduce_feature_maps",
    "PersistenceVector", "PersistenceDiagram",
    "pgh_persistence_vector", "vr_h1_diagram", "rips_h1_diagram",
    "DistanceKind", "top_distance", "wasserstein_distance", "bottleneck_distance",
    "heat_kernel", "heat_distance", "sliced_wasserstein_distance", "epoch_distance",
    "TopoSignalState", "push_distance", "adaptive_threshold",
    "ControllerConfig", "ControllerState", "batch_rate", "end_of_epoch",
    "SchedulePolicy", "DogTrace", "schedule_rate", "dog_rate",
    "MlpSpec", "SgdConfig", "Mlp", "train_epoch", "capture_activations", "backprop_gradients",
    "RedResult", "red", "bootstrap_median_ci", "composite_score",
    "CgalrError", "InvalidArgument", "InvalidData", "InvalidState",
    "DisconnectedGraph", "UndefinedRatio",
    "__version__",
]
