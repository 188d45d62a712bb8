"""Desk-scale fully connected trainer with manual forward/backward.

ReLU hidden layers, softmax cross-entropy loss, SGD with momentum and L2
weight decay added to the gradient. The network exposes an activation tap
so a probe set can be run through it once per epoch.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .connectome import ActivationMatrix, ProbeSet
from .errors import InvalidArgument

CHECKPOINT_MAGIC = b"CGALRNET"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class MlpSpec:
    """Layer widths (input, hidden..., classes) and the activation tap.

    ``tap_layer`` indexes the hidden layer feeding the connectome; None
    picks the second hidden layer when there is one, else the first.
    """

    layer_sizes: tuple
    tap_layer: int | None = None

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 3:
            raise InvalidArgument("need at least (input, one hidden, classes)")
        if any(s < 1 for s in sizes):
            raise InvalidArgument("all layer widths must be >= 1")
        tap = self.tap_layer
        if tap is None:
            tap = 1 if len(sizes) >= 4 else 0
            object.__setattr__(self, "tap_layer", tap)
        if not 0 <= tap <= len(sizes) - 3:
            raise InvalidArgument(f"tap_layer {tap} out of range for {len(sizes) - 2} hidden layers")
        if sizes[tap + 1] < 2:
            raise InvalidArgument("the tapped hidden layer needs width >= 2 to form a connectome")

    @property
    def n_hidden(self) -> int:
        return len(self.layer_sizes) - 2


@dataclass(frozen=True)
class SgdConfig:
    momentum: float = 0.9
    weight_decay: float = 5e-4
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.momentum < 1.0:
            raise InvalidArgument("momentum must lie in [0, 1)")
        if self.weight_decay < 0.0:
            raise InvalidArgument("weight decay must be >= 0")
        if self.batch_size < 1:
            raise InvalidArgument("batch size must be >= 1")


class Mlp:
    """Weights, biases, and momentum buffers for the dense stack."""

    def __init__(self, spec: MlpSpec, seed: int = 0):
        self.spec = spec
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(3,)))
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(spec.layer_sizes[:-1], spec.layer_sizes[1:]):
            limit = np.sqrt(6.0 / fan_in)
            self.weights.append(rng.uniform(-limit, limit, (fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))
        self.velocity_w = [np.zeros_like(w) for w in self.weights]
        self.velocity_b = [np.zeros_like(b) for b in self.biases]

    def params(self) -> list:
        return self.weights + self.biases

    def forward(self, x: np.ndarray):
        """Returns (logits, post-ReLU hidden activations)."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.spec.layer_sizes[0]:
            raise InvalidArgument(f"expected inputs of width {self.spec.layer_sizes[0]}, got shape {x.shape}")
        hidden = []
        a = x
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            a = np.maximum(0.0, a @ w + b)
            hidden.append(a)
        logits = a @ self.weights[-1] + self.biases[-1]
        return logits, hidden


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(logits: np.ndarray, y: np.ndarray) -> float:
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    return float(np.mean(lse - shifted[np.arange(len(y)), y]))


def backprop_gradients(model: Mlp, x: np.ndarray, y: np.ndarray):
    """Exact gradients of the mean cross-entropy w.r.t. all parameters.

    Returns (weight grads, bias grads, batch loss).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.shape[0] == 0:
        raise InvalidArgument("batch must be nonempty")
    logits, hidden = model.forward(x)
    loss = cross_entropy(logits, y)
    probs = softmax_rows(logits)
    probs[np.arange(len(y)), y] -= 1.0
    delta = probs / len(y)

    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    inputs = [x] + hidden
    for layer in range(len(model.weights) - 1, -1, -1):
        grads_w[layer] = inputs[layer].T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ model.weights[layer].T) * (hidden[layer - 1] > 0.0)
    return grads_w, grads_b, loss


def sgd_step(model: Mlp, grads_w, grads_b, eta: float, cfg: SgdConfig) -> None:
    """Momentum SGD; weight decay enters the gradient before momentum."""
    for i in range(len(model.weights)):
        gw = grads_w[i] + cfg.weight_decay * model.weights[i]
        gb = grads_b[i] + cfg.weight_decay * model.biases[i]
        model.velocity_w[i] = cfg.momentum * model.velocity_w[i] + gw
        model.velocity_b[i] = cfg.momentum * model.velocity_b[i] + gb
        model.weights[i] -= eta * model.velocity_w[i]
        model.biases[i] -= eta * model.velocity_b[i]


def evaluate(model: Mlp, x: np.ndarray, y: np.ndarray) -> tuple:
    logits, _ = model.forward(x)
    loss = cross_entropy(logits, y)
    acc = float(np.mean(logits.argmax(axis=1) == y))
    return loss, acc


def batch_order(n: int, batch_size: int, rng) -> list:
    """Seeded shuffle split into contiguous batches."""
    order = rng.permutation(n)
    return [order[i : i + batch_size] for i in range(0, n, batch_size)]


def train_epoch(model: Mlp, x: np.ndarray, y: np.ndarray, rate_source, cfg: SgdConfig, order_rng, epoch: int) -> dict:
    """One full pass in a seeded deterministic batch order.

    The rate source is queried after gradients are computed, so
    displacement-over-gradient policies see the step they are about to
    scale. Returns the mean batch loss and the rate used at batch 0.
    """
    from .schedules import BatchContext

    if x.shape[0] != y.shape[0]:
        raise InvalidArgument("features and labels disagree on the number of samples")
    losses = []
    eta_batch0 = None
    for b, idx in enumerate(batch_order(x.shape[0], cfg.batch_size, order_rng)):
        grads_w, grads_b, loss = backprop_gradients(model, x[idx], y[idx])
        ctx = BatchContext(epoch=epoch, batch=b, params=model.params(), grads=grads_w + grads_b)
        eta = float(rate_source.batch_rate(ctx))
        if b == 0:
            eta_batch0 = eta
        sgd_step(model, grads_w, grads_b, eta, cfg)
        losses.append(loss)
    return {"train_loss": float(np.mean(losses)), "eta_batch0": eta_batch0, "n_batches": len(losses)}


def capture_activations(model: Mlp, x_all: np.ndarray, probe: ProbeSet, tap_layer=None) -> ActivationMatrix:
    """Post-ReLU activations of the tapped hidden layer over the probe.

    Evaluation-mode forward pass: no parameters change.
    """
    tap = model.spec.tap_layer if tap_layer is None else tap_layer
    if not 0 <= tap < model.spec.n_hidden:
        raise InvalidArgument(f"tap_layer {tap} out of range for {model.spec.n_hidden} hidden layers")
    idx = np.asarray(probe.indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= x_all.shape[0]):
        raise InvalidArgument("probe indices out of dataset range")
    _, hidden = model.forward(x_all[idx])
    return ActivationMatrix(hidden[tap], probe.indices)


def save_checkpoint(model: Mlp, path) -> None:
    """Flat binary: magic, version, layer count, widths, float64 params."""
    sizes = model.spec.layer_sizes
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", CHECKPOINT_VERSION, len(sizes)))
        fh.write(struct.pack(f"<{len(sizes)}I", *sizes))
        for w, b in zip(model.weights, model.biases):
            fh.write(w.astype("<f8").tobytes())
            fh.write(b.astype("<f8").tobytes())


def load_checkpoint(path) -> Mlp:
    with open(path, "rb") as fh:
        magic = fh.read(len(CHECKPOINT_MAGIC))
        if magic != CHECKPOINT_MAGIC:
            raise InvalidArgument("not a model checkpoint (bad magic)")
        version, n_sizes = struct.unpack("<II", fh.read(8))
        if version != CHECKPOINT_VERSION:
            raise InvalidArgument(f"unsupported checkpoint version {version}")
        sizes = struct.unpack(f"<{n_sizes}I", fh.read(4 * n_sizes))
        model = Mlp(MlpSpec(sizes), seed=0)
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            w = np.frombuffer(fh.read(8 * fan_in * fan_out), dtype="<f8").reshape(fan_in, fan_out)
            b = np.frombuffer(fh.read(8 * fan_out), dtype="<f8")
            model.weights[i] = w.copy()
            model.biases[i] = b.copy()
    return model
