"""Minimal trainable network engine with flattened weights and snapshot logs.

The engine exists to realize the per-epoch training map: one epoch of
minibatch SGD advances the flattened weight vector w_t to w_{t+1}, and the
whole trajectory is logged so spectral analysis can treat training as a
discrete dynamical system.  Everything is deterministic under (config, data,
seed), including batch order; an optional prune mask re-zeroes its positions
after every optimizer step, so pinned weights stay exactly zero in every
snapshot.

Supported layers: dense, 5x5-style valid conv2d, 2x2 max-pool, and a final
softmax marker.  Hidden activations are ReLU (paired with the He/Xavier
init schemes); the classifier head is identity into softmax cross-entropy.
"""

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import _nn_kernels as K
from .errors import InvalidInput

INIT_SCHEMES = ("he", "xavier", "random_normal")


@dataclass
class LayerSpec:
    kind: str                      # dense | conv2d | maxpool2x2 | softmax
    in_shape: tuple
    out_shape: tuple
    units: int = 0                 # dense
    kernel: int = 5                # conv2d
    channels: int = 0              # conv2d output channels
    activation: str = "identity"   # relu | identity


@dataclass
class Network:
    layers: list
    layout: list                   # (name, offset, shape) per parameter tensor
    n_params: int
    weights: np.ndarray = None

    def __post_init__(self):
        if self.weights is None:
            self.weights = np.zeros(self.n_params)

    def tensors(self, w=None):
        """Views of the flat vector as per-layer tensors (zero-copy)."""
        w = self.weights if w is None else w
        out = {}
        for name, off, shape in self.layout:
            out[name] = w[off : off + int(np.prod(shape))].reshape(shape)
        return out

    def flatten(self, tensors):
        w = np.empty(self.n_params)
        for name, off, shape in self.layout:
            w[off : off + int(np.prod(shape))] = tensors[name].ravel()
        return w

    def bias_indices(self):
        idx = []
        for name, off, shape in self.layout:
            if name.endswith(".b"):
                idx.extend(range(off, off + int(np.prod(shape))))
        return np.asarray(idx, dtype=np.int64)


def _chain(layers):
    for prev, cur in zip(layers, layers[1:]):
        if tuple(prev.out_shape) != tuple(cur.in_shape):
            raise InvalidInput(
                f"layer shapes do not chain: {prev.out_shape} -> {cur.in_shape}"
            )


def build_network(layers):
    _chain(layers)
    layout = []
    off = 0
    for li, spec in enumerate(layers):
        if spec.kind == "dense":
            shapes = [(f"{li}.W", (int(np.prod(spec.in_shape)), spec.units)),
                      (f"{li}.b", (spec.units,))]
        elif spec.kind == "conv2d":
            cin = spec.in_shape[-1]
            shapes = [(f"{li}.W", (spec.kernel, spec.kernel, cin, spec.channels)),
                      (f"{li}.b", (spec.channels,))]
        else:
            shapes = []
        for name, shape in shapes:
            layout.append((name, off, shape))
            off += int(np.prod(shape))
    return Network(layers=list(layers), layout=layout, n_params=off)


def dense_network(input_dim, hidden_units, n_classes=10):
    """Fully-connected ReLU classifier, e.g. dense_network(784, [100])."""
    layers = []
    shape = (input_dim,)
    for u in hidden_units:
        layers.append(LayerSpec("dense", shape, (u,), units=u, activation="relu"))
        shape = (u,)
    layers.append(LayerSpec("dense", shape, (n_classes,), units=n_classes))
    layers.append(LayerSpec("softmax", (n_classes,), (n_classes,)))
    return build_network(layers)


def conv_network(input_hw=28, n_classes=10):
    """Two 5x5 conv layers (16, 32 kernels) each max-pooled, then dense 100 -> 10."""
    h = input_hw
    layers = [
        LayerSpec("conv2d", (h, h, 1), (h - 4, h - 4, 16), channels=16, activation="relu"),
        LayerSpec("maxpool2x2", (h - 4, h - 4, 16), ((h - 4) // 2, (h - 4) // 2, 16)),
    ]
    h2 = (h - 4) // 2
    layers += [
        LayerSpec("conv2d", (h2, h2, 16), (h2 - 4, h2 - 4, 32), channels=32, activation="relu"),
        LayerSpec("maxpool2x2", (h2 - 4, h2 - 4, 32), ((h2 - 4) // 2, (h2 - 4) // 2, 32)),
    ]
    h3 = (h2 - 4) // 2
    layers += [
        LayerSpec("dense", (h3, h3, 32), (100,), units=100, activation="relu"),
        LayerSpec("dense", (100,), (n_classes,), units=n_classes),
        LayerSpec("softmax", (n_classes,), (n_classes,)),
    ]
    return build_network(layers)


def init_weights(net, scheme, seed):
    """He / Xavier / standard-normal weight draws; biases exactly zero."""
    if scheme not in INIT_SCHEMES:
        raise InvalidInput(f"unknown init scheme {scheme!r}")
    rng = np.random.default_rng(seed)
    w = np.zeros(net.n_params)
    specs = {f"{li}": spec for li, spec in enumerate(net.layers)}
    for name, off, shape in net.layout:
        if name.endswith(".b"):
            continue
        spec = specs[name.split(".")[0]]
        if spec.kind == "dense":
            fan_in = shape[0]
            fan_out = shape[1]
        else:
            fan_in = shape[0] * shape[1] * shape[2]
            fan_out = shape[0] * shape[1] * shape[3]
        if scheme == "he":
            std = np.sqrt(2.0 / fan_in)
        elif scheme == "xavier":
            std = np.sqrt(2.0 / (fan_in + fan_out))
        else:
            std = 1.0
        size = int(np.prod(shape))
        w[off : off + size] = rng.normal(0.0, std, size=size)
    return w


def _as_batch(net, x):
    x = np.asarray(x, dtype=np.float64)
    first = net.layers[0]
    want = tuple(first.in_shape)
    if first.kind == "dense":
        if x.ndim == 1:
            x = x[None, :]
        if int(np.prod(x.shape[1:])) != int(np.prod(want)):
            raise InvalidInput(f"batch shape {x.shape[1:]} != input shape {want}")
        return x.reshape(x.shape[0], -1)
    if x.ndim == len(want):          # single example
        x = x[None, ...]
    if x.ndim == 3 and len(want) == 3 and want[-1] == 1:
        x = x[..., None]
    if x.shape[1:] != want:
        raise InvalidInput(f"batch shape {x.shape[1:]} != input shape {want}")
    return x


def forward(net, batch, want_cache=False):
    """Run the network; returns (logits, cache).

    ``cache`` holds per-layer inputs/pre-activations for backprop plus the
    softmax probabilities under key -1.  Softmax rows sum to 1.
    """
    x = _as_batch(net, batch)
    tensors = net.tensors()
    cache = {}
    for li, spec in enumerate(net.layers):
        if spec.kind == "dense":
            xin = x.reshape(x.shape[0], -1)
            z = xin @ tensors[f"{li}.W"] + tensors[f"{li}.b"]
            x = np.maximum(z, 0.0) if spec.activation == "relu" else z
            if want_cache:
                cache[li] = (xin, z)
        elif spec.kind == "conv2d":
            z = K.conv2d_forward(x, tensors[f"{li}.W"], tensors[f"{li}.b"])
            out = np.maximum(z, 0.0) if spec.activation == "relu" else z
            if want_cache:
                cache[li] = (x, z)
            x = out
        elif spec.kind == "maxpool2x2":
            x, idx = K.maxpool2x2_forward(x)
            if want_cache:
                cache[li] = idx
        elif spec.kind == "softmax":
            cache[-1] = softmax(x)
        else:
            raise InvalidInput(f"unknown layer kind {spec.kind!r}")
    logits = x
    if -1 not in cache:
        cache[-1] = softmax(logits)
    return (logits, cache) if want_cache else (logits, {-1: cache[-1]})


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def predict_proba(net, batch):
    return forward(net, batch)[1][-1]


def cross_entropy(logits, labels):
    """Mean negative log softmax probability of the true class (max-shifted)."""
    labels = np.asarray(labels)
    z = logits - logits.max(axis=-1, keepdims=True)
    lse = np.log(np.sum(np.exp(z), axis=-1))
    picked = z[np.arange(z.shape[0]), labels]
    return float(np.mean(lse - picked))


def backward(net, batch, labels):
    """Flat gradient of mean cross-entropy w.r.t. every weight."""
    x = _as_batch(net, batch)
    labels = np.asarray(labels)
    logits, cache = forward(net, x, want_cache=True)
    B = logits.shape[0]
    g = cache[-1].copy()
    g[np.arange(B), labels] -= 1.0
    g /= B

    tensors = net.tensors()
    grads = {name: None for name, _, _ in net.layout}
    for li in range(len(net.layers) - 1, -1, -1):
        spec = net.layers[li]
        if spec.kind == "softmax":
            continue
        if spec.kind == "dense":
            xin, z = cache[li]
            if spec.activation == "relu":
                g = g * (z > 0)
            grads[f"{li}.W"] = xin.T @ g
            grads[f"{li}.b"] = g.sum(axis=0)
            g = (g @ tensors[f"{li}.W"].T).reshape(
                (B,) + tuple(net.layers[li].in_shape)
            )
        elif spec.kind == "conv2d":
            xin, z = cache[li]
            if spec.activation == "relu":
                g = g * (z > 0)
            g, gw, gb = K.conv2d_backward(xin, tensors[f"{li}.W"], g)
            grads[f"{li}.W"] = gw
            grads[f"{li}.b"] = gb
        elif spec.kind == "maxpool2x2":
            g = K.maxpool2x2_backward(g, cache[li])
    flat = np.zeros(net.n_params)
    for name, off, shape in net.layout:
        flat[off : off + int(np.prod(shape))] = grads[name].ravel()
    return flat


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 1
    batch_size: int = 64
    init_scheme: str = "he"
    seed: int = 0
    mask: np.ndarray = None          # boolean, True = pinned to zero
    weight_log_limit: int = None     # keep weight snapshots only up to this epoch

    def __post_init__(self):
        if self.learning_rate < 0:
            raise InvalidInput("learning_rate must be >= 0")
        if self.epochs < 0:
            raise InvalidInput("epochs must be >= 0")

    def to_json(self):
        d = {k: getattr(self, k) for k in
             ("learning_rate", "epochs", "batch_size", "init_scheme", "seed",
              "weight_log_limit")}
        d["mask"] = None if self.mask is None else int(np.count_nonzero(self.mask))
        return d


@dataclass
class SnapshotLog:
    """Per-epoch trajectory of the training map: weights plus loss scalars.

    Epoch 0 is the pre-training initialization.  ``weights[t]`` may be None
    when logging was capped via weight_log_limit.
    """

    epochs: list = field(default_factory=list)
    weights: list = field(default_factory=list)
    train_losses: list = field(default_factory=list)
    test_losses: list = field(default_factory=list)
    events: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.epochs)

    def weight_matrix(self, start, end):
        """Columns w_t for t in [start, end); requires logged weights."""
        if not (0 <= start < end <= len(self)):
            raise InvalidInput(f"window [{start}, {end}) outside log of {len(self)}")
        cols = []
        for t in range(start, end):
            if self.weights[t] is None:
                raise InvalidInput(f"weights at epoch {t} were not logged")
            cols.append(self.weights[t])
        return np.stack(cols, axis=1)

    def save(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "meta.json"), "w") as f:
            json.dump({"meta": self.meta, "events": self.events,
                       "epochs": self.epochs}, f, indent=2)
        with open(os.path.join(out_dir, "losses.csv"), "w", newline="") as f:
            wr = csv.writer(f)
            wr.writerow(["epoch", "train_loss", "test_loss"])
            for t, tr, te in zip(self.epochs, self.train_losses, self.test_losses):
                wr.writerow([t, repr(tr), repr(te)])
        for t, w in zip(self.epochs, self.weights):
            if w is not None:
                path = os.path.join(out_dir, f"weights_{t:05d}.bin")
                w.astype("<f8").tofile(path)

    @classmethod
    def load(cls, out_dir):
        with open(os.path.join(out_dir, "meta.json")) as f:
            head = json.load(f)
        log = cls(meta=head["meta"], events=head["events"])
        with open(os.path.join(out_dir, "losses.csv"), newline="") as f:
            rows = list(csv.reader(f))[1:]
        for t_str, tr, te in rows:
            t = int(t_str)
            path = os.path.join(out_dir, f"weights_{t:05d}.bin")
            w = np.fromfile(path, dtype="<f8") if os.path.exists(path) else None
            log.epochs.append(t)
            log.weights.append(w)
            log.train_losses.append(float(tr))
            log.test_losses.append(float(te))
        return log


def dataset_loss(net, X, y, chunk=1024):
    total, n = 0.0, len(y)
    for i in range(0, n, chunk):
        logits, _ = forward(net, X[i : i + chunk])
        total += cross_entropy(logits, y[i : i + chunk]) * min(chunk, n - i)
    return total / n


def train(net, data, config, test_data=None, initial_weights=None):
    """Run epochs of minibatch SGD, logging (t, w_t, train loss, test loss).

    Epoch 0 records the initialization (or ``initial_weights`` when
    resuming, e.g. after pruning).  Masked positions are re-zeroed after
    every optimizer step.  A non-finite loss is recorded as an event and
    training continues; divergence is an analyzable behavior, not an error.
    """
    X, y = data
    if len(y) == 0:
        raise InvalidInput("empty training set")
    if initial_weights is not None:
        w = np.array(initial_weights, dtype=np.float64, copy=True)
        if w.size != net.n_params:
            raise InvalidInput("initial_weights size mismatch")
    else:
        w = init_weights(net, config.init_scheme, config.seed)
    mask = None
    if config.mask is not None:
        mask = np.asarray(config.mask, dtype=bool)
        if mask.size != net.n_params:
            raise InvalidInput("mask size mismatch")
        w[mask] = 0.0
    net.weights = w

    log = SnapshotLog(meta={"config": config.to_json(), "n_params": net.n_params})
    rng = np.random.default_rng((config.seed, 1))

    def record(t):
        keep = config.weight_log_limit is None or t <= config.weight_log_limit
        tr = dataset_loss(net, X, y)
        te = dataset_loss(net, *test_data) if test_data is not None else float("nan")
        if not np.isfinite(tr):
            log.events.append({"epoch": t, "event": "nonfinite_loss"})
        log.epochs.append(t)
        log.weights.append(net.weights.copy() if keep else None)
        log.train_losses.append(tr)
        log.test_losses.append(te)

    record(0)
    n = len(y)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        for i in range(0, n, config.batch_size):
            sel = order[i : i + config.batch_size]
            g = backward(net, X[sel], y[sel])
            net.weights -= config.learning_rate * g
            if mask is not None:
                net.weights[mask] = 0.0
        record(epoch)
    return log
