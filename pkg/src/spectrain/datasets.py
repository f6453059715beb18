"""Dataset ingestion and synthesis: IDX image files, closed-form test signals.

The IDX container is the classic big-endian format: a 4-byte magic
(0x00000803 for image tensors, 0x00000801 for label vectors), one 32-bit
size per dimension, then raw unsigned bytes.

``synthesize_digit_idx`` materializes a desk-scale MNIST-like dataset (28x28
gray digits, 10 classes) from the bundled scikit-learn digit scans, upsampled
and augmented, written as IDX files so the loading path is exercised
end to end.
"""

import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, InvalidInput
from .scales import SampledSignal

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


@dataclass
class LabeledImages:
    images: np.ndarray  # (n, rows, cols) float64 in [0, 1]
    labels: np.ndarray  # (n,) int64 in 0..9

    def __post_init__(self):
        if self.images.shape[0] != self.labels.shape[0]:
            raise InvalidInput("image/label counts differ")

    def __len__(self):
        return self.images.shape[0]


def _read_be32(f):
    raw = f.read(4)
    if len(raw) != 4:
        raise FormatError("truncated IDX header")
    return struct.unpack(">i", raw)[0]


def load_idx(images_path, labels_path):
    """Parse an IDX image/label file pair into pixel range [0, 1]."""
    with open(images_path, "rb") as f:
        magic = _read_be32(f)
        if magic != IDX_IMAGE_MAGIC:
            raise FormatError(f"bad image magic 0x{magic:08x}")
        count, rows, cols = _read_be32(f), _read_be32(f), _read_be32(f)
        raw = f.read(count * rows * cols)
        if len(raw) != count * rows * cols:
            raise FormatError("truncated IDX image payload")
        images = np.frombuffer(raw, dtype=np.uint8).reshape(count, rows, cols)
    with open(labels_path, "rb") as f:
        magic = _read_be32(f)
        if magic != IDX_LABEL_MAGIC:
            raise FormatError(f"bad label magic 0x{magic:08x}")
        n = _read_be32(f)
        raw = f.read(n)
        if len(raw) != n:
            raise FormatError("truncated IDX label payload")
        labels = np.frombuffer(raw, dtype=np.uint8)
    if n != count:
        raise FormatError(f"image count {count} != label count {n}")
    return LabeledImages(images.astype(np.float64) / 255.0, labels.astype(np.int64))


def save_idx(images_u8, labels, images_path, labels_path):
    """Write uint8 images (n, rows, cols) and labels as an IDX file pair."""
    images_u8 = np.asarray(images_u8, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images_u8.shape
    with open(images_path, "wb") as f:
        f.write(struct.pack(">iiii", IDX_IMAGE_MAGIC, n, rows, cols))
        f.write(images_u8.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">ii", IDX_LABEL_MAGIC, n))
        f.write(labels.tobytes())


def subset(data, n_train, n_test, seed):
    """Deterministic stratified train/test sample (disjoint, near-equal per class)."""
    if n_train + n_test > len(data):
        raise InvalidInput(f"requested {n_train}+{n_test} from {len(data)} examples")
    rng = np.random.default_rng(seed)
    classes = np.unique(data.labels)
    per_tr = _spread(n_train, len(classes))
    per_te = _spread(n_test, len(classes))
    tr_idx, te_idx = [], []
    for c, ntr, nte in zip(classes, per_tr, per_te):
        pool = np.nonzero(data.labels == c)[0]
        if ntr + nte > pool.size:
            raise InvalidInput(f"class {c} has only {pool.size} examples")
        pick = rng.permutation(pool)
        tr_idx.append(pick[:ntr])
        te_idx.append(pick[ntr : ntr + nte])
    tr = np.sort(np.concatenate(tr_idx))
    te = np.sort(np.concatenate(te_idx))
    return (
        LabeledImages(data.images[tr], data.labels[tr]),
        LabeledImages(data.images[te], data.labels[te]),
    )


def _spread(total, k):
    """Split `total` into k near-equal counts (first `total % k` get one extra)."""
    base, extra = divmod(total, k)
    return [base + (1 if i < extra else 0) for i in range(k)]


# ---------------------------------------------------------------------------
# Closed-form test signals, all evaluated on [0, 2).

SIGNAL_FUNCTIONS = {
    "sin_2pi_x": lambda x: np.sin(2 * np.pi * x),
    "sin_20pi_x": lambda x: np.sin(20 * np.pi * x),
    "sin_200pi_x": lambda x: np.sin(200 * np.pi * x),
    "100sin_20pi_x": lambda x: 100 * np.sin(20 * np.pi * x),
    "40cos_2pi_x": lambda x: 40 * np.cos(2 * np.pi * x),
    "100cos_20pi_x": lambda x: 100 * np.cos(20 * np.pi * x),
    "sin_2pi_x2": lambda x: np.sin(2 * np.pi * x**2),
    "x_plus_x2_plus_x3": lambda x: x + x**2 + x**3,
    "x_plus_sin_2pi_x4": lambda x: x + np.sin(2 * np.pi * x**4),
    "cos_2pi_x_plus_sin_20pi_x": lambda x: np.cos(2 * np.pi * x) + np.sin(20 * np.pi * x),
    "cos_20pi_x_sin_15pi_x": lambda x: np.cos(20 * np.pi * x) * np.sin(15 * np.pi * x),
    "cos_32pi_x_cubed": lambda x: np.cos(32 * np.pi * x) ** 3,
    "four_close_sines": lambda x: (
        np.sin(13 * np.pi * x) + np.sin(17 * np.pi * x)
        + np.sin(19 * np.pi * x) + np.sin(23 * np.pi * x)
    ),
    "sin50pi_sin20pi_cos15pi": lambda x: (
        np.sin(50 * np.pi * x) * np.sin(20 * np.pi * x) * np.cos(15 * np.pi * x)
    ),
    "mixed_scales": lambda x: (
        np.sin(40 * np.pi * x) * np.cos(10 * np.pi * x)
        + 3 * np.sin(20 * x) * np.sin(40 * x)
    ),
    "sin_2x_cos_32x": lambda x: np.sin(2 * x) * np.cos(32 * x),
}


def gen_signal(signal_id, n_samples=512, domain=(0.0, 2.0)):
    """Evaluate a named closed-form signal on an endpoint-exclusive uniform grid."""
    if signal_id not in SIGNAL_FUNCTIONS:
        raise InvalidInput(f"unknown signal id {signal_id!r}")
    a, b = domain
    xs = a + (b - a) * np.arange(n_samples) / n_samples
    return SampledSignal(xs, SIGNAL_FUNCTIONS[signal_id](xs))


def split_75_25(signal_or_n, seed):
    """Uniform random 75/25 index partition, deterministic per seed."""
    n = signal_or_n if isinstance(signal_or_n, int) else len(signal_or_n.ys)
    if n < 4:
        raise InvalidInput("need at least 4 samples to split")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_train = int(round(0.75 * n))
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


# ---------------------------------------------------------------------------
# Desk-scale digit dataset.

IDX_BASENAMES = (
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
)


def _bilinear_resize(img, out_h, out_w):
    in_h, in_w = img.shape
    ys = (np.arange(out_h) + 0.5) * in_h / out_h - 0.5
    xs = (np.arange(out_w) + 0.5) * in_w / out_w - 0.5
    y0 = np.clip(np.floor(ys).astype(int), 0, in_h - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, in_w - 1)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = np.clip(ys - y0, 0.0, 1.0)[:, None]
    wx = np.clip(xs - x0, 0.0, 1.0)[None, :]
    top = img[np.ix_(y0, x0)] * (1 - wx) + img[np.ix_(y0, x1)] * wx
    bot = img[np.ix_(y1, x0)] * (1 - wx) + img[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bot * wy


def _augment(img, rng):
    dy, dx = rng.integers(-2, 3, size=2)
    out = np.zeros_like(img)
    h, w = img.shape
    ys = slice(max(0, dy), min(h, h + dy))
    xs = slice(max(0, dx), min(w, w + dx))
    ys_src = slice(max(0, -dy), min(h, h - dy))
    xs_src = slice(max(0, -dx), min(w, w - dx))
    out[ys, xs] = img[ys_src, xs_src]
    out = out + rng.normal(0.0, 0.04, size=out.shape)
    return np.clip(out, 0.0, 1.0)


def synthesize_digit_idx(out_dir, n_train=2000, n_test=500, seed=0):
    """Write a deterministic 28x28 digit dataset as IDX files into out_dir.

    Source images are the bundled scikit-learn 8x8 digit scans, bilinearly
    upsampled to 28x28; counts beyond the source pool are reached with
    shift/noise augmentation.  Train and test draw from disjoint source
    images.  Returns the four file paths (train images/labels, test
    images/labels).
    """
    from sklearn.datasets import load_digits

    base = load_digits()
    imgs = np.stack([_bilinear_resize(im / 16.0, 28, 28) for im in base.images])
    labels = base.target.astype(np.int64)

    rng = np.random.default_rng(seed)
    pool = LabeledImages(imgs, labels)
    # hold out a quarter of the source scans for the test side
    n_src_test = len(pool) // 4
    src_test, src_train = [], []
    for c in range(10):
        idx = rng.permutation(np.nonzero(labels == c)[0])
        k = max(1, int(round(len(idx) * n_src_test / len(pool))))
        src_test.append(idx[:k])
        src_train.append(idx[k:])
    src_train = np.concatenate(src_train)
    src_test = np.concatenate(src_test)

    def sample(src_idx, n):
        out_i = np.empty((n, 28, 28))
        out_l = np.empty(n, dtype=np.uint8)
        order = pool.labels[src_idx]
        for i, c in enumerate(np.repeat(np.arange(10), _spread(n, 10))[:n]):
            choices = src_idx[order == c]
            j = choices[rng.integers(len(choices))]
            out_i[i] = _augment(pool.images[j], rng)
            out_l[i] = c
        perm = rng.permutation(n)
        return out_i[perm], out_l[perm]

    tr_i, tr_l = sample(src_train, n_train)
    te_i, te_l = sample(src_test, n_test)

    os.makedirs(out_dir, exist_ok=True)
    paths = [os.path.join(out_dir, b) for b in IDX_BASENAMES]
    save_idx(np.round(tr_i * 255).astype(np.uint8), tr_l, paths[0], paths[1])
    save_idx(np.round(te_i * 255).astype(np.uint8), te_l, paths[2], paths[3])
    return paths


def load_idx_dir(data_dir):
    """Load the train/test IDX quadruple from a directory."""
    paths = [os.path.join(data_dir, b) for b in IDX_BASENAMES]
    missing = [p for p in paths if not os.path.exists(p)]
    if missing:
        raise FileNotFoundError(f"missing IDX files: {missing}")
    return load_idx(paths[0], paths[1]), load_idx(paths[2], paths[3])
