"""Convolution and pooling kernels, numba @njit with pure-numpy fallbacks.

Layouts: activations (B, H, W, C), kernels (KH, KW, Cin, Cout), valid
padding.  Max-pool is 2x2 stride 2 with ties broken by first row-major
index inside the window, so gradients are deterministic.  The active
implementation pair is chosen at import via SPECTRAIN_DISABLE_NUMBA;
both variants stay importable for the A/B benchmark.
"""

import numpy as np

from ._accel import NUMBA_ENABLED, njit


@njit(cache=True)
def conv2d_forward_numba(x, w, b):
    B, H, W, Cin = x.shape
    KH, KW, _, Cout = w.shape
    Ho = H - KH + 1
    Wo = W - KW + 1
    y = np.empty((B, Ho, Wo, Cout))
    for n in range(B):
        for i in range(Ho):
            for j in range(Wo):
                for co in range(Cout):
                    acc = b[co]
                    for ki in range(KH):
                        for kj in range(KW):
                            for ci in range(Cin):
                                acc += x[n, i + ki, j + kj, ci] * w[ki, kj, ci, co]
                    y[n, i, j, co] = acc
    return y


@njit(cache=True)
def conv2d_backward_numba(x, w, gy):
    B, H, W, Cin = x.shape
    KH, KW, _, Cout = w.shape
    Ho = H - KH + 1
    Wo = W - KW + 1
    gx = np.zeros(x.shape)
    gw = np.zeros(w.shape)
    gb = np.zeros(Cout)
    for n in range(B):
        for i in range(Ho):
            for j in range(Wo):
                for co in range(Cout):
                    g = gy[n, i, j, co]
                    gb[co] += g
                    for ki in range(KH):
                        for kj in range(KW):
                            for ci in range(Cin):
                                gw[ki, kj, ci, co] += g * x[n, i + ki, j + kj, ci]
                                gx[n, i + ki, j + kj, ci] += g * w[ki, kj, ci, co]
    return gx, gw, gb


@njit(cache=True)
def maxpool2x2_forward_numba(x):
    B, H, W, C = x.shape
    Ho = H // 2
    Wo = W // 2
    y = np.empty((B, Ho, Wo, C))
    idx = np.empty((B, Ho, Wo, C), dtype=np.int8)
    for n in range(B):
        for i in range(Ho):
            for j in range(Wo):
                for c in range(C):
                    best = x[n, 2 * i, 2 * j, c]
                    arg = 0
                    k = 0
                    for di in range(2):
                        for dj in range(2):
                            v = x[n, 2 * i + di, 2 * j + dj, c]
                            if v > best:  # strict: first row-major max wins
                                best = v
                                arg = k
                            k += 1
                    y[n, i, j, c] = best
                    idx[n, i, j, c] = arg
    return y, idx


@njit(cache=True)
def maxpool2x2_backward_numba(gy, idx):
    B, Ho, Wo, C = gy.shape
    gx = np.zeros((B, 2 * Ho, 2 * Wo, C))
    for n in range(B):
        for i in range(Ho):
            for j in range(Wo):
                for c in range(C):
                    k = idx[n, i, j, c]
                    gx[n, 2 * i + k // 2, 2 * j + k % 2, c] = gy[n, i, j, c]
    return gx


def conv2d_forward_numpy(x, w, b):
    B, H, W, Cin = x.shape
    KH, KW, _, Cout = w.shape
    Ho = H - KH + 1
    Wo = W - KW + 1
    y = np.broadcast_to(b, (B, Ho, Wo, Cout)).copy()
    for ki in range(KH):
        for kj in range(KW):
            patch = x[:, ki : ki + Ho, kj : kj + Wo, :]
            y += patch @ w[ki, kj]
    return y


def conv2d_backward_numpy(x, w, gy):
    B, H, W, Cin = x.shape
    KH, KW, _, Cout = w.shape
    Ho = H - KH + 1
    Wo = W - KW + 1
    gx = np.zeros_like(x)
    gw = np.zeros_like(w)
    gb = gy.sum(axis=(0, 1, 2))
    for ki in range(KH):
        for kj in range(KW):
            patch = x[:, ki : ki + Ho, kj : kj + Wo, :]
            gw[ki, kj] = np.einsum("bijc,bijo->co", patch, gy)
            gx[:, ki : ki + Ho, kj : kj + Wo, :] += gy @ w[ki, kj].T
    return gx, gw, gb


def maxpool2x2_forward_numpy(x):
    B, H, W, C = x.shape
    blocks = x.reshape(B, H // 2, 2, W // 2, 2, C).transpose(0, 1, 3, 5, 2, 4)
    flat = blocks.reshape(B, H // 2, W // 2, C, 4)
    idx = flat.argmax(axis=-1).astype(np.int8)  # argmax takes the first max
    y = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
    return y, idx


def maxpool2x2_backward_numpy(gy, idx):
    B, Ho, Wo, C = gy.shape
    gx = np.zeros((B, 2 * Ho, 2 * Wo, C))
    ii, jj = np.divmod(idx.astype(np.int64), 2)
    n, i, j, c = np.indices(gy.shape, sparse=False).reshape(4, -1)
    gx[n, 2 * i + ii.ravel(), 2 * j + jj.ravel(), c] = gy.ravel()
    return gx


if NUMBA_ENABLED:
    conv2d_forward = conv2d_forward_numba
    conv2d_backward = conv2d_backward_numba
    maxpool2x2_forward = maxpool2x2_forward_numba
    maxpool2x2_backward = maxpool2x2_backward_numba
else:
    conv2d_forward = conv2d_forward_numpy
    conv2d_backward = conv2d_backward_numpy
    maxpool2x2_forward = maxpool2x2_forward_numpy
    maxpool2x2_backward = maxpool2x2_backward_numpy
