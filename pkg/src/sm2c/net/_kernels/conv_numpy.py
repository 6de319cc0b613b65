"""Pure-numpy convolution kernels (im2col + GEMM), same-padding, odd kernels.

Layouts: x (Cin, H, W), w (Cout, Cin, k, k), b (Cout,), y (Cout, H, W).
Used as the fallback when the compiled extension is unavailable.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def _im2col(xpad: np.ndarray, k: int, h: int, w: int) -> np.ndarray:
    cin = xpad.shape[0]
    cols = np.empty((cin * k * k, h * w), dtype=np.float64)
    row = 0
    for ci in range(cin):
        for ki in range(k):
            for kj in range(k):
                cols[row] = xpad[ci, ki : ki + h, kj : kj + w].reshape(h * w)
                row += 1
    return cols


def conv2d(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    cout, cin, k, _ = w.shape
    _, h, wd = x.shape
    p = k // 2
    if p == 0:
        y = w.reshape(cout, cin) @ x.reshape(cin, h * wd)
    else:
        xpad = np.zeros((cin, h + 2 * p, wd + 2 * p), dtype=np.float64)
        xpad[:, p : p + h, p : p + wd] = x
        y = w.reshape(cout, cin * k * k) @ _im2col(xpad, k, h, wd)
    return (y + b[:, None]).reshape(cout, h, wd)


def conv2d_backward(
    x: np.ndarray, w: np.ndarray, gy: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of sum(gy * conv2d(x, w, b)) w.r.t. x, w, b."""
    cout, cin, k, _ = w.shape
    _, h, wd = x.shape
    p = k // 2
    gy_flat = gy.reshape(cout, h * wd)
    gb = gy_flat.sum(axis=1)
    if p == 0:
        gw = (gy_flat @ x.reshape(cin, h * wd).T).reshape(cout, cin, 1, 1)
        gx = (w.reshape(cout, cin).T @ gy_flat).reshape(cin, h, wd)
        return gx, gw, gb
    xpad = np.zeros((cin, h + 2 * p, wd + 2 * p), dtype=np.float64)
    xpad[:, p : p + h, p : p + wd] = x
    gw = (gy_flat @ _im2col(xpad, k, h, wd).T).reshape(cout, cin, k, k)
    # input gradient = same-padded conv of gy with the transposed, flipped kernel
    w_t = np.ascontiguousarray(np.flip(w.transpose(1, 0, 2, 3), axis=(2, 3)))
    gx = conv2d(gy, w_t, np.zeros(cin))
    return gx, gw, gb
