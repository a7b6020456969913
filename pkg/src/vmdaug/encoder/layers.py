"""Forward/backward pairs for the layers of the Encoder.

Tensors are float64 ``(batch, channels, time)`` unless noted. Every
``*_forward`` returns ``(output, cache)``; the matching ``*_backward`` takes
the upstream gradient and that cache.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

IN_EPS = 1e-5


# -- convolution, "same" zero padding, stride 1 ------------------------------

def conv1d_forward(x, W):
    k = W.shape[2]
    pad = k // 2
    xp = np.pad(x, ((0, 0), (0, 0), (pad, k - 1 - pad)))
    win = sliding_window_view(xp, k, axis=2)            # (B, Cin, L, k)
    B, Cin, L, _ = win.shape
    cols = win.transpose(0, 2, 1, 3).reshape(B, L, Cin * k)
    out = cols @ W.reshape(W.shape[0], -1).T           # (B, L, Cout)
    return out.transpose(0, 2, 1), (cols, x.shape, W)


def conv1d_backward(g, cache):
    cols, xshape, W = cache
    Cout, Cin, k = W.shape
    B, _, L = xshape
    gt = g.transpose(0, 2, 1)                           # (B, L, Cout)
    dW = np.tensordot(gt, cols, axes=([0, 1], [0, 1])).reshape(W.shape)
    dcols = (gt @ W.reshape(Cout, -1)).reshape(B, L, Cin, k)
    pad = k // 2
    dxp = np.zeros((B, Cin, L + k - 1))
    for j in range(k):
        dxp[:, :, j:j + L] += dcols[:, :, :, j].transpose(0, 2, 1)
    return dxp[:, :, pad:pad + L], dW


# -- instance normalization over the last axis -------------------------------

def instance_norm_forward(x, gamma, beta):
    """Normalize each (sample, channel) row over its last axis, then rescale.

    ``gamma``/``beta`` broadcast against ``x`` with the normalized axis
    dropped, so the same code serves (B, C, L) maps and (B, H) vectors.
    """
    mu = x.mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(x.var(axis=-1, keepdims=True) + IN_EPS)
    xhat = (x - mu) * inv
    y = gamma[..., None] * xhat + beta[..., None] if x.ndim == 3 else gamma * xhat + beta
    return y, (xhat, inv, gamma)


def instance_norm_backward(g, cache):
    xhat, inv, gamma = cache
    n = xhat.shape[-1]
    if xhat.ndim == 3:
        dgamma = np.sum(g * xhat, axis=(0, 2))
        dbeta = g.sum(axis=(0, 2))
        dxhat = g * gamma[:, None]
    else:
        dgamma = np.sum(g * xhat, axis=0)
        dbeta = g.sum(axis=0)
        dxhat = g * gamma
    dx = inv / n * (n * dxhat - dxhat.sum(axis=-1, keepdims=True)
                    - xhat * np.sum(dxhat * xhat, axis=-1, keepdims=True))
    return dx, dgamma, dbeta


# -- PReLU with one slope per channel ----------------------------------------

def prelu_forward(x, a):
    pos = x > 0
    return np.where(pos, x, a[:, None] * x), (x, pos, a)


def prelu_backward(g, cache):
    x, pos, a = cache
    dx = np.where(pos, g, a[:, None] * g)
    da = np.sum(np.where(pos, 0.0, g * x), axis=(0, 2))
    return dx, da


# -- dropout ------------------------------------------------------------------

def dropout_forward(x, rate, rng):
    if rate <= 0 or rng is None:
        return x, None
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * mask, mask


def dropout_backward(g, mask):
    return g if mask is None else g * mask


# -- max pooling, window 2, stride 2 (a trailing odd sample is dropped) ------

def maxpool2_forward(x):
    B, C, L = x.shape
    pairs = x[:, :, :L - L % 2].reshape(B, C, L // 2, 2)
    arg = pairs.argmax(axis=3)
    out = np.take_along_axis(pairs, arg[..., None], axis=3)[..., 0]
    return out, (arg, x.shape)


def maxpool2_backward(g, cache):
    arg, shape = cache
    B, C, L = shape
    dpairs = np.zeros((B, C, L // 2, 2))
    np.put_along_axis(dpairs, arg[..., None], g[..., None], axis=3)
    dx = np.zeros(shape)
    dx[:, :, :L - L % 2] = dpairs.reshape(B, C, -1)
    return dx


# -- softmax ------------------------------------------------------------------

def softmax(z, axis=-1):
    e = np.exp(z - z.max(axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


def softmax_backward(g, s, axis=-1):
    return s * (g - np.sum(g * s, axis=axis, keepdims=True))


# -- channel-split attention with temporal sum pooling ------------------------

def attention_forward(x, split):
    """First ``split`` channels weighted by a time-softmax of the rest, summed over time."""
    data = x[:, :split]
    weights = softmax(x[:, split:], axis=2)
    return np.sum(data * weights, axis=2), (data, weights)


def attention_backward(g, cache):
    data, weights = cache
    gd = g[:, :, None]
    ddata = gd * weights
    dlogits = softmax_backward(gd * data, weights, axis=2)
    return np.concatenate([ddata, dlogits], axis=1)


# -- dense and sigmoid on (B, features) ---------------------------------------

def dense_forward(x, W, b):
    return x @ W + b, (x, W)


def dense_backward(g, cache):
    x, W = cache
    return g @ W.T, x.T @ g, g.sum(axis=0)


def sigmoid_forward(x):
    s = 0.5 * (1.0 + np.tanh(0.5 * x))
    return s, s


def sigmoid_backward(g, s):
    return g * s * (1.0 - s)
