"""Layer kinds: Conv2D, MaxPool2D, Dense, ReLU, Logistic, Flatten, Softmax.

Every layer computes on batched arrays (leading batch axis). Output shape is
a pure function of the input shape; for Conv2D/MaxPool2D the spatial rule is
out = floor((in - k) / stride) + 1 with no zero padding.
"""

from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    """Structural mismatch between an input and what a layer expects."""


# Logistic outputs are kept strictly inside (0, 1); at these bounds the
# analytic derivative y*(1-y) underflows to 0 anyway.
_SIGMOID_EPS = 1e-7


def _glorot_uniform(shape, fan_in, fan_out, rng, dtype):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


def _window_view(x, kh, kw, stride):
    """Strided (N, oh, ow, kh, kw, C) view over spatial windows."""
    n, h, w, c = x.shape
    oh = (h - kh) // stride + 1
    ow = (w - kw) // stride + 1
    sn, sh, sw, sc = x.strides
    return np.lib.stride_tricks.as_strided(
        x,
        shape=(n, oh, ow, kh, kw, c),
        strides=(sn, sh * stride, sw * stride, sh, sw, sc),
        writeable=False,
    )


class Layer:
    kind = "base"

    def out_shape(self, in_shape):
        raise NotImplementedError

    def init_params(self, in_shape, rng, dtype=np.float32):
        return {}

    def forward(self, x, params):
        """Returns (y, cache)."""
        raise NotImplementedError

    def backward(self, gy, cache, params):
        """Returns (gx, grads) with grads keyed like params."""
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}()"


class Conv2D(Layer):
    kind = "conv2d"

    def __init__(self, filters, size, stride):
        if filters < 1 or size < 1 or stride < 1:
            raise ValueError("Conv2D filters/size/stride must be positive")
        self.filters = filters
        self.size = size
        self.stride = stride

    def out_shape(self, in_shape):
        if len(in_shape) != 3:
            raise ShapeError(f"Conv2D expects (H, W, C) input, got {in_shape}")
        h, w, _ = in_shape
        if h < self.size or w < self.size:
            raise ShapeError(f"Conv2D {self.size}x{self.size} does not fit input {in_shape}")
        oh = (h - self.size) // self.stride + 1
        ow = (w - self.size) // self.stride + 1
        return (oh, ow, self.filters)

    def init_params(self, in_shape, rng, dtype=np.float32):
        _, _, c = in_shape
        k = self.size
        fan_in = k * k * c
        fan_out = k * k * self.filters
        return {
            "w": _glorot_uniform((k, k, c, self.filters), fan_in, fan_out, rng, dtype),
            "b": np.zeros(self.filters, dtype=dtype),
        }

    def forward(self, x, params):
        k, s = self.size, self.stride
        cols = _window_view(x, k, k, s)
        n, oh, ow = cols.shape[:3]
        cols = cols.reshape(n, oh, ow, -1)
        w = params["w"].reshape(-1, self.filters)
        y = cols @ w + params["b"]
        return y, (x.shape, cols)

    def backward(self, gy, cache, params):
        x_shape, cols = cache
        k, s = self.size, self.stride
        n, oh, ow, _ = gy.shape
        flat_g = gy.reshape(-1, self.filters)
        flat_c = cols.reshape(-1, cols.shape[-1])
        gw = (flat_c.T @ flat_g).reshape(params["w"].shape)
        gb = flat_g.sum(axis=0)
        gcols = (flat_g @ params["w"].reshape(-1, self.filters).T).reshape(
            n, oh, ow, k, k, x_shape[3]
        )
        gx = np.zeros(x_shape, dtype=gy.dtype)
        for i in range(k):
            for j in range(k):
                gx[:, i : i + oh * s : s, j : j + ow * s : s, :] += gcols[:, :, :, i, j, :]
        return gx, {"w": gw, "b": gb}

    def __repr__(self):
        return f"Conv2D(filters={self.filters}, size={self.size}, stride={self.stride})"


class MaxPool2D(Layer):
    kind = "maxpool2d"

    def __init__(self, size, stride):
        self.size = size
        self.stride = stride

    def out_shape(self, in_shape):
        if len(in_shape) != 3:
            raise ShapeError(f"MaxPool2D expects (H, W, C) input, got {in_shape}")
        h, w, c = in_shape
        if h < self.size or w < self.size:
            raise ShapeError(f"MaxPool2D {self.size}x{self.size} does not fit input {in_shape}")
        oh = (h - self.size) // self.stride + 1
        ow = (w - self.size) // self.stride + 1
        return (oh, ow, c)

    def forward(self, x, params):
        k, s = self.size, self.stride
        wins = _window_view(x, k, k, s)
        n, oh, ow = wins.shape[:3]
        c = wins.shape[-1]
        flat = wins.reshape(n, oh, ow, k * k, c)
        idx = flat.argmax(axis=3)
        y = np.take_along_axis(flat, idx[:, :, :, None, :], axis=3)[:, :, :, 0, :]
        return y, (x.shape, idx)

    def backward(self, gy, cache, params):
        x_shape, idx = cache
        k, s = self.size, self.stride
        n, oh, ow, c = gy.shape
        gx = np.zeros(x_shape, dtype=gy.dtype)
        for p in range(k * k):
            i, j = divmod(p, k)
            mask = idx == p
            sub = gx[:, i : i + oh * s : s, j : j + ow * s : s, :]
            sub += np.where(mask, gy, 0.0)
        return gx, {}

    def __repr__(self):
        return f"MaxPool2D(size={self.size}, stride={self.stride})"


class Dense(Layer):
    kind = "dense"

    def __init__(self, units):
        if units < 1:
            raise ValueError("Dense units must be positive")
        self.units = units

    def out_shape(self, in_shape):
        if len(in_shape) != 1:
            raise ShapeError(f"Dense expects flat input, got {in_shape}")
        return (self.units,)

    def init_params(self, in_shape, rng, dtype=np.float32):
        (d,) = in_shape
        return {
            "w": _glorot_uniform((d, self.units), d, self.units, rng, dtype),
            "b": np.zeros(self.units, dtype=dtype),
        }

    def forward(self, x, params):
        return x @ params["w"] + params["b"], x

    def backward(self, gy, cache, params):
        x = cache
        return gy @ params["w"].T, {"w": x.T @ gy, "b": gy.sum(axis=0)}

    def __repr__(self):
        return f"Dense(units={self.units})"


class ReLU(Layer):
    kind = "relu"

    def out_shape(self, in_shape):
        return tuple(in_shape)

    def forward(self, x, params):
        return np.maximum(x, 0.0), x

    def backward(self, gy, cache, params):
        return np.where(cache > 0, gy, 0.0), {}


class Logistic(Layer):
    kind = "logistic"

    def out_shape(self, in_shape):
        return tuple(in_shape)

    def forward(self, x, params):
        y = np.empty_like(x)
        pos = x >= 0
        y[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        y[~pos] = ex / (1.0 + ex)
        np.clip(y, _SIGMOID_EPS, 1.0 - _SIGMOID_EPS, out=y)
        return y, y

    def backward(self, gy, cache, params):
        y = cache
        return gy * y * (1.0 - y), {}


class Flatten(Layer):
    kind = "flatten"

    def out_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def forward(self, x, params):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, gy, cache, params):
        return gy.reshape(cache), {}


class Softmax(Layer):
    kind = "softmax"

    def out_shape(self, in_shape):
        if len(in_shape) != 1:
            raise ShapeError(f"Softmax expects flat input, got {in_shape}")
        return tuple(in_shape)

    def forward(self, x, params):
        z = x - x.max(axis=-1, keepdims=True)
        e = np.exp(z)
        y = e / e.sum(axis=-1, keepdims=True)
        return y, y

    def backward(self, gy, cache, params):
        y = cache
        dot = (gy * y).sum(axis=-1, keepdims=True)
        return y * (gy - dot), {}


# Tags used by the weight file format; values are stable on-disk identifiers.
KIND_TAGS = {
    "conv2d": 1,
    "maxpool2d": 2,
    "dense": 3,
    "relu": 4,
    "logistic": 5,
    "flatten": 6,
    "softmax": 7,
}
