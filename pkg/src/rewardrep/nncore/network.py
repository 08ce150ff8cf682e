"""Sequential network container: forward with activation cache, backward,
parameter bookkeeping, and the "RSNN1" binary weight format.
"""

from __future__ import annotations

import struct

import numpy as np

from rewardrep.nncore.layers import KIND_TAGS, Layer, ShapeError

MAGIC = b"RSNN1"

# Fixed per-layer record order inside a weight file.
_PARAM_ORDER = ("w", "b")


class WeightFormatError(IOError):
    """Corrupt, truncated, or mismatched weight file."""


class Network:
    """Fixed stack of layers with float32 parameters.

    Single-threaded per instance; independent instances share no state.
    """

    def __init__(self, layers, input_shape, seed=0, dtype=np.float32):
        self.layers: list[Layer] = list(layers)
        self.input_shape = tuple(input_shape)
        self.dtype = dtype
        rng = np.random.default_rng(seed)
        self.shapes = [self.input_shape]
        self.params: list[dict[str, np.ndarray]] = []
        shape = self.input_shape
        for layer in self.layers:
            self.params.append(layer.init_params(shape, rng, dtype))
            shape = layer.out_shape(shape)
            self.shapes.append(shape)
        self.output_shape = shape

    @property
    def param_count(self) -> int:
        return sum(int(p.size) for d in self.params for p in d.values())

    def param_items(self):
        """Yields (key, array) pairs like ('2.w', ndarray), in layer order."""
        for i, d in enumerate(self.params):
            for name in _PARAM_ORDER:
                if name in d:
                    yield f"{i}.{name}", d[name]

    def forward(self, x):
        y, _ = self.forward_cached(x)
        return y

    def forward_cached(self, x):
        x = np.asarray(x)
        if x.shape[1:] != self.input_shape:
            raise ShapeError(
                f"layer 0 expected input {self.input_shape}, got {x.shape[1:]}"
            )
        caches = []
        for i, layer in enumerate(self.layers):
            if x.shape[1:] != self.shapes[i]:
                raise ShapeError(
                    f"layer {i} ({layer.kind}) expected {self.shapes[i]}, got {x.shape[1:]}"
                )
            x, cache = layer.forward(x, self.params[i])
            caches.append(cache)
        return x, caches

    def backward(self, caches, gy):
        """Gradients for every parameter and for the input.

        Requires the caches from a prior forward_cached on this net.
        """
        if caches is None or len(caches) != len(self.layers):
            raise ValueError("backward requires the cache list from forward_cached")
        gy = np.asarray(gy)
        if gy.shape[1:] != self.output_shape:
            raise ShapeError(
                f"output gradient shape {gy.shape[1:]} != output {self.output_shape}"
            )
        grads = [None] * len(self.layers)
        for i in reversed(range(len(self.layers))):
            gy, g = self.layers[i].backward(gy, caches[i], self.params[i])
            grads[i] = g
        return gy, grads

    def zero_grads(self):
        return [{k: np.zeros_like(v) for k, v in d.items()} for d in self.params]

    def copy(self, dtype=None):
        """Deep copy, optionally recast (the gradient oracle runs in float64)."""
        dtype = dtype or self.dtype
        clone = Network.__new__(Network)
        clone.layers = self.layers
        clone.input_shape = self.input_shape
        clone.shapes = self.shapes
        clone.output_shape = self.output_shape
        clone.dtype = dtype
        clone.params = [
            {k: v.astype(dtype) for k, v in d.items()} for d in self.params
        ]
        return clone

    def set_params_from(self, other):
        for d, s in zip(self.params, other.params):
            for k in d:
                d[k] = s[k].astype(self.dtype)


def save_weights(net: Network, path):
    """Write the network parameters in the RSNN1 format (bit-exact round trip)."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        for i, layer in enumerate(net.layers):
            tag = KIND_TAGS[layer.kind]
            for name in _PARAM_ORDER:
                if name not in net.params[i]:
                    continue
                arr = np.ascontiguousarray(net.params[i][name], dtype=np.float32)
                fh.write(struct.pack("<IB", i, tag))
                fh.write(struct.pack("<I", arr.ndim))
                fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
                fh.write(arr.astype("<f4").tobytes())


def load_weights(net: Network, path):
    """Load RSNN1 weights into a structurally matching network."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(MAGIC):
        raise WeightFormatError(f"{path}: bad magic, expected RSNN1")
    off = len(MAGIC)
    records = []
    while off < len(data):
        try:
            idx, tag = struct.unpack_from("<IB", data, off)
            off += 5
            (rank,) = struct.unpack_from("<I", data, off)
            off += 4
            dims = struct.unpack_from(f"<{rank}I", data, off)
            off += 4 * rank
            count = int(np.prod(dims))
            payload = data[off : off + 4 * count]
            if len(payload) != 4 * count:
                raise struct.error("short payload")
            off += 4 * count
        except struct.error as exc:
            raise WeightFormatError(f"{path}: truncated weight file") from exc
        records.append((idx, tag, np.frombuffer(payload, dtype="<f4").reshape(dims)))

    by_layer: dict[int, list] = {}
    for idx, tag, arr in records:
        by_layer.setdefault(idx, []).append((tag, arr))
    for i, layer in enumerate(net.layers):
        expected = [n for n in _PARAM_ORDER if n in net.params[i]]
        got = by_layer.pop(i, [])
        if len(got) != len(expected):
            raise WeightFormatError(
                f"{path}: layer {i} has {len(got)} records, expected {len(expected)}"
            )
        for name, (tag, arr) in zip(expected, got):
            if tag != KIND_TAGS[layer.kind]:
                raise WeightFormatError(
                    f"{path}: layer {i} kind tag {tag} != {KIND_TAGS[layer.kind]}"
                )
            if arr.shape != net.params[i][name].shape:
                raise WeightFormatError(
                    f"{path}: layer {i}.{name} shape {arr.shape} != "
                    f"{net.params[i][name].shape}"
                )
            net.params[i][name] = arr.astype(net.dtype)
    if by_layer:
        raise WeightFormatError(f"{path}: extra records for layers {sorted(by_layer)}")
