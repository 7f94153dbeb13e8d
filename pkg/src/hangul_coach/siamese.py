"""Twin convolutional similarity network over fixed-shape MFCC inputs.

Both twins share one set of parameters. Each 200x13 MFCC matrix is read
as a single-channel 13x200 image and embedded by conv(3x7) -> ReLU ->
2x2 max-pool -> conv(3x5) -> ReLU -> 2x2 max-pool -> fully connected ->
sigmoid, giving 64 values in (0,1). The head applies a learned weighted
L1 distance between the two embeddings and a sigmoid, so the score is a
probability in (0,1); training minimizes binary cross-entropy with Adam.

Forward, backward, and the optimizer are written out explicitly (no ML
framework) so gradients can be finite-difference checked.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import HangulCoachError
from .mfcc import MfccMatrix

INPUT_FRAMES = 200
INPUT_COEFFS = 13
EMBED_DIM = 64

_SHAPES = {
    "conv1_w": (8, 1, 3, 7),
    "conv1_b": (8,),
    "conv2_w": (16, 8, 3, 5),
    "conv2_b": (16,),
    "fc_w": (736, 64),
    "fc_b": (64,),
    "alpha": (64,),
    "b": (),
}
_TENSOR_ORDER = tuple(_SHAPES)

_MAGIC = b"KSNM"
_VERSION = 1


class ShapeMismatch(HangulCoachError):
    pass


class NonFiniteLoss(HangulCoachError):
    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class BadMagic(HangulCoachError):
    pass


class UnsupportedVersion(HangulCoachError):
    pass


class TruncatedFile(HangulCoachError):
    pass


class MalformedModel(HangulCoachError):
    """Structurally valid header but impossible tensor shapes or trailing bytes."""


class SiameseModel:
    """Parameter container. One storage per tensor; both twins read it."""

    def __init__(self, tensors: dict[str, np.ndarray]):
        for name, shape in _SHAPES.items():
            t = np.asarray(tensors[name], dtype=np.float64)
            if t.shape != shape:
                raise ShapeMismatch(f"{name} has shape {t.shape}, expected {shape}")
            if not np.all(np.isfinite(t)):
                raise ValueError(f"{name} contains non-finite values")
            setattr(self, name, t)
        self._adam_m = None
        self._adam_v = None
        self._adam_t = 0

    def named_tensors(self):
        return [(name, getattr(self, name)) for name in _TENSOR_ORDER]


def init_model(seed: int) -> SiameseModel:
    """Xavier-uniform conv/FC weights, zero biases, unit head weights."""
    rng = np.random.default_rng(seed)

    def xavier(shape, fan_in, fan_out):
        r = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-r, r, size=shape)

    return SiameseModel(
        {
            "conv1_w": xavier((8, 1, 3, 7), 1 * 3 * 7, 8 * 3 * 7),
            "conv1_b": np.zeros(8),
            "conv2_w": xavier((16, 8, 3, 5), 8 * 3 * 5, 16 * 3 * 5),
            "conv2_b": np.zeros(16),
            "fc_w": xavier((736, 64), 736, 64),
            "fc_b": np.zeros(64),
            "alpha": np.ones(64),
            "b": np.zeros(()),
        }
    )


def _sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    pos = z >= 0
    ez = np.exp(np.where(pos, -z, z))  # exponent always <= 0: no overflow
    return np.where(pos, 1.0 / (1.0 + ez), ez / (1.0 + ez))


def _conv_forward(x, w, b):
    n, _, h, ww = x.shape
    cout, _, kh, kw = w.shape
    ho, wo = h - kh + 1, ww - kw + 1
    cols = sliding_window_view(x, (kh, kw), axis=(2, 3))
    cols = cols.transpose(0, 2, 3, 1, 4, 5).reshape(n * ho * wo, -1)
    out = cols @ w.reshape(cout, -1).T + b
    return out.reshape(n, ho, wo, cout).transpose(0, 3, 1, 2), cols


def _conv_backward(dout, cols, x_shape, w):
    n, cin, h, ww = x_shape
    cout, _, kh, kw = w.shape
    ho, wo = h - kh + 1, ww - kw + 1
    dmat = dout.transpose(0, 2, 3, 1).reshape(n * ho * wo, cout)
    dw = (dmat.T @ cols).reshape(w.shape)
    db = dmat.sum(axis=0)
    dcols = (dmat @ w.reshape(cout, -1)).reshape(n, ho, wo, cin, kh, kw)
    dx = np.zeros(x_shape)
    for i in range(kh):
        for j in range(kw):
            dx[:, :, i : i + ho, j : j + wo] += dcols[:, :, :, :, i, j].transpose(
                0, 3, 1, 2
            )
    return dx, dw, db


def _pool_forward(x):
    n, c, h, w = x.shape
    hp, wp = h // 2, w // 2
    blocks = x[:, :, : hp * 2, : wp * 2].reshape(n, c, hp, 2, wp, 2)
    blocks = blocks.transpose(0, 1, 2, 4, 3, 5).reshape(n, c, hp, wp, 4)
    idx = blocks.argmax(axis=-1)  # first max wins ties
    out = np.take_along_axis(blocks, idx[..., None], axis=-1)[..., 0]
    return out, idx


def _pool_backward(dout, idx, in_shape):
    n, c, h, w = in_shape
    hp, wp = h // 2, w // 2
    dblocks = np.zeros((n, c, hp, wp, 4))
    np.put_along_axis(dblocks, idx[..., None], dout[..., None], axis=-1)
    dblocks = dblocks.reshape(n, c, hp, wp, 2, 2).transpose(0, 1, 2, 4, 3, 5)
    dx = np.zeros(in_shape)
    dx[:, :, : hp * 2, : wp * 2] = dblocks.reshape(n, c, hp * 2, wp * 2)
    return dx


def _embed_batch(model: SiameseModel, x: np.ndarray):
    """x: (n, 1, 13, 200) -> embeddings (n, 64) plus backward caches."""
    z1, cols1 = _conv_forward(x, model.conv1_w, model.conv1_b)
    mask1 = z1 > 0
    a1 = z1 * mask1
    p1, idx1 = _pool_forward(a1)
    z2, cols2 = _conv_forward(p1, model.conv2_w, model.conv2_b)
    mask2 = z2 > 0
    a2 = z2 * mask2
    p2, idx2 = _pool_forward(a2)
    flat = p2.reshape(x.shape[0], -1)
    e = _sigmoid(flat @ model.fc_w + model.fc_b)
    cache = {
        "x_shape": x.shape,
        "cols1": cols1,
        "mask1": mask1,
        "a1_shape": a1.shape,
        "idx1": idx1,
        "p1_shape": p1.shape,
        "cols2": cols2,
        "mask2": mask2,
        "a2_shape": a2.shape,
        "idx2": idx2,
        "flat": flat,
        "e": e,
    }
    return e, cache


def _embed_backward(model: SiameseModel, de: np.ndarray, cache) -> dict:
    e = cache["e"]
    dzf = de * e * (1.0 - e)
    grads = {
        "fc_w": cache["flat"].T @ dzf,
        "fc_b": dzf.sum(axis=0),
    }
    dflat = dzf @ model.fc_w.T
    dp2 = dflat.reshape((-1,) + _pool_out_shape(cache["a2_shape"]))
    da2 = _pool_backward(dp2, cache["idx2"], cache["a2_shape"])
    dz2 = da2 * cache["mask2"]
    dp1, grads["conv2_w"], grads["conv2_b"] = _conv_backward(
        dz2, cache["cols2"], cache["p1_shape"], model.conv2_w
    )
    da1 = _pool_backward(dp1, cache["idx1"], cache["a1_shape"])
    dz1 = da1 * cache["mask1"]
    _, grads["conv1_w"], grads["conv1_b"] = _conv_backward(
        dz1, cache["cols1"], cache["x_shape"], model.conv1_w
    )
    return grads


def _pool_out_shape(in_shape):
    _, c, h, w = in_shape
    return (c, h // 2, w // 2)


def _as_image(m: MfccMatrix) -> np.ndarray:
    v = m.values
    if v.shape != (INPUT_FRAMES, INPUT_COEFFS):
        raise ShapeMismatch(
            f"expected {INPUT_FRAMES}x{INPUT_COEFFS} MFCC input, got {v.shape}"
        )
    return v.T  # coefficients become image rows, frames become columns


def embed(model: SiameseModel, m: MfccMatrix) -> np.ndarray:
    """Embedding vector of one input, each component in (0,1)."""
    x = _as_image(m)[None, None]
    e, _ = _embed_batch(model, x)
    return e[0]


def similarity(model: SiameseModel, a: MfccMatrix, b: MfccMatrix) -> float:
    """sigma(sum_j alpha_j |e(a)_j - e(b)_j| + b), in (0,1)."""
    x = np.stack([_as_image(a), _as_image(b)])[:, None]
    e, _ = _embed_batch(model, x)
    d = np.abs(e[0] - e[1])
    return float(_sigmoid(d @ model.alpha + model.b))


def bce_loss(p: float, y: float) -> float:
    """Binary cross-entropy with the probability clamped to [1e-12, 1-1e-12]."""
    p = min(max(p, 1e-12), 1.0 - 1e-12)
    return -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))


@dataclass(frozen=True)
class PairExample:
    a: MfccMatrix
    b: MfccMatrix
    label: int  # 1 = similar, 0 = dissimilar

    def __post_init__(self):
        _as_image(self.a)
        _as_image(self.b)
        if self.label not in (0, 1):
            raise ValueError("label must be 0 or 1")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    seed: int = 0
    learning_rate: float = 1e-3
    batch_size: int = 16
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def _stack_pairs(batch):
    a = np.stack([_as_image(ex.a) for ex in batch])[:, None]
    b = np.stack([_as_image(ex.b) for ex in batch])[:, None]
    y = np.array([ex.label for ex in batch], dtype=np.float64)
    return a, b, y


def _forward_pairs(model, xa, xb):
    n = xa.shape[0]
    e, cache = _embed_batch(model, np.concatenate([xa, xb]))
    ea, eb = e[:n], e[n:]
    d = np.abs(ea - eb)
    z = d @ model.alpha + model.b
    p = _sigmoid(z)
    return p, (e, cache, ea, eb, d)


def _loss_and_grads(model, xa, xb, y):
    n = xa.shape[0]
    p, (e, cache, ea, eb, d) = _forward_pairs(model, xa, xb)
    pc = np.clip(p, 1e-12, 1.0 - 1e-12)
    loss = float(-np.mean(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)))

    dz = (p - y) / n  # gradient of mean BCE through the head sigmoid
    grads = {"alpha": d.T @ dz, "b": np.asarray(dz.sum())}
    dd = dz[:, None] * model.alpha
    dea = dd * np.sign(ea - eb)
    de = np.concatenate([dea, -dea])
    grads.update(_embed_backward(model, de, cache))
    return loss, grads


def train_step(model: SiameseModel, batch, config: TrainConfig):
    """One Adam update from the mean BCE over a batch of pairs.

    Twin gradients accumulate into the shared tensors (both twins run
    through the same backward pass). Returns (model, batch loss).
    """
    if len(batch) == 0:
        raise ValueError("batch must be non-empty")
    xa, xb, y = _stack_pairs(batch)
    loss, grads = _loss_and_grads(model, xa, xb, y)
    if not np.isfinite(loss) or any(
        not np.all(np.isfinite(g)) for g in grads.values()
    ):
        raise NonFiniteLoss(f"non-finite loss or gradient (loss={loss})")

    if model._adam_m is None:
        model._adam_m = {k: np.zeros(_SHAPES[k]) for k in _TENSOR_ORDER}
        model._adam_v = {k: np.zeros(_SHAPES[k]) for k in _TENSOR_ORDER}
    model._adam_t += 1
    t = model._adam_t
    for name in _TENSOR_ORDER:
        g = grads[name]
        m = model._adam_m[name]
        v = model._adam_v[name]
        m[...] = config.beta1 * m + (1.0 - config.beta1) * g
        v[...] = config.beta2 * v + (1.0 - config.beta2) * g * g
        m_hat = m / (1.0 - config.beta1**t)
        v_hat = v / (1.0 - config.beta2**t)
        theta = getattr(model, name)
        theta[...] = theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)
    return model, loss


def train(model: SiameseModel, dataset, config: TrainConfig):
    """Epoch loop with seeded shuffling; returns (model, per-epoch losses).

    A NonFiniteLoss raised mid-run carries the history so far on its
    .history attribute.
    """
    if len(dataset) == 0:
        raise ValueError("dataset must be non-empty")
    dataset = list(dataset)
    rng = np.random.default_rng(config.seed)
    history: list[float] = []
    for _ in range(config.epochs):
        order = rng.permutation(len(dataset))
        total = 0.0
        for start in range(0, len(dataset), config.batch_size):
            chunk = [dataset[i] for i in order[start : start + config.batch_size]]
            try:
                model, loss = train_step(model, chunk, config)
            except NonFiniteLoss as err:
                raise NonFiniteLoss(str(err), history) from None
            total += loss * len(chunk)
        history.append(total / len(dataset))
    return model, history


def gradient_check(
    model: SiameseModel,
    batch,
    n_params: int = 200,
    step: float = 1e-5,
    seed: int = 0,
):
    """Compare backprop gradients against central finite differences.

    Samples parameter coordinates at random; a sample is rejected when
    either perturbed forward pass lands on a different side of a ReLU or
    max-pool kink than the other (the loss is not differentiable there).
    Relative error uses |a - n| / max(|a|, |n|, 1e-6); the floor keeps
    the check meaningful below the finite-difference noise floor.

    Returns dict with max_rel_error, mean_rel_error, n_checked, n_rejected.
    """
    xa, xb, y = _stack_pairs(batch)
    _, grads = _loss_and_grads(model, xa, xb, y)

    def loss_and_kinks(**_ignored):
        p, (e, cache, *_rest) = _forward_pairs(model, xa, xb)
        pc = np.clip(p, 1e-12, 1.0 - 1e-12)
        loss = float(-np.mean(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)))
        kinks = (cache["mask1"].copy(), cache["idx1"].copy(),
                 cache["mask2"].copy(), cache["idx2"].copy())
        return loss, kinks

    rng = np.random.default_rng(seed)
    sizes = {name: int(np.prod(_SHAPES[name], dtype=int)) for name in _TENSOR_ORDER}
    names = list(_TENSOR_ORDER)

    def draw():
        # two guaranteed coordinates per tensor, then uniform over all
        for name in names:
            for _ in range(2):
                yield name, int(rng.integers(sizes[name]))
        flat_total = sum(sizes.values())
        bounds = np.cumsum([sizes[n] for n in names])
        while True:
            k = int(rng.integers(flat_total))
            which = int(np.searchsorted(bounds, k, side="right"))
            yield names[which], k - (int(bounds[which - 1]) if which else 0)

    coordinates = draw()
    rel_errors = []
    rejected = 0
    while len(rel_errors) < n_params:
        name, flat_idx = next(coordinates)
        tensor = getattr(model, name)
        view = tensor.reshape(-1) if tensor.ndim else tensor
        original = view[flat_idx] if tensor.ndim else float(tensor)

        def poke(value):
            if tensor.ndim:
                view[flat_idx] = value
            else:
                tensor[...] = value

        poke(original + step)
        loss_plus, kinks_plus = loss_and_kinks()
        poke(original - step)
        loss_minus, kinks_minus = loss_and_kinks()
        poke(original)

        if any(
            not np.array_equal(kp, km) for kp, km in zip(kinks_plus, kinks_minus)
        ):
            rejected += 1
            continue
        numeric = (loss_plus - loss_minus) / (2.0 * step)
        analytic = (
            grads[name].reshape(-1)[flat_idx] if tensor.ndim else float(grads[name])
        )
        rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-6)
        rel_errors.append(rel)

    return {
        "max_rel_error": float(np.max(rel_errors)),
        "mean_rel_error": float(np.mean(rel_errors)),
        "n_checked": len(rel_errors),
        "n_rejected": rejected,
    }


def save_model(model: SiameseModel, destination) -> None:
    """Write the KSNM v1 binary format (see load_model)."""
    out = bytearray(_MAGIC)
    out += struct.pack("<I", _VERSION)
    for _, tensor in model.named_tensors():
        out += struct.pack("<I", tensor.ndim)
        for dim in tensor.shape:
            out += struct.pack("<I", dim)
        out += np.ascontiguousarray(tensor, dtype="<f8").tobytes()
    with open(destination, "wb") as fh:
        fh.write(out)


def load_model(source) -> SiameseModel:
    """Read a KSNM v1 file: magic, u32 version, then each tensor as
    u32 rank, u32 dims, float64 LE values, in the fixed tensor order."""
    with open(source, "rb") as fh:
        data = fh.read()

    pos = 0

    def take(n, what):
        nonlocal pos
        if pos + n > len(data):
            raise TruncatedFile(f"file ends inside {what}")
        piece = data[pos : pos + n]
        pos += n
        return piece

    if take(4, "magic") != _MAGIC:
        raise BadMagic("not a KSNM model file")
    (version,) = struct.unpack("<I", take(4, "version"))
    if version != _VERSION:
        raise UnsupportedVersion(f"version {version}, expected {_VERSION}")

    tensors = {}
    for name in _TENSOR_ORDER:
        (rank,) = struct.unpack("<I", take(4, f"{name} rank"))
        dims = tuple(
            struct.unpack("<I", take(4, f"{name} dims"))[0] for _ in range(rank)
        )
        if dims != _SHAPES[name]:
            raise MalformedModel(f"{name} has dims {dims}, expected {_SHAPES[name]}")
        count = int(np.prod(dims, dtype=int)) if rank else 1
        raw = take(8 * count, f"{name} values")
        tensors[name] = np.frombuffer(raw, dtype="<f8").reshape(dims).copy()
    if pos != len(data):
        raise MalformedModel(f"{len(data) - pos} trailing bytes")
    return SiameseModel(tensors)
