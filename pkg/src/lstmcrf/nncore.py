"""Small dense numeric kernel shared by the encoder, the CRF and training.

Everything is float64 numpy arrays. Matrices are plain ``ndarray`` values;
:class:`Param` pairs a value with its gradient buffer so the optimizer can
walk a flat list of them.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .exceptions import ConfigError, DimensionError, TrainingError

DTYPE = np.float64


def make_rng(seed):
    """Seeded PCG64 generator; streams are identical across platforms."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(eq=False)
class Param:
    name: str
    value: np.ndarray
    grad: np.ndarray = field(default=None)

    def __post_init__(self):
        self.value = np.asarray(self.value, dtype=DTYPE)
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        elif self.grad.shape != self.value.shape:
            raise DimensionError(
                f"{self.name}: grad shape {self.grad.shape} != value shape {self.value.shape}")

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self):
        self.grad.fill(0.0)


INIT_SCHEMES = ("glorot", "unit")


def uniform_init(rng, shape, scheme="unit", fan=None):
    """Uniform weights inside [-1, 1].

    ``"unit"`` draws from U[-1, 1]. ``"glorot"`` narrows the interval to
    ``sqrt(6 / (fan_in + fan_out))`` (never wider than 1); ``fan`` defaults to
    ``(shape[1], shape[0])``.
    """
    if scheme == "unit":
        limit = 1.0
    elif scheme == "glorot":
        fan_in, fan_out = fan if fan is not None else (shape[1], shape[0])
        limit = min(1.0, math.sqrt(6.0 / (fan_in + fan_out)))
    else:
        raise ConfigError(f"unknown init scheme {scheme!r}; expected one of {INIT_SCHEMES}")
    return rng.uniform(-limit, limit, size=shape)


def affine(W, x, b):
    """``W @ x + b`` with shape checking."""
    W = np.asarray(W, dtype=DTYPE)
    x = np.asarray(x, dtype=DTYPE)
    b = np.asarray(b, dtype=DTYPE)
    if W.ndim != 2 or x.ndim != 1 or b.ndim != 1:
        raise DimensionError("affine expects a matrix, a vector and a bias vector")
    if W.shape[1] != x.shape[0] or W.shape[0] != b.shape[0]:
        raise DimensionError(
            f"affine: W is {W.shape}, x has {x.shape[0]}, b has {b.shape[0]}")
    return W @ x + b


def sigmoid(x):
    return expit(np.asarray(x, dtype=DTYPE))


def softmax(z, axis=-1):
    z = np.asarray(z, dtype=DTYPE)
    shifted = z - np.max(z, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def logsumexp(a, axis=None):
    """Stable ``log(sum(exp(a)))``.

    Inputs are expected to be finite; forbidden entries use a large negative
    sentinel rather than ``-inf`` so no NaN can appear.
    """
    a = np.asarray(a, dtype=DTYPE)
    m = np.max(a, axis=axis, keepdims=True)
    out = m + np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True))
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def dropout_mask(length, rate, rng):
    """Inverted-dropout mask: zeros with probability ``rate``, else 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0.0:
        return np.ones(length, dtype=DTYPE)
    keep = rng.random(length) >= rate
    return keep.astype(DTYPE) / (1.0 - rate)


def global_grad_norm(params):
    return math.sqrt(sum(float(np.sum(p.grad * p.grad)) for p in params))


def clip_grad_norm(params, max_norm):
    """Rescale all gradients in place so their joint L2 norm is at most ``max_norm``.

    Returns the norm before clipping. ``max_norm`` of None or <= 0 disables it.
    """
    norm = global_grad_norm(params)
    if max_norm and max_norm > 0 and norm > max_norm:
        scale = max_norm / (norm + 1e-12)
        for p in params:
            p.grad *= scale
    return norm


def sgd_step(params, lr):
    """Plain SGD update ``value -= lr * grad`` followed by zeroing the grads."""
    for p in params:
        if not np.all(np.isfinite(p.grad)):
            raise TrainingError(f"non-finite gradient in parameter {p.name!r}")
    for p in params:
        p.value -= lr * p.grad
        p.grad.fill(0.0)
    return params


def finite_diff_check(loss_fn, params, epsilon=1e-5, samples=20, rng=None):
    """Compare analytic gradients against central differences.

    ``loss_fn()`` must return the scalar loss and accumulate its analytic
    gradient into each ``Param.grad``; it has to be deterministic. Up to
    ``samples`` coordinates per parameter are checked (all of them if the
    parameter is smaller). Returns ``(max_error, per_param)`` where
    ``per_param`` maps parameter names to their worst relative error
    ``|a - n| / max(|a|, |n|, 1e-8)``.
    """
    rng = rng if rng is not None else make_rng(0)
    for p in params:
        p.zero_grad()
    loss_fn()
    analytic = {id(p): p.grad.copy() for p in params}
    for p in params:
        p.zero_grad()

    per_param = {}
    for p in params:
        flat = p.value.reshape(-1)
        n = flat.size
        if n == 0:
            continue
        idx = np.arange(n) if n <= samples else rng.choice(n, size=samples, replace=False)
        worst = 0.0
        a_flat = analytic[id(p)].reshape(-1)
        for i in idx:
            orig = flat[i]
            flat[i] = orig + epsilon
            up = loss_fn()
            flat[i] = orig - epsilon
            down = loss_fn()
            flat[i] = orig
            for q in params:
                q.zero_grad()
            num = (up - down) / (2.0 * epsilon)
            a = a_flat[i]
            err = abs(a - num) / max(abs(a), abs(num), 1e-8)
            worst = max(worst, err)
        per_param[p.name] = worst
    return max(per_param.values(), default=0.0), per_param
