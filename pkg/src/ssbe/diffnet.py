"""Dense MLPs with exact propagation of value, input gradient and masked Laplacian.

The forward pass carries, for every hidden unit, the triple

    (h, dh/dx, sum_{k in mask} d^2 h / dx_k^2)

through the network, so one pass produces everything a second-order PDE
residual needs.  ``JetTape`` keeps the intermediate arrays and runs the
reverse sweep that turns adjoint seeds on the output jet into gradients with
respect to every weight and bias.

All routines are batched: ``x`` may be a single point of shape ``(d,)`` or a
stack of points of shape ``(n, d)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np


class InvalidArchitecture(ValueError):
    pass


class Activation(str, Enum):
    TANH = "tanh"
    RELU3_SIXTH = "relu3_sixth"


def activation_derivs(kind: Activation, z: np.ndarray, order: int = 3):
    """Return ``(s, s', s'', s''')`` of the activation evaluated at ``z``.

    Only the first ``order + 1`` entries are computed; the rest are None.
    """
    kind = Activation(kind)
    out = [None] * 4
    if kind is Activation.TANH:
        t = np.tanh(z)
        out[0] = t
        if order >= 1:
            s1 = 1.0 - t * t
            out[1] = s1
        if order >= 2:
            out[2] = -2.0 * t * s1
        if order >= 3:
            out[3] = s1 * (6.0 * t * t - 2.0)
    else:
        zp = np.maximum(z, 0.0)
        out[0] = zp ** 3 / 6.0
        if order >= 1:
            out[1] = 0.5 * zp * zp
        if order >= 2:
            out[2] = zp
        if order >= 3:
            out[3] = (z > 0).astype(z.dtype)
    return tuple(out)


def _third_from_cached(kind: Activation, s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
    # tanh: s3 = s1 (6 t^2 - 2) with t^2 = 1 - s1;  relu^3/6: s3 = 1[z > 0] = 1[s2 > 0]
    if kind is Activation.TANH:
        return s1 * (4.0 - 6.0 * s1)
    return (s2 > 0).astype(s2.dtype)


@dataclass(frozen=True)
class NetworkParams:
    layer_sizes: tuple[int, ...]
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    activation: Activation = Activation.TANH

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        _check_sizes(sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        object.__setattr__(self, "activation", Activation(self.activation))
        ws = tuple(np.asarray(w, dtype=float) for w in self.weights)
        bs = tuple(np.asarray(b, dtype=float) for b in self.biases)
        if len(ws) != len(sizes) - 1 or len(bs) != len(sizes) - 1:
            raise InvalidArchitecture("need one weight matrix and bias per layer")
        for ell, (w, b) in enumerate(zip(ws, bs)):
            if w.shape != (sizes[ell + 1], sizes[ell]) or b.shape != (sizes[ell + 1],):
                raise InvalidArchitecture(
                    f"layer {ell}: got W{w.shape}, b{b.shape}, "
                    f"expected W{(sizes[ell + 1], sizes[ell])}, b{(sizes[ell + 1],)}"
                )
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_params(self) -> int:
        return param_count(self.layer_sizes)

    def flatten(self) -> np.ndarray:
        """Layers in order, each layer's weights row-major then its biases."""
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b)
        return np.concatenate(parts)

    def with_flat(self, flat: np.ndarray) -> "NetworkParams":
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (self.n_params,):
            raise ValueError(f"flat vector has shape {flat.shape}, expected ({self.n_params},)")
        ws, bs = [], []
        pos = 0
        for fan_in, fan_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            ws.append(flat[pos:pos + fan_in * fan_out].reshape(fan_out, fan_in).copy())
            pos += fan_in * fan_out
            bs.append(flat[pos:pos + fan_out].copy())
            pos += fan_out
        return NetworkParams(self.layer_sizes, tuple(ws), tuple(bs), self.activation)


def _check_sizes(sizes: Sequence[int]) -> None:
    if len(sizes) < 2:
        raise InvalidArchitecture("layer_sizes needs at least an input and an output entry")
    if any(s <= 0 for s in sizes):
        raise InvalidArchitecture(f"layer sizes must be positive, got {list(sizes)}")
    if sizes[-1] != 1:
        raise InvalidArchitecture("the output layer must have exactly one unit")


def param_count(layer_sizes: Sequence[int]) -> int:
    return int(sum(a * b + b for a, b in zip(layer_sizes[:-1], layer_sizes[1:])))


def init_params(seed: int, layer_sizes: Sequence[int],
                activation: Activation | str = Activation.TANH) -> NetworkParams:
    """Glorot-uniform weights, zero biases, PCG64 stream seeded by ``seed``."""
    sizes = tuple(int(s) for s in layer_sizes)
    _check_sizes(sizes)
    rng = np.random.default_rng(seed)
    ws, bs = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        ws.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        bs.append(np.zeros(fan_out))
    return NetworkParams(sizes, tuple(ws), tuple(bs), Activation(activation))


@dataclass
class Jet:
    """Value, input gradient and masked Laplacian; batched or single-point."""
    value: np.ndarray | float
    gradient: np.ndarray
    laplacian: np.ndarray | float


@dataclass
class JetAdjoint:
    value_bar: np.ndarray | float
    gradient_bar: np.ndarray
    laplacian_bar: np.ndarray | float


def _as_batch(params: NetworkParams, x, lap_mask):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.ndim != 2 or X.shape[1] != params.input_dim:
        raise ValueError(f"input has shape {x.shape}, network expects dimension {params.input_dim}")
    mask = np.asarray(lap_mask, dtype=bool)
    if mask.shape != (params.input_dim,):
        raise ValueError(f"lap_mask has shape {mask.shape}, expected ({params.input_dim},)")
    return X, mask, single


class JetTape:
    """Forward jet pass that remembers what the reverse sweep needs.

    Internally every layer state is one array of shape ``(d + 2, n, width)``:
    slot 0 holds values, slots ``1..d`` the input-gradient components and
    slot ``d + 1`` the masked Laplacian.  An affine layer then acts on the
    whole stack with a single matrix product.
    """

    def __init__(self, params: NetworkParams, x, lap_mask):
        X, mask, single = _as_batch(params, x, lap_mask)
        self.params = params
        self.single = single
        self.mask = mask
        self._mask_slots = 1 + np.flatnonzero(mask)
        n, d = X.shape
        self._cache = []

        S = np.zeros((d + 2, n, d))
        S[0] = X
        S[1:d + 1] = np.eye(d)[:, None, :]
        n_layers = len(params.weights)
        for ell, (W, b) in enumerate(zip(params.weights, params.biases)):
            Z = S @ W.T
            Z[0] += b
            if ell == n_layers - 1:
                self._cache.append((S, None))
                S = Z
                break
            z = Z[0]
            s0, s1, s2, _ = activation_derivs(params.activation, z, order=2)
            Gm = Z[self._mask_slots]
            Sq = np.einsum("kno,kno->no", Gm, Gm)
            self._cache.append((S, (Z, s1, s2, Sq)))
            S = np.multiply(s1, Z)
            S[0] = s0
            S[d + 1] += s2 * Sq

        value, gradient, lap = S[0, :, 0], S[1:d + 1, :, 0].T, S[d + 1, :, 0]
        if single:
            self.jet = Jet(float(value[0]), gradient[0].copy(), float(lap[0]))
        else:
            self.jet = Jet(value, gradient, lap)

    def pullback(self, adjoint: JetAdjoint) -> np.ndarray:
        """Gradient (flat, aligned with ``flatten``) of the adjoint-weighted jet.

        Sums over the batch, i.e. returns d/dtheta sum_i (vbar_i u_i
        + gbar_i . grad u_i + lbar_i lap u_i).
        """
        params = self.params
        n = self._cache[0][0].shape[1]
        d = params.input_dim
        vbar = np.asarray(adjoint.value_bar, dtype=float)
        gbar = np.asarray(adjoint.gradient_bar, dtype=float)
        lbar = np.asarray(adjoint.laplacian_bar, dtype=float)
        if self.single:
            vbar, lbar, gbar = vbar.reshape(1), lbar.reshape(1), gbar.reshape(1, -1)
        if vbar.shape != (n,) or lbar.shape != (n,) or gbar.shape != (n, d):
            raise ValueError("adjoint dimensions do not match the recorded jet")

        Zbar = np.empty((d + 2, n, 1))
        Zbar[0, :, 0] = vbar
        Zbar[1:d + 1, :, 0] = gbar.T
        Zbar[d + 1, :, 0] = lbar
        slots = self._mask_slots
        grads_w, grads_b = [], []
        for ell in range(len(params.weights) - 1, -1, -1):
            W = params.weights[ell]
            S, _ = self._cache[ell]
            k = S.shape[2]
            grads_w.append(Zbar.reshape(-1, W.shape[0]).T @ S.reshape(-1, k))
            grads_b.append(Zbar[0].sum(axis=0))
            if ell == 0:
                break
            Sbar = Zbar @ W
            Z, s1, s2, Sq = self._cache[ell - 1][1]
            s3 = _third_from_cached(params.activation, s1, s2)
            Lbar = Sbar[d + 1]
            Zbar = np.multiply(s1, Sbar)
            Zbar[0] += (np.einsum("kno,kno->no", Sbar[1:d + 1], Z[1:d + 1]) * s2
                        + Lbar * (s2 * Z[d + 1] + s3 * Sq))
            if len(slots):
                Zbar[slots] += (2.0 * Lbar * s2) * Z[slots]

        parts = []
        for gw, gb in zip(reversed(grads_w), reversed(grads_b)):
            parts.append(gw.ravel())
            parts.append(gb)
        return np.concatenate(parts)


def forward_jet(params: NetworkParams, x, lap_mask) -> Jet:
    return JetTape(params, x, lap_mask).jet


def forward_value(params: NetworkParams, x) -> np.ndarray:
    """Plain network output without derivative bookkeeping."""
    x = np.asarray(x, dtype=float)
    a = x[None, :] if x.ndim == 1 else x
    n_layers = len(params.weights)
    for ell, (W, b) in enumerate(zip(params.weights, params.biases)):
        a = a @ W.T + b
        if ell < n_layers - 1:
            a = activation_derivs(params.activation, a, order=0)[0]
    return a[0, 0] if x.ndim == 1 else a[:, 0]


def pullback(params: NetworkParams, x, lap_mask, adjoint: JetAdjoint) -> np.ndarray:
    return JetTape(params, x, lap_mask).pullback(adjoint)
